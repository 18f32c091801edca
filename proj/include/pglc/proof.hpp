// Proof checking for Guarded HOL and its unary / relational refinements.
//
// The kernel is LCF-style: a proof is a tree of rule applications, and the
// only way a judgment becomes "proved" is by passing check_proof, which
// re-derives every premise from the rule schemas.  Checking is
// conclusion-driven: each rule inspects the literal conclusion judgment,
// consumes the instantiation values supplied by the script, emits the premise
// judgments its schema dictates, and recurses.  Terms and formulas are
// compared up to alpha-equality after equational normalization, so proofs may
// freely write any definitionally equal spelling of a side condition.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <pglc/ast.hpp>

namespace pglc {

// ---------------------------------------------------------------------------
// Judgments
// ---------------------------------------------------------------------------

enum class JKind : uint8_t {
  Ghol,  // [D] [S] [G] [P] |- phi
  Uhol,  // ... |- t : A | phi         (distinguished variable r)
  Rhol,  // ... |- t : A ~ u : B | phi (distinguished variables r1, r2)
};

// Dual-context sequent.  delta/sigma are the constant zone (variables that
// survive box introduction and the formulas about them), gamma/psi the
// ordinary zone.
struct Judgment {
  JKind k = JKind::Ghol;
  std::vector<std::pair<std::string, TypePtr>> delta;
  std::vector<FormulaPtr> sigma;
  std::vector<std::pair<std::string, TypePtr>> gamma;
  std::vector<FormulaPtr> psi;
  TermPtr t1;  // Uhol/Rhol subject(s)
  TypePtr a1;
  TermPtr t2;  // Rhol only
  TypePtr a2;
  FormulaPtr phi;
  Span sp;
};

// Names reserved for the conclusion variables of Uhol/Rhol judgments.
inline constexpr const char* kRetU = "r";
inline constexpr const char* kRet1 = "r1";
inline constexpr const char* kRet2 = "r2";

std::string pp_judgment(const Judgment& j);

// Structural well-formedness: distinct context names, no use of the reserved
// result names, sigma well-typed with the ordinary zone cleared, subjects
// checked against their stated types, phi well-typed with the result
// variables adjoined.  Throws ProofError.
void validate_judgment(const Judgment& j, const Program& prog);

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

enum class RuleId : uint16_t {
  // Guarded HOL: structural and connective rules.
  AX_U,       // phi drawn from psi
  AX_G,       // phi drawn from sigma
  CONV,       // conversion along a definitional equality
  SUBST,      // replace t by u given ... |- t = u
  LOEB,       // guarded recursion on the proof level
  TOP_I,
  BOT_E,
  AND_I,
  AND_E1,
  AND_E2,
  OR_I1,
  OR_I2,
  OR_E,
  IMP_I,
  IMP_E,
  NOT_I,
  NOT_E,
  FORALL_I,
  FORALL_E,
  EXISTS_I,
  EXISTS_E,
  // Guarded HOL: modal rules.
  LATER_I,    // introduce |> with a delayed substitution
  LATER_E,    // eliminate |> into prev's under empty ordinary contexts
  LATER_APP,  // modus ponens under |>
  BOX_I,
  BOX_E,
  // Guarded HOL: probabilistic rules, relational (two distributions).
  MONO2,
  UNIT2,
  MLET2,
  MLET_L_GHOL,
  // Guarded HOL: probabilistic rules, unary.
  MONO1,
  UNIT1,
  MLET1,
  SUPP,  // unary diamond from a probability-one premise
  // Artifact rule: instantiate a named axiom from the program.
  AXIOM,
  // Unary HOL over guarded terms.
  U_ABS,
  U_APP,
  U_VAR,
  U_SUB,
  U_EQUIV,
  U_NEXT,
  U_PREV,
  U_BOX,
  U_LETBOX,
  U_LETCONST,
  U_FIX,
  U_CONS,
  U_CONSHAT,
  U_HEAD,
  U_TAIL,
  U_UNIT,
  U_MLET,
  // Relational HOL: core.
  ABS,
  APP,
  VAR,
  SUB,
  EQUIV,
  UHOL_L,
  UHOL_R,
  EMBED,  // merge two unary proofs into a relational one
  ABS_L,
  ABS_R,
  APP_L,
  APP_R,
  VAR_L,
  VAR_R,
  // Relational HOL: synchronous guarded rules.
  NEXT,
  PREV,
  BOX,
  LETBOX,
  LETCONST,
  FIX,
  CONS,
  HEAD,
  TAIL,
  // Relational HOL: asynchronous (left / right) guarded rules.
  NEXT_L,
  NEXT_R,
  PREV_L,
  PREV_R,
  BOX_L,
  BOX_R,
  LETBOX_L,
  LETBOX_R,
  LETCONST_L,
  LETCONST_R,
  FIX_L,
  FIX_R,
  CONS_L,
  CONS_R,
  HEAD_L,
  HEAD_R,
  TAIL_L,
  TAIL_R,
  // Relational HOL: probabilistic rules.
  UNIT_P,
  MLET_P,
  MLET_P_L,
  MLET_P_R,
  COUPLING,
  MARKOV,
  MARKOV_M_N,  // asynchronous variant; only (m, n) = (2, 1) is implemented
};

const char* rule_name(RuleId id);
std::optional<RuleId> rule_by_name(const std::string& name);

// Kinds of instantiation values a rule can consume.
enum class IKind : uint8_t { Term, Type, Formula, Name, Int, Pred };

struct InstVal {
  IKind k = IKind::Term;
  TermPtr t;
  TypePtr ty;
  FormulaPtr f;
  std::string s;
  long long i = 0;
  std::vector<std::string> pred_params;  // IKind::Pred: pred x y. body
  FormulaPtr pred_body;
};

using Inst = std::map<std::string, InstVal>;

// Which keys a rule accepts, and how each one's value is parsed.
struct RuleSig {
  RuleId id;
  std::map<std::string, IKind> keys;      // accepted instantiation keys
  bool open_keys = false;                 // AXIOM: extra keys name axiom parameters
};
const RuleSig& rule_sig(RuleId id);

// Number of premises the rule generates, or -1 when it depends on the
// conclusion shape (delayed-substitution width).
int rule_arity(RuleId id);

// ---------------------------------------------------------------------------
// Proof trees
// ---------------------------------------------------------------------------

struct ProofNode;
using ProofNodePtr = std::shared_ptr<ProofNode>;

struct ProofNode {
  enum class K : uint8_t {
    Rule,      // apply a rule schema; children prove the premises
    Assume,    // discharge the pending premise as an explicit assumption
    Semantic,  // check the premise semantically at stages 0..depth
    Strassen,  // witness a coupling premise by direct flow (COUPLING only)
  };
  K k = K::Rule;
  RuleId rule = RuleId::AX_U;
  Inst inst;
  std::vector<ProofNodePtr> children;
  int depth = 4;  // Semantic/Strassen stage bound
  std::vector<std::pair<std::string, QBounds>> bounds;
  Span sp;
};

struct Theorem {
  std::string name;
  Judgment goal;
  ProofNodePtr root;
  Span sp;
};

struct ProofScript {
  std::shared_ptr<Program> prog;
  std::string program_path;  // empty when the program was supplied directly
  std::vector<Theorem> thms;
};

class ProofError : public std::runtime_error {
 public:
  ProofError(const std::string& msg, Span sp) : std::runtime_error(msg), sp(sp) {}
  Span sp;
};

// Parses a proof script.  `loader` maps the path in the leading
//   program "<path>"
// item to a parsed, elaborated, typechecked program.
using ProgLoader = std::function<std::shared_ptr<Program>(const std::string&)>;
ProofScript parse_proof_script(const std::string& src, const ProgLoader& loader);

// Same, but the program is supplied directly and the script must not carry a
// program item.  Used by tests.
ProofScript parse_proof_script_text(const std::string& src, std::shared_ptr<Program> prog);

// ---------------------------------------------------------------------------
// Checking
// ---------------------------------------------------------------------------

struct NodeReport {
  std::string rule;      // rule name or leaf kind
  std::string judgment;  // pretty-printed conclusion the node established
  int depth = 0;         // nesting depth in the proof tree
  double ms = 0.0;
  std::string note;      // leaf statistics, e.g. couplings found
};

struct CheckReport {
  bool accepted = false;
  std::vector<NodeReport> nodes;
  std::vector<std::string> assumptions;  // judgments discharged by `assume`
  bool bounded = false;  // some semantic leaf hit the finite-domain cutoff
  std::string error;     // first failure, empty when accepted
  Span error_sp;
  // Accepted with no assume leaves.  Semantic stage bounds are reported
  // separately through `bounded` and do not block this.
  bool fully_discharged() const { return accepted && assumptions.empty(); }
};

struct CheckOptions {
  long long fuel = 1000000;  // evaluator fuel for semantic leaves
};

// Verifies bottom-up that `root` proves `goal` over `prog`.  Never throws for
// ordinary proof failures; the report carries the error.
CheckReport check_proof(const ProofNodePtr& root, const Judgment& goal, Program& prog,
                        const CheckOptions& opts = {});

// The two-unary-to-relational embedding: from judgments
//   ... |- t1 : A | phi    and   ... |- t2 : B | phi'
// builds  ... |- t1 : A ~ t2 : B | phi[r1/r] /\ phi'[r2/r].  Both inputs must
// share their contexts.  The returned derivation is an EMBED node whose two
// children are the supplied unary proofs; checking it replays them.
struct EmbedResult {
  Judgment j;
  ProofNodePtr root;
};
EmbedResult embed_uhol(const Judgment& u1, const ProofNodePtr& p1, const Judgment& u2,
                       const ProofNodePtr& p2);

// Semantic counterexample search for a closed judgment: evaluates the
// conclusion formula (with subjects substituted for the result variables) at
// stages 0..depth.  Returns false iff some stage refutes it.
bool soundness_probe(const Judgment& j, int depth, Program& prog,
                     const std::vector<std::pair<std::string, QBounds>>& bounds = {},
                     long long fuel = 1000000);

}  // namespace pglc
