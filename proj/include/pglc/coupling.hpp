#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pglc/value.hpp"

namespace pglc {

struct CouplingError : std::runtime_error {
  explicit CouplingError(const std::string& m) : std::runtime_error(m) {}
};

// Binary relation over values, given as a decidable predicate.
struct RelationSpec {
  std::function<bool(const ValuePtr&, const ValuePtr&)> holds;
  std::string name;
};

RelationSpec rel_eq();
RelationSpec rel_leq();  // numeric order on Nat/Int/Rat values
RelationSpec rel_geq();
RelationSpec rel_full();
RelationSpec rel_from_pairs(std::vector<std::pair<ValuePtr, ValuePtr>> pairs);

// A coupling witness: joint distribution over pairs, kept with the marginals
// it was checked against.
struct CouplingWitness {
  FiniteDist joint;  // support of Pair values
};

FiniteDist unit_dist(const ValuePtr& v);
FiniteDist bind_dist(const FiniteDist& d,
                     const std::function<FiniteDist(const ValuePtr&)>& kernel);
FiniteDist pushforward(const FiniteDist& d,
                       const std::function<ValuePtr(const ValuePtr&)>& f);
FiniteDist marginal1(const FiniteDist& joint);
FiniteDist marginal2(const FiniteDist& joint);
FiniteDist convex_combine(const std::vector<std::pair<Rat, FiniteDist>>& parts);

// Joint must have pair support, marginals must match exactly, and every
// support pair must satisfy R.
bool is_coupling(const FiniteDist& joint, const FiniteDist& mu1, const FiniteDist& mu2,
                 const RelationSpec& R);

// Subset-enumeration criterion: for every X subseteq supp(mu1),
// mu1(X) <= mu2(R(X)). Throws CouplingError when |supp(mu1)| exceeds limit.
bool strassen_check(const FiniteDist& mu1, const FiniteDist& mu2, const RelationSpec& R,
                    int support_limit = 20);

// Max-flow decision with witness synthesis: returns the coupling found by an
// exact-rational Edmonds-Karp run, or nullopt when none exists. Deterministic:
// support orderings are canonical and augmenting paths are shortest-first with
// fixed tie-breaking.
std::optional<CouplingWitness> strassen_flow(const FiniteDist& mu1, const FiniteDist& mu2,
                                             const RelationSpec& R);

// Probabilistic lifting of a binary relation: holds iff some R-coupling exists.
bool lift_check_rel(const FiniteDist& d1, const FiniteDist& d2, const RelationSpec& R);

// Unary lifting: every support point satisfies the predicate.
bool lift_check_un(const FiniteDist& d,
                   const std::function<bool(const ValuePtr&)>& pred);

}  // namespace pglc
