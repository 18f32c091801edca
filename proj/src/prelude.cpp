#include "pglc/prelude.hpp"

#include "pglc/evalsem.hpp"
#include "pglc/parser.hpp"
#include "pglc/typesys.hpp"

namespace pglc {

const char* prelude_source() {
  return
      "def markov [C] : C -> [] (C -> Dist C) -> Dist Str C =\n"
      "  fix m. \\x. \\h.\n"
      "    let box step = h in\n"
      "    mlet z = step x in\n"
      "    mlet t = swap (m <*> next z <*> next h) in\n"
      "    return (x :: t)\n"
      "\n"
      "def ones : [] Str Nat = box (fix f. 1 :: f)\n"
      "\n"
      "axiom all_cons [C, P/1] :\n"
      "  forall n : C, xs : |> Str C.\n"
      "    P(n) =>\n"
      "    (|> [s <- xs] all v <- s. P(v)) =>\n"
      "    (all v <- n :: xs. P(v))\n"
      "\n"
      "axiom all2_cons [C, P/2] :\n"
      "  forall x1 : C, x2 : C, xs1 : |> Str C, xs2 : |> Str C.\n"
      "    P(x1, x2) =>\n"
      "    (|> [s <- xs1, t <- xs2] all2 v <- s, w <- t. P(v, w)) =>\n"
      "    (all2 v <- x1 :: xs1, w <- x2 :: xs2. P(v, w))\n"
      "\n"
      "axiom all21_cons [C, P/2] :\n"
      "  forall x1 : C, y1 : C, x2 : C, xs1 : |> |> Str C, xs2 : |> Str C.\n"
      "    P(x1, x2) =>\n"
      "    (|> [ys1 <- xs1] |> [zs1 <- ys1, ys2 <- xs2] all [2,1] v <- zs1, w <- ys2. P(v, w)) "
      "=>\n"
      "    (all [2,1] v <- x1 :: (next [r <- xs1] (y1 :: r)), w <- x2 :: xs2. P(v, w))\n";
}

std::shared_ptr<Program> load_program(const std::string& user_source) {
  auto pre = parse_program_text(prelude_source());
  for (auto& d : pre->decls) d.from_prelude = true;
  auto prog = parse_program_text(user_source);
  prog->decls.insert(prog->decls.begin(), pre->decls.begin(), pre->decls.end());
  elaborate_program(*prog);
  typecheck_program(*prog);
  return prog;
}

}  // namespace pglc
