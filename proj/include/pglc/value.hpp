#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pglc/ast.hpp"
#include "pglc/rational.hpp"

namespace pglc {

struct Value;
using ValuePtr = std::shared_ptr<const Value>;

// A value of a constant/boxed type, given as a family over all stages.
// Backed by a generator with memoisation so each stage is computed once.
struct GlobalSection {
  std::function<ValuePtr(int)> gen;
  std::shared_ptr<std::map<int, ValuePtr>> memo =
      std::make_shared<std::map<int, ValuePtr>>();

  ValuePtr at(int stage) const {
    auto it = memo->find(stage);
    if (it != memo->end()) return it->second;
    ValuePtr v = gen(stage);
    (*memo)[stage] = v;
    return v;
  }
};

struct EnvEntry {
  bool is_delta = false;
  ValuePtr v;        // gamma entries: the stage value
  GlobalSection g;   // delta entries: value at every stage
  TypePtr ty;
};

struct Env {
  int stage = 0;
  std::map<std::string, EnvEntry> m;

  Env with_gamma(const std::string& x, ValuePtr v, TypePtr ty) const {
    Env e = *this;
    EnvEntry en;
    en.v = std::move(v);
    en.ty = std::move(ty);
    e.m[x] = std::move(en);
    return e;
  }
  Env with_delta(const std::string& x, GlobalSection g, TypePtr ty) const {
    Env e = *this;
    EnvEntry en;
    en.is_delta = true;
    en.g = std::move(g);
    en.ty = std::move(ty);
    e.m[x] = std::move(en);
    return e;
  }
  Env delta_only(int new_stage) const {
    Env e;
    e.stage = new_stage;
    for (const auto& [k, v] : m)
      if (v.is_delta) e.m.emplace(k, v);
    return e;
  }
};

// Probability distribution with exact rational weights. Support is kept
// sorted in the canonical value order with strictly positive weights.
struct FiniteDist {
  std::vector<std::pair<ValuePtr, Rat>> support;

  Rat total() const {
    Rat s;
    for (const auto& [v, p] : support) s += p;
    return s;
  }
  Rat mass_of(const ValuePtr& v) const;
  bool operator==(const FiniteDist& o) const;
};

enum class VKind { Star, Nat, Int, RatV, Enum, Pair, Inl, Inr, Stream, Later, Clos, BoxV, Dist };

struct Value {
  VKind k;
  int stage = 0;

  unsigned long long nat = 0;       // Nat
  long long int_ = 0;               // Int
  Rat rat;                          // RatV
  std::string enum_ctor;            // Enum
  std::string enum_type;            // Enum
  ValuePtr a, b;                    // Pair l/r, Inl/Inr payload in a, Stream head/tail, Later inner in a
  Env env;                          // Clos
  std::string param;                // Clos binder
  TypePtr param_ty;                 // Clos binder type
  TermPtr body;                     // Clos
  GlobalSection box;                // BoxV
  FiniteDist dist;                  // Dist
};

ValuePtr v_star(int stage);
ValuePtr v_nat(unsigned long long n, int stage);
ValuePtr v_int(long long n, int stage);
ValuePtr v_rat(const Rat& r, int stage);
ValuePtr v_enum(const std::string& ctor, const std::string& ty, int stage);
ValuePtr v_pair(ValuePtr a, ValuePtr b, int stage);
ValuePtr v_inl(ValuePtr a, int stage);
ValuePtr v_inr(ValuePtr a, int stage);
ValuePtr v_stream(ValuePtr head, ValuePtr tail, int stage);
ValuePtr v_later(ValuePtr inner, int stage);
ValuePtr v_clos(Env env, const std::string& param, TypePtr param_ty, TermPtr body);
ValuePtr v_box(GlobalSection g, int stage);
ValuePtr v_dist(FiniteDist d, int stage);

// Total order on first-order values; closures and boxes are incomparable and
// raise. Used to keep distribution supports canonical and deterministic.
int value_cmp(const ValuePtr& x, const ValuePtr& y);
bool value_eq(const ValuePtr& x, const ValuePtr& y);
bool value_lt(const ValuePtr& x, const ValuePtr& y);

// Canonical s-expression rendering, e.g. (str 0 -1 -2), (pair 1 2), 5/3, *.
std::string value_sexpr(const ValuePtr& v);

// Sorts, merges duplicates, drops zero-weight points.
FiniteDist make_dist(std::vector<std::pair<ValuePtr, Rat>> entries);

// Stream prefix as a list of element values (stage n gives n+1 elements).
std::vector<ValuePtr> stream_elems(const ValuePtr& s);
ValuePtr stream_of_elems(const std::vector<ValuePtr>& elems, int stage);

struct EvalError : std::runtime_error {
  explicit EvalError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace pglc
