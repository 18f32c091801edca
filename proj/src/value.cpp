#include "pglc/value.hpp"

#include <algorithm>
#include <sstream>

namespace pglc {

namespace {
std::shared_ptr<Value> mk(VKind k, int stage) {
  auto v = std::make_shared<Value>();
  v->k = k;
  v->stage = stage;
  return v;
}
}  // namespace

ValuePtr v_star(int stage) { return mk(VKind::Star, stage); }
ValuePtr v_nat(unsigned long long n, int stage) {
  auto v = mk(VKind::Nat, stage);
  v->nat = n;
  return v;
}
ValuePtr v_int(long long n, int stage) {
  auto v = mk(VKind::Int, stage);
  v->int_ = n;
  return v;
}
ValuePtr v_rat(const Rat& r, int stage) {
  auto v = mk(VKind::RatV, stage);
  v->rat = r;
  return v;
}
ValuePtr v_enum(const std::string& ctor, const std::string& ty, int stage) {
  auto v = mk(VKind::Enum, stage);
  v->enum_ctor = ctor;
  v->enum_type = ty;
  return v;
}
ValuePtr v_pair(ValuePtr a, ValuePtr b, int stage) {
  auto v = mk(VKind::Pair, stage);
  v->a = std::move(a);
  v->b = std::move(b);
  return v;
}
ValuePtr v_inl(ValuePtr a, int stage) {
  auto v = mk(VKind::Inl, stage);
  v->a = std::move(a);
  return v;
}
ValuePtr v_inr(ValuePtr a, int stage) {
  auto v = mk(VKind::Inr, stage);
  v->a = std::move(a);
  return v;
}
ValuePtr v_stream(ValuePtr head, ValuePtr tail, int stage) {
  auto v = mk(VKind::Stream, stage);
  v->a = std::move(head);
  v->b = std::move(tail);
  return v;
}
ValuePtr v_later(ValuePtr inner, int stage) {
  auto v = mk(VKind::Later, stage);
  v->a = std::move(inner);
  return v;
}
ValuePtr v_clos(Env env, const std::string& param, TypePtr param_ty, TermPtr body) {
  auto v = mk(VKind::Clos, env.stage);
  v->env = std::move(env);
  v->param = param;
  v->param_ty = std::move(param_ty);
  v->body = std::move(body);
  return v;
}
ValuePtr v_box(GlobalSection g, int stage) {
  auto v = mk(VKind::BoxV, stage);
  v->box = std::move(g);
  return v;
}
ValuePtr v_dist(FiniteDist d, int stage) {
  auto v = mk(VKind::Dist, stage);
  v->dist = std::move(d);
  return v;
}

static int rank(VKind k) { return static_cast<int>(k); }

int value_cmp(const ValuePtr& x, const ValuePtr& y) {
  if (x->k != y->k) return rank(x->k) < rank(y->k) ? -1 : 1;
  switch (x->k) {
    case VKind::Star:
      return 0;
    case VKind::Nat:
      return x->nat == y->nat ? 0 : (x->nat < y->nat ? -1 : 1);
    case VKind::Int:
      return x->int_ == y->int_ ? 0 : (x->int_ < y->int_ ? -1 : 1);
    case VKind::RatV:
      return x->rat == y->rat ? 0 : (x->rat < y->rat ? -1 : 1);
    case VKind::Enum: {
      if (int c = x->enum_type.compare(y->enum_type)) return c < 0 ? -1 : 1;
      if (int c = x->enum_ctor.compare(y->enum_ctor)) return c < 0 ? -1 : 1;
      return 0;
    }
    case VKind::Pair:
    case VKind::Stream: {
      if (int c = value_cmp(x->a, y->a)) return c;
      return value_cmp(x->b, y->b);
    }
    case VKind::Inl:
    case VKind::Inr:
    case VKind::Later:
      return value_cmp(x->a, y->a);
    case VKind::Dist: {
      const auto& xs = x->dist.support;
      const auto& ys = y->dist.support;
      size_t i = 0;
      for (; i < xs.size() && i < ys.size(); ++i) {
        if (int c = value_cmp(xs[i].first, ys[i].first)) return c;
        if (xs[i].second != ys[i].second) return xs[i].second < ys[i].second ? -1 : 1;
      }
      if (xs.size() != ys.size()) return xs.size() < ys.size() ? -1 : 1;
      return 0;
    }
    case VKind::Clos:
    case VKind::BoxV:
      throw EvalError("no canonical order on function or box values");
  }
  return 0;
}

bool value_eq(const ValuePtr& x, const ValuePtr& y) { return value_cmp(x, y) == 0; }
bool value_lt(const ValuePtr& x, const ValuePtr& y) { return value_cmp(x, y) < 0; }

std::string value_sexpr(const ValuePtr& v) {
  std::ostringstream o;
  switch (v->k) {
    case VKind::Star:
      o << "*";
      break;
    case VKind::Nat:
      o << v->nat;
      break;
    case VKind::Int:
      o << v->int_;
      break;
    case VKind::RatV:
      o << v->rat.str();
      break;
    case VKind::Enum:
      o << v->enum_ctor;
      break;
    case VKind::Pair:
      o << "(pair " << value_sexpr(v->a) << " " << value_sexpr(v->b) << ")";
      break;
    case VKind::Inl:
      o << "(inl " << value_sexpr(v->a) << ")";
      break;
    case VKind::Inr:
      o << "(inr " << value_sexpr(v->a) << ")";
      break;
    case VKind::Stream: {
      o << "(str";
      for (const auto& e : stream_elems(v)) o << " " << value_sexpr(e);
      o << ")";
      break;
    }
    case VKind::Later:
      o << "(next " << value_sexpr(v->a) << ")";
      break;
    case VKind::Clos:
      o << "(fun)";
      break;
    case VKind::BoxV:
      o << "(box " << value_sexpr(v->box.at(v->stage)) << ")";
      break;
    case VKind::Dist: {
      o << "(dist";
      for (const auto& [val, p] : v->dist.support)
        o << " (" << value_sexpr(val) << " " << p.str() << ")";
      o << ")";
      break;
    }
  }
  return o.str();
}

Rat FiniteDist::mass_of(const ValuePtr& v) const {
  for (const auto& [w, p] : support)
    if (value_eq(v, w)) return p;
  return Rat(0);
}

bool FiniteDist::operator==(const FiniteDist& o) const {
  if (support.size() != o.support.size()) return false;
  for (size_t i = 0; i < support.size(); ++i) {
    if (!value_eq(support[i].first, o.support[i].first)) return false;
    if (support[i].second != o.support[i].second) return false;
  }
  return true;
}

FiniteDist make_dist(std::vector<std::pair<ValuePtr, Rat>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& x, const auto& y) { return value_lt(x.first, y.first); });
  FiniteDist d;
  for (auto& [v, p] : entries) {
    if (p.is_zero()) continue;
    if (p < Rat(0)) throw EvalError("negative probability");
    if (!d.support.empty() && value_eq(d.support.back().first, v))
      d.support.back().second += p;
    else
      d.support.emplace_back(std::move(v), p);
  }
  return d;
}

std::vector<ValuePtr> stream_elems(const ValuePtr& s) {
  std::vector<ValuePtr> out;
  ValuePtr cur = s;
  while (cur->k == VKind::Stream) {
    out.push_back(cur->a);
    cur = cur->b;
  }
  if (cur->k != VKind::Star) throw EvalError("malformed stream value");
  return out;
}

ValuePtr stream_of_elems(const std::vector<ValuePtr>& elems, int stage) {
  if (elems.size() != static_cast<size_t>(stage) + 1)
    throw EvalError("stream prefix length does not match stage");
  ValuePtr tail = v_star(-1);
  for (int i = static_cast<int>(elems.size()) - 1; i >= 0; --i) {
    int st = stage - i;
    ValuePtr t = (i == static_cast<int>(elems.size()) - 1) ? v_star(st) : tail;
    tail = v_stream(elems[i], t, st);
  }
  return tail;
}

}  // namespace pglc
