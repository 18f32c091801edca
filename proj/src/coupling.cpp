#include "pglc/coupling.hpp"

#include <algorithm>
#include <deque>

namespace pglc {

namespace {
bool numeric_leq(const ValuePtr& x, const ValuePtr& y) {
  if (x->k != y->k) throw CouplingError("ordered relation over mixed value kinds");
  switch (x->k) {
    case VKind::Nat:
      return x->nat <= y->nat;
    case VKind::Int:
      return x->int_ <= y->int_;
    case VKind::RatV:
      return x->rat <= y->rat;
    default:
      throw CouplingError("ordered relation over non-numeric values");
  }
}
}  // namespace

RelationSpec rel_eq() {
  return {[](const ValuePtr& x, const ValuePtr& y) { return value_eq(x, y); }, "eq"};
}
RelationSpec rel_leq() {
  return {[](const ValuePtr& x, const ValuePtr& y) { return numeric_leq(x, y); }, "leq"};
}
RelationSpec rel_geq() {
  return {[](const ValuePtr& x, const ValuePtr& y) { return numeric_leq(y, x); }, "geq"};
}
RelationSpec rel_full() {
  return {[](const ValuePtr&, const ValuePtr&) { return true; }, "full"};
}
RelationSpec rel_from_pairs(std::vector<std::pair<ValuePtr, ValuePtr>> pairs) {
  auto ps = std::make_shared<std::vector<std::pair<ValuePtr, ValuePtr>>>(std::move(pairs));
  return {[ps](const ValuePtr& x, const ValuePtr& y) {
            for (const auto& [a, b] : *ps)
              if (value_eq(a, x) && value_eq(b, y)) return true;
            return false;
          },
          "pairs"};
}

FiniteDist unit_dist(const ValuePtr& v) {
  FiniteDist d;
  d.support.emplace_back(v, Rat(1));
  return d;
}

FiniteDist bind_dist(const FiniteDist& d,
                     const std::function<FiniteDist(const ValuePtr&)>& kernel) {
  std::vector<std::pair<ValuePtr, Rat>> out;
  for (const auto& [x, px] : d.support) {
    FiniteDist k = kernel(x);
    for (const auto& [y, py] : k.support) out.emplace_back(y, px * py);
  }
  return make_dist(std::move(out));
}

FiniteDist pushforward(const FiniteDist& d,
                       const std::function<ValuePtr(const ValuePtr&)>& f) {
  std::vector<std::pair<ValuePtr, Rat>> out;
  for (const auto& [x, px] : d.support) out.emplace_back(f(x), px);
  return make_dist(std::move(out));
}

FiniteDist marginal1(const FiniteDist& joint) {
  std::vector<std::pair<ValuePtr, Rat>> out;
  for (const auto& [xy, p] : joint.support) {
    if (xy->k != VKind::Pair) throw CouplingError("marginal of a non-pair distribution");
    out.emplace_back(xy->a, p);
  }
  return make_dist(std::move(out));
}

FiniteDist marginal2(const FiniteDist& joint) {
  std::vector<std::pair<ValuePtr, Rat>> out;
  for (const auto& [xy, p] : joint.support) {
    if (xy->k != VKind::Pair) throw CouplingError("marginal of a non-pair distribution");
    out.emplace_back(xy->b, p);
  }
  return make_dist(std::move(out));
}

FiniteDist convex_combine(const std::vector<std::pair<Rat, FiniteDist>>& parts) {
  Rat total;
  std::vector<std::pair<ValuePtr, Rat>> out;
  for (const auto& [w, d] : parts) {
    if (w < Rat(0)) throw CouplingError("negative convex weight");
    total += w;
    for (const auto& [v, p] : d.support) out.emplace_back(v, w * p);
  }
  if (total != Rat(1)) throw CouplingError("convex weights must sum to 1");
  return make_dist(std::move(out));
}

bool is_coupling(const FiniteDist& joint, const FiniteDist& mu1, const FiniteDist& mu2,
                 const RelationSpec& R) {
  for (const auto& [xy, p] : joint.support) {
    if (xy->k != VKind::Pair) return false;
    if (!R.holds(xy->a, xy->b)) return false;
  }
  return marginal1(joint) == mu1 && marginal2(joint) == mu2;
}

bool strassen_check(const FiniteDist& mu1, const FiniteDist& mu2, const RelationSpec& R,
                    int support_limit) {
  const auto& s1 = mu1.support;
  const auto& s2 = mu2.support;
  if (static_cast<int>(s1.size()) > support_limit)
    throw CouplingError("support too large for subset enumeration");
  size_t m = s1.size();
  for (unsigned long long mask = 0; mask < (1ULL << m); ++mask) {
    Rat lhs, rhs;
    for (size_t i = 0; i < m; ++i)
      if (mask & (1ULL << i)) lhs += s1[i].second;
    for (const auto& [y, py] : s2) {
      bool related = false;
      for (size_t i = 0; i < m && !related; ++i)
        if ((mask & (1ULL << i)) && R.holds(s1[i].first, y)) related = true;
      if (related) rhs += py;
    }
    if (lhs > rhs) return false;
  }
  return true;
}

std::optional<CouplingWitness> strassen_flow(const FiniteDist& mu1, const FiniteDist& mu2,
                                             const RelationSpec& R) {
  const auto& s1 = mu1.support;
  const auto& s2 = mu2.support;
  int m = static_cast<int>(s1.size());
  int k = static_cast<int>(s2.size());
  int n = m + k + 2;
  int src = 0, snk = n - 1;
  // Dense capacity/flow matrices; edge capacities above 1 act as infinite
  // since the whole flow is bounded by total mass 1.
  std::vector<std::vector<Rat>> cap(n, std::vector<Rat>(n, Rat(0)));
  for (int i = 0; i < m; ++i) cap[src][1 + i] = s1[i].second;
  for (int j = 0; j < k; ++j) cap[1 + m + j][snk] = s2[j].second;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j)
      if (R.holds(s1[i].first, s2[j].first)) cap[1 + i][1 + m + j] = Rat(2);

  std::vector<std::vector<Rat>> flow(n, std::vector<Rat>(n, Rat(0)));
  Rat value;
  while (true) {
    // BFS for the shortest augmenting path; neighbours scanned in index order.
    std::vector<int> pred(n, -1);
    pred[src] = src;
    std::deque<int> q{src};
    while (!q.empty() && pred[snk] == -1) {
      int u = q.front();
      q.pop_front();
      for (int v = 0; v < n; ++v) {
        if (pred[v] != -1) continue;
        if (cap[u][v] - flow[u][v] > Rat(0)) {
          pred[v] = u;
          q.push_back(v);
        }
      }
    }
    if (pred[snk] == -1) break;
    Rat aug;
    bool first = true;
    for (int v = snk; v != src; v = pred[v]) {
      Rat res = cap[pred[v]][v] - flow[pred[v]][v];
      if (first || res < aug) aug = res;
      first = false;
    }
    for (int v = snk; v != src; v = pred[v]) {
      flow[pred[v]][v] += aug;
      flow[v][pred[v]] -= aug;
    }
    value += aug;
  }
  if (value != Rat(1)) return std::nullopt;

  std::vector<std::pair<ValuePtr, Rat>> joint;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j) {
      const Rat& f = flow[1 + i][1 + m + j];
      if (f > Rat(0)) {
        int st = std::max(s1[i].first->stage, s2[j].first->stage);
        joint.emplace_back(v_pair(s1[i].first, s2[j].first, st), f);
      }
    }
  CouplingWitness w;
  w.joint = make_dist(std::move(joint));
  return w;
}

bool lift_check_rel(const FiniteDist& d1, const FiniteDist& d2, const RelationSpec& R) {
  return strassen_flow(d1, d2, R).has_value();
}

bool lift_check_un(const FiniteDist& d,
                   const std::function<bool(const ValuePtr&)>& pred) {
  for (const auto& [v, p] : d.support)
    if (!pred(v)) return false;
  return true;
}

}  // namespace pglc
