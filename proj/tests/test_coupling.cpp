#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "pglc/coupling.hpp"

using namespace pglc;

namespace {

ValuePtr N(unsigned long long n) { return v_nat(n, 0); }
ValuePtr I(long long n) { return v_int(n, 0); }

FiniteDist bern(const Rat& p) {
  return make_dist({{N(1), p}, {N(0), Rat(1) - p}});
}

FiniteDist rand_dist(std::mt19937_64& g, int max_support, long long value_range) {
  size_t size = 1 + g() % max_support;
  std::set<long long> vals;
  while (vals.size() < size) vals.insert(static_cast<long long>(g() % value_range));
  std::vector<std::pair<ValuePtr, Rat>> entries;
  long total = 0;
  std::vector<long> ws;
  for (size_t i = 0; i < vals.size(); ++i) {
    long w = 1 + g() % 9;
    ws.push_back(w);
    total += w;
  }
  size_t i = 0;
  for (long long v : vals) entries.emplace_back(I(v), Rat(ws[i++], total));
  return make_dist(std::move(entries));
}

RelationSpec rand_rel(std::mt19937_64& g, const FiniteDist& d1, const FiniteDist& d2) {
  std::vector<std::pair<ValuePtr, ValuePtr>> pairs;
  for (const auto& [x, px] : d1.support)
    for (const auto& [y, py] : d2.support)
      if (g() % 2 == 0) pairs.emplace_back(x, y);
  return rel_from_pairs(std::move(pairs));
}

Rat pr_geq(const FiniteDist& d, long long k) {
  Rat s;
  for (const auto& [v, p] : d.support)
    if (v->int_ >= k) s += p;
  return s;
}

}  // namespace

TEST_CASE("bernoulli joint table is a monotone coupling") {
  FiniteDist mu1 = bern(Rat(3, 10));
  FiniteDist mu2 = bern(Rat(6, 10));
  FiniteDist joint = make_dist({
      {v_pair(N(0), N(0), 0), Rat(2, 5)},
      {v_pair(N(0), N(1), 0), Rat(3, 10)},
      {v_pair(N(1), N(1), 0), Rat(3, 10)},
  });
  CHECK(is_coupling(joint, mu1, mu2, rel_leq()));
  CHECK(marginal1(joint) == mu1);
  CHECK(marginal2(joint) == mu2);
  // strictly positive probabilities only
  for (const auto& [v, p] : joint.support) CHECK(p > Rat(0));

  // perturbed joint: marginals still fine but a support pair leaves the relation
  FiniteDist bad = make_dist({
      {v_pair(N(0), N(0), 0), Rat(2, 5)},
      {v_pair(N(0), N(1), 0), Rat(3, 10)},
      {v_pair(N(1), N(0), 0), Rat(3, 10)},
  });
  CHECK_FALSE(is_coupling(bad, mu1, mu2, rel_leq()));
}

TEST_CASE("subset criterion on bernoulli dominance") {
  CHECK(strassen_check(bern(Rat(1, 3)), bern(Rat(2, 3)), rel_leq()));
  CHECK_FALSE(strassen_check(bern(Rat(2, 3)), bern(Rat(1, 3)), rel_leq()));
  CHECK(strassen_check(bern(Rat(1, 2)), bern(Rat(1, 2)), rel_eq()));
  CHECK_FALSE(strassen_check(bern(Rat(1, 3)), bern(Rat(2, 3)), rel_eq()));
  FiniteDist big = make_dist([] {
    std::vector<std::pair<ValuePtr, Rat>> e;
    for (int i = 0; i < 21; ++i) e.emplace_back(I(i), Rat(1, 21));
    return e;
  }());
  CHECK_THROWS_AS(strassen_check(big, big, rel_eq()), CouplingError);
}

TEST_CASE("flow decision matches subset criterion and yields valid witnesses") {
  std::mt19937_64 g(20260823);
  int found = 0, missing = 0;
  for (int it = 0; it < 400; ++it) {
    FiniteDist d1 = rand_dist(g, 8, 12);
    FiniteDist d2 = rand_dist(g, 8, 12);
    RelationSpec R = rand_rel(g, d1, d2);
    bool brute = strassen_check(d1, d2, R);
    auto w = strassen_flow(d1, d2, R);
    REQUIRE(brute == w.has_value());
    if (w) {
      ++found;
      CHECK(is_coupling(w->joint, d1, d2, R));
    } else {
      ++missing;
    }
  }
  // both outcomes exercised
  CHECK(found > 20);
  CHECK(missing > 20);
}

TEST_CASE("flow witness is deterministic") {
  std::mt19937_64 g(7);
  FiniteDist d1 = rand_dist(g, 6, 10);
  FiniteDist d2 = rand_dist(g, 6, 10);
  auto w1 = strassen_flow(d1, d2, rel_full());
  auto w2 = strassen_flow(d1, d2, rel_full());
  REQUIRE(w1.has_value());
  REQUIRE(w2.has_value());
  CHECK(w1->joint == w2->joint);
}

TEST_CASE("equality coupling exists exactly for identical distributions") {
  std::mt19937_64 g(99);
  for (int it = 0; it < 200; ++it) {
    FiniteDist d = rand_dist(g, 6, 10);
    auto w = strassen_flow(d, d, rel_eq());
    REQUIRE(w.has_value());
    CHECK(is_coupling(w->joint, d, d, rel_eq()));
    // the identity coupling is the only equality coupling shape
    for (const auto& [xy, p] : w->joint.support) CHECK(value_eq(xy->a, xy->b));
  }
  for (int it = 0; it < 200; ++it) {
    FiniteDist d1 = rand_dist(g, 6, 10);
    FiniteDist d2 = rand_dist(g, 6, 10);
    if (d1 == d2) continue;
    CHECK_FALSE(strassen_flow(d1, d2, rel_eq()).has_value());
  }
}

TEST_CASE("monotone coupling implies tail dominance") {
  std::mt19937_64 g(123);
  int hits = 0;
  for (int it = 0; it < 300; ++it) {
    FiniteDist d1 = rand_dist(g, 6, 10);
    FiniteDist d2 = rand_dist(g, 6, 10);
    if (!lift_check_rel(d1, d2, rel_geq())) continue;
    ++hits;
    for (long long k = -1; k < 11; ++k) CHECK(pr_geq(d1, k) >= pr_geq(d2, k));
  }
  CHECK(hits > 10);
}

TEST_CASE("bind matches direct convolution") {
  // two-step +/-1 walk from 0 via bind
  FiniteDist step0 = make_dist({{I(-1), Rat(1, 2)}, {I(1), Rat(1, 2)}});
  auto kernel = [](const ValuePtr& v) {
    return make_dist({{I(v->int_ - 1), Rat(1, 2)}, {I(v->int_ + 1), Rat(1, 2)}});
  };
  FiniteDist two = bind_dist(step0, kernel);
  FiniteDist expect = make_dist({{I(-2), Rat(1, 4)}, {I(0), Rat(1, 2)}, {I(2), Rat(1, 4)}});
  CHECK(two == expect);
}

TEST_CASE("monad laws for unit and bind") {
  std::mt19937_64 g(4242);
  auto kern1 = [](const ValuePtr& v) {
    return make_dist({{I(v->int_), Rat(1, 3)}, {I(v->int_ + 1), Rat(2, 3)}});
  };
  auto kern2 = [](const ValuePtr& v) {
    return make_dist({{I(2 * v->int_), Rat(1, 2)}, {I(v->int_ - 2), Rat(1, 2)}});
  };
  for (int it = 0; it < 50; ++it) {
    FiniteDist d = rand_dist(g, 6, 10);
    CHECK(bind_dist(d, [](const ValuePtr& v) { return unit_dist(v); }) == d);
    ValuePtr x = I(static_cast<long long>(g() % 10));
    CHECK(bind_dist(unit_dist(x), kern1) == kern1(x));
    FiniteDist lhs = bind_dist(bind_dist(d, kern1), kern2);
    FiniteDist rhs = bind_dist(d, [&](const ValuePtr& v) { return bind_dist(kern1(v), kern2); });
    CHECK(lhs == rhs);
  }
}

TEST_CASE("sequential composition of couplings") {
  std::mt19937_64 g(31337);
  int done = 0;
  for (int it = 0; it < 600 && done < 60; ++it) {
    FiniteDist d1 = rand_dist(g, 5, 8);
    FiniteDist d2 = rand_dist(g, 5, 8);
    auto w = strassen_flow(d1, d2, rel_leq());
    if (!w) continue;
    ++done;
    // monotone kernels: uniform over {x, x+1}
    auto k1 = [](const ValuePtr& v) {
      return make_dist({{I(v->int_), Rat(1, 2)}, {I(v->int_ + 1), Rat(1, 2)}});
    };
    auto k2 = k1;
    FiniteDist b1 = bind_dist(d1, k1);
    FiniteDist b2 = bind_dist(d2, k2);
    // composite witness built pointwise from the outer witness and the
    // evident monotone couplings of the kernels
    std::vector<std::pair<ValuePtr, Rat>> comp;
    for (const auto& [xy, p] : w->joint.support) {
      long long x = xy->a->int_, y = xy->b->int_;
      comp.emplace_back(v_pair(I(x), I(y), 0), p * Rat(1, 2));
      comp.emplace_back(v_pair(I(x + 1), I(y + 1), 0), p * Rat(1, 2));
    }
    FiniteDist joint = make_dist(std::move(comp));
    CHECK(is_coupling(joint, b1, b2, rel_leq()));
    CHECK(lift_check_rel(b1, b2, rel_leq()));
  }
  CHECK(done == 60);
}

TEST_CASE("coupling composition along relation composition") {
  std::mt19937_64 g(777);
  int done = 0;
  for (int it = 0; it < 4000 && done < 40; ++it) {
    FiniteDist d1 = rand_dist(g, 5, 8);
    FiniteDist d2 = rand_dist(g, 5, 8);
    FiniteDist d3 = rand_dist(g, 5, 8);
    RelationSpec R = rand_rel(g, d1, d2);
    RelationSpec S = rand_rel(g, d2, d3);
    if (!lift_check_rel(d1, d2, R) || !lift_check_rel(d2, d3, S)) continue;
    ++done;
    const auto& mid = d2;
    RelationSpec SR{[&, R, S](const ValuePtr& x, const ValuePtr& z) {
                      for (const auto& [y, p] : mid.support)
                        if (R.holds(x, y) && S.holds(y, z)) return true;
                      return false;
                    },
                    "compose"};
    CHECK(lift_check_rel(d1, d3, SR));
  }
  CHECK(done == 40);
}

TEST_CASE("fundamental property of monotone lifting") {
  std::mt19937_64 g(555);
  int done = 0;
  for (int it = 0; it < 1200 && done < 50; ++it) {
    FiniteDist d1 = rand_dist(g, 6, 10);
    FiniteDist d2 = rand_dist(g, 6, 10);
    RelationSpec R = rand_rel(g, d1, d2);
    if (!lift_check_rel(d1, d2, R)) continue;
    ++done;
    // any event and its R-image
    for (unsigned long long mask = 0; mask < (1ULL << d1.support.size()); ++mask) {
      Rat pr1, pr2;
      for (size_t i = 0; i < d1.support.size(); ++i)
        if (mask & (1ULL << i)) pr1 += d1.support[i].second;
      for (const auto& [y, py] : d2.support) {
        bool in_image = false;
        for (size_t i = 0; i < d1.support.size() && !in_image; ++i)
          if ((mask & (1ULL << i)) && R.holds(d1.support[i].first, y)) in_image = true;
        if (in_image) pr2 += py;
      }
      CHECK(pr1 <= pr2);
    }
  }
  CHECK(done == 50);
}

TEST_CASE("convex combinations of couplings") {
  FiniteDist a = make_dist({{v_pair(N(0), N(0), 0), Rat(1)}});
  FiniteDist b = make_dist({{v_pair(N(1), N(1), 0), Rat(1)}});
  FiniteDist mix = convex_combine({{Rat(1, 3), a}, {Rat(2, 3), b}});
  FiniteDist mu1 = make_dist({{N(0), Rat(1, 3)}, {N(1), Rat(2, 3)}});
  CHECK(is_coupling(mix, mu1, mu1, rel_eq()));
  CHECK_THROWS_AS(convex_combine({{Rat(1, 3), a}, {Rat(1, 3), b}}), CouplingError);
}

TEST_CASE("distribution supports stay canonical") {
  FiniteDist d = make_dist({{I(3), Rat(1, 4)}, {I(-1), Rat(1, 4)}, {I(3), Rat(1, 2)}});
  REQUIRE(d.support.size() == 2);
  CHECK(d.support[0].first->int_ == -1);
  CHECK(d.support[1].first->int_ == 3);
  CHECK(d.support[1].second == Rat(3, 4));
  CHECK(d.total() == Rat(1));
}
