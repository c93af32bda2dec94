#include <bit>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oi/core.hpp"

using namespace oi;

namespace {

Fn predictor(std::vector<double> v) { return Fn(std::move(v), FnKind::Predictor); }
Fn distinguisher(std::vector<double> v) { return Fn(std::move(v), FnKind::Distinguisher); }

std::vector<double> random_values(CounterRng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = lo + (hi - lo) * rng.uniform();
  return v;
}

Distribution random_dist(CounterRng& rng, std::size_t n) {
  std::vector<double> w(n);
  for (double& x : w) x = rng.uniform() + 0.01;
  return Distribution(w);
}

// sup over the vertices of [lo,hi]^n of |<f,g>_mu|; the sup of a linear
// functional over a box is attained at a vertex.
double brute_cube(const std::vector<double>& f, const Distribution& mu, double lo, double hi) {
  const std::size_t n = f.size();
  double best = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += mu[i] * f[i] * ((mask >> i) & 1 ? hi : lo);
    best = std::max(best, std::fabs(s));
  }
  return best;
}

}  // namespace

TEST_CASE("distribution validation and renormalization") {
  Distribution mu({2.0, 1.0, 1.0});
  CHECK(mu[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(Distribution({-1.0, 2.0}), Error);
  CHECK_THROWS_AS(Distribution({0.0, 0.0}), Error);
  CHECK_THROWS_AS(Distribution(std::vector<double>{}), Error);
}

TEST_CASE("distribution draws never land on zero-weight individuals") {
  Distribution mu({0.0, 0.5, 0.0, 0.5, 0.0});
  CounterRng rng(5);
  std::vector<int> hist(5, 0);
  for (int i = 0; i < 4000; ++i) ++hist[mu.draw(rng)];
  CHECK(hist[0] == 0);
  CHECK(hist[2] == 0);
  CHECK(hist[4] == 0);
  CHECK(std::abs(hist[1] - 2000) < 200);
}

TEST_CASE("function kinds enforce their ranges") {
  CHECK_NOTHROW(predictor({0.0, 1.0, 0.5}));
  CHECK_THROWS_AS(predictor({-0.1}), Error);
  CHECK_THROWS_AS(distinguisher({1.5}), Error);
  CHECK_NOTHROW(Fn({2.0, -3.0}, FnKind::Generic, 3.0));
  CHECK_THROWS_AS(Fn({4.0}, FnKind::Generic, 3.0), Error);
  CHECK(fn_kind_from_string("predictor") == FnKind::Predictor);
  CHECK_THROWS_AS(fn_kind_from_string("nope"), Error);
}

TEST_CASE("domain mismatches are rejected") {
  auto mu = Distribution::uniform(3);
  auto a = predictor({0.1, 0.2, 0.3});
  auto b = predictor({0.1, 0.2});
  try {
    (void)inner_product(a, b, mu);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DomainMismatch);
  }
}

TEST_CASE("full-cube dual norm matches vertex enumeration") {
  CounterRng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng.below(8);
    auto f = random_values(rng, n, -1.0, 1.0);
    auto mu = random_dist(rng, n);
    for (auto [lo, hi] : {std::pair{-1.0, 1.0}, std::pair{0.0, 1.0}, std::pair{-0.25, 0.75}}) {
      auto cls = FnClass::full_cube(n, lo, hi);
      CHECK(dual_norm(f, cls, mu) == doctest::Approx(brute_cube(f, mu, lo, hi)).epsilon(1e-12));
    }
  }
}

TEST_CASE("full [-1,1] cube norm equals the weighted l1 norm") {
  auto mu = Distribution({0.2, 0.3, 0.5});
  std::vector<double> f{0.5, -1.0, 0.25};
  CHECK(dual_norm(f, FnClass::full_cube(3, -1, 1), mu) == doctest::Approx(0.1 + 0.3 + 0.125));
}

TEST_CASE("parity and Hadamard norms match their materialized members") {
  CounterRng rng(8);
  for (unsigned m : {0u, 1u, 3u, 5u}) {
    for (bool bottom : {false, true}) {
      auto cls = FnClass::parity(m, bottom);
      auto explicit_cls = FnClass::explicit_members(cls.materialize());
      const std::size_t n = cls.domain_size();
      auto mu = random_dist(rng, n);
      auto f = random_values(rng, n, -1.0, 1.0);
      CHECK(dual_norm(f, cls, mu) == doctest::Approx(dual_norm(f, explicit_cls, mu)).epsilon(1e-12));
      auto e1 = embed(f, cls, mu);
      auto e2 = embed(f, explicit_cls, mu);
      REQUIRE(e1.size() == e2.size());
      for (std::size_t j = 0; j < e1.size(); ++j) CHECK(e1[j] == doctest::Approx(e2[j]).epsilon(1e-12));
    }
  }
  for (std::size_t m : {1u, 2u, 8u, 64u}) {
    auto cls = FnClass::hadamard(m);
    auto members = cls.materialize();
    // Columns are pairwise orthogonal under the counting measure.
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += members[a][i] * members[b][i];
        CHECK(s == (a == b ? static_cast<double>(m) : 0.0));
      }
    }
    auto mu = random_dist(rng, m);
    auto f = random_values(rng, m, -1.0, 1.0);
    CHECK(dual_norm(f, cls, mu) ==
          doctest::Approx(dual_norm(f, FnClass::explicit_members(members), mu)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(FnClass::hadamard(6), Error);
}

TEST_CASE("support-bounded norm matches subset enumeration") {
  CounterRng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 7;
    std::vector<std::size_t> special{0, 1};
    std::vector<std::size_t> free{2, 3, 4, 5, 6};
    const std::size_t budget = rng.below(6);
    auto cls = FnClass::support_bounded(n, special, free, budget);
    auto f = random_values(rng, n, -1.0, 1.0);
    auto mu = random_dist(rng, n);
    double best = 0.0;
    for (unsigned ymask = 0; ymask < 32; ++ymask) {
      if (static_cast<std::size_t>(std::popcount(ymask)) != budget) continue;
      std::vector<double> g(n, 0.0);
      for (std::size_t i : special) g[i] = 1.0;
      for (std::size_t k = 0; k < 5; ++k) g[free[k]] = (ymask >> k) & 1;
      // The sup over g in [-1,1] on the support is the weighted l1 restricted to it.
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += g[i] * mu[i] * std::fabs(f[i]);
      best = std::max(best, s);
    }
    CHECK(dual_norm(f, cls, mu) == doctest::Approx(best).epsilon(1e-12));
  }
  CHECK_THROWS_AS(FnClass::support_bounded(3, {0}, {0, 1}, 1), Error);
  CHECK_THROWS_AS(FnClass::support_bounded(3, {0}, {1}, 2), Error);
}

TEST_CASE("grid class materializes L^n members and shares the cube norm") {
  auto g = FnClass::grid(2, 0.0, 1.0, 0.25);
  REQUIRE(g.cardinality().has_value());
  CHECK(*g.cardinality() == 25);
  auto members = g.materialize();
  CHECK(members.size() == 25);
  CHECK(members.front()[0] == 0.0);
  CHECK(members.back()[1] == 1.0);
  auto mu = Distribution({0.3, 0.7});
  std::vector<double> f{0.4, -0.9};
  CHECK(dual_norm(f, g, mu) == doctest::Approx(dual_norm(f, FnClass::explicit_members(members), mu)));
  CHECK_THROWS_AS(FnClass::grid(2, 0.0, 1.0, 0.3), Error);
  CHECK_THROWS_AS(FnClass::grid(30, 0.0, 1.0, 0.25).materialize(), Error);
}

TEST_CASE("unsupported representations fail loudly") {
  auto cube = FnClass::full_cube(3, -1, 1);
  CHECK_THROWS_AS((void)cube.members(), Error);
  CHECK_THROWS_AS(cube.materialize(), Error);
  std::vector<double> f{0, 0, 0};
  CHECK_THROWS_AS(embed(f, cube, Distribution::uniform(3)), Error);
}

TEST_CASE("transform and inverse transform round-trip exactly") {
  CounterRng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    auto f = distinguisher(random_values(rng, 9, -1.0, 1.0));
    auto back = transform_distinguisher(inverse_transform(f));
    CHECK(back.same_values(f));
  }
  RandomizedDistinguisher d({0.9, 0.2}, {0.1, 0.7});
  auto t = transform_distinguisher(d);
  CHECK(t[0] == doctest::Approx(0.8));
  CHECK(t[1] == doctest::Approx(-0.5));
  CHECK_THROWS_AS(RandomizedDistinguisher({1.2}, {0.0}), Error);
}

TEST_CASE("advantage with the full cube equals the l1 error") {
  CounterRng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    auto mu = random_dist(rng, 6);
    auto p = predictor(random_values(rng, 6, 0, 1));
    auto q = predictor(random_values(rng, 6, 0, 1));
    CHECK(advantage(p, q, FnClass::full_cube(6, -1, 1), mu) == doctest::Approx(l1_error(p, q, mu)).epsilon(1e-12));
  }
}

TEST_CASE("difference class deduplicates by exact value") {
  auto cls = FnClass::explicit_members({predictor({0, 1}), predictor({1, 0}), predictor({0, 1})});
  auto diff = difference_class(cls);
  // Distinct differences: zero, (-1,1), (1,-1).
  CHECK(diff.members().size() == 3);
  CHECK(diff.members()[0][0] == 0.0);
  CHECK(diff.kind() == FnKind::Generic);
}

TEST_CASE("sampling is reproducible and follows the predictor") {
  auto mu = Distribution({0.25, 0.75});
  auto p = predictor({0.1, 0.9});
  auto s1 = sample(p, mu, 20000, 99);
  auto s2 = sample(p, mu, 20000, 99);
  CHECK(s1 == s2);
  double ones[2] = {0, 0};
  double counts[2] = {0, 0};
  for (const auto& e : s1) {
    counts[e.x] += 1;
    ones[e.x] += e.outcome;
  }
  CHECK(counts[0] / 20000 == doctest::Approx(0.25).epsilon(0.05));
  CHECK(ones[1] / counts[1] == doctest::Approx(0.9).epsilon(0.02));
  CHECK_THROWS_AS(Sample({{3, 0}}, 2), Error);
}

TEST_CASE("counter rng streams are reproducible and independent") {
  CounterRng a(1, 2);
  CounterRng b(1, 2);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  CounterRng c(1, 3);
  CounterRng d(1, 2);
  CHECK(c.next_u64() != d.next_u64());
  CHECK(a.at(0) == CounterRng(1, 2).next_u64());
  auto child = a.split(7);
  CHECK(child.stream() != a.stream());
  for (int i = 0; i < 1000; ++i) CHECK(a.below(7) < 7);
}

TEST_CASE("class norms are seminorms") {
  CounterRng rng(23);
  const std::size_t n = 9;  // parity(3, true) lives on 1 + 2^3 points
  const std::vector<FnClass> classes{
      FnClass::full_cube(n, -1, 1),
      FnClass::full_cube(n, 0, 1),
      FnClass::support_bounded(n, {0, 1}, {2, 3, 4, 5, 6, 7, 8}, 3),
      FnClass::parity(3, true),
      FnClass::explicit_members({Fn(random_values(rng, n, -1, 1), FnKind::Distinguisher),
                                 Fn(random_values(rng, n, -1, 1), FnKind::Distinguisher)}),
  };
  for (const auto& cls : classes) {
    CAPTURE(cls.repr_name());
    for (int trial = 0; trial < 30; ++trial) {
      auto mu = random_dist(rng, n);
      Fn f(random_values(rng, n, -1, 1), FnKind::Generic);
      Fn g(random_values(rng, n, -1, 1), FnKind::Generic);
      const double nf = dual_norm(f, cls, mu), ng = dual_norm(g, cls, mu);
      CHECK(nf >= 0.0);
      CHECK(dual_norm((f + g).as(FnKind::Generic, 2.0), cls, mu) <= nf + ng + 1e-12);
      CHECK(dual_norm(f.scaled(-0.5), cls, mu) == doctest::Approx(0.5 * nf).epsilon(1e-12));
      CHECK(dual_norm(Fn::zero(n), cls, mu) == 0.0);
    }
  }
}
