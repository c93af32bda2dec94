#include <bitset>
#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "oi/geometry.hpp"

using namespace oi;

namespace {

std::vector<double> random_values(CounterRng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = lo + (hi - lo) * rng.uniform();
  return v;
}

Distribution random_dist(CounterRng& rng, std::size_t n) {
  std::vector<double> w(n);
  for (double& x : w) x = rng.uniform() + 0.05;
  return Distribution(w);
}

FnClass random_class(CounterRng& rng, std::size_t count, std::size_t n, FnKind kind) {
  std::vector<Fn> out;
  const double lo = kind == FnKind::Predictor ? 0.0 : -1.0;
  for (std::size_t i = 0; i < count; ++i) out.emplace_back(random_values(rng, n, lo, 1.0), kind);
  return FnClass::explicit_members(std::move(out));
}

// Scalar-by-scalar dual norm distance, independent of the library's metric.
double oracle_distance(const Fn& a, const Fn& b, const FnClass& f1, const Distribution& mu) {
  double best = 0.0;
  for (const auto& g : f1.members()) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += mu[i] * (a[i] - b[i]) * g[i];
    best = std::max(best, std::fabs(s));
  }
  return best;
}

// Smallest covering by exhaustive subset enumeration; ties by lexicographic index list.
std::vector<std::size_t> oracle_cover(const FnClass& f2, const FnClass& f1, const Distribution& mu, double eps) {
  const auto& ms = f2.members();
  const std::size_t n = ms.size();
  std::vector<std::size_t> best;
  bool have = false;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> set;
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1) set.push_back(i);
    }
    if (have && set.size() > best.size()) continue;
    bool covers = true;
    for (std::size_t i = 0; i < n && covers; ++i) {
      bool hit = false;
      for (std::size_t c : set) hit = hit || oracle_distance(ms[i], ms[c], f1, mu) <= eps + 1e-12;
      covers = hit;
    }
    if (!covers) continue;
    if (!have || set.size() < best.size() || set < best) {
      best = set;
      have = true;
    }
  }
  return best;
}

// Fat dimension by exhaustive search over subsets and the {f(x) +- gamma} shift grid.
std::size_t oracle_fat(const FnClass& cls, double gamma, std::size_t max_points) {
  const auto& ms = cls.members();
  const std::size_t n = cls.domain_size();
  std::size_t best = 0;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> pts;
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1) pts.push_back(i);
    }
    if (pts.size() <= best || pts.size() > max_points) continue;
    std::vector<std::vector<double>> cand(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
      for (const auto& f : ms) {
        cand[k].push_back(f[pts[k]] - gamma);
        cand[k].push_back(f[pts[k]] + gamma);
      }
    }
    std::vector<double> r(pts.size());
    std::function<bool(std::size_t)> rec = [&](std::size_t k) -> bool {
      if (k == pts.size()) return verify_fat_witness(cls, gamma, pts, r);
      for (double c : cand[k]) {
        r[k] = c;
        if (rec(k + 1)) return true;
      }
      return false;
    };
    if (rec(0)) best = pts.size();
  }
  return best;
}

}  // namespace

TEST_CASE("exact covering matches exhaustive subset enumeration") {
  CounterRng rng(101);
  for (int trial = 0; trial < 12; ++trial) {
    auto f2 = random_class(rng, 10, 5, FnKind::Predictor);
    auto f1 = random_class(rng, 4, 5, FnKind::Distinguisher);
    auto mu = random_dist(rng, 5);
    const double eps = 0.02 + 0.1 * rng.uniform();
    auto exact = covering_exact(f2, f1, mu, eps);
    auto oracle = oracle_cover(f2, f1, mu, eps);
    CHECK(exact.size == oracle.size());
    CHECK(exact.centers == oracle);
    CHECK(is_covering(f2, f1, mu, eps, exact.centers));
    auto greedy = covering_greedy(f2, f1, mu, eps);
    CHECK(greedy.size >= exact.size);
    CHECK(static_cast<double>(greedy.size) <= exact.size * (1.0 + std::log(10.0)));
    CHECK(is_covering(f2, f1, mu, eps, greedy.centers));
    CHECK(packing_lower(f2, f1, mu, eps) <= exact.size);
    CHECK(metric_entropy(f2, f1, mu, eps, CoverMode::Exact) == doctest::Approx(std::log2(exact.size)));
  }
}

TEST_CASE("covering edge cases") {
  auto mu = Distribution::uniform(2);
  auto cube = FnClass::full_cube(2, -1, 1);
  auto single = FnClass::explicit_members({Fn({0.5, 0.5}, FnKind::Predictor)});
  CHECK(covering_exact(single, cube, mu, 0.1).size == 1);
  CHECK(metric_entropy(single, cube, mu, 0.1, CoverMode::Greedy) == 0.0);
  auto same = FnClass::explicit_members({Fn({0.5, 0.5}, FnKind::Predictor), Fn({0.5, 0.5}, FnKind::Predictor)});
  CHECK(covering_greedy(same, cube, mu, 0.0).size == 1);
  // Corners of the unit square: adjacent corners at weighted-l1 distance 1/2, opposite at 1.
  auto far = FnClass::explicit_members({Fn({0, 0}, FnKind::Predictor), Fn({1, 1}, FnKind::Predictor),
                                        Fn({0, 1}, FnKind::Predictor), Fn({1, 0}, FnKind::Predictor)});
  CHECK(covering_exact(far, cube, mu, 0.5).centers == std::vector<std::size_t>{0, 1});
  CHECK(covering_exact(far, cube, mu, 0.3).size == 4);
  CHECK(packing_lower(far, cube, mu, 0.2) == 4);
  CHECK(packing_lower(far, cube, mu, 0.3) == 2);
  CHECK_THROWS_AS(covering_exact(far, cube, mu, -0.1), Error);
  SearchCaps tiny;
  tiny.exact_cover = 3;
  CHECK_THROWS_AS(covering_exact(far, cube, mu, 0.1, tiny), Error);
}

TEST_CASE("packing of two members at distance 3 eps") {
  auto mu = Distribution::uniform(1);
  auto cube = FnClass::full_cube(1, -1, 1);
  auto two = FnClass::explicit_members({Fn({0.0}, FnKind::Predictor), Fn({0.3}, FnKind::Predictor)});
  CHECK(packing_lower(two, cube, mu, 0.1) == 2);
}

TEST_CASE("hadamard columns are orthonormal under the uniform measure") {
  for (std::size_t m : {1u, 2u, 8u}) {
    auto h = hadamard_class(m);
    auto mu = Distribution::uniform(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        CHECK(inner_product(h.members()[i], h.members()[j], mu) == doctest::Approx(i == j ? 1.0 : 0.0));
      }
    }
  }
  auto h2 = hadamard_class(2);
  CHECK(h2.members()[1][1] == -1.0);
  CHECK(h2.members()[0][1] == 1.0);
}

TEST_CASE("fat_exact on cube instances") {
  for (std::size_t n : {1u, 2u, 3u, 4u}) {
    auto cube = FnClass::grid(n, 0.0, 1.0, 1.0);
    for (std::size_t maxp : {1u, 2u, 3u, 4u}) {
      auto r = fat_exact(cube, 0.4, maxp);
      CHECK(r.dimension == std::min(n, maxp));
      for (double s : r.witness_shifts) CHECK(s == 0.5);
      CHECK(verify_fat_witness(cube, 0.4, r.witness_points, r.witness_shifts));
    }
  }
  auto constants = FnClass::explicit_members({Fn::constant(3, 0.0, FnKind::Predictor), Fn::constant(3, 1.0, FnKind::Predictor)});
  auto r = fat_exact(constants, 0.4, 3);
  CHECK(r.dimension == 1);
  CHECK(r.witness_shifts.at(0) == 0.5);
  CHECK(fat_exact(constants, 0.6, 3).dimension == 0);
}

TEST_CASE("fat_exact matches the shift-grid oracle and fat_lower never exceeds it") {
  CounterRng rng(55);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 3 + rng.below(3);
    auto cls = random_class(rng, 4 + rng.below(12), n, FnKind::Distinguisher);
    const double gamma = 0.05 + 0.3 * rng.uniform();
    auto exact = fat_exact(cls, gamma, 4);
    CHECK(exact.dimension == oracle_fat(cls, gamma, 4));
    auto lower = fat_lower(cls, gamma, 4, 5, 9 + trial);
    CHECK(lower.dimension <= exact.dimension);
    CHECK(verify_fat_witness(cls, gamma, lower.witness_points, lower.witness_shifts));
  }
}

TEST_CASE("fat caps") {
  auto big = FnClass::grid(17, 0.0, 1.0, 1.0);
  CHECK_THROWS_AS(fat_exact(FnClass::explicit_members({Fn::zero(17, FnKind::Distinguisher)}), 0.1, 2), Error);
  CHECK_THROWS_AS(fat_exact(FnClass::explicit_members({Fn::zero(4, FnKind::Distinguisher)}), 0.1, 9), Error);
  // maxPoints 1 is linear in |X| and allowed on large domains.
  CHECK(fat_exact(FnClass::explicit_members({Fn::zero(40, FnKind::Distinguisher)}), 0.1, 1).dimension == 0);
  (void)big;
}

TEST_CASE("lifted class has the same fat dimension") {
  CounterRng rng(77);
  for (int trial = 0; trial < 15; ++trial) {
    auto d = random_class(rng, 4 + rng.below(8), 4, FnKind::Distinguisher);
    auto lifted = lift_distinguisher_class(d);
    CHECK(lifted.domain_size() == 8);
    CHECK(lifted.members().size() == d.members().size());
    const double gamma = 0.05 + 0.25 * rng.uniform();
    CHECK(fat_exact(lifted, gamma, 3).dimension == fat_exact(d, gamma, 3).dimension);
  }
  auto zero = lift_distinguisher_class(FnClass::explicit_members({Fn::zero(3, FnKind::Distinguisher)}));
  for (double v : zero.members()[0].values()) CHECK(v == 0.0);
}

TEST_CASE("duality check basics") {
  CounterRng rng(5);
  auto mu = Distribution::uniform(4);
  auto f2 = random_class(rng, 5, 4, FnKind::Distinguisher);
  auto single = FnClass::explicit_members({Fn({0.2, 0.1, 0.4, 0.3}, FnKind::Predictor)});
  auto r = duality_check(single, f2, mu, 0.1, 0.0);
  CHECK(r.lhs == 0.0);
  CHECK(r.holds);
  auto pair = FnClass::explicit_members({Fn({1, -1, 1, -1}, FnKind::Distinguisher), Fn({-1, 1, -1, 1}, FnKind::Distinguisher)});
  auto rp = duality_check(pair, pair, mu, 0.25, 1000.0);
  CHECK(rp.lhs == 1.0);
  CHECK(rp.rhs == 1.0);
  CHECK(rp.m1 == 1.0);
  CHECK(rp.holds);
}

TEST_CASE("cube packing: trivial diameter bound") {
  auto mu = Distribution::uniform(3);
  CHECK(cube_packing_lower(1.0, 3, 0.5, FnClass::full_cube(3, -1, 1), mu) == 1);
}

TEST_CASE("cube packing on the 9x9 grid equals the exhaustive maximum") {
  auto mu = Distribution::uniform(2);
  auto cube = FnClass::full_cube(2, -1, 1);
  const std::size_t greedy = cube_packing_lower(0.25, 2, 0.25, cube, mu);
  // Maximum independent set in the conflict graph (weighted l1 <= 2 eps) by branch and bound.
  std::vector<std::pair<double, double>> pts;
  for (int a = 0; a < 9; ++a) {
    for (int b = 0; b < 9; ++b) pts.emplace_back(-1 + 0.25 * a, -1 + 0.25 * b);
  }
  using Bits = std::bitset<81>;
  std::vector<Bits> compatible(81);
  for (std::size_t i = 0; i < 81; ++i) {
    for (std::size_t j = 0; j < 81; ++j) {
      const double d = 0.5 * (std::fabs(pts[i].first - pts[j].first) + std::fabs(pts[i].second - pts[j].second));
      if (i != j && d > 0.5 + 1e-12) compatible[i].set(j);
    }
  }
  std::size_t best = 0;
  std::function<void(Bits, std::size_t)> rec = [&](Bits cand, std::size_t size) {
    if (size + cand.count() <= best) return;
    if (cand.none()) {
      best = std::max(best, size);
      return;
    }
    std::size_t v = 0;
    while (!cand.test(v)) ++v;
    rec(cand & compatible[v], size + 1);
    cand.reset(v);
    rec(cand, size);
  };
  Bits all;
  all.set();
  rec(all, 0);
  CHECK(best == 8);
  CHECK(greedy == best);
}

TEST_CASE("cube packing meets the volume bound at n=4, eps=1/8") {
  auto mu = Distribution::uniform(4);
  const std::size_t count = cube_packing_lower(0.125, 4, 0.125, FnClass::full_cube(4, -1, 1), mu);
  CHECK(std::log2(static_cast<double>(count)) >= 4.0 * std::log2(1.0 / (std::exp(1.0) * 0.125)));
}
