#include <cmath>
#include <vector>

#include "doctest.h"
#include "oi/constructions.hpp"
#include "oi/gf2.hpp"
#include "oi/learners.hpp"

using namespace oi;

TEST_CASE("hadamard instance order") {
  CHECK(hadamard_order(0.45) == 2);
  CHECK(hadamard_order(0.3) == 4);
  CHECK(hadamard_order(0.2) == 8);
  CHECK_THROWS_AS(hadamard_order(0.5), Error);
  auto inst = make_hadamard_instance(0.3);
  CHECK(inst.columns.members().size() == 4);
  CHECK(inst.cube.domain_size() == 4);
  CHECK(sweep_grid_step(2, 1u << 20) == 0.125);
  CHECK(sweep_grid_step(8, 1u << 20) == 0.5);
}

TEST_CASE("log-log slope fit") {
  std::vector<double> x{1, 2, 4}, y{3, 12, 48};
  CHECK(fit_loglog_slope(x, y) == doctest::Approx(2.0));
}

TEST_CASE("three-constant instance") {
  auto inst = make_erm_failure_3const(5);
  const auto& ps = inst.predictors.members();
  CHECK(dual_norm(ps[0] - ps[1], inst.distinguishers, inst.mu) == doctest::Approx(0.5));
  CHECK(dual_norm(ps[2] - ps[1], inst.distinguishers, inst.mu) == doctest::Approx(0.5));
  CHECK(dual_norm(ps[0] - ps[2], inst.distinguishers, inst.mu) == doctest::Approx(1.0));
  CHECK(covering_exact(inst.predictors, inst.distinguishers, inst.mu, 1.0 / 6.0).size == 3);

  LearnParams lp;
  lp.epsilon = 1.0 / 3.0;
  lp.n = 10;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto s = sample(ps[1], inst.mu, 10, seed);
    std::size_t ones = 0;
    for (const auto& e : s) ones += e.outcome;
    const double n = 10.0, np = static_cast<double>(ones);
    for (std::size_t b = 0; b < 3; ++b) {
      const double bv = 0.5 * static_cast<double>(b);
      CHECK(empirical_loss(ps[b], inst.distinguishers, s) * n == doctest::Approx(np + bv * (n - 2 * np)));
    }
    auto r = erm_learn(inst.predictors, inst.distinguishers, inst.mu, lp, s);
    if (2 * ones < 10) CHECK(r.index == 0);
    if (2 * ones > 10) CHECK(r.index == 2);
  }
}

TEST_CASE("parity-sets instance") {
  const std::size_t n = 4, m = 200;
  auto inst = make_erm_failure_parity_sets(n, m);
  const auto& ps = inst.predictors.members();
  CHECK(inst.domain.size() == m + 3);
  CHECK(inst.domain.label(0) == "-1");
  CHECK(inst.domain.label(3) == "1");
  const double expect[4][4] = {{0, 0, 0, 0}, {0, 0, 0, 1}, {1, 1, 0, 0}, {0, 1, 1, 1}};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t x = 0; x < 3; ++x) CHECK(ps[i][x] == expect[i][x]);
    for (std::size_t x = 3; x < m + 3; ++x) CHECK(ps[i][x] == expect[i][3]);
  }
  CHECK(inst.mu[0] == doctest::Approx(1.0 / 6.0));
  CHECK(inst.mu[5] == doctest::Approx(1.0 / (2.0 * m)));
  CHECK(advantage(ps[0], ps[1], inst.distinguishers, inst.mu) == doctest::Approx(0.5 * n / m).epsilon(1e-12));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      if (i == 0 && j == 1) continue;
      CHECK(advantage(ps[i], ps[j], inst.distinguishers, inst.mu) >= 1.0 / 3.0 - 1e-12);
    }
  }
  CHECK(l1_error(ps[1], ps[0], inst.mu) == doctest::Approx(0.5));
  CHECK(l1_error(ps[2], ps[0], inst.mu) == doctest::Approx(1.0 / 3.0));
  CHECK(l1_error(ps[3], ps[0], inst.mu) == doctest::Approx(5.0 / 6.0));
  CHECK(inst.cover == std::vector<std::size_t>{1, 2, 3});
  CHECK(is_covering(inst.predictors, inst.distinguishers, inst.mu, 0.125, inst.cover));
  CHECK_THROWS_AS(make_erm_failure_parity_sets(10, 100), Error);
}

TEST_CASE("separation instance structure") {
  auto inst = make_separation_instance(2);
  CHECK(inst.distinguishers.cardinality().value() == 4);
  CHECK(inst.mu.size() == 5);
  CHECK(inst.mu[0] == doctest::Approx(1.0 / 3.0));
  for (unsigned m : {3u, 8u}) {
    auto sep = make_separation_instance(m);
    const std::size_t cube = std::size_t{1} << m;
    auto ds = sep.distinguishers.materialize();
    for (std::size_t a = 0; a < cube; a += (m == 8 ? 37 : 1)) {
      for (std::size_t b = 0; b < cube; ++b) {
        double s = 0.0;
        for (std::size_t u = 0; u < cube; ++u) s += ds[a][1 + u] * ds[b][1 + u];
        CHECK(s / static_cast<double>(cube) == (a == b ? 1.0 : 0.0));
      }
    }
  }
}

TEST_CASE("parity predictors sit at advantage 1/6 from p_2") {
  auto inst = make_separation_instance(5);
  const auto& p2 = inst.predictors.members()[1];
  auto ds = inst.distinguishers.materialize();
  for (std::uint64_t s : {0u, 1u, 7u, 19u, 31u}) {
    auto pt = predictor_from_boolean(parity_truth(5, s, false));
    CHECK(advantage(pt, p2, inst.distinguishers, inst.mu) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(inner_product(pt - p2, ds[s], inst.mu) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  }
  auto ones = predictor_from_boolean(std::vector<std::uint8_t>(8, 0));
  CHECK(ones[0] == 0.5);
  CHECK(ones[3] == 1.0);
  auto zeros = predictor_from_boolean(std::vector<std::uint8_t>(8, 1));
  CHECK(zeros[3] == 0.0);
}

TEST_CASE("closed-form list distances match the generic dual norm") {
  CounterRng rng(44);
  for (unsigned m : {1u, 2u, 4u, 6u}) {
    auto inst = make_separation_instance(m);
    const std::size_t cube = std::size_t{1} << m;
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<double> v(cube + 1);
      for (double& x : v) x = rng.uniform();
      Fn p(v, FnKind::Predictor);
      for (bool anti : {false, true}) {
        auto fast = parity_list_distances(inst, p, anti);
        for (std::uint64_t s = 0; s < cube; ++s) {
          auto pf = predictor_from_boolean(parity_truth(m, s, anti));
          CHECK(fast[s] == doctest::Approx(dual_norm(pf - p, inst.distinguishers, inst.mu)).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("candidate bound: at most 64 parities near a predictor with p(bottom) <= 1/2") {
  auto inst = make_separation_instance(8);
  CounterRng rng(90);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(257);
    for (double& x : v) x = rng.uniform();
    v[0] = 0.5 * rng.uniform();
    auto d = parity_list_distances(inst, Fn(v, FnKind::Predictor), false);
    std::size_t count = 0;
    for (double x : d) count += x <= 1.0 / 6.0 + 1.0 / 8.0 + 1e-12;
    CHECK(count <= 64);
  }
}

TEST_CASE("list reduction with an oracle learner keeps the target") {
  for (bool anti : {false, true}) {
    ListInstance li;
    li.m = 6;
    li.n = 20;
    li.target = parity_truth(6, 45, anti);
    li.k = 64;
    auto oracle = [&](const Sample&, const SeparationInstance&) { return predictor_from_boolean(li.target); };
    auto r = run_list_reduction(oracle, li, 3);
    CHECK(r.target_in_list);
    CHECK(r.success);
  }
  // A non-parity target is in L symbolically.
  ListInstance li;
  li.m = 3;
  li.n = 5;
  li.target = {1, 0, 0, 0, 0, 0, 0, 0};
  auto half = [](const Sample&, const SeparationInstance& s) {
    return Fn::constant(s.mu.size(), 0.5, FnKind::Predictor);
  };
  CHECK(run_list_reduction(half, li, 1).target_in_list);
}

TEST_CASE("gf2 rank and solution counts match enumeration") {
  CounterRng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const unsigned m = 5;
    const std::size_t n = rng.below(7);
    std::vector<std::uint64_t> rows(n);
    std::vector<std::uint8_t> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      rows[i] = rng.below(32);
      rhs[i] = static_cast<std::uint8_t>(rng.below(2));
    }
    std::uint64_t count = 0;
    for (std::uint64_t s = 0; s < 32; ++s) {
      bool ok = true;
      for (std::size_t i = 0; i < n; ++i) ok = ok && gf2::dot(s, rows[i]) == rhs[i];
      count += ok;
    }
    CHECK(gf2::solution_count(rows, rhs, m) == count);
    // Rank via the homogeneous system: 2^(m - rank) solutions.
    CHECK(gf2::solution_count(rows, std::vector<std::uint8_t>(n, 0), m) == (std::uint64_t{1} << (m - gf2::rank(rows))));
  }
}

TEST_CASE("parity posterior check") {
  auto zero = parity_posterior_check(4, 0, 1, 3);
  for (const auto& d : zero.draws) CHECK(d.counted_parities == 16);
  auto r = parity_posterior_check(6, 3, 7, 200);
  CHECK(r.elimination_agrees);
  CHECK(r.counts_exact);
  CHECK(r.independent > 150);
}
