#include "oi/constructions.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "oi/gf2.hpp"

namespace oi {

// ---------------------------------------------------------------------------
// Hadamard tightness

std::size_t hadamard_order(double eps) {
  require(eps > 0.0 && eps < 0.5, ErrorKind::Argument, "Hadamard instance needs eps in (0, 1/2)");
  const double limit = 1.0 / (2.0 * eps * eps);
  std::size_t m = 1;
  while (static_cast<double>(2 * m) <= limit) m *= 2;
  return m;
}

HadamardInstance make_hadamard_instance(double eps, double grid_step) {
  const std::size_t m = hadamard_order(eps);
  return HadamardInstance{eps, m, Distribution::uniform(m), FnClass::grid(m, -1.0, 1.0, grid_step),
                          hadamard_class(m)};
}

double sweep_grid_step(std::size_t m, std::size_t grid_cap) {
  for (double step : {0.125, 0.25, 0.5, 1.0}) {
    const double levels = 2.0 / step + 1.0;
    if (std::pow(levels, static_cast<double>(m)) <= static_cast<double>(grid_cap)) return step;
  }
  fail(ErrorKind::CapExceeded, "no sweep grid fits " + std::to_string(grid_cap) + " points at m = " + std::to_string(m));
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::Argument, "slope fit needs two or more points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, ErrorKind::Argument, "log-log fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  require(sxx > 0.0, ErrorKind::Argument, "slope fit needs distinct x values");
  return sxy / sxx;
}

SweepResult hadamard_sweep(const std::vector<double>& eps_values, const SearchCaps& caps) {
  SweepResult out;
  std::vector<double> inv, lhs, ratio;
  for (double eps : eps_values) {
    const std::size_t m = hadamard_order(eps);
    const double step = sweep_grid_step(m, caps.grid_points);
    const auto inst = make_hadamard_instance(eps, step);
    SweepRow row;
    row.epsilon = eps;
    row.m = m;
    row.grid_step = step;
    row.packing = cube_packing_lower(eps, m, step, FnClass::hadamard(m), inst.mu, -1.0, 1.0, caps);
    row.lhs = std::log2(static_cast<double>(row.packing));
    row.rhs = std::log2(static_cast<double>(covering_exact(inst.columns, inst.cube, inst.mu, eps / 8.0, caps).size));
    row.ratio = row.lhs / (1.0 + row.rhs);
    out.rows.push_back(row);
    inv.push_back(1.0 / eps);
    lhs.push_back(row.lhs);
    ratio.push_back(row.ratio);
  }
  if (out.rows.size() >= 2 && std::all_of(lhs.begin(), lhs.end(), [](double v) { return v > 0.0; })) {
    out.exponent = fit_loglog_slope(inv, lhs);
    out.ratio_exponent = fit_loglog_slope(inv, ratio);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ERM failure instances

ErmInstance make_erm_failure_3const(std::size_t size) {
  require(size >= 1, ErrorKind::Argument, "instance needs at least one individual");
  std::vector<Fn> ps;
  for (double b : {0.0, 0.5, 1.0}) ps.push_back(Fn::constant(size, b, FnKind::Predictor));
  return ErmInstance{Domain::indexed(size), Distribution::uniform(size), FnClass::explicit_members(std::move(ps)),
                     FnClass::full_cube(size, -1.0, 1.0), {}};
}

ErmInstance make_erm_failure_parity_sets(std::size_t n, std::size_t m) {
  require(n >= 1, ErrorKind::Argument, "support budget n must be positive");
  require(m >= 50 * n, ErrorKind::Precondition, "instance needs m >= 50 n so that n/(2m) <= 1/100");
  const std::size_t size = m + 3;
  std::vector<std::string> labels{"-1", "-2", "-3"};
  for (std::size_t i = 1; i <= m; ++i) labels.push_back(std::to_string(i));
  std::vector<double> w(size, 1.0 / (2.0 * static_cast<double>(m)));
  w[0] = w[1] = w[2] = 1.0 / 6.0;

  // Values on (-1, -2, -3) and on the block {1..m}.
  const double table[4][4] = {{0, 0, 0, 0}, {0, 0, 0, 1}, {1, 1, 0, 0}, {0, 1, 1, 1}};
  std::vector<Fn> ps;
  for (const auto& row : table) {
    std::vector<double> v(size, row[3]);
    v[0] = row[0];
    v[1] = row[1];
    v[2] = row[2];
    ps.emplace_back(std::move(v), FnKind::Predictor);
  }
  std::vector<std::size_t> free(m);
  for (std::size_t i = 0; i < m; ++i) free[i] = 3 + i;
  return ErmInstance{Domain(std::move(labels)), Distribution(std::move(w)), FnClass::explicit_members(std::move(ps)),
                     FnClass::support_bounded(size, {0, 1, 2}, std::move(free), n), {1, 2, 3}};
}

// ---------------------------------------------------------------------------
// Separation instance

SeparationInstance make_separation_instance(unsigned m) {
  require(m >= 1 && m <= 20, ErrorKind::Argument, "separation instance needs 1 <= m <= 20");
  const std::size_t cube = std::size_t{1} << m;
  std::vector<double> w(cube + 1, 2.0 / (3.0 * static_cast<double>(cube)));
  w[0] = 1.0 / 3.0;
  std::vector<double> p1(cube + 1, 0.5);
  std::vector<double> p2(cube + 1, 0.5);
  p1[0] = 0.0;
  p2[0] = 1.0;
  return SeparationInstance{
      m, Distribution(std::move(w)),
      FnClass::explicit_members({Fn(std::move(p1), FnKind::Predictor), Fn(std::move(p2), FnKind::Predictor)}),
      FnClass::parity(m, true)};
}

std::vector<std::uint8_t> parity_truth(unsigned m, std::uint64_t s, bool anti) {
  const std::size_t cube = std::size_t{1} << m;
  require(s < cube, ErrorKind::Argument, "parity mask outside {0,1}^m");
  std::vector<std::uint8_t> t(cube);
  for (std::size_t u = 0; u < cube; ++u) t[u] = static_cast<std::uint8_t>(gf2::dot(s, u) ^ (anti ? 1u : 0u));
  return t;
}

Fn predictor_from_boolean(const std::vector<std::uint8_t>& truth) {
  require(!truth.empty() && std::has_single_bit(truth.size()), ErrorKind::Argument,
          "truth table size must be a power of two");
  std::vector<double> v(truth.size() + 1);
  v[0] = 0.5;
  for (std::size_t u = 0; u < truth.size(); ++u) v[1 + u] = truth[u] ? 0.0 : 1.0;
  return Fn(std::move(v), FnKind::Predictor);
}

std::vector<double> parity_list_distances(const SeparationInstance& inst, const Fn& p, bool anti) {
  const auto e = embed(p.values(), inst.distinguishers, inst.mu);
  const std::size_t cube = e.size();
  std::vector<double> b(cube);
  for (std::size_t s = 0; s < cube; ++s) b[s] = 1.0 / 6.0 - e[s];
  // Two largest |b(S)| over S != 0, to exclude the one at S = T.
  std::size_t top1 = 0;
  double v1 = -1.0, v2 = -1.0;
  for (std::size_t s = 1; s < cube; ++s) {
    const double a = std::fabs(b[s]);
    if (a > v1) {
      v2 = v1;
      v1 = a;
      top1 = s;
    } else if (a > v2) {
      v2 = a;
    }
  }
  const double third = 1.0 / 3.0;
  const double sign = anti ? -1.0 : 1.0;
  std::vector<double> out(cube);
  for (std::size_t t = 0; t < cube; ++t) {
    double best;
    if (t == 0) {
      best = std::fabs(b[0] + third + sign * third);
      if (cube > 1) best = std::max(best, v1);
    } else {
      best = std::max(std::fabs(b[0] + third), std::fabs(b[t] + sign * third));
      const double rest = t == top1 ? v2 : v1;
      if (rest >= 0.0) best = std::max(best, rest);
    }
    out[t] = best;
  }
  return out;
}

namespace {

// (is parity or anti-parity, mask, anti) for a truth table.
struct Classified {
  bool structured = false;
  std::uint64_t mask = 0;
  bool anti = false;
};

Classified classify(unsigned m, const std::vector<std::uint8_t>& t) {
  Classified c;
  c.anti = t[0] != 0;
  for (unsigned i = 0; i < m; ++i) {
    if ((t[std::size_t{1} << i] != 0) != c.anti) c.mask |= std::uint64_t{1} << i;
  }
  c.structured = parity_truth(m, c.mask, c.anti) == t;
  return c;
}

}  // namespace

ListReductionResult run_list_reduction(const SeparationLearner& learner, const ListInstance& inst,
                                       std::uint64_t seed) {
  require(inst.m >= 1 && inst.m <= 14, ErrorKind::Argument, "list reduction supports 1 <= m <= 14");
  const std::size_t cube = std::size_t{1} << inst.m;
  require(inst.target.size() == cube, ErrorKind::Argument, "target truth table must have 2^m entries");
  const auto sep = make_separation_instance(inst.m);

  CounterRng rng(seed);
  std::vector<Example> ex(inst.n);
  for (auto& e : ex) {
    const std::size_t u = rng.below(cube);
    const std::uint8_t v = inst.target[u];
    const double r = rng.uniform();
    if (r < 1.0 / 6.0) {
      e = {0, 0};
    } else if (r < 1.0 / 3.0) {
      e = {0, 1};
    } else {
      e = {1 + u, static_cast<std::uint8_t>(1 - v)};
    }
  }
  Fn p = learner(Sample(std::move(ex), cube + 1), sep);
  check_same_domain(p.size(), cube + 1, "list reduction learner output");

  const double radius = 1.0 / 6.0 + 1.0 / 8.0 + kCoverSlack;
  ListReductionResult r{p, {}, {}, false, false};
  const auto dp = parity_list_distances(sep, p, false);
  const auto da = parity_list_distances(sep, p, true);
  for (std::size_t s = 0; s < cube; ++s) {
    if (dp[s] <= radius) r.parities.push_back(s);
    if (da[s] <= radius) r.antiparities.push_back(s);
  }
  const auto c = classify(inst.m, inst.target);
  if (!c.structured) {
    r.target_in_list = true;
  } else {
    const auto& list = c.anti ? r.antiparities : r.parities;
    r.target_in_list = std::binary_search(list.begin(), list.end(), c.mask);
  }
  r.success = r.target_in_list && std::min(r.parities.size(), r.antiparities.size()) <= inst.k;
  return r;
}

PosteriorReport parity_posterior_check(unsigned m, std::size_t n, std::uint64_t seed, std::size_t trials) {
  require(m >= 1 && m <= 20, ErrorKind::Argument, "posterior check supports 1 <= m <= 20");
  require(n <= m, ErrorKind::Argument, "posterior check needs n <= m");
  const std::uint64_t cube = std::uint64_t{1} << m;
  PosteriorReport rep;
  rep.m = m;
  rep.n = n;
  const CounterRng root(seed);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    CounterRng rng = root.split(trial);
    const std::uint64_t s = rng.below(cube);
    const bool anti = rng.bernoulli(0.5);
    std::vector<std::uint64_t> rows(n);
    std::vector<std::uint8_t> v(n), flipped(n);
    for (std::size_t i = 0; i < n; ++i) {
      rows[i] = rng.below(cube);
      v[i] = static_cast<std::uint8_t>(gf2::dot(s, rows[i]) ^ (anti ? 1u : 0u));
      flipped[i] = static_cast<std::uint8_t>(1 - v[i]);
    }
    PosteriorDraw d;
    d.independent = gf2::rank(rows) == n;
    // A parity S' is consistent when <S', u_i> = v_i; an anti-parity when <S', u_i> = 1 - v_i.
    d.predicted_parities = gf2::solution_count(rows, v, m);
    d.predicted_antiparities = gf2::solution_count(rows, flipped, m);
    for (std::uint64_t cand = 0; cand < cube; ++cand) {
      bool par = true, ap = true;
      for (std::size_t i = 0; i < n && (par || ap); ++i) {
        const unsigned bit = gf2::dot(cand, rows[i]);
        par = par && bit == v[i];
        ap = ap && bit != v[i];
      }
      d.counted_parities += par;
      d.counted_antiparities += ap;
    }
    rep.elimination_agrees = rep.elimination_agrees && d.predicted_parities == d.counted_parities &&
                             d.predicted_antiparities == d.counted_antiparities;
    if (d.independent) {
      ++rep.independent;
      const std::uint64_t expect = std::uint64_t{1} << (m - n);
      rep.counts_exact = rep.counts_exact && d.counted_parities == expect && d.counted_antiparities == expect;
    }
    rep.draws.push_back(d);
  }
  return rep;
}

}  // namespace oi
