// Experiment catalog. Every experiment produces rows; aggregates are computed
// from rows alone by summarize(), so a report can always be re-derived.

#include <algorithm>
#include <cmath>
#include <map>

#include "oi/constructions.hpp"
#include "oi/error.hpp"
#include "oi/harness.hpp"
#include "oi/io.hpp"
#include "oi/learners.hpp"

namespace oi::harness {

namespace {

using Rows = std::vector<ordered_json>;

template <typename T>
T prm(const ExperimentConfig& c, const char* key, T fallback) {
  if (!c.params.contains(key)) return fallback;
  try {
    return c.params.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Argument, std::string("param '") + key + "': " + e.what());
  }
}

Distribution random_distribution(std::size_t n, CounterRng& rng) {
  std::vector<double> w(n);
  for (double& x : w) x = 0.05 + rng.uniform();
  return Distribution(std::move(w));
}

Fn random_predictor(std::size_t n, CounterRng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform();
  return Fn(std::move(v), FnKind::Predictor);
}

Fn random_distinguisher(std::size_t n, CounterRng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
  return Fn(std::move(v), FnKind::Distinguisher);
}

FnClass random_class(std::size_t size, std::size_t n, CounterRng& rng, bool predictors) {
  std::vector<Fn> m;
  for (std::size_t i = 0; i < size; ++i) m.push_back(predictors ? random_predictor(n, rng) : random_distinguisher(n, rng));
  return FnClass::explicit_members(std::move(m));
}

LearnParams learn_params(double eps, double delta, std::size_t n, std::uint64_t seed) {
  LearnParams p;
  p.epsilon = eps;
  p.delta = delta;
  p.n = n;
  p.seed = seed;
  p.validate();
  return p;
}

// ---- aggregate helpers ------------------------------------------------------

bool truthy(const ordered_json& v) { return v.is_boolean() ? v.get<bool>() : v.get<double>() != 0.0; }

template <typename Pred>
std::size_t count_if(const Rows& rows, Pred pred) {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), pred));
}

std::size_t count_true(const Rows& rows, const char* col, const char* kind = nullptr) {
  return count_if(rows, [&](const ordered_json& r) {
    return (!kind || r.at("kind") == kind) && truthy(r.at(col));
  });
}

std::size_t count_kind(const Rows& rows, const char* kind) {
  return count_if(rows, [&](const ordered_json& r) { return r.at("kind") == kind; });
}

double max_of(const Rows& rows, const char* col, const char* kind = nullptr, double init = 0.0) {
  double m = init;
  for (const auto& r : rows) {
    if (kind && r.at("kind") != kind) continue;
    m = std::max(m, r.at(col).get<double>());
  }
  return m;
}

double mean_of(const Rows& rows, const char* col) {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.at(col).get<double>();
  return s / static_cast<double>(rows.size());
}

void add_rate(ordered_json& agg, const std::string& prefix, std::size_t successes, std::size_t trials) {
  const auto iv = wilson(successes, trials);
  agg[prefix + "successes"] = successes;
  agg[prefix + "trials"] = trials;
  agg[prefix + "rate"] = trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
  agg[prefix + "wilson_lower"] = iv.lo;
  agg[prefix + "wilson_upper"] = iv.hi;
}

ordered_json base_row(std::size_t t, const CounterRng& rng) { return {{"trial", t}, {"stream", rng.stream()}}; }

// ---- adv-vs-l1 --------------------------------------------------------------

Rows run_adv_vs_l1(const ExperimentConfig& c) {
  const auto n = prm<std::size_t>(c, "domainSize", 20);
  const auto dsize = prm<std::size_t>(c, "explicitSize", 8);
  const auto cube = FnClass::full_cube(n, -1.0, 1.0);
  return run_trials(c.trials, c.workers, c.seed, [&](std::size_t t, CounterRng& rng) {
    const auto mu = random_distribution(n, rng);
    const auto p1 = random_predictor(n, rng);
    const auto p2 = random_predictor(n, rng);
    const auto d = random_class(dsize, n, rng, false);
    const double a = advantage(p1, p2, cube, mu);
    const double l1 = l1_error(p1, p2, mu);
    const double ae = advantage(p1, p2, d, mu);
    auto row = base_row(t, rng);
    row["adv_cube"] = a;
    row["l1"] = l1;
    row["abs_diff"] = std::fabs(a - l1);
    row["adv_explicit"] = ae;
    row["explicit_ok"] = ae <= l1 + 1e-12;
    return row;
  });
}

ordered_json sum_adv_vs_l1(const ExperimentConfig&, const Rows& rows) {
  ordered_json a;
  a["trials"] = rows.size();
  a["max_abs_diff"] = max_of(rows, "abs_diff");
  a["explicit_violations"] = rows.size() - count_true(rows, "explicit_ok");
  a["mean_l1"] = mean_of(rows, "l1");
  return a;
}

// ---- transform-mc -----------------------------------------------------------

Rows run_transform_mc(const ExperimentConfig& c) {
  const auto n = prm<std::size_t>(c, "domainSize", 6);
  const auto pairs = prm<std::size_t>(c, "pairs", 100000);
  require(pairs >= 2, ErrorKind::Argument, "pairs must be at least 2");
  return run_trials(c.trials, c.workers, c.seed, [&](std::size_t t, CounterRng& rng) {
    std::vector<double> a1(n), a0(n);
    for (std::size_t x = 0; x < n; ++x) {
      a1[x] = rng.uniform();
      a0[x] = rng.uniform();
    }
    const RandomizedDistinguisher d(a1, a0);
    const auto mu = random_distribution(n, rng);
    const auto p1 = random_predictor(n, rng);
    const auto p2 = random_predictor(n, rng);
    const double exact = inner_product(transform_distinguisher(d), p1 - p2, mu);
    auto game = [&](const Fn& p) {
      std::size_t acc = 0;
      for (std::size_t i = 0; i < pairs; ++i) {
        const std::size_t x = mu.draw(rng);
        const bool o = rng.bernoulli(p[x]);
        acc += rng.bernoulli(o ? d.accept_if_one[x] : d.accept_if_zero[x]) ? 1 : 0;
      }
      return static_cast<double>(acc) / static_cast<double>(pairs);
    };
    const double r1 = game(p1);
    const double r2 = game(p2);
    const double np = static_cast<double>(pairs);
    const double se = std::sqrt(r1 * (1 - r1) / np + r2 * (1 - r2) / np);
    auto row = base_row(t, rng);
    row["exact"] = exact;
    row["estimate"] = r1 - r2;
    row["se"] = se;
    row["abs_exact"] = std::fabs(exact);
    row["within"] = std::fabs((r1 - r2) - exact) <= 3.0 * se;
    return row;
  });
}

ordered_json sum_transform_mc(const ExperimentConfig&, const Rows& rows) {
  ordered_json a;
  const auto w = count_true(rows, "within");
  a["trials"] = rows.size();
  a["within_count"] = w;
  a["within_fraction"] = rows.empty() ? 0.0 : static_cast<double>(w) / static_cast<double>(rows.size());
  return a;
}

// ---- covering-algebra -------------------------------------------------------

FnClass scaled_class(const FnClass& cls, double a) {
  std::vector<Fn> out;
  for (const auto& f : cls.members()) out.push_back(f.scaled(a).as(FnKind::Generic, cls.bound() * a));
  return FnClass::explicit_members(std::move(out), FnKind::Generic, cls.bound() * a);
}

Rows run_covering_algebra(const ExperimentConfig& c) {
  const auto max_domain = prm<std::size_t>(c, "maxDomain", 6);
  const auto max_f2 = prm<std::size_t>(c, "maxF2", 10);
  const auto max_f1 = prm<std::size_t>(c, "maxF1", 6);
  const auto hull_samples = prm<std::size_t>(c, "hullSamples", 20);
  require(max_domain >= 2 && max_f2 >= 2 && max_f1 >= 1, ErrorKind::Argument, "covering-algebra sizes too small");
  const auto& caps = c.constants.caps;
  return run_trials(c.trials, c.workers, c.seed, [&](std::size_t t, CounterRng& rng) {
    const std::size_t n = 2 + rng.below(max_domain - 1);
    const std::size_t s2 = 2 + rng.below(max_f2 - 1);
    const std::size_t s1 = 1 + rng.below(max_f1);
    const double eps = 0.02 + 0.18 * rng.uniform();
    const auto mu = random_distribution(n, rng);
    const auto f2 = random_class(s2, n, rng, true);
    const auto f1 = random_class(s1, n, rng, false);

    const std::size_t base = covering_exact(f2, f1, mu, eps, caps).size;
    std::vector<Fn> sub(f1.members().begin(), f1.members().begin() + static_cast<long>((s1 + 1) / 2));
    const std::size_t cover_sub = covering_exact(f2, FnClass::explicit_members(std::move(sub)), mu, eps, caps).size;

    std::vector<double> shift(n);
    for (double& v : shift) v = 2.0 * rng.uniform() - 1.0;
    const Fn fshift(shift, FnKind::Generic);
    std::vector<Fn> moved;
    for (const auto& p : f2.members()) moved.push_back((p + fshift).as(FnKind::Generic, 2.0));
    const std::size_t cover_shift =
        covering_exact(FnClass::explicit_members(std::move(moved), FnKind::Generic, 2.0), f1, mu, eps, caps).size;

    std::size_t scale_dev = 0;
    for (double a : {0.5, 2.0}) {
      for (double b : {0.5, 2.0}) {
        const std::size_t s = covering_exact(scaled_class(f2, b), scaled_class(f1, a), mu, a * b * eps, caps).size;
        scale_dev = std::max(scale_dev, s > base ? s - base : base - s);
      }
    }

    // Symmetric convex hull: sampled hull points never raise the norm of a difference.
    double hull_excess = -std::numeric_limits<double>::infinity();
    const auto& m1 = f1.members();
    const auto& m2 = f2.members();
    for (std::size_t k = 0; k < hull_samples; ++k) {
      std::vector<double> w(s1);
      double tot = 0.0;
      for (double& x : w) tot += (x = rng.uniform());
      std::vector<double> g(n, 0.0);
      for (std::size_t i = 0; i < s1; ++i) {
        const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
        for (std::size_t x = 0; x < n; ++x) g[x] += sign * w[i] / tot * m1[i][x];
      }
      const Fn gf(g, FnKind::Generic);
      const Fn diff = m2[rng.below(s2)] - m2[rng.below(s2)];
      hull_excess = std::max(hull_excess, std::fabs(inner_product(diff, gf, mu)) - dual_norm(diff, f1, mu));
    }

    const std::size_t pack = packing_lower(f2, f1, mu, eps);
    auto row = base_row(t, rng);
    row["domain"] = n;
    row["f2_size"] = s2;
    row["f1_size"] = s1;
    row["epsilon"] = eps;
    row["cover"] = base;
    row["cover_sub"] = cover_sub;
    row["cover_shift"] = cover_shift;
    row["scale_deviation"] = scale_dev;
    row["hull_excess"] = hull_samples ? hull_excess : 0.0;
    row["packing"] = pack;
    return row;
  });
}

ordered_json sum_covering_algebra(const ExperimentConfig&, const Rows& rows) {
  ordered_json a;
  a["trials"] = rows.size();
  a["item1_violations"] = count_if(rows, [](const ordered_json& r) { return r["cover_sub"] > r["cover"]; });
  a["item2_max_excess"] = max_of(rows, "hull_excess", nullptr, -1.0);
  a["item3_violations"] = count_if(rows, [](const ordered_json& r) { return r["cover_shift"] != r["cover"]; });
  a["item4_violations"] = count_if(rows, [](const ordered_json& r) { return r["scale_deviation"] != 0; });
  a["packing_violations"] = count_if(rows, [](const ordered_json& r) { return r["packing"] > r["cover"]; });
  a["mean_cover"] = mean_of(rows, "cover");
  return a;
}

// ---- duality-sweep ----------------------------------------------------------

Rows run_duality_sweep(const ExperimentConfig& c) {
  const auto max_domain = prm<std::size_t>(c, "maxDomain", 6);
  const auto max_class = prm<std::size_t>(c, "maxClass", 8);
  const auto eps_values = prm<std::vector<double>>(c, "sweepEpsilons", {0.45, 0.3, 0.2});
  require(max_domain >= 2 && max_class >= 1, ErrorKind::Argument, "duality-sweep sizes too small");
  const double cc = c.constants.duality_c;
  Rows rows = run_trials(c.trials, c.workers, c.seed, [&](std::size_t t, CounterRng& rng) {
    const std::size_t n = 2 + rng.below(max_domain - 1);
    const auto f1 = random_class(1 + rng.below(max_class), n, rng, false);
    const auto f2 = random_class(1 + rng.below(max_class), n, rng, false);
    const auto mu = random_distribution(n, rng);
    const double eps = 0.05 + 0.45 * rng.uniform();
    const auto r = duality_check(f1, f2, mu, eps, cc, c.constants.caps);
    auto row = base_row(t, rng);
    row["kind"] = "random";
    row["epsilon"] = eps;
    row["m"] = n;
    row["grid_step"] = nullptr;
    row["packing"] = nullptr;
    row["lhs"] = r.lhs;
    row["rhs"] = r.rhs;
    row["bound"] = r.bound;
    row["holds"] = r.holds;
    return row;
  });
  if (!eps_values.empty()) {
    const auto sweep = hadamard_sweep(eps_values, c.constants.caps);
    for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
      const auto& s = sweep.rows[i];
      ordered_json row{{"trial", i}, {"stream", nullptr}, {"kind", "hadamard"}, {"epsilon", s.epsilon},
                       {"m", s.m},   {"grid_step", s.grid_step}, {"packing", s.packing}, {"lhs", s.lhs},
                       {"rhs", s.rhs}, {"bound", s.ratio}, {"holds", nullptr}};
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

ordered_json sum_duality_sweep(const ExperimentConfig& c, const Rows& rows) {
  ordered_json a;
  a["dualityC"] = c.constants.duality_c;
  a["random_instances"] = count_kind(rows, "random");
  a["random_violations"] = count_kind(rows, "random") - count_true(rows, "holds", "random");
  std::vector<double> inv, lhs, ratio;
  for (const auto& r : rows) {
    if (r["kind"] != "hadamard") continue;
    inv.push_back(1.0 / r["epsilon"].get<double>());
    lhs.push_back(r["lhs"].get<double>());
    ratio.push_back(r["bound"].get<double>());
  }
  if (inv.size() >= 2) {
    a["sweep_exponent"] = fit_loglog_slope(inv, lhs);
    a["sweep_ratio_exponent"] = fit_loglog_slope(inv, ratio);
  }
  return a;
}

// ---- fat-lift ---------------------------------------------------------------

Rows run_fat_lift(const ExperimentConfig& c) {
  const auto cube_max = prm<std::size_t>(c, "cubeMaxN", 6);
  const auto max_domain = prm<std::size_t>(c, "maxDomain", 6);
  const auto max_class = prm<std::size_t>(c, "maxClass", 6);
  require(max_domain >= 2 && max_domain * 2 <= c.constants.caps.fat_domain, ErrorKind::Argument,
          "fat-lift maxDomain must lie in [2, fatDomain / 2]");
  const auto& caps = c.constants.caps;
  Rows rows = run_trials(c.trials, c.workers, c.seed, [&](std::size_t t, CounterRng& rng) {
    const std::size_t n = 2 + rng.below(max_domain - 1);
    const auto d = random_class(2 + rng.below(max_class - 1), n, rng, false);
    const double gamma = 0.05 + 0.3 * rng.uniform();
    const std::size_t k = std::min(n, caps.fat_points);
    auto row = base_row(t, rng);
    row["kind"] = "lift";
    row["n"] = n;
    row["gamma"] = gamma;
    row["max_points"] = k;
    row["fat"] = fat_exact(lift_distinguisher_class(d), gamma, k, caps).dimension;
    row["expected"] = fat_exact(d, gamma, k, caps).dimension;
    return row;
  });
  // Boolean cubes {0,1}^n shatter every subset at any gamma < 1/2.
  std::size_t idx = 0;
  for (std::size_t n = 1; n <= cube_max; ++n) {
    std::vector<Fn> members;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      std::vector<double> v(n);
      for (std::size_t x = 0; x < n; ++x) v[x] = static_cast<double>((mask >> x) & 1U);
      members.emplace_back(std::move(v), FnKind::Predictor);
    }
    const auto cls = FnClass::explicit_members(std::move(members));
    for (double gamma : {0.1, 0.49}) {
      for (std::size_t k : {std::size_t{1}, n > 1 ? n - 1 : 1, n}) {
        if (k > caps.fat_points) continue;
        rows.push_back({{"trial", idx++}, {"stream", nullptr}, {"kind", "cube"}, {"n", n}, {"gamma", gamma},
                        {"max_points", k}, {"fat", fat_exact(cls, gamma, k, caps).dimension},
                        {"expected", std::min(n, k)}});
      }
    }
  }
  return rows;
}

ordered_json sum_fat_lift(const ExperimentConfig&, const Rows& rows) {
  auto mism = [&](const char* kind) {
    return count_if(rows, [&](const ordered_json& r) { return r["kind"] == kind && r["fat"] != r["expected"]; });
  };
  ordered_json a;
  a["cube_cases"] = count_kind(rows, "cube");
  a["cube_mismatches"] = mism("cube");
  a["lift_cases"] = count_kind(rows, "lift");
  a["lift_mismatches"] = mism("lift");
  a["lift_max_fat"] = max_of(rows, "expected", "lift");
  return a;
}

// ---- fat-cover-bridge -------------------------------------------------------

Rows run_fat_cover_bridge(const ExperimentConfig& c) {
  const auto sizes = prm<std::vector<std::size_t>>(c, "sizes", {2, 3, 4});
  const auto eps_values = prm<std::vector<double>>(c, "epsilons", {0.125, 1.0 / 12.0});
  const auto extra_points = prm<std::size_t>(c, "extraPoints", 2);
  const auto extra_members = prm<std::size_t>(c, "extraMembers", 3);
  const double step = c.constants.grid_step;
  require(!sizes.empty() && !eps_values.empty(), ErrorKind::Argument, "fat-cover-bridge needs sizes and epsilons");
  const auto& caps = c.constants.caps;
  return run_trials(c.trials, c.workers, c.seed, [&](std::size_t t, CounterRng& rng) {
    const std::size_t n = sizes[t % sizes.size()];
    const double eps = eps_values[(t / sizes.size()) % eps_values.size()];
    const double g6 = 6.0 * eps;
    require(g6 < 1.0, ErrorKind::Argument, "fat-cover-bridge needs 6 eps < 1");
    const std::size_t dom = n + extra_points;
    // Random witness positions and centers r with r +- 6 eps inside [-1, 1].
    std::vector<std::size_t> pts(dom);
    for (std::size_t i = 0; i < dom; ++i) pts[i] = i;
    for (std::size_t i = dom - 1; i > 0; --i) std::swap(pts[i], pts[rng.below(i + 1)]);
    pts.resize(n);
    std::sort(pts.begin(), pts.end());
    std::vector<double> r(n);
    for (double& x : r) x = (1.0 - g6) * (2.0 * rng.uniform() - 1.0);
    std::vector<Fn> members;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      std::vector<double> v(dom);
      for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
      for (std::size_t i = 0; i < n; ++i) v[pts[i]] = r[i] + (((mask >> i) & 1U) ? g6 : -g6);
      members.emplace_back(std::move(v), FnKind::Distinguisher);
    }
    for (std::size_t e = 0; e < extra_members; ++e) members.push_back(random_distinguisher(dom, rng));
    const auto d = FnClass::explicit_members(std::move(members));
    const auto fat = fat_exact(d, g6, n, caps);
    const auto restricted = restrict_class(d, fat.dimension == n ? fat.witness_points : pts);
    const auto count = cube_packing_lower(eps, n, step, restricted, Distribution::uniform(n), 0.0, 1.0, caps);
    auto row = base_row(t, rng);
    row["n"] = n;
    row["epsilon"] = eps;
    row["grid_step"] = step;
    row["certified"] = fat.dimension;
    row["packing"] = count;
    row["log2_packing"] = std::log2(static_cast<double>(count));
    row["ln_packing"] = std::log(static_cast<double>(count));
    row["bound"] = static_cast<double>(n) / 8.0;
    return row;
  });
}

ordered_json sum_fat_cover_bridge(const ExperimentConfig&, const Rows& rows) {
  ordered_json a;
  a["instances"] = rows.size();
  a["uncertified"] = count_if(rows, [](const ordered_json& r) { return r["certified"] != r["n"]; });
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) margin = std::min(margin, r["ln_packing"].get<double>() - r["bound"].get<double>());
  a["min_margin_ln"] = rows.empty() ? 0.0 : margin;
  return a;
}

// ---- erm-fail-3const --------------------------------------------------------

Rows run_erm_3const(const ExperimentConfig& c) {
  const auto n = prm<std::size_t>(c, "n", 10);
  const auto size = prm<std::size_t>(c, "domainSize", 5);
  const auto eps = prm<double>(c, "epsilon", 1.0 / 3.0);
  const auto inst = make_erm_failure_3const(size);
  const auto& target = inst.predictors.members()[1];
  return run_trials(c.trials, c.workers, c.seed, [&](std::size_t t, CounterRng& rng) {
    const auto s = sample(target, inst.mu, n, rng);
    std::size_t ones = 0;
    for (const auto& e : s) ones += e.outcome;
    const auto r = erm_learn(inst.predictors, inst.distinguishers, inst.mu, learn_params(eps, 0.1, n, t), s,
                             std::nullopt, c.constants.caps);
    auto row = base_row(t, rng);
    row["ones"] = ones;
    row["output"] = r.index;
    row["failure"] = r.index != 1;
    row["consistent"] = 2 * ones == n || r.index != 1;
    row["unbalanced"] = 2 * ones != n;
    return row;
  });
}

ordered_json sum_erm_3const(const ExperimentConfig& c, const Rows& rows) {
  ordered_json a;
  add_rate(a, "failure_", count_true(rows, "failure"), rows.size());
  // All losses tie on balanced samples, so this rate is the tie-break-free failure bound.
  add_rate(a, "unbalanced_", count_true(rows, "unbalanced"), rows.size());
  a["inconsistent"] = rows.size() - count_true(rows, "consistent");
  const double n = static_cast<double>(prm<std::size_t>(c, "n", 10));
  a["failure_lower_bound"] = 1.0 - 1.0 / std::sqrt(n + 1.0);
  return a;
}

// ---- erm-fail-parity --------------------------------------------------------

Rows run_erm_parity(const ExperimentConfig& c) {
  const auto n = prm<std::size_t>(c, "n", 200);
  const auto m = prm<std::size_t>(c, "m", 10000);
  const auto eps = prm<double>(c, "epsilon", 0.25);
  const auto inst = make_erm_failure_parity_sets(n, m);
  const auto& ps = inst.predictors.members();
  const double d01 = advantage(ps[0], ps[1], inst.distinguishers, inst.mu);
  double others = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      if (i == 0 && j == 1) continue;
      others = std::min(others, advantage(ps[i], ps[j], inst.distinguishers, inst.mu));
    }
  }
  const double d02 = advantage(ps[0], ps[2], inst.distinguishers, inst.mu);
  return run_trials(c.trials, c.workers, c.seed, [&](std::size_t t, CounterRng& rng) {
    const auto s = sample(ps[0], inst.mu, n, rng);
    const auto r = erm_learn(inst.predictors, inst.distinguishers, inst.mu, learn_params(eps, 0.1, n, t), s,
                             inst.cover, c.constants.caps);
    auto row = base_row(t, rng);
    row["output"] = r.index;
    row["is_p2"] = r.index == 2;
    row["dist_p0_p1"] = d01;
    row["dist_p0_p2"] = d02;
    row["min_other_dist"] = others;
    return row;
  });
}

ordered_json sum_erm_parity(const ExperimentConfig& c, const Rows& rows) {
  ordered_json a;
  add_rate(a, "p2_", count_true(rows, "is_p2"), rows.size());
  const double n = static_cast<double>(prm<std::size_t>(c, "n", 200));
  const double m = static_cast<double>(prm<std::size_t>(c, "m", 10000));
  if (!rows.empty()) {
    a["dist_p0_p1"] = rows[0]["dist_p0_p1"];
    a["dist_p0_p1_error"] = std::fabs(rows[0]["dist_p0_p1"].get<double>() - 0.5 * n / m);
    a["dist_p0_p2"] = rows[0]["dist_p0_p2"];
    a["min_other_dist"] = rows[0]["min_other_dist"];
  }
  return a;
}

// ---- dcover-realizable / dcover-agnostic ------------------------------------

struct DcoverSetup {
  FnClass p;
  FnClass d;
  Distribution mu;
};

DcoverSetup dcover_setup(const ExperimentConfig& c) {
  if (!c.instance.is_null()) {
    auto inst = io::instance_from_json(c.instance);
    require(inst.predictors && inst.distinguishers && inst.mu, ErrorKind::Argument,
            "dcover instance needs predictors, distinguishers and distribution");
    return {*inst.predictors, *inst.distinguishers, *inst.mu};
  }
  const auto n = prm<std::size_t>(c, "domainSize", 8);
  const auto np = prm<std::size_t>(c, "predictors", 4);
  const auto nd = prm<std::size_t>(c, "distinguishers", 6);
  CounterRng rng = CounterRng(c.seed).split(0xD0C0FFEEULL);
  auto p = random_class(np, n, rng, true);
  auto d = random_class(nd, n, rng, false);
  auto mu = random_distribution(n, rng);
  return {std::move(p), std::move(d), std::move(mu)};
}

Rows run_dcover(const ExperimentConfig& c, bool agnostic) {
  const auto setup = dcover_setup(c);
  const auto eps = prm<double>(c, "epsilon", 0.25);
  const auto delta = prm<double>(c, "delta", 0.1);
  const auto n = prm<std::size_t>(c, "n", 4000);
  const auto& members = setup.p.members();
  const std::size_t dom = setup.mu.size();
  return run_trials(c.trials, c.workers, c.seed, [&](std::size_t t, CounterRng& rng) {
    long target_idx = -1;
    Fn target = agnostic ? random_predictor(dom, rng) : members[rng.below(members.size())];
    if (!agnostic) {
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (members[i].same_values(target)) {
          target_idx = static_cast<long>(i);
          break;
        }
      }
    }
    const auto s = sample(target, setup.mu, n, rng);
    const auto r = dcover_learn(setup.p, setup.d, setup.mu, learn_params(eps, delta, n, t), s, c.constants.caps);
    const double adv = advantage(members[r.index], target, setup.d, setup.mu);
    double opt = std::numeric_limits<double>::infinity();
    for (const auto& q : members) opt = std::min(opt, advantage(q, target, setup.d, setup.mu));
    const double bound = agnostic ? 3.0 * opt + eps : eps;
    auto row = base_row(t, rng);
    row["target"] = target_idx;
    row["output"] = r.index;
    row["adv"] = adv;
    row["opt"] = opt;
    row["bound"] = bound;
    row["success"] = adv <= bound + 1e-12;
    return row;
  });
}

ordered_json sum_rate(const ExperimentConfig&, const Rows& rows) {
  ordered_json a;
  add_rate(a, "success_", count_true(rows, "success"), rows.size());
  return a;
}

// ---- boost-potential --------------------------------------------------------

Rows run_boost_potential(const ExperimentConfig& c) {
  const auto n = prm<std::size_t>(c, "domainSize", 8);
  const auto nd = prm<std::size_t>(c, "distinguishers", 6);
  const auto eps = prm<double>(c, "epsilon", 0.2);
  const auto batch = prm<std::size_t>(c, "batch", 100);
  const std::size_t tb = c.constants.boost_t_base;
  const std::size_t total = boost_rounds(eps, tb) * batch;
  const double drop = eps * eps / 25.0;
  return run_trials(c.trials, c.workers, c.seed, [&](std::size_t t, CounterRng& rng) {
    // Sign-vector tests and near-binary targets keep the gaps large for many rounds.
    std::vector<Fn> signs;
    for (std::size_t i = 0; i < nd; ++i) {
      std::vector<double> v(n);
      for (double& x : v) x = rng.bernoulli(0.5) ? 1.0 : -1.0;
      signs.emplace_back(std::move(v), FnKind::Distinguisher);
    }
    const auto d = FnClass::explicit_members(std::move(signs));
    const auto mu = random_distribution(n, rng);
    std::vector<double> tv(n);
    for (double& x : tv) x = rng.bernoulli(0.5) ? 0.9 + 0.1 * rng.uniform() : 0.1 * rng.uniform();
    const Fn target(std::move(tv), FnKind::Predictor);
    PredictorSource src(target, mu, rng.split(1));
    BoostOptions opt;
    opt.t_base = tb;
    opt.oracle_target = &target;
    opt.oracle_mu = &mu;
    const auto res = boost_learn(d, learn_params(eps, 0.1, total, rng.next_u64()), src, opt);
    std::size_t updates = 0, qualifying = 0, drop_viol = 0, clamp_viol = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    for (const auto& r : res.trace.rounds) {
      if (!r.chosen) continue;
      ++updates;
      if (*r.potential_after > *r.potential_unclamped + 1e-12) ++clamp_viol;
      if (*r.true_gap >= eps / 5.0) {
        ++qualifying;
        const double m = (*r.potential_before - *r.potential_after) - drop;
        min_margin = std::min(min_margin, m);
        if (m < -1e-12) ++drop_viol;
      }
    }
    auto row = base_row(t, rng);
    row["rounds"] = res.trace.rounds.size();
    row["updates"] = updates;
    row["qualifying"] = qualifying;
    row["drop_violations"] = drop_viol;
    row["clamp_violations"] = clamp_viol;
    row["min_drop_margin"] = qualifying ? ordered_json(min_margin) : ordered_json(nullptr);
    row["final_adv"] = advantage(res.predictor, target, d, mu);
    return row;
  });
}

ordered_json sum_boost_potential(const ExperimentConfig&, const Rows& rows) {
  ordered_json a;
  double q = 0, dv = 0, cv = 0, u = 0;
  for (const auto& r : rows) {
    q += r["qualifying"].get<double>();
    dv += r["drop_violations"].get<double>();
    cv += r["clamp_violations"].get<double>();
    u += r["updates"].get<double>();
  }
  a["runs"] = rows.size();
  a["updates"] = u;
  a["qualifying_rounds"] = q;
  a["drop_violations"] = dv;
  a["clamp_violations"] = cv;
  double mm = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    if (!r["min_drop_margin"].is_null()) mm = std::min(mm, r["min_drop_margin"].get<double>());
  }
  a["min_drop_margin"] = std::isfinite(mm) ? ordered_json(mm) : ordered_json(nullptr);
  return a;
}

// ---- boost-endtoend ---------------------------------------------------------

Rows run_boost_endtoend(const ExperimentConfig& c) {
  const auto m = prm<std::size_t>(c, "m", 8);
  const auto eps = prm<double>(c, "epsilon", 0.2);
  const auto delta = prm<double>(c, "delta", 0.1);
  const auto probe_trials = prm<std::size_t>(c, "probeTrials", c.trials);
  const auto n_max = prm<std::size_t>(c, "nMax", std::size_t{1} << 24);
  const std::size_t tb = c.constants.boost_t_base;
  const auto d = hadamard_class(m);
  const auto mu = Distribution::uniform(m);
  const std::size_t n_start = boost_rounds(eps, tb);

  auto run_one = [&](std::size_t n, CounterRng& rng) {
    const auto target = random_predictor(m, rng);
    PredictorSource src(target, mu, rng.split(1));
    BoostOptions opt;
    opt.t_base = tb;
    const auto res = boost_learn(d, learn_params(eps, delta, n, rng.next_u64()), src, opt);
    return std::pair{advantage(res.predictor, target, d, mu), res.trace.rounds.size()};
  };

  Rows rows;
  const std::uint64_t search_seed = CounterRng(c.seed).split(1).next_u64();
  // Probe rows are regenerated per trial so the probe table can be audited.
  std::vector<Rows> probe_rows;
  const auto search = sample_size_search(
      1.0 - delta,
      [&](std::size_t n, std::size_t, CounterRng& rng) { return run_one(n, rng).first <= eps; }, probe_trials,
      search_seed, n_start, n_max, c.workers);
  for (const auto& p : search.probes) {
    rows.push_back({{"phase", "probe"}, {"n", p.n}, {"trial", nullptr}, {"stream", nullptr},
                    {"successes", p.successes}, {"trials", p.trials}, {"adv", nullptr}, {"rounds", nullptr},
                    {"success", nullptr}});
  }
  const std::uint64_t final_seed = CounterRng(c.seed).split(2).next_u64();
  const auto finals = run_trials(c.trials, c.workers, final_seed, [&](std::size_t t, CounterRng& rng) {
    auto row = base_row(t, rng);
    const auto [adv, rounds] = run_one(search.n, rng);
    ordered_json out{{"phase", "final"}, {"n", search.n}, {"trial", t}, {"stream", row["stream"]},
                     {"successes", nullptr}, {"trials", nullptr}, {"adv", adv}, {"rounds", rounds},
                     {"success", adv <= eps}};
    return out;
  });
  rows.insert(rows.end(), finals.begin(), finals.end());
  return rows;
}

ordered_json sum_boost_endtoend(const ExperimentConfig& c, const Rows& rows) {
  ordered_json a;
  const auto delta = prm<double>(c, "delta", 0.1);
  Rows finals;
  ordered_json probes = ordered_json::array();
  for (const auto& r : rows) {
    if (r["phase"] == "final") {
      finals.push_back(r);
    } else {
      const auto iv = wilson(r["successes"].get<std::size_t>(), r["trials"].get<std::size_t>());
      probes.push_back({{"n", r["n"]}, {"successes", r["successes"]}, {"trials", r["trials"]},
                        {"wilson_lower", iv.lo}});
    }
  }
  const bool found = !probes.empty() && probes.back()["wilson_lower"].get<double>() >= 1.0 - delta - 0.02;
  a["search_found"] = found;
  a["n"] = finals.empty() ? ordered_json(nullptr) : finals[0]["n"];
  a["probes"] = probes;
  add_rate(a, "success_", count_true(finals, "success"), finals.size());
  if (!finals.empty()) a["mean_adv"] = mean_of(finals, "adv");
  return a;
}

// ---- mcboost ----------------------------------------------------------------

Rows run_mcboost(const ExperimentConfig& c) {
  const auto n = prm<std::size_t>(c, "domainSize", 6);
  const auto nd = prm<std::size_t>(c, "distinguishers", 3);
  const auto k = prm<std::size_t>(c, "levels", 3);
  const auto eps = prm<double>(c, "epsilon", 0.3);
  const auto batch = prm<std::size_t>(c, "batch", 2000);
  require(n <= 8, ErrorKind::Argument, "mcboost fat checks need domainSize <= 8");
  const std::size_t tb = c.constants.boost_t_base;
  const auto levels = LevelPartition::uniform(k);
  const auto& caps = c.constants.caps;
  return run_trials(c.trials, c.workers, c.seed, [&](std::size_t t, CounterRng& rng) {
    const auto d = random_class(nd, n, rng, false);
    const auto mu = random_distribution(n, rng);
    const auto target = random_predictor(n, rng);
    BoostOptions opt;
    opt.t_base = tb;
    const std::size_t total = boost_rounds(eps, tb) * 50;
    const std::uint64_t s1 = rng.next_u64();
    const CounterRng stream = rng.split(1);
    PredictorSource a(target, mu, stream), b(target, mu, stream);
    const auto r1 = boost_learn(d, learn_params(eps, 0.1, total, s1), a, opt);
    const auto r2 = mc_boost_learn(d, learn_params(eps, 0.1, total, s1), LevelPartition::uniform(1), b, opt);
    bool k1_equal = r1.predictor.same_values(r2.predictor) && r1.trace.rounds.size() == r2.trace.rounds.size();
    for (std::size_t i = 0; k1_equal && i < r1.trace.rounds.size(); ++i) {
      k1_equal = r1.trace.rounds[i].chosen == r2.trace.rounds[i].chosen;
    }

    // Stream from p* = 1/2: the start point is already exact, nothing should fire.
    const auto half = Fn::constant(n, 0.5, FnKind::Predictor);
    PredictorSource hs(half, mu, rng.split(2));
    const auto rh = mc_boost_learn(d, learn_params(eps, 0.1, boost_rounds(eps, tb) * batch, rng.next_u64()), levels,
                                   hs, opt);
    std::size_t fires = 0;
    for (const auto& r : rh.trace.rounds) fires += r.chosen ? 1 : 0;

    const auto p = random_predictor(n, rng);
    const double gamma = 0.05 + 0.25 * rng.uniform();
    const std::size_t fat = fat_exact(d, gamma, n, caps).dimension;
    const std::size_t masked = fat_exact(masked_class(d, p, levels), gamma, n, caps).dimension;
    const double mce = mc_error(p, target, d, mu, levels);
    const double adv = advantage(p, target, d, mu);

    auto row = base_row(t, rng);
    row["k1_equal"] = k1_equal;
    row["noise_fires"] = fires;
    row["gamma"] = gamma;
    row["fat"] = fat;
    row["masked_fat"] = masked;
    row["mc_error"] = mce;
    row["adv"] = adv;
    row["mc_ok"] = mce >= adv / static_cast<double>(k) - 1e-12;
    return row;
  });
}

ordered_json sum_mcboost(const ExperimentConfig&, const Rows& rows) {
  ordered_json a;
  a["trials"] = rows.size();
  a["k1_mismatches"] = rows.size() - count_true(rows, "k1_equal");
  double fires = 0;
  for (const auto& r : rows) fires += r["noise_fires"].get<double>();
  a["noise_fires"] = fires;
  a["masked_violations"] =
      count_if(rows, [](const ordered_json& r) { return r["masked_fat"].get<double>() > r["fat"].get<double>() + 1; });
  a["mc_bound_violations"] = rows.size() - count_true(rows, "mc_ok");
  return a;
}

// ---- zerofat ----------------------------------------------------------------

Rows run_zerofat(const ExperimentConfig& c) {
  const auto n = prm<std::size_t>(c, "domainSize", 8);
  const auto nd = prm<std::size_t>(c, "distinguishers", 6);
  const auto eps = prm<double>(c, "epsilon", 0.25);
  const auto delta = prm<double>(c, "delta", 0.1);
  const auto ns = prm<std::size_t>(c, "n", zero_fat_sample_size(eps, delta));
  const double half_spread = 0.9 * eps / 25.0;
  return run_trials(c.trials, c.workers, c.seed, [&](std::size_t t, CounterRng& rng) {
    std::vector<double> base(n);
    for (double& x : base) x = (1.0 - half_spread) * (2.0 * rng.uniform() - 1.0);
    std::vector<Fn> members;
    for (std::size_t i = 0; i < nd; ++i) {
      std::vector<double> v(base);
      for (double& x : v) x += half_spread * (2.0 * rng.uniform() - 1.0);
      members.emplace_back(std::move(v), FnKind::Distinguisher);
    }
    const auto d = FnClass::explicit_members(std::move(members));
    const auto mu = random_distribution(n, rng);
    const auto target = random_predictor(n, rng);
    const auto s = sample(target, mu, ns, rng);
    const auto r = zero_fat_learn(d, learn_params(eps, delta, ns, t), s);
    const double adv = advantage(r.predictor, target, d, mu);
    auto row = base_row(t, rng);
    row["n"] = ns;
    row["adv"] = adv;
    row["success"] = adv <= eps;
    return row;
  });
}

// ---- easy-agnostic ----------------------------------------------------------

ordered_json easy_trial(const SeparationInstance& inst, double eps, double delta, std::size_t t, CounterRng& rng) {
  const std::size_t dom = inst.mu.size();
  const auto target = random_predictor(dom, rng);
  const std::size_t n = easy_agnostic_sample_size(eps, delta, inst.mu[0]);
  const auto s = sample(target, inst.mu, n, rng);
  const auto p = easy_agnostic_learn(s, dom, 0);
  const double err = l1_error(p, target, inst.mu);
  double opt = std::numeric_limits<double>::infinity();
  for (const auto& q : inst.predictors.members()) opt = std::min(opt, l1_error(q, target, inst.mu));
  auto row = base_row(t, rng);
  row["n"] = n;
  row["error"] = err;
  row["opt"] = opt;
  row["success"] = err <= opt + eps;
  return row;
}

Rows run_easy_agnostic(const ExperimentConfig& c) {
  const auto m = prm<unsigned>(c, "m", 4);
  const auto eps = prm<double>(c, "epsilon", 0.1);
  const auto delta = prm<double>(c, "delta", 0.1);
  const auto inst = make_separation_instance(m);
  return run_trials(c.trials, c.workers, c.seed,
                    [&](std::size_t t, CounterRng& rng) { return easy_trial(inst, eps, delta, t, rng); });
}

// ---- separation-components --------------------------------------------------

Rows run_separation(const ExperimentConfig& c) {
  const auto m = prm<unsigned>(c, "m", 8);
  const auto parseval_cases = prm<std::size_t>(c, "parsevalCases", 10);
  const auto parity_cases = prm<std::size_t>(c, "parityCases", 20);
  const auto list_cases = prm<std::size_t>(c, "listCases", 100);
  const auto post_m = prm<unsigned>(c, "posteriorM", 6);
  const auto post_n = prm<std::size_t>(c, "posteriorN", 3);
  const auto post_trials = prm<std::size_t>(c, "posteriorTrials", 50);
  const auto easy_m = prm<unsigned>(c, "easyM", 4);
  const auto eps = prm<double>(c, "epsilon", 0.1);
  const auto delta = prm<double>(c, "delta", 0.1);
  require(m >= 1 && m <= 16, ErrorKind::Argument, "separation m must lie in [1, 16]");
  const auto inst = make_separation_instance(m);
  const std::size_t cube = std::size_t{1} << m;
  const auto& p2 = inst.predictors.members()[1];
  const double radius = 1.0 / 6.0 + 1.0 / 8.0 + 1e-12;
  Rows rows;
  auto add = [&](const char* comp, std::size_t idx, std::uint64_t stream, double value, double expected, bool ok) {
    rows.push_back({{"component", comp}, {"trial", idx}, {"stream", stream}, {"value", value},
                    {"expected", expected}, {"ok", ok}});
  };
  CounterRng root(c.seed);

  // Parseval on dyadic-valued g: every quantity is exact in binary floating point.
  for (std::size_t i = 0; i < parseval_cases; ++i) {
    CounterRng rng = root.split(0x100000 + i);
    std::vector<double> g(cube);
    for (double& v : g) v = static_cast<double>(static_cast<int>(rng.below(17)) - 8) / 8.0;
    double energy = 0.0;
    for (double v : g) energy += v * v;
    energy /= static_cast<double>(cube);
    std::vector<double> h(g);
    for (std::size_t len = 1; len < cube; len <<= 1) {
      for (std::size_t a = 0; a < cube; a += 2 * len) {
        for (std::size_t b = a; b < a + len; ++b) {
          const double u = h[b], w = h[b + len];
          h[b] = u + w;
          h[b + len] = u - w;
        }
      }
    }
    double fourier = 0.0;
    for (double v : h) fourier += (v / static_cast<double>(cube)) * (v / static_cast<double>(cube));
    add("parseval", i, rng.stream(), fourier, energy, fourier == energy);
  }

  for (std::size_t i = 0; i < parity_cases; ++i) {
    CounterRng rng = root.split(0x200000 + i);
    const auto pt = predictor_from_boolean(parity_truth(m, rng.below(cube), false));
    const double adv = advantage(pt, p2, inst.distinguishers, inst.mu);
    add("parity_adv", i, rng.stream(), adv, 1.0 / 6.0, std::fabs(adv - 1.0 / 6.0) <= 1e-12);
  }

  for (std::size_t i = 0; i < list_cases; ++i) {
    CounterRng rng = root.split(0x300000 + i);
    // Blend of a random parity and noise, so some parities land near p.
    const double alpha = rng.uniform();
    const auto pt = predictor_from_boolean(parity_truth(m, rng.below(cube), false));
    std::vector<double> v(cube + 1);
    for (std::size_t x = 0; x < v.size(); ++x) v[x] = alpha * pt[x] + (1.0 - alpha) * rng.uniform();
    const bool low = i % 2 == 0;
    v[0] = low ? 0.5 * rng.uniform() : 0.5 + 0.5 * rng.uniform();
    const auto dist = parity_list_distances(inst, Fn(v, FnKind::Predictor), !low);
    std::size_t count = 0;
    for (double d : dist) count += d <= radius ? 1 : 0;
    add(low ? "list_parities" : "list_antiparities", i, rng.stream(), static_cast<double>(count), 64.0, count <= 64);
  }

  const auto post = parity_posterior_check(post_m, post_n, root.split(0x400000).next_u64(), post_trials);
  const double expect = std::ldexp(1.0, static_cast<int>(post_m) - static_cast<int>(post_n));
  for (std::size_t i = 0; i < post.draws.size(); ++i) {
    const auto& d = post.draws[i];
    const bool agree = d.predicted_parities == d.counted_parities && d.predicted_antiparities == d.counted_antiparities;
    const bool exact = !d.independent || (static_cast<double>(d.counted_parities) == expect &&
                                          static_cast<double>(d.counted_antiparities) == expect);
    rows.push_back({{"component", d.independent ? "posterior_independent" : "posterior_dependent"},
                    {"trial", i},
                    {"stream", nullptr},
                    {"value", d.counted_parities},
                    {"expected", d.independent ? ordered_json(expect) : ordered_json(nullptr)},
                    {"ok", agree && exact}});
  }

  const auto easy = make_separation_instance(easy_m);
  const std::uint64_t easy_seed = root.split(0x500000).next_u64();
  const auto easy_rows = run_trials(c.trials, c.workers, easy_seed, [&](std::size_t t, CounterRng& rng) {
    return easy_trial(easy, eps, delta, t, rng);
  });
  for (const auto& r : easy_rows) {
    rows.push_back({{"component", "easy_agnostic"}, {"trial", r["trial"]}, {"stream", r["stream"]},
                    {"value", r["error"]}, {"expected", r["opt"].get<double>() + eps}, {"ok", r["success"]}});
  }
  return rows;
}

ordered_json sum_separation(const ExperimentConfig&, const Rows& rows) {
  auto sel = [&](const char* comp) {
    Rows out;
    for (const auto& r : rows) {
      if (r["component"] == comp) out.push_back(r);
    }
    return out;
  };
  auto fails = [](const Rows& rs) { return rs.size() - count_true(rs, "ok"); };
  ordered_json a;
  const auto pv = sel("parseval");
  const auto pa = sel("parity_adv");
  const auto lp = sel("list_parities");
  const auto la = sel("list_antiparities");
  const auto pi = sel("posterior_independent");
  const auto pd = sel("posterior_dependent");
  const auto ea = sel("easy_agnostic");
  a["parseval_cases"] = pv.size();
  a["parseval_failures"] = fails(pv);
  a["parity_adv_cases"] = pa.size();
  a["parity_adv_failures"] = fails(pa);
  a["list_cases"] = lp.size() + la.size();
  a["list_max_count"] = std::max(max_of(lp, "value"), max_of(la, "value"));
  a["list_failures"] = fails(lp) + fails(la);
  a["posterior_independent_draws"] = pi.size();
  a["posterior_failures"] = fails(pi) + fails(pd);
  add_rate(a, "easy_", count_true(ea, "ok"), ea.size());
  return a;
}

// ---- cube-packing -----------------------------------------------------------

Rows run_cube_packing(const ExperimentConfig& c) {
  const auto sizes = prm<std::vector<std::size_t>>(c, "sizes", {2, 3, 4});
  const auto eps = prm<double>(c, "epsilon", 0.125);
  const double step = c.constants.grid_step;
  require(eps > 0.0 && eps < 1.0 / std::exp(1.0), ErrorKind::Argument, "cube-packing needs eps in (0, 1/e)");
  Rows rows;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const std::size_t n = sizes[i];
    const auto f1 = FnClass::full_cube(n, -1.0, 1.0);
    const std::size_t count = cube_packing_lower(eps, n, step, f1, Distribution::uniform(n), -1.0, 1.0,
                                                 c.constants.caps);
    const double lg = std::log2(static_cast<double>(count));
    const double bound = static_cast<double>(n) * std::log2(1.0 / (std::exp(1.0) * eps));
    rows.push_back({{"trial", i}, {"n", n}, {"epsilon", eps}, {"grid_step", step}, {"count", count},
                    {"log2_count", lg}, {"bound", bound}, {"holds", lg >= bound}});
  }
  return rows;
}

ordered_json sum_cube_packing(const ExperimentConfig&, const Rows& rows) {
  ordered_json a;
  a["cases"] = rows.size();
  a["violations"] = rows.size() - count_true(rows, "holds");
  for (const auto& r : rows) a["log2_count_n" + std::to_string(r["n"].get<std::size_t>())] = r["log2_count"];
  return a;
}

// ---- catalog ----------------------------------------------------------------

struct Entry {
  std::vector<std::string> columns;
  std::function<Rows(const ExperimentConfig&)> run;
  std::function<ordered_json(const ExperimentConfig&, const Rows&)> summarize;
  std::vector<Assertion> acceptance;
  std::vector<std::string> notes;
};

const std::vector<std::string> kRateCols{"trial", "stream", "target", "output", "adv", "opt", "bound", "success"};

const std::map<std::string, Entry>& catalog() {
  static const std::map<std::string, Entry> cat = [] {
    std::map<std::string, Entry> m;
    m["adv-vs-l1"] = {{"trial", "stream", "adv_cube", "l1", "abs_diff", "adv_explicit", "explicit_ok"},
                      run_adv_vs_l1,
                      sum_adv_vs_l1,
                      {{"max_abs_diff", "<=", 1e-12}, {"explicit_violations", "==", 0}},
                      {}};
    m["transform-mc"] = {{"trial", "stream", "exact", "estimate", "se", "abs_exact", "within"},
                         run_transform_mc,
                         sum_transform_mc,
                         {{"within_fraction", ">=", 0.94}},
                         {"estimate is the signed acceptance-rate difference; 'within' means |estimate - exact| <= 3 SE"}};
    m["covering-algebra"] = {{"trial", "stream", "domain", "f2_size", "f1_size", "epsilon", "cover", "cover_sub",
                              "cover_shift", "scale_deviation", "hull_excess", "packing"},
                             run_covering_algebra,
                             sum_covering_algebra,
                             {{"item1_violations", "==", 0},
                              {"item2_max_excess", "<=", 1e-9},
                              {"item3_violations", "==", 0},
                              {"item4_violations", "==", 0},
                              {"packing_violations", "==", 0}},
                             {"scaling uses a, b in {1/2, 2}, which are exact in binary floating point"}};
    m["duality-sweep"] = {{"kind", "trial", "stream", "epsilon", "m", "grid_step", "packing", "lhs", "rhs", "bound",
                           "holds"},
                          run_duality_sweep,
                          sum_duality_sweep,
                          {{"random_violations", "==", 0}, {"sweep_exponent", ">=", 1.5}, {"sweep_exponent", "<=", 2.5}},
                          {"entropies are log2; for hadamard rows 'bound' holds lhs / (1 + rhs)",
                           "hadamard lhs is a greedy packing of the grid cube, a lower bound on the covering entropy"}};
    m["fat-lift"] = {{"kind", "trial", "stream", "n", "gamma", "max_points", "fat", "expected"},
                     run_fat_lift,
                     sum_fat_lift,
                     {{"cube_mismatches", "==", 0}, {"lift_mismatches", "==", 0}},
                     {}};
    m["fat-cover-bridge"] = {{"trial", "stream", "n", "epsilon", "grid_step", "certified", "packing", "log2_packing",
                              "ln_packing", "bound"},
                             run_fat_cover_bridge,
                             sum_fat_cover_bridge,
                             {{"uncertified", "==", 0}, {"min_margin_ln", ">=", 0.0}},
                             {"packing of the [0,1] grid under D restricted to the shattered points is a lower bound on "
                              "the covering number"}};
    m["erm-fail-3const"] = {{"trial", "stream", "ones", "output", "failure", "consistent", "unbalanced"},
                            run_erm_3const,
                            sum_erm_3const,
                            {{"failure_wilson_lower", ">=", 0.66}, {"unbalanced_wilson_lower", ">=", 0.66}, {"inconsistent", "==", 0}},
                            {"on balanced samples all losses tie and the smallest index (p0) is returned"}};
    m["erm-fail-parity"] = {{"trial", "stream", "output", "is_p2", "dist_p0_p1", "dist_p0_p2", "min_other_dist"},
                            run_erm_parity,
                            sum_erm_parity,
                            {{"p2_rate", ">=", 0.95}, {"dist_p0_p1_error", "<=", 1e-12}, {"min_other_dist", ">=", 1.0 / 3.0 - 1e-12}},
                            {"ERM runs on the covering {p1, p2, p3}"}};
    m["dcover-realizable"] = {kRateCols, [](const ExperimentConfig& c) { return run_dcover(c, false); }, sum_rate,
                              {{"success_rate", ">=", 0.9}}, {}};
    m["dcover-agnostic"] = {kRateCols, [](const ExperimentConfig& c) { return run_dcover(c, true); }, sum_rate,
                            {{"success_rate", ">=", 0.9}}, {"success means adv <= 3 opt + eps"}};
    m["boost-potential"] = {{"trial", "stream", "rounds", "updates", "qualifying", "drop_violations",
                             "clamp_violations", "min_drop_margin", "final_adv"},
                            run_boost_potential,
                            sum_boost_potential,
                            {{"drop_violations", "==", 0}, {"clamp_violations", "==", 0}, {"qualifying_rounds", ">", 0}},
                            {}};
    m["boost-endtoend"] = {{"phase", "n", "trial", "stream", "successes", "trials", "adv", "rounds", "success"},
                           run_boost_endtoend,
                           sum_boost_endtoend,
                           {{"success_wilson_lower", ">=", 0.9}},
                           {"n comes from a doubling search starting at T; final trials use fresh streams"}};
    m["mcboost"] = {{"trial", "stream", "k1_equal", "noise_fires", "gamma", "fat", "masked_fat", "mc_error", "adv",
                     "mc_ok"},
                    run_mcboost,
                    sum_mcboost,
                    {{"k1_mismatches", "==", 0},
                     {"noise_fires", "==", 0},
                     {"masked_violations", "==", 0},
                     {"mc_bound_violations", "==", 0}},
                    {}};
    m["zerofat"] = {{"trial", "stream", "n", "adv", "success"}, run_zerofat, sum_rate, {{"success_rate", ">=", 0.9}}, {}};
    m["easy-agnostic"] = {{"trial", "stream", "n", "error", "opt", "success"},
                          run_easy_agnostic,
                          sum_rate,
                          {{"success_rate", ">=", 0.9}},
                          {"error is the l1 distance, the norm for the full [-1,1] cube"}};
    m["separation-components"] = {{"component", "trial", "stream", "value", "expected", "ok"},
                                  run_separation,
                                  sum_separation,
                                  {{"parseval_failures", "==", 0},
                                   {"parity_adv_failures", "==", 0},
                                   {"list_failures", "==", 0},
                                   {"posterior_independent_draws", ">", 0},
                                   {"posterior_failures", "==", 0},
                                   {"easy_rate", ">=", 0.9}},
                                  {"easy-agnostic rows use config trials"}};
    m["cube-packing"] = {{"trial", "n", "epsilon", "grid_step", "count", "log2_count", "bound", "holds"},
                         run_cube_packing,
                         sum_cube_packing,
                         {{"violations", "==", 0}, {"log2_count_n4", ">=", 6.23}},
                         {"greedy packing on the grid is a lower bound for the continuous packing number"}};
    return m;
  }();
  return cat;
}

const Entry& entry(const std::string& id) {
  const auto& cat = catalog();
  const auto it = cat.find(id);
  require(it != cat.end(), ErrorKind::Argument, "unknown experiment id '" + id + "'");
  return it->second;
}

}  // namespace

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{
      "adv-vs-l1",       "transform-mc",      "covering-algebra", "duality-sweep", "fat-lift",
      "fat-cover-bridge", "erm-fail-3const",  "erm-fail-parity",  "dcover-realizable", "dcover-agnostic",
      "boost-potential", "boost-endtoend",    "mcboost",          "zerofat",       "easy-agnostic",
      "separation-components", "cube-packing"};
  return ids;
}

const std::vector<std::string>& experiment_columns(const std::string& id) { return entry(id).columns; }

std::vector<Assertion> default_acceptance(const std::string& id) { return entry(id).acceptance; }

ordered_json summarize(const ExperimentConfig& config, const std::vector<ordered_json>& rows) {
  return entry(config.id).summarize(config, rows);
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto& e = entry(config.id);
  ExperimentReport r;
  r.config = config;
  if (!r.config.acceptance) r.config.acceptance = e.acceptance;
  r.columns = e.columns;
  r.rows = e.run(config);
  r.aggregates = e.summarize(config, r.rows);
  r.notes.push_back(
      "success-rate checks use Wilson 95% intervals: a statistical confidence bound, not a worst-case guarantee");
  r.notes.push_back("boost round budget T = ceil(" + std::to_string(config.constants.boost_t_base) + " / eps^2)");
  for (const auto& n : e.notes) r.notes.push_back(n);
  r.assertions = evaluate(*r.config.acceptance, r.aggregates);
  r.passed = std::all_of(r.assertions.begin(), r.assertions.end(), [](const auto& a) { return a.pass; });
  return r;
}

}  // namespace oi::harness
