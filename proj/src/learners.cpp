#include "oi/learners.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "oi/kernels.hpp"

namespace oi {

namespace {

// Stream id for the synthetic outcomes o' drawn by the boosting learners.
constexpr std::uint64_t kSyntheticStream = 0x0B005715ULL;

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

double potential(std::span<const double> p, const Fn& target, const Distribution& mu) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - target[i];
    s += mu[i] * d * d;
  }
  return s;
}

}  // namespace

void LearnParams::validate() const {
  require(epsilon > 0.0 && epsilon < 1.0, ErrorKind::Argument, "epsilon must lie in (0,1)");
  require(delta > 0.0 && delta < 1.0, ErrorKind::Argument, "delta must lie in (0,1)");
}

// ---------------------------------------------------------------------------
// Level partition and sources

LevelPartition::LevelPartition(std::vector<double> cutpoints) : cutpoints_(std::move(cutpoints)) {
  for (std::size_t i = 0; i < cutpoints_.size(); ++i) {
    require(cutpoints_[i] > 0.0 && cutpoints_[i] < 1.0, ErrorKind::Argument, "cutpoints must lie in (0,1)");
    require(i == 0 || cutpoints_[i] > cutpoints_[i - 1], ErrorKind::Argument, "cutpoints must be increasing");
  }
}

LevelPartition LevelPartition::uniform(std::size_t k) {
  require(k >= 1, ErrorKind::Argument, "a level partition needs k >= 1");
  std::vector<double> cuts;
  for (std::size_t j = 1; j < k; ++j) cuts.push_back(static_cast<double>(j) / static_cast<double>(k));
  return LevelPartition(std::move(cuts));
}

std::size_t LevelPartition::cell_of(double v) const {
  return static_cast<std::size_t>(std::upper_bound(cutpoints_.begin(), cutpoints_.end(), v) - cutpoints_.begin());
}

PredictorSource::PredictorSource(Fn p, Distribution mu, CounterRng rng)
    : p_(std::move(p)), mu_(std::move(mu)), rng_(rng) {
  check_same_domain(p_.size(), mu_.size(), "example source");
}

Example PredictorSource::next() {
  Example e;
  e.x = mu_.draw(rng_);
  e.outcome = rng_.uniform() < p_[e.x] ? 1 : 0;
  return e;
}

Example SampleSource::next() {
  require(pos_ < sample_.size(), ErrorKind::Precondition, "example stream exhausted");
  return sample_[pos_++];
}

// ---------------------------------------------------------------------------
// ERM

double empirical_loss(const Fn& p, const FnClass& d, const Sample& sample) {
  check_same_domain(p.size(), d.domain_size(), "empirical loss");
  check_same_domain(p.size(), sample.domain_size(), "empirical loss");
  if (sample.empty()) return 0.0;
  const double n = static_cast<double>(sample.size());
  if (const auto* e = std::get_if<ExplicitRepr>(&d.repr())) {
    std::vector<double> h(p.size(), 0.0);
    for (const auto& ex : sample) h[ex.x] += p[ex.x] - ex.outcome;
    double best = 0.0;
    for (const auto& g : e->members) best = std::max(best, std::fabs(kernels::dot(g.values(), h)));
    return best / n;
  }
  // Per-example absolute residual mass on each individual.
  std::vector<double> mass(p.size(), 0.0);
  for (const auto& ex : sample) mass[ex.x] += std::fabs(p[ex.x] - ex.outcome);
  if (const auto* c = std::get_if<FullCubeRepr>(&d.repr())) {
    require(c->lo == -1.0 && c->hi == 1.0, ErrorKind::UnsupportedRepresentation,
            "empirical loss supports only the [-1,1] cube");
    double s = 0.0;
    for (double v : mass) s += v;
    return s / n;
  }
  if (const auto* sb = std::get_if<SupportBoundedRepr>(&d.repr())) {
    double s = 0.0;
    for (std::size_t i : sb->special) s += mass[i];
    std::vector<double> free_mass;
    free_mass.reserve(sb->free.size());
    for (std::size_t i : sb->free) {
      if (mass[i] > 0.0) free_mass.push_back(mass[i]);
    }
    const std::size_t take = std::min(sb->budget, free_mass.size());
    std::partial_sort(free_mass.begin(), free_mass.begin() + static_cast<std::ptrdiff_t>(take), free_mass.end(),
                      std::greater<>());
    for (std::size_t k = 0; k < take; ++k) s += free_mass[k];
    return s / n;
  }
  fail(ErrorKind::UnsupportedRepresentation, "no empirical-loss evaluator for " + d.repr_name() + " classes");
}

ErmResult erm_learn(const FnClass& p, const FnClass& d, const Distribution& mu, const LearnParams& params,
                    const Sample& sample, const std::optional<std::vector<std::size_t>>& cover,
                    const SearchCaps& caps) {
  params.validate();
  const auto& members = p.members();
  const double radius = params.epsilon / 2.0;
  ErmResult r;
  const auto exact = covering_exact(p, d, mu, radius, caps);
  if (cover) {
    auto sorted = *cover;
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), ErrorKind::Argument,
            "supplied covering has duplicate centers");
    require(sorted.size() == exact.size, ErrorKind::Precondition, "supplied covering is not of minimum size");
    require(is_covering(p, d, mu, radius, sorted), ErrorKind::Precondition,
            "supplied centers do not form an eps/2 covering");
    r.cover = std::move(sorted);
  } else {
    r.cover = exact.centers;
  }
  double best = 0.0;
  bool have = false;
  for (std::size_t c : r.cover) {
    const double loss = empirical_loss(members[c], d, sample);
    r.losses.push_back(loss);
    if (!have || loss < best) {
      best = loss;
      r.index = c;
      have = true;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Distinguisher covering

DcoverResult dcover_learn(const FnClass& p, const FnClass& d, const Distribution& mu, const LearnParams& params,
                          const Sample& sample, const SearchCaps& caps) {
  params.validate();
  require(!sample.empty(), ErrorKind::Precondition, "distinguisher covering needs at least one example");
  check_same_domain(sample.domain_size(), mu.size(), "dcover");
  const auto& predictors = p.members();
  const auto& tests = d.members();
  const FnClass q = difference_class(p);
  DcoverResult r;
  r.distinguisher_cover = covering_exact(d, q, mu, params.epsilon / 2.0, caps).centers;

  std::vector<double> ones(mu.size(), 0.0);
  for (const auto& ex : sample) ones[ex.x] += ex.outcome;
  const double n = static_cast<double>(sample.size());
  std::vector<double> empirical;
  std::vector<std::vector<double>> weighted_tests;
  for (std::size_t j : r.distinguisher_cover) {
    empirical.push_back(kernels::dot(tests[j].values(), ones) / n);
    std::vector<double> w(mu.size());
    for (std::size_t x = 0; x < w.size(); ++x) w[x] = mu[x] * tests[j][x];
    weighted_tests.push_back(std::move(w));
  }
  double best = 0.0;
  for (std::size_t i = 0; i < predictors.size(); ++i) {
    double loss = 0.0;
    for (std::size_t k = 0; k < weighted_tests.size(); ++k) {
      loss = std::max(loss, std::fabs(kernels::dot(predictors[i].values(), weighted_tests[k]) - empirical[k]));
    }
    r.losses.push_back(loss);
    if (i == 0 || loss < best) {
      best = loss;
      r.index = i;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Boosting

const char* to_string(BoostExit e) noexcept { return e == BoostExit::EarlyReturn ? "early-return" : "budget-exhausted"; }

std::size_t boost_rounds(double eps, std::size_t t_base) {
  require(t_base == 16 || t_base == 25, ErrorKind::Argument, "boost round base must be 16 or 25");
  return static_cast<std::size_t>(std::ceil(static_cast<double>(t_base) / (eps * eps) - 1e-9));
}

namespace {

BoostResult run_boost(const FnClass& d, const LearnParams& params, const LevelPartition& levels, ExampleSource& source,
                      const BoostOptions& options) {
  params.validate();
  const auto& tests = d.members();
  const std::size_t nx = d.domain_size();
  check_same_domain(source.domain_size(), nx, "boost");
  const bool oracle = options.oracle_target != nullptr;
  if (oracle) {
    require(options.oracle_mu != nullptr, ErrorKind::Argument, "oracle mode needs the distribution");
    check_same_domain(options.oracle_target->size(), nx, "boost oracle");
    check_same_domain(options.oracle_mu->size(), nx, "boost oracle");
  }

  BoostTrace trace;
  trace.t_base = options.t_base;
  trace.budget = boost_rounds(params.epsilon, options.t_base);
  require(params.n >= trace.budget, ErrorKind::Argument,
          "boost needs n >= T = " + std::to_string(trace.budget) + " (got " + std::to_string(params.n) + ")");
  trace.batch = params.n / trace.budget;
  const double m = static_cast<double>(trace.batch);
  const double threshold = 3.0 * params.epsilon / 5.0;
  const std::size_t k = levels.cells();
  const std::size_t nd = tests.size();

  std::vector<double> p(nx, 0.5);
  CounterRng synth(params.seed, kSyntheticStream);
  std::vector<std::size_t> cell(nx);
  // h[j][x] = sum over batch examples at x in cell j of (o* - o').
  std::vector<std::vector<double>> h(k, std::vector<double>(nx));

  trace.exit = BoostExit::BudgetExhausted;
  for (std::size_t t = 1; t <= trace.budget; ++t) {
    for (std::size_t x = 0; x < nx; ++x) cell[x] = levels.cell_of(p[x]);
    for (auto& row : h) std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t i = 0; i < trace.batch; ++i) {
      const Example e = source.next();
      const int synthetic = synth.uniform() < p[e.x] ? 1 : 0;
      h[cell[e.x]][e.x] += static_cast<double>(static_cast<int>(e.outcome) - synthetic);
    }

    BoostRound round;
    round.round = t;
    double best_stat = -std::numeric_limits<double>::infinity();
    // Scan D then -D, each in index order, and cells within each test.
    for (std::size_t s = 0; s < 2 * nd && !round.chosen; ++s) {
      const double sign = s < nd ? 1.0 : -1.0;
      const auto& g = tests[s % nd];
      for (std::size_t j = 0; j < k; ++j) {
        const double stat = sign * kernels::dot(g.values(), h[j]) / m;
        best_stat = std::max(best_stat, stat);
        if (stat >= threshold) {
          round.chosen = s;
          round.cell = j;
          round.empirical_gap = stat;
          break;
        }
      }
    }

    if (!round.chosen) {
      round.empirical_gap = best_stat;
      if (oracle) round.potential_before = potential(p, *options.oracle_target, *options.oracle_mu);
      trace.rounds.push_back(round);
      trace.exit = BoostExit::EarlyReturn;
      break;
    }

    const std::size_t s = *round.chosen;
    const double sign = s < nd ? 1.0 : -1.0;
    const auto& g = tests[s % nd];
    const std::size_t j = *round.cell;
    std::vector<double> step(nx, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      if (cell[x] == j) step[x] = sign * g[x];
    }
    if (oracle) {
      const auto& target = *options.oracle_target;
      const auto& mu = *options.oracle_mu;
      double gap = 0.0;
      for (std::size_t x = 0; x < nx; ++x) gap += mu[x] * (target[x] - p[x]) * step[x];
      round.true_gap = gap;
      round.potential_before = potential(p, target, mu);
    }
    for (std::size_t x = 0; x < nx; ++x) p[x] += params.epsilon * step[x] / 5.0;
    if (oracle) round.potential_unclamped = potential(p, *options.oracle_target, *options.oracle_mu);
    for (double& v : p) v = clamp01(v);
    if (oracle) round.potential_after = potential(p, *options.oracle_target, *options.oracle_mu);
    trace.rounds.push_back(round);
  }
  return BoostResult{Fn(std::move(p), FnKind::Predictor), std::move(trace)};
}

}  // namespace

BoostResult boost_learn(const FnClass& d, const LearnParams& params, ExampleSource& source,
                        const BoostOptions& options) {
  return run_boost(d, params, LevelPartition(), source, options);
}

BoostResult mc_boost_learn(const FnClass& d, const LearnParams& params, const LevelPartition& levels,
                           ExampleSource& source, const BoostOptions& options) {
  return run_boost(d, params, levels, source, options);
}

double mc_error(const Fn& p, const Fn& target, const FnClass& d, const Distribution& mu,
                const LevelPartition& levels) {
  check_same_domain(p.size(), target.size(), "mc error");
  check_same_domain(p.size(), mu.size(), "mc error");
  const std::size_t k = levels.cells();
  std::vector<std::vector<double>> w(k, std::vector<double>(p.size(), 0.0));
  for (std::size_t x = 0; x < p.size(); ++x) w[levels.cell_of(p[x])][x] = mu[x] * (p[x] - target[x]);
  double best = 0.0;
  for (const auto& g : d.members()) {
    for (const auto& row : w) best = std::max(best, std::fabs(kernels::dot(g.values(), row)));
  }
  return best;
}

FnClass masked_class(const FnClass& d, const Fn& p, const LevelPartition& levels) {
  check_same_domain(p.size(), d.domain_size(), "masked class");
  std::vector<Fn> out;
  for (const auto& g : d.members()) {
    for (std::size_t j = 0; j < levels.cells(); ++j) {
      std::vector<double> v(p.size(), 0.0);
      for (std::size_t x = 0; x < p.size(); ++x) {
        if (levels.cell_of(p[x]) == j) v[x] = g[x];
      }
      out.emplace_back(std::move(v), g.kind(), g.bound());
    }
  }
  return FnClass::explicit_members(std::move(out), d.kind(), d.bound());
}

// ---------------------------------------------------------------------------
// Zero fat

std::size_t zero_fat_sample_size(double eps, double delta) {
  return static_cast<std::size_t>(std::ceil(64.0 / (eps * eps) * std::log(4.0 / delta)));
}

ZeroFatResult zero_fat_learn(const FnClass& d, const LearnParams& params, const Sample& sample) {
  params.validate();
  const double gamma = params.epsilon / 25.0;
  require(fat_exact(d, gamma, 1).dimension == 0, ErrorKind::Precondition,
          "zero-fat learner needs fat_D(eps/25) = 0");
  const auto& tests = d.members();
  const std::size_t nx = d.domain_size();
  check_same_domain(sample.domain_size(), nx, "zero-fat learner");

  ZeroFatResult r{Fn::constant(nx, 0.0, FnKind::Predictor), std::vector<double>(nx), 0.0, 0.0};
  for (std::size_t x = 0; x < nx; ++x) {
    double hi = tests.front()[x];
    double lo = hi;
    for (const auto& g : tests) {
      hi = std::max(hi, g[x]);
      lo = std::min(lo, g[x]);
    }
    r.center[x] = 0.5 * (hi + lo);
    require(0.5 * (hi - lo) <= gamma + kFatSlack, ErrorKind::Invariant, "value interval wider than 2 eps/25");
  }
  double up = 0.0, vp = 0.0, um = 0.0, vm = 0.0;
  for (const auto& ex : sample) {
    const double c = r.center[ex.x];
    if (c > 0.0) {
      up += c * ex.outcome;
      vp += c;
    } else if (c < 0.0) {
      um += c * ex.outcome;
      vm += c;
    }
  }
  r.r_plus = vp != 0.0 ? clamp01(up / vp) : 0.0;
  r.r_minus = vm != 0.0 ? clamp01(um / vm) : 0.0;
  std::vector<double> out(nx);
  for (std::size_t x = 0; x < nx; ++x) out[x] = r.center[x] >= 0.0 ? r.r_plus : r.r_minus;
  r.predictor = Fn(std::move(out), FnKind::Predictor);
  return r;
}

// ---------------------------------------------------------------------------
// Easy agnostic learner

std::size_t easy_agnostic_sample_size(double eps, double delta, double bottom_mass) {
  require(bottom_mass > 0.0, ErrorKind::Argument, "bottom mass must be positive");
  const auto a = static_cast<std::size_t>(std::ceil(std::log(4.0 / delta) / (eps * eps)));
  const auto b = static_cast<std::size_t>(std::ceil(8.0 * std::log(2.0 / delta) / bottom_mass));
  return std::max(a, b);
}

Fn easy_agnostic_learn(const Sample& sample, std::size_t domain_size, std::size_t bottom) {
  require(bottom < domain_size, ErrorKind::Argument, "bottom individual outside the domain");
  check_same_domain(sample.domain_size(), domain_size, "easy agnostic learner");
  std::size_t count = 0;
  std::size_t ones = 0;
  for (const auto& ex : sample) {
    if (ex.x == bottom) {
      ++count;
      ones += ex.outcome;
    }
  }
  std::vector<double> v(domain_size, 0.5);
  v[bottom] = count == 0 ? 0.5 : static_cast<double>(ones) / static_cast<double>(count);
  return Fn(std::move(v), FnKind::Predictor);
}

}  // namespace oi
