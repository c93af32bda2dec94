#pragma once

// Learning algorithms: empirical risk minimization over a covering, the
// distinguisher-covering learner, multiaccuracy / multicalibration boosting,
// the zero-fat-shattering learner, and the simple estimator used on the
// separation instance.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oi/core.hpp"
#include "oi/geometry.hpp"

namespace oi {

struct LearnParams {
  double epsilon = 0.1;
  double delta = 0.1;
  std::size_t n = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Partition of [0,1] into k cells [c_{j-1}, c_j), the last one closed.
class LevelPartition {
 public:
  /// `cutpoints` are the k-1 interior boundaries, strictly increasing in (0,1).
  explicit LevelPartition(std::vector<double> cutpoints = {});
  static LevelPartition uniform(std::size_t k);

  std::size_t cells() const noexcept { return cutpoints_.size() + 1; }
  std::size_t cell_of(double v) const;
  const std::vector<double>& cutpoints() const noexcept { return cutpoints_; }

 private:
  std::vector<double> cutpoints_;
};

/// Source of labelled examples consumed lazily by the boosting learners.
class ExampleSource {
 public:
  virtual ~ExampleSource() = default;
  virtual Example next() = 0;
  virtual std::size_t domain_size() const = 0;
};

/// Fresh i.i.d. draws from mu_p.
class PredictorSource final : public ExampleSource {
 public:
  PredictorSource(Fn p, Distribution mu, CounterRng rng);
  Example next() override;
  std::size_t domain_size() const override { return p_.size(); }

 private:
  Fn p_;
  Distribution mu_;
  CounterRng rng_;
};

/// Replays a fixed sample in order; running past its end is an error.
class SampleSource final : public ExampleSource {
 public:
  explicit SampleSource(Sample s) : sample_(std::move(s)) {}
  Example next() override;
  std::size_t domain_size() const override { return sample_.domain_size(); }

 private:
  Sample sample_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Empirical risk minimization

/// sup_d |(1/n) sum_i d(x_i)(p(x_i) - o_i)| for explicit D; the per-example
/// closed form (1/n) sum_i |p(x_i) - o_i| restricted to the class's support
/// for the [-1,1] cube and support-bounded classes.
double empirical_loss(const Fn& p, const FnClass& d, const Sample& sample);

struct ErmResult {
  std::size_t index = 0;  // into P
  std::vector<std::size_t> cover;
  std::vector<double> losses;  // aligned with `cover`
};

/// Minimum-size eps/2 covering of P, then the empirical-loss minimizer over it
/// (ties to the smallest index). A caller-supplied covering is accepted only if
/// it is a valid covering of minimum size.
ErmResult erm_learn(const FnClass& p, const FnClass& d, const Distribution& mu, const LearnParams& params,
                    const Sample& sample, const std::optional<std::vector<std::size_t>>& cover = std::nullopt,
                    const SearchCaps& caps = {});

// ---------------------------------------------------------------------------
// Distinguisher covering

struct DcoverResult {
  std::size_t index = 0;  // into P
  std::vector<std::size_t> distinguisher_cover;  // into D
  std::vector<double> losses;                    // aligned with P
};

DcoverResult dcover_learn(const FnClass& p, const FnClass& d, const Distribution& mu, const LearnParams& params,
                          const Sample& sample, const SearchCaps& caps = {});

// ---------------------------------------------------------------------------
// Boosting

enum class BoostExit { EarlyReturn, BudgetExhausted };
const char* to_string(BoostExit e) noexcept;

struct BoostRound {
  std::size_t round = 0;
  /// Index into D for +d, |D| + index for -d; empty when nothing passed.
  std::optional<std::size_t> chosen;
  std::optional<std::size_t> cell;
  /// Statistic of the chosen test, or the largest statistic when none passed.
  double empirical_gap = 0.0;
  // Oracle mode only.
  std::optional<double> true_gap;
  std::optional<double> potential_before;
  std::optional<double> potential_unclamped;
  std::optional<double> potential_after;
};

struct BoostTrace {
  std::size_t budget = 0;      // T
  std::size_t batch = 0;       // m
  std::size_t t_base = 25;
  std::vector<BoostRound> rounds;
  BoostExit exit = BoostExit::BudgetExhausted;
};

struct BoostOptions {
  /// 25 (the potential argument) or 16.
  std::size_t t_base = 25;
  /// When set, every round records the potential ||p - p*||^2_mu.
  const Fn* oracle_target = nullptr;
  const Distribution* oracle_mu = nullptr;
};

struct BoostResult {
  Fn predictor;
  BoostTrace trace;
};

std::size_t boost_rounds(double eps, std::size_t t_base);

BoostResult boost_learn(const FnClass& d, const LearnParams& params, ExampleSource& source,
                        const BoostOptions& options = {});

BoostResult mc_boost_learn(const FnClass& d, const LearnParams& params, const LevelPartition& levels,
                           ExampleSource& source, const BoostOptions& options = {});

/// sup over d in D and cells j of |E_mu[(p - p*)(x) d(x) 1(p(x) in cell j)]|.
double mc_error(const Fn& p, const Fn& target, const FnClass& d, const Distribution& mu, const LevelPartition& levels);

/// {d * 1(p in cell j)} over d in D and cells j, as an explicit class.
FnClass masked_class(const FnClass& d, const Fn& p, const LevelPartition& levels);

// ---------------------------------------------------------------------------
// Zero fat-shattering dimension

struct ZeroFatResult {
  Fn predictor;
  std::vector<double> center;  // d*
  double r_plus = 0.0;
  double r_minus = 0.0;
};

std::size_t zero_fat_sample_size(double eps, double delta);

ZeroFatResult zero_fat_learn(const FnClass& d, const LearnParams& params, const Sample& sample);

// ---------------------------------------------------------------------------
// Separation instance estimator

std::size_t easy_agnostic_sample_size(double eps, double delta, double bottom_mass);

/// p(bottom) = fraction of ones among bottom examples (1/2 if none), 1/2 elsewhere.
Fn easy_agnostic_learn(const Sample& sample, std::size_t domain_size, std::size_t bottom = 0);

}  // namespace oi
