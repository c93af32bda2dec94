#pragma once

// Generators for the named instances: the Hadamard tightness instance, the two
// ERM failure instances, and the parity / anti-parity separation instance with
// its list-learning reduction.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "oi/core.hpp"
#include "oi/geometry.hpp"

namespace oi {

// ---------------------------------------------------------------------------
// Hadamard tightness

struct HadamardInstance {
  double epsilon = 0.0;
  std::size_t m = 0;
  Distribution mu;
  FnClass cube;      // grid-discretized [-1,1]^X
  FnClass columns;   // Hadamard columns
};

/// Largest power of two m with m <= 1/(2 eps^2).
std::size_t hadamard_order(double eps);
HadamardInstance make_hadamard_instance(double eps, double grid_step = 0.125);

struct SweepRow {
  double epsilon = 0.0;
  std::size_t m = 0;
  double grid_step = 0.0;
  std::size_t packing = 0;
  double lhs = 0.0;    // log2 packing of the grid cube under the Hadamard norm at eps
  double rhs = 0.0;    // log2 exact covering of the columns under the cube norm at eps/8
  double ratio = 0.0;  // lhs / (1 + rhs)
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// Least-squares slope of ln(lhs) against ln(1/eps).
  double exponent = 0.0;
  double ratio_exponent = 0.0;
};

/// Finest step in {1/8, 1/4, 1/2, 1} whose grid over m coordinates fits the cap.
double sweep_grid_step(std::size_t m, std::size_t grid_cap);
SweepResult hadamard_sweep(const std::vector<double>& eps_values, const SearchCaps& caps = {});

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// ERM failure instances

struct ErmInstance {
  Domain domain;
  Distribution mu;
  FnClass predictors;
  FnClass distinguishers;
  /// Covering branch prescribed by the construction (empty: use the solver's).
  std::vector<std::size_t> cover;
};

/// Uniform mu, P = {p_0, p_1/2, p_1} (constants), D = [-1,1]^X.
ErmInstance make_erm_failure_3const(std::size_t size);

/// X = {-1,-2,-3} u {1..m}; P = {p_0,..,p_3}; D = support-bounded with budget n.
ErmInstance make_erm_failure_parity_sets(std::size_t n, std::size_t m);

// ---------------------------------------------------------------------------
// Separation instance

/// Bottom at index 0; bitstring u (bit i-1 holds x_i) at index 1 + u.
struct SeparationInstance {
  unsigned m = 0;
  Distribution mu;
  FnClass predictors;      // {p_1, p_2}
  FnClass distinguishers;  // parities with d(bottom) = 1
};

SeparationInstance make_separation_instance(unsigned m);

/// p_f(bottom) = 1/2, p_f(x) = (1 + (-1)^f(x)) / 2; `truth` has 2^m entries.
Fn predictor_from_boolean(const std::vector<std::uint8_t>& truth);
std::vector<std::uint8_t> parity_truth(unsigned m, std::uint64_t s, bool anti);

/// ||p_f - p||_{mu,D} for every parity (anti = false) or anti-parity f, indexed
/// by the subset mask S, via one transform of p and the closed form
/// <p_f, d_S'> = 1/6 + (1/3)(1[S'=0] +- 1[S'=S]).
std::vector<double> parity_list_distances(const SeparationInstance& inst, const Fn& p, bool anti);

struct ListInstance {
  unsigned m = 0;
  std::size_t n = 0;
  std::vector<std::uint8_t> target;  // t as a truth table
  std::size_t k = 0;
};

struct ListReductionResult {
  Fn predictor;
  std::vector<std::uint64_t> parities;      // L n BP, as masks
  std::vector<std::uint64_t> antiparities;  // L n BA
  bool target_in_list = false;
  bool success = false;
};

using SeparationLearner = std::function<Fn(const Sample&, const SeparationInstance&)>;

/// Rewrites ListL examples into separation examples, runs the learner, and
/// forms L = {f : ||p_f - p|| <= 1/6 + 1/8} (non-parity functions symbolic).
ListReductionResult run_list_reduction(const SeparationLearner& learner, const ListInstance& inst,
                                       std::uint64_t seed);

struct PosteriorDraw {
  bool independent = false;
  std::uint64_t predicted_parities = 0;
  std::uint64_t predicted_antiparities = 0;
  std::uint64_t counted_parities = 0;
  std::uint64_t counted_antiparities = 0;
};

struct PosteriorReport {
  unsigned m = 0;
  std::size_t n = 0;
  std::vector<PosteriorDraw> draws;
  std::size_t independent = 0;
  /// Elimination prediction matches enumeration on every draw.
  bool elimination_agrees = true;
  /// Every independent draw has exactly 2^(m-n) consistent parities and anti-parities.
  bool counts_exact = true;
};

PosteriorReport parity_posterior_check(unsigned m, std::size_t n, std::uint64_t seed, std::size_t trials);

}  // namespace oi
