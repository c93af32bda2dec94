#pragma once

// Covering numbers, packings, metric entropy, fat-shattering dimension and the
// metric-entropy duality check over finite (or grid-discretized) classes.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oi/core.hpp"

namespace oi {

struct SearchCaps {
  std::size_t exact_cover = 24;   // members of F2 in covering_exact
  std::size_t fat_domain = 16;    // |X| for multi-point fat search
  std::size_t fat_points = 8;     // maxPoints for fat_exact
  std::size_t grid_points = std::size_t{1} << 20;
};

/// Tolerances shared by every geometric predicate.
inline constexpr double kCoverSlack = 1e-12;
inline constexpr double kPackSlack = 2e-12;
inline constexpr double kFatSlack = 1e-12;

/// Distances ||a - b||_{mu,F1} between vectors on a fixed domain. Classes with a
/// finite linear embedding are pre-embedded so a distance is one l-infinity
/// kernel call; the [-1,1] cube is a weighted l1 kernel; anything else falls
/// back to the closed-form dual norm of the difference.
class NormMetric {
 public:
  NormMetric(const FnClass& f1, const Distribution& mu);

  std::vector<double> prepare(std::span<const double> f) const;
  double distance(std::span<const double> a, std::span<const double> b) const;

 private:
  enum class Mode { Embedded, WeightedL1, Generic };
  const FnClass* cls_;
  const Distribution* mu_;
  Mode mode_;
};

/// Symmetric matrix (row-major) of pairwise dual-norm distances.
std::vector<double> pairwise_distances(const std::vector<Fn>& members, const FnClass& f1, const Distribution& mu);

enum class CoverMode { Exact, Greedy };
const char* to_string(CoverMode m) noexcept;

struct CoveringResult {
  std::vector<std::size_t> centers;
  std::size_t size = 0;
  CoverMode mode = CoverMode::Exact;
  double epsilon = 0.0;
};

CoveringResult covering_exact(const FnClass& f2, const FnClass& f1, const Distribution& mu, double eps,
                              const SearchCaps& caps = {});
CoveringResult covering_greedy(const FnClass& f2, const FnClass& f1, const Distribution& mu, double eps);
/// Checks that every member of f2 lies within eps of some listed center.
bool is_covering(const FnClass& f2, const FnClass& f1, const Distribution& mu, double eps,
                 const std::vector<std::size_t>& centers);

/// Size of a maximal 2eps-separated subset built greedily in index order.
std::size_t packing_lower(const FnClass& f2, const FnClass& f1, const Distribution& mu, double eps);

double metric_entropy(const FnClass& f2, const FnClass& f1, const Distribution& mu, double eps, CoverMode mode,
                      const SearchCaps& caps = {});

struct FatResult {
  std::size_t dimension = 0;
  std::vector<std::size_t> witness_points;
  std::vector<double> witness_shifts;
};

/// True when every sign pattern on `points` is realized with margin gamma.
bool verify_fat_witness(const FnClass& cls, double gamma, const std::vector<std::size_t>& points,
                        const std::vector<double>& shifts);

/// Shifts r making `points` gamma-fat shattered, if any exist.
std::optional<std::vector<double>> find_shattering_shifts(const FnClass& cls, double gamma,
                                                          const std::vector<std::size_t>& points);

FatResult fat_exact(const FnClass& cls, double gamma, std::size_t max_points, const SearchCaps& caps = {});
FatResult fat_lower(const FnClass& cls, double gamma, std::size_t max_points, std::size_t trials, std::uint64_t seed);

/// Lift to X x {0,1} (index 2x + o): d~(x,0) = 0, d~(x,1) = d(x).
FnClass lift_distinguisher_class(const FnClass& d);

/// Restriction of every member of an explicit class to the listed individuals.
FnClass restrict_class(const FnClass& cls, const std::vector<std::size_t>& points);

struct DualityReport {
  double epsilon = 0.0;
  double constant = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double lhs = 0.0;  // log2 N_{mu,F2}(F1, eps)
  double rhs = 0.0;  // log2 N_{mu,F1}(F2, eps/8)
  double bound = 0.0;
  bool holds = false;
};

DualityReport duality_check(const FnClass& f1, const FnClass& f2, const Distribution& mu, double eps, double c,
                            const SearchCaps& caps = {});

/// Sylvester-Hadamard columns as an explicit class of distinguishers.
FnClass hadamard_class(std::size_t m);

/// Greedy 2eps-separated subset of the grid [lo,hi]^n with the given step,
/// under ||.||_{mu,F1}. Candidates with more coordinates on the boundary of the
/// box are tried first (ties in lexicographic grid order); the count is a lower
/// bound on the covering number of the grid cube.
std::size_t cube_packing_lower(double eps, std::size_t n, double grid_step, const FnClass& f1, const Distribution& mu,
                               double lo = -1.0, double hi = 1.0, const SearchCaps& caps = {});

}  // namespace oi
