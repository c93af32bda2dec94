#pragma once

// Finite-domain calculus: individuals, distributions, bounded functions,
// function classes, and the inner-product / dual-norm / advantage operations.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "oi/error.hpp"
#include "oi/rng.hpp"

namespace oi {

/// Densely stored values are capped at this many individuals.
inline constexpr std::size_t kMaxDomainSize = std::size_t{1} << 20;

class Domain {
 public:
  /// Labels "0", "1", ..., "n-1".
  static Domain indexed(std::size_t n);
  explicit Domain(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<std::size_t> index_of(const std::string& label) const;

  friend bool operator==(const Domain&, const Domain&) = default;

 private:
  std::vector<std::string> labels_;
};

/// Probability weights over a finite domain; renormalized on construction.
class Distribution {
 public:
  static Distribution uniform(std::size_t n);
  explicit Distribution(std::vector<double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// Inverse-CDF draw; consumes one uniform from `rng`.
  std::size_t draw(CounterRng& rng) const;

 private:
  std::vector<double> weights_;
  std::vector<double> cdf_;
};

enum class FnKind { Predictor, Distinguisher, Generic };

const char* to_string(FnKind kind) noexcept;
FnKind fn_kind_from_string(const std::string& s);

/// A bounded real function on a finite domain.
///
/// Predictors take values in [0,1], distinguishers in [-1,1], generic
/// functions in [-bound, bound]. The kind's range is checked on construction.
class Fn {
 public:
  Fn(std::vector<double> values, FnKind kind, double bound = 1.0);

  static Fn constant(std::size_t n, double c, FnKind kind, double bound = 1.0);
  static Fn zero(std::size_t n, FnKind kind = FnKind::Generic) { return constant(n, 0.0, kind); }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  FnKind kind() const noexcept { return kind_; }
  /// Largest admissible |value| for this kind (1 for predictors/distinguishers).
  double bound() const noexcept { return bound_; }

  /// Same values re-checked against a different kind.
  Fn as(FnKind kind, double bound = 1.0) const { return Fn(values_, kind, bound); }

  friend Fn operator-(const Fn& a, const Fn& b);
  friend Fn operator+(const Fn& a, const Fn& b);
  Fn scaled(double a) const;

  /// Exact bitwise equality of values (kind ignored).
  bool same_values(const Fn& other) const noexcept;

 private:
  std::vector<double> values_;
  FnKind kind_;
  double bound_;
};

struct ExplicitRepr {
  std::vector<Fn> members;
};
/// Every function with values in [lo, hi] (uncountable; closed-form norm).
struct FullCubeRepr {
  double lo;
  double hi;
};
/// Union over budget-sized Y of the functions free on special ∪ Y, zero elsewhere.
struct SupportBoundedRepr {
  std::vector<std::size_t> special;
  std::vector<std::size_t> free;
  std::size_t budget;
};
/// 2^m parity distinguishers on {0,1}^m, optionally preceded by a bottom
/// individual (index 0) on which every member equals 1.
struct ParityRepr {
  unsigned m;
  bool with_bottom;
};
/// Sylvester-Hadamard columns on an m-point domain (m a power of two).
struct HadamardRepr {
  std::size_t m;
};
/// The cube [lo, hi]^X restricted to a uniform grid of the given step.
struct GridRepr {
  double lo;
  double hi;
  double step;
};

using ClassRepr = std::variant<ExplicitRepr, FullCubeRepr, SupportBoundedRepr, ParityRepr, HadamardRepr, GridRepr>;

class FnClass {
 public:
  static FnClass explicit_members(std::vector<Fn> members);
  static FnClass explicit_members(std::vector<Fn> members, FnKind kind, double bound = 1.0);
  static FnClass full_cube(std::size_t n, double lo, double hi);
  static FnClass support_bounded(std::size_t n, std::vector<std::size_t> special, std::vector<std::size_t> free,
                                 std::size_t budget);
  static FnClass parity(unsigned m, bool with_bottom);
  static FnClass hadamard(std::size_t m);
  static FnClass grid(std::size_t n, double lo, double hi, double step);

  const ClassRepr& repr() const noexcept { return repr_; }
  std::size_t domain_size() const noexcept { return domain_size_; }
  FnKind kind() const noexcept { return kind_; }
  /// Sup-norm bound M with every member in [-M, M]^X.
  double bound() const noexcept { return bound_; }

  bool is_explicit() const noexcept { return std::holds_alternative<ExplicitRepr>(repr_); }
  /// Throws UnsupportedRepresentation unless explicit.
  const std::vector<Fn>& members() const;
  /// Member count when finite and representable, nullopt otherwise.
  std::optional<std::size_t> cardinality() const;
  /// Explicit list of members for finite classes with at most `cap` members.
  std::vector<Fn> materialize(std::size_t cap = 1u << 16) const;

  std::string repr_name() const;

 private:
  FnClass(ClassRepr repr, std::size_t n, FnKind kind, double bound);

  ClassRepr repr_;
  std::size_t domain_size_;
  FnKind kind_;
  double bound_;
};

struct Example {
  std::size_t x;
  std::uint8_t outcome;

  friend bool operator==(const Example&, const Example&) = default;
};

class Sample {
 public:
  Sample() = default;
  Sample(std::vector<Example> examples, std::size_t domain_size);

  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }
  std::size_t domain_size() const noexcept { return domain_size_; }
  const Example& operator[](std::size_t i) const { return examples_[i]; }
  std::span<const Example> examples() const noexcept { return examples_; }
  auto begin() const noexcept { return examples_.begin(); }
  auto end() const noexcept { return examples_.end(); }

  friend bool operator==(const Sample&, const Sample&) = default;

 private:
  std::vector<Example> examples_;
  std::size_t domain_size_ = 0;
};

/// Accept probabilities of a no-access distinguisher on (x, 1) and (x, 0).
struct RandomizedDistinguisher {
  std::vector<double> accept_if_one;
  std::vector<double> accept_if_zero;

  RandomizedDistinguisher(std::vector<double> accept1, std::vector<double> accept0);
  std::size_t size() const noexcept { return accept_if_one.size(); }
};

void check_same_domain(std::size_t a, std::size_t b, const char* what);

double inner_product(const Fn& f1, const Fn& f2, const Distribution& mu);
double dual_norm(const Fn& f, const FnClass& cls, const Distribution& mu);
double dual_norm(std::span<const double> f, const FnClass& cls, const Distribution& mu);
double advantage(const Fn& p1, const Fn& p2, const FnClass& distinguishers, const Distribution& mu);
double l1_error(const Fn& p1, const Fn& p2, const Distribution& mu);

Fn transform_distinguisher(const RandomizedDistinguisher& d);
RandomizedDistinguisher inverse_transform(const Fn& f);

Sample sample(const Fn& p, const Distribution& mu, std::size_t n, CounterRng& rng);
Sample sample(const Fn& p, const Distribution& mu, std::size_t n, std::uint64_t seed);

/// All pairwise differences p1 - p2, duplicates removed by exact value equality
/// (first occurrence kept, row-major over (p1, p2)).
FnClass difference_class(const FnClass& predictors);

/// Linear embedding x -> (<f, g>_mu)_{g in cls} for classes with finitely many
/// members (explicit, parity, Hadamard). The dual norm of f is the max |.| of
/// its embedding and distances become l-infinity distances of embeddings.
std::vector<double> embed(std::span<const double> f, const FnClass& cls, const Distribution& mu);

/// True when the class norm is a finite maximum of linear functionals.
bool has_linear_embedding(const FnClass& cls) noexcept;

}  // namespace oi
