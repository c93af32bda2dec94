#include "oi/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <unordered_set>

#include "oi/kernels.hpp"

namespace oi {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DomainMismatch:
      return "domain mismatch";
    case ErrorKind::Argument:
      return "invalid argument";
    case ErrorKind::UnsupportedRepresentation:
      return "unsupported representation";
    case ErrorKind::CapExceeded:
      return "cap exceeded";
    case ErrorKind::Precondition:
      return "precondition failed";
    case ErrorKind::Invariant:
      return "invariant violated";
    case ErrorKind::Io:
      return "io error";
  }
  return "error";
}

namespace {

constexpr double kRangeSlack = 1e-12;

double kind_limit(FnKind kind, double bound) {
  return kind == FnKind::Generic ? bound : 1.0;
}

bool in_range(double v, FnKind kind, double bound) {
  if (!std::isfinite(v)) return false;
  switch (kind) {
    case FnKind::Predictor:
      return v >= -kRangeSlack && v <= 1.0 + kRangeSlack;
    case FnKind::Distinguisher:
      return v >= -1.0 - kRangeSlack && v <= 1.0 + kRangeSlack;
    case FnKind::Generic:
      return std::fabs(v) <= bound * (1.0 + kRangeSlack) + kRangeSlack;
  }
  return false;
}

bool is_power_of_two(std::size_t m) { return m != 0 && (m & (m - 1)) == 0; }

std::vector<double> weighted(std::span<const double> f, const Distribution& mu) {
  std::vector<double> wf(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) wf[i] = mu[i] * f[i];
  return wf;
}

std::size_t grid_levels(const GridRepr& g) {
  const double ratio = (g.hi - g.lo) / g.step;
  const double rounded = std::round(ratio);
  return static_cast<std::size_t>(rounded) + 1;
}

double box_norm(std::span<const double> f, const Distribution& mu, double lo, double hi) {
  if (lo == -1.0 && hi == 1.0) return kernels::weighted_abs(mu.weights(), f);
  double upper = 0.0;
  double lower = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = mu[i] * f[i] * lo;
    const double b = mu[i] * f[i] * hi;
    upper += std::max(a, b);
    lower += std::min(a, b);
  }
  return std::max(std::fabs(upper), std::fabs(lower));
}

}  // namespace

// ---------------------------------------------------------------------------
// Domain / Distribution

Domain Domain::indexed(std::size_t n) {
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return Domain(std::move(labels));
}

Domain::Domain(std::vector<std::string> labels) : labels_(std::move(labels)) {
  require(!labels_.empty(), ErrorKind::Argument, "domain must contain at least one individual");
  require(labels_.size() <= kMaxDomainSize, ErrorKind::CapExceeded, "domain larger than the dense-storage cap");
  std::unordered_set<std::string> seen;
  for (const auto& l : labels_) require(seen.insert(l).second, ErrorKind::Argument, "duplicate individual label '" + l + "'");
}

std::optional<std::size_t> Domain::index_of(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

Distribution Distribution::uniform(std::size_t n) {
  require(n >= 1, ErrorKind::Argument, "uniform distribution needs n >= 1");
  return Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Distribution::Distribution(std::vector<double> weights) : weights_(std::move(weights)) {
  require(!weights_.empty(), ErrorKind::Argument, "distribution over an empty domain");
  require(weights_.size() <= kMaxDomainSize, ErrorKind::CapExceeded, "distribution larger than the dense-storage cap");
  double total = 0.0;
  for (double w : weights_) {
    require(std::isfinite(w) && w >= 0.0, ErrorKind::Argument, "distribution weights must be finite and nonnegative");
    total += w;
  }
  require(total > 0.0, ErrorKind::Argument, "distribution weights sum to zero");
  if (std::fabs(total - 1.0) > 1e-9 || total != 1.0) {
    for (double& w : weights_) w /= total;
  }
  cdf_.resize(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cdf_.begin());
}

std::size_t Distribution::draw(CounterRng& rng) const {
  const double u = rng.uniform() * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

// ---------------------------------------------------------------------------
// Fn

const char* to_string(FnKind kind) noexcept {
  switch (kind) {
    case FnKind::Predictor:
      return "predictor";
    case FnKind::Distinguisher:
      return "distinguisher";
    case FnKind::Generic:
      return "generic";
  }
  return "generic";
}

FnKind fn_kind_from_string(const std::string& s) {
  if (s == "predictor") return FnKind::Predictor;
  if (s == "distinguisher") return FnKind::Distinguisher;
  if (s == "generic") return FnKind::Generic;
  fail(ErrorKind::Argument, "unknown function kind '" + s + "'");
}

Fn::Fn(std::vector<double> values, FnKind kind, double bound)
    : values_(std::move(values)), kind_(kind), bound_(kind_limit(kind, bound)) {
  require(!values_.empty(), ErrorKind::Argument, "function over an empty domain");
  require(bound_ > 0.0 && std::isfinite(bound_), ErrorKind::Argument, "function bound must be positive");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!in_range(values_[i], kind_, bound_)) {
      fail(ErrorKind::Invariant, std::string(to_string(kind_)) + " value " + std::to_string(values_[i]) +
                                     " out of range at individual " + std::to_string(i));
    }
  }
}

Fn Fn::constant(std::size_t n, double c, FnKind kind, double bound) {
  return Fn(std::vector<double>(n, c), kind, bound);
}

Fn operator-(const Fn& a, const Fn& b) {
  check_same_domain(a.size(), b.size(), "function difference");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values_[i] - b.values_[i];
  const double bound = (a.kind_ == FnKind::Predictor && b.kind_ == FnKind::Predictor) ? 1.0 : a.bound_ + b.bound_;
  return Fn(std::move(v), FnKind::Generic, bound);
}

Fn operator+(const Fn& a, const Fn& b) {
  check_same_domain(a.size(), b.size(), "function sum");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values_[i] + b.values_[i];
  return Fn(std::move(v), FnKind::Generic, a.bound_ + b.bound_);
}

Fn Fn::scaled(double a) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= a;
  const double bound = std::max(std::fabs(a) * bound_, 1e-300);
  return Fn(std::move(v), FnKind::Generic, bound);
}

bool Fn::same_values(const Fn& other) const noexcept {
  if (values_.size() != other.values_.size()) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(values_[i]) != std::bit_cast<std::uint64_t>(other.values_[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// FnClass

FnClass::FnClass(ClassRepr repr, std::size_t n, FnKind kind, double bound)
    : repr_(std::move(repr)), domain_size_(n), kind_(kind), bound_(bound) {}

FnClass FnClass::explicit_members(std::vector<Fn> members) {
  require(!members.empty(), ErrorKind::Argument, "explicit class must be nonempty");
  FnKind kind = members.front().kind();
  double bound = 0.0;
  for (const auto& f : members) {
    if (f.kind() != kind) kind = FnKind::Generic;
    bound = std::max(bound, f.bound());
  }
  return explicit_members(std::move(members), kind, bound);
}

FnClass FnClass::explicit_members(std::vector<Fn> members, FnKind kind, double bound) {
  require(!members.empty(), ErrorKind::Argument, "explicit class must be nonempty");
  const std::size_t n = members.front().size();
  double sup = 0.0;
  for (const auto& f : members) {
    check_same_domain(f.size(), n, "explicit class member");
    for (double v : f.values()) {
      require(in_range(v, kind, kind_limit(kind, bound)), ErrorKind::Invariant,
              std::string("class member violates the ") + to_string(kind) + " bound");
      sup = std::max(sup, std::fabs(v));
    }
  }
  const double m = kind == FnKind::Generic ? bound : 1.0;
  (void)sup;
  return FnClass(ExplicitRepr{std::move(members)}, n, kind, m);
}

FnClass FnClass::full_cube(std::size_t n, double lo, double hi) {
  require(n >= 1, ErrorKind::Argument, "cube over an empty domain");
  require(lo <= hi, ErrorKind::Argument, "cube bounds must satisfy lo <= hi");
  FnKind kind = FnKind::Generic;
  if (lo >= 0.0 && hi <= 1.0) {
    kind = FnKind::Predictor;
  } else if (lo >= -1.0 && hi <= 1.0) {
    kind = FnKind::Distinguisher;
  }
  return FnClass(FullCubeRepr{lo, hi}, n, kind, std::max(std::fabs(lo), std::fabs(hi)));
}

FnClass FnClass::support_bounded(std::size_t n, std::vector<std::size_t> special, std::vector<std::size_t> free,
                                 std::size_t budget) {
  std::vector<char> seen(n, 0);
  for (auto* part : {&special, &free}) {
    for (std::size_t i : *part) {
      require(i < n, ErrorKind::Argument, "support-bounded index outside the domain");
      require(!seen[i], ErrorKind::Argument, "special and free sets must be disjoint and duplicate-free");
      seen[i] = 1;
    }
  }
  require(budget <= free.size(), ErrorKind::Argument, "support budget exceeds the free set");
  return FnClass(SupportBoundedRepr{std::move(special), std::move(free), budget}, n, FnKind::Distinguisher, 1.0);
}

FnClass FnClass::parity(unsigned m, bool with_bottom) {
  require(m <= 20, ErrorKind::CapExceeded, "parity class limited to m <= 20");
  const std::size_t n = (std::size_t{1} << m) + (with_bottom ? 1 : 0);
  return FnClass(ParityRepr{m, with_bottom}, n, FnKind::Distinguisher, 1.0);
}

FnClass FnClass::hadamard(std::size_t m) {
  require(is_power_of_two(m), ErrorKind::Argument, "Hadamard order must be a power of two");
  require(m <= kMaxDomainSize, ErrorKind::CapExceeded, "Hadamard order above the domain cap");
  return FnClass(HadamardRepr{m}, m, FnKind::Distinguisher, 1.0);
}

FnClass FnClass::grid(std::size_t n, double lo, double hi, double step) {
  require(n >= 1, ErrorKind::Argument, "grid over an empty domain");
  require(lo < hi && step > 0.0, ErrorKind::Argument, "grid needs lo < hi and a positive step");
  const double ratio = (hi - lo) / step;
  require(std::fabs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio), ErrorKind::Argument,
          "grid step must divide hi - lo exactly");
  auto cube = full_cube(n, lo, hi);
  return FnClass(GridRepr{lo, hi, step}, n, cube.kind(), cube.bound());
}

const std::vector<Fn>& FnClass::members() const {
  const auto* e = std::get_if<ExplicitRepr>(&repr_);
  if (e == nullptr) fail(ErrorKind::UnsupportedRepresentation, "operation needs an explicit class, got " + repr_name());
  return e->members;
}

std::optional<std::size_t> FnClass::cardinality() const {
  return std::visit(
      [&](const auto& r) -> std::optional<std::size_t> {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, ExplicitRepr>) {
          return r.members.size();
        } else if constexpr (std::is_same_v<R, ParityRepr>) {
          return std::size_t{1} << r.m;
        } else if constexpr (std::is_same_v<R, HadamardRepr>) {
          return r.m;
        } else if constexpr (std::is_same_v<R, GridRepr>) {
          const double levels = static_cast<double>(grid_levels(r));
          const double count = std::pow(levels, static_cast<double>(domain_size_));
          if (count > 1e18) return std::nullopt;
          return static_cast<std::size_t>(std::llround(count));
        } else {
          return std::nullopt;
        }
      },
      repr_);
}

std::vector<Fn> FnClass::materialize(std::size_t cap) const {
  const auto card = cardinality();
  if (!card) fail(ErrorKind::UnsupportedRepresentation, "cannot materialize " + repr_name());
  require(*card <= cap, ErrorKind::CapExceeded,
          repr_name() + " has " + std::to_string(*card) + " members, above the cap " + std::to_string(cap));
  std::vector<Fn> out;
  out.reserve(*card);
  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, ExplicitRepr>) {
          out = r.members;
        } else if constexpr (std::is_same_v<R, ParityRepr>) {
          const std::size_t cube = std::size_t{1} << r.m;
          const std::size_t off = r.with_bottom ? 1 : 0;
          for (std::size_t s = 0; s < cube; ++s) {
            std::vector<double> v(domain_size_);
            if (r.with_bottom) v[0] = 1.0;
            for (std::size_t x = 0; x < cube; ++x) v[off + x] = (std::popcount(s & x) & 1) ? -1.0 : 1.0;
            out.emplace_back(std::move(v), FnKind::Distinguisher);
          }
        } else if constexpr (std::is_same_v<R, HadamardRepr>) {
          for (std::size_t j = 0; j < r.m; ++j) {
            std::vector<double> v(r.m);
            for (std::size_t i = 0; i < r.m; ++i) v[i] = (std::popcount(i & j) & 1) ? -1.0 : 1.0;
            out.emplace_back(std::move(v), FnKind::Distinguisher);
          }
        } else if constexpr (std::is_same_v<R, GridRepr>) {
          const std::size_t levels = grid_levels(r);
          std::vector<std::size_t> digits(domain_size_, 0);
          for (std::size_t k = 0; k < *card; ++k) {
            std::vector<double> v(domain_size_);
            for (std::size_t i = 0; i < domain_size_; ++i) {
              v[i] = digits[i] + 1 == levels ? r.hi : r.lo + static_cast<double>(digits[i]) * r.step;
            }
            out.emplace_back(std::move(v), kind_, bound_);
            for (std::size_t i = domain_size_; i-- > 0;) {
              if (++digits[i] < levels) break;
              digits[i] = 0;
            }
          }
        }
      },
      repr_);
  return out;
}

std::string FnClass::repr_name() const {
  return std::visit(
      [](const auto& r) -> std::string {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, ExplicitRepr>) return "explicit";
        if constexpr (std::is_same_v<R, FullCubeRepr>) return "full_cube";
        if constexpr (std::is_same_v<R, SupportBoundedRepr>) return "support_bounded";
        if constexpr (std::is_same_v<R, ParityRepr>) return "parity";
        if constexpr (std::is_same_v<R, HadamardRepr>) return "hadamard";
        if constexpr (std::is_same_v<R, GridRepr>) return "grid";
      },
      repr_);
}

// ---------------------------------------------------------------------------
// Sample / randomized distinguisher

Sample::Sample(std::vector<Example> examples, std::size_t domain_size)
    : examples_(std::move(examples)), domain_size_(domain_size) {
  for (const auto& e : examples_) {
    require(e.x < domain_size_, ErrorKind::Argument, "sample index outside the domain");
    require(e.outcome <= 1, ErrorKind::Argument, "outcomes must be 0 or 1");
  }
}

RandomizedDistinguisher::RandomizedDistinguisher(std::vector<double> accept1, std::vector<double> accept0)
    : accept_if_one(std::move(accept1)), accept_if_zero(std::move(accept0)) {
  check_same_domain(accept_if_one.size(), accept_if_zero.size(), "randomized distinguisher");
  for (auto* v : {&accept_if_one, &accept_if_zero}) {
    for (double p : *v) require(p >= 0.0 && p <= 1.0, ErrorKind::Invariant, "accept probabilities must lie in [0,1]");
  }
}

// ---------------------------------------------------------------------------
// Operations

void check_same_domain(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    fail(ErrorKind::DomainMismatch,
         std::string(what) + ": sizes " + std::to_string(a) + " and " + std::to_string(b) + " differ");
  }
}

double inner_product(const Fn& f1, const Fn& f2, const Distribution& mu) {
  check_same_domain(f1.size(), f2.size(), "inner product");
  check_same_domain(f1.size(), mu.size(), "inner product");
  return kernels::weighted_dot(mu.weights(), f1.values(), f2.values());
}

bool has_linear_embedding(const FnClass& cls) noexcept {
  return std::holds_alternative<ExplicitRepr>(cls.repr()) || std::holds_alternative<ParityRepr>(cls.repr()) ||
         std::holds_alternative<HadamardRepr>(cls.repr());
}

std::vector<double> embed(std::span<const double> f, const FnClass& cls, const Distribution& mu) {
  check_same_domain(f.size(), mu.size(), "embedding");
  check_same_domain(f.size(), cls.domain_size(), "embedding");
  std::vector<double> wf = weighted(f, mu);
  if (const auto* e = std::get_if<ExplicitRepr>(&cls.repr())) {
    std::vector<double> out(e->members.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = kernels::dot(wf, e->members[j].values());
    return out;
  }
  if (std::holds_alternative<HadamardRepr>(cls.repr())) {
    kernels::fwht(wf);
    return wf;
  }
  if (const auto* p = std::get_if<ParityRepr>(&cls.repr())) {
    if (!p->with_bottom) {
      kernels::fwht(wf);
      return wf;
    }
    std::vector<double> cube(wf.begin() + 1, wf.end());
    kernels::fwht(cube);
    for (double& c : cube) c += wf[0];
    return cube;
  }
  fail(ErrorKind::UnsupportedRepresentation, "no finite linear embedding for " + cls.repr_name());
}

double dual_norm(std::span<const double> f, const FnClass& cls, const Distribution& mu) {
  check_same_domain(f.size(), mu.size(), "dual norm");
  check_same_domain(f.size(), cls.domain_size(), "dual norm");
  return std::visit(
      [&](const auto& r) -> double {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, ExplicitRepr>) {
          if (r.members.empty()) return 0.0;
          const std::vector<double> wf = weighted(f, mu);
          double best = 0.0;
          for (const auto& g : r.members) best = std::max(best, std::fabs(kernels::dot(wf, g.values())));
          return best;
        } else if constexpr (std::is_same_v<R, FullCubeRepr>) {
          return box_norm(f, mu, r.lo, r.hi);
        } else if constexpr (std::is_same_v<R, GridRepr>) {
          // The grid contains both endpoints, so its sup equals the cube's.
          return box_norm(f, mu, r.lo, r.hi);
        } else if constexpr (std::is_same_v<R, SupportBoundedRepr>) {
          double total = 0.0;
          for (std::size_t i : r.special) total += mu[i] * std::fabs(f[i]);
          if (r.budget == 0) return total;
          std::vector<double> mass(r.free.size());
          for (std::size_t k = 0; k < r.free.size(); ++k) mass[k] = mu[r.free[k]] * std::fabs(f[r.free[k]]);
          std::nth_element(mass.begin(), mass.begin() + static_cast<std::ptrdiff_t>(r.budget - 1), mass.end(),
                           std::greater<>());
          std::sort(mass.begin(), mass.begin() + static_cast<std::ptrdiff_t>(r.budget), std::greater<>());
          for (std::size_t k = 0; k < r.budget; ++k) total += mass[k];
          return total;
        } else {
          return kernels::max_abs(embed(f, cls, mu));
        }
      },
      cls.repr());
}

double dual_norm(const Fn& f, const FnClass& cls, const Distribution& mu) { return dual_norm(f.values(), cls, mu); }

double advantage(const Fn& p1, const Fn& p2, const FnClass& distinguishers, const Distribution& mu) {
  check_same_domain(p1.size(), p2.size(), "advantage");
  std::vector<double> diff(p1.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = p1[i] - p2[i];
  return dual_norm(diff, distinguishers, mu);
}

double l1_error(const Fn& p1, const Fn& p2, const Distribution& mu) {
  check_same_domain(p1.size(), p2.size(), "l1 error");
  check_same_domain(p1.size(), mu.size(), "l1 error");
  return kernels::weighted_abs_diff(mu.weights(), p1.values(), p2.values());
}

Fn transform_distinguisher(const RandomizedDistinguisher& d) {
  std::vector<double> v(d.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = d.accept_if_one[i] - d.accept_if_zero[i];
  return Fn(std::move(v), FnKind::Distinguisher);
}

RandomizedDistinguisher inverse_transform(const Fn& f) {
  require(f.kind() != FnKind::Generic || f.bound() <= 1.0, ErrorKind::Argument,
          "inverse transform needs values in [-1,1]");
  std::vector<double> a1(f.size(), 0.0);
  std::vector<double> a0(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    require(f[i] >= -1.0 && f[i] <= 1.0, ErrorKind::Argument, "inverse transform needs values in [-1,1]");
    if (f[i] >= 0.0) {
      a1[i] = f[i];
    } else {
      a0[i] = -f[i];
    }
  }
  return RandomizedDistinguisher(std::move(a1), std::move(a0));
}

Sample sample(const Fn& p, const Distribution& mu, std::size_t n, CounterRng& rng) {
  check_same_domain(p.size(), mu.size(), "sample");
  require(p.kind() == FnKind::Predictor, ErrorKind::Argument, "sampling needs a predictor");
  std::vector<Example> out(n);
  for (auto& e : out) {
    e.x = mu.draw(rng);
    e.outcome = rng.uniform() < p[e.x] ? 1 : 0;
  }
  return Sample(std::move(out), p.size());
}

Sample sample(const Fn& p, const Distribution& mu, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  return sample(p, mu, n, rng);
}

FnClass difference_class(const FnClass& predictors) {
  const auto& ps = predictors.members();
  std::set<std::vector<std::uint64_t>> seen;
  std::vector<Fn> out;
  double bound = 0.0;
  for (const auto& a : ps) {
    for (const auto& b : ps) {
      Fn d = a - b;
      std::vector<std::uint64_t> key(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) key[i] = std::bit_cast<std::uint64_t>(d[i]);
      if (seen.insert(std::move(key)).second) {
        bound = std::max(bound, d.bound());
        out.push_back(std::move(d));
      }
    }
  }
  return FnClass::explicit_members(std::move(out), FnKind::Generic, bound);
}

}  // namespace oi
