#include "oi/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "oi/kernels.hpp"

namespace oi {

namespace {

bool is_signed_unit_box(const FnClass& cls) {
  if (const auto* c = std::get_if<FullCubeRepr>(&cls.repr())) return c->lo == -1.0 && c->hi == 1.0;
  if (const auto* g = std::get_if<GridRepr>(&cls.repr())) return g->lo == -1.0 && g->hi == 1.0;
  return false;
}

void check_eps(double eps) {
  require(std::isfinite(eps) && eps >= 0.0, ErrorKind::Argument, "epsilon must be a nonnegative real");
}

std::vector<std::vector<double>> prepare_all(const std::vector<Fn>& members, const NormMetric& metric) {
  std::vector<std::vector<double>> out;
  out.reserve(members.size());
  for (const auto& f : members) out.push_back(metric.prepare(f.values()));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Metric

NormMetric::NormMetric(const FnClass& f1, const Distribution& mu) : cls_(&f1), mu_(&mu) {
  check_same_domain(f1.domain_size(), mu.size(), "norm metric");
  if (has_linear_embedding(f1)) {
    mode_ = Mode::Embedded;
  } else if (is_signed_unit_box(f1)) {
    mode_ = Mode::WeightedL1;
  } else {
    mode_ = Mode::Generic;
  }
}

std::vector<double> NormMetric::prepare(std::span<const double> f) const {
  if (mode_ == Mode::Embedded) return embed(f, *cls_, *mu_);
  check_same_domain(f.size(), mu_->size(), "norm metric");
  return {f.begin(), f.end()};
}

double NormMetric::distance(std::span<const double> a, std::span<const double> b) const {
  switch (mode_) {
    case Mode::Embedded:
      return kernels::max_abs_diff(a, b);
    case Mode::WeightedL1:
      return kernels::weighted_abs_diff(mu_->weights(), a, b);
    case Mode::Generic:
      break;
  }
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  return dual_norm(diff, *cls_, *mu_);
}

std::vector<double> pairwise_distances(const std::vector<Fn>& members, const FnClass& f1, const Distribution& mu) {
  NormMetric metric(f1, mu);
  const auto prepared = prepare_all(members, metric);
  const std::size_t n = members.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = metric.distance(prepared[i], prepared[j]);
      dist[i * n + j] = d;
      dist[j * n + i] = d;
    }
  }
  return dist;
}

// ---------------------------------------------------------------------------
// Covering and packing

const char* to_string(CoverMode m) noexcept { return m == CoverMode::Exact ? "exact" : "greedy"; }

namespace {

struct ExactCoverSearch {
  std::vector<std::uint32_t> cover;        // cover[j]: members within eps of center j
  std::vector<std::uint32_t> suffix_union;  // union of cover[c..]
  std::vector<int> suffix_max;             // max popcount of cover[c..]
  std::uint32_t full = 0;
  std::size_t k = 0;
  std::vector<std::size_t> picks;

  bool dfs(std::size_t start, std::uint32_t covered) {
    if (covered == full) return true;
    if (picks.size() == k) return false;
    const std::size_t left = k - picks.size();
    const std::size_t n = cover.size();
    const std::uint32_t uncovered = full & ~covered;
    const int lowest = std::countr_zero(uncovered);
    for (std::size_t c = start; c < n; ++c) {
      if ((suffix_union[c] | covered) != full) break;
      if (static_cast<std::size_t>(std::popcount(uncovered)) > left * static_cast<std::size_t>(suffix_max[c])) break;
      // Some pick at index >= c must cover the lowest uncovered member.
      if (((suffix_union[c] >> lowest) & 1u) == 0) break;
      if ((cover[c] & uncovered) == 0) continue;
      picks.push_back(c);
      if (dfs(c + 1, covered | cover[c])) return true;
      picks.pop_back();
    }
    return false;
  }
};

}  // namespace

CoveringResult covering_exact(const FnClass& f2, const FnClass& f1, const Distribution& mu, double eps,
                              const SearchCaps& caps) {
  check_eps(eps);
  const auto& members = f2.members();
  const std::size_t n = members.size();
  require(n <= caps.exact_cover && n <= 32, ErrorKind::CapExceeded,
          "exact covering limited to " + std::to_string(std::min<std::size_t>(caps.exact_cover, 32)) +
              " members (got " + std::to_string(n) + "); use covering_greedy");
  check_same_domain(f2.domain_size(), f1.domain_size(), "covering");
  const auto dist = pairwise_distances(members, f1, mu);

  ExactCoverSearch s;
  s.cover.assign(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (dist[j * n + i] <= eps + kCoverSlack) s.cover[j] |= std::uint32_t{1} << i;
    }
  }
  s.full = n == 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << n) - 1;
  s.suffix_union.assign(n + 1, 0);
  s.suffix_max.assign(n + 1, 0);
  for (std::size_t c = n; c-- > 0;) {
    s.suffix_union[c] = s.suffix_union[c + 1] | s.cover[c];
    s.suffix_max[c] = std::max(s.suffix_max[c + 1], std::popcount(s.cover[c]));
  }
  for (s.k = 1; s.k <= n; ++s.k) {
    s.picks.clear();
    if (s.dfs(0, 0)) break;
  }
  CoveringResult r;
  r.centers = s.picks;
  r.size = r.centers.size();
  r.mode = CoverMode::Exact;
  r.epsilon = eps;
  return r;
}

CoveringResult covering_greedy(const FnClass& f2, const FnClass& f1, const Distribution& mu, double eps) {
  check_eps(eps);
  const auto& members = f2.members();
  const std::size_t n = members.size();
  check_same_domain(f2.domain_size(), f1.domain_size(), "covering");
  const auto dist = pairwise_distances(members, f1, mu);
  std::vector<char> covered(n, 0);
  std::size_t remaining = n;
  CoveringResult r;
  r.mode = CoverMode::Greedy;
  r.epsilon = eps;
  while (remaining > 0) {
    std::size_t best = n;
    std::size_t best_gain = 0;
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t gain = 0;
      for (std::size_t i = 0; i < n; ++i) gain += !covered[i] && dist[j * n + i] <= eps + kCoverSlack;
      if (gain > best_gain) {
        best_gain = gain;
        best = j;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!covered[i] && dist[best * n + i] <= eps + kCoverSlack) {
        covered[i] = 1;
        --remaining;
      }
    }
    r.centers.push_back(best);
  }
  r.size = r.centers.size();
  return r;
}

bool is_covering(const FnClass& f2, const FnClass& f1, const Distribution& mu, double eps,
                 const std::vector<std::size_t>& centers) {
  const auto& members = f2.members();
  NormMetric metric(f1, mu);
  const auto prepared = prepare_all(members, metric);
  for (std::size_t c : centers) require(c < members.size(), ErrorKind::Argument, "covering center out of range");
  for (const auto& p : prepared) {
    bool ok = false;
    for (std::size_t c : centers) {
      if (metric.distance(p, prepared[c]) <= eps + kCoverSlack) {
        ok = true;
        break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

std::size_t packing_lower(const FnClass& f2, const FnClass& f1, const Distribution& mu, double eps) {
  check_eps(eps);
  const auto& members = f2.members();
  NormMetric metric(f1, mu);
  const auto prepared = prepare_all(members, metric);
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    bool separated = true;
    for (std::size_t c : chosen) {
      if (metric.distance(prepared[i], prepared[c]) <= 2.0 * eps + kPackSlack) {
        separated = false;
        break;
      }
    }
    if (separated) chosen.push_back(i);
  }
  return chosen.size();
}

double metric_entropy(const FnClass& f2, const FnClass& f1, const Distribution& mu, double eps, CoverMode mode,
                      const SearchCaps& caps) {
  const auto r = mode == CoverMode::Exact ? covering_exact(f2, f1, mu, eps, caps) : covering_greedy(f2, f1, mu, eps);
  return std::log2(static_cast<double>(r.size));
}

// ---------------------------------------------------------------------------
// Fat shattering

namespace {

// values[f][x] for a finite class.
struct ValueTable {
  std::size_t members = 0;
  std::size_t domain = 0;
  std::vector<double> v;
  double at(std::size_t f, std::size_t x) const { return v[f * domain + x]; }
};

ValueTable table_of(const FnClass& cls) {
  const auto members = cls.is_explicit() ? cls.members() : cls.materialize();
  ValueTable t;
  t.members = members.size();
  t.domain = cls.domain_size();
  t.v.reserve(t.members * t.domain);
  for (const auto& f : members) t.v.insert(t.v.end(), f.values().begin(), f.values().end());
  return t;
}

// Shift candidates at one point: midpoints (a_b + b)/2 where b is a member
// value and a_b the largest member value at least 2 gamma below it. Every
// feasible split of the values into an upper and lower side is dominated by
// one of these.
std::vector<double> shift_candidates(const ValueTable& t, std::size_t x, double gamma) {
  std::vector<double> vals(t.members);
  for (std::size_t f = 0; f < t.members; ++f) vals[f] = t.at(f, x);
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  std::vector<double> out;
  for (std::size_t bi = 0; bi < vals.size(); ++bi) {
    const double b = vals[bi];
    const double limit = b - 2.0 * gamma + 2.0 * kFatSlack;
    auto it = std::upper_bound(vals.begin(), vals.end(), limit);
    if (it == vals.begin()) continue;
    const double a = *std::prev(it);
    if (a >= b) continue;
    const double r = 0.5 * (a + b);
    if (out.empty() || out.back() != r) out.push_back(r);
  }
  return out;
}

struct ShatterSearch {
  const ValueTable& t;
  double gamma;
  const std::vector<std::size_t>& points;
  std::vector<std::vector<double>> candidates;
  std::vector<double> shifts;
  std::vector<char> seen;

  // pattern[f] = bits assigned so far, or -1 when f is undecided at some point.
  bool search(std::size_t depth, const std::vector<std::int64_t>& pattern) {
    if (depth == points.size()) return true;
    const std::size_t x = points[depth];
    const std::size_t need = std::size_t{1} << (depth + 1);
    std::vector<std::int64_t> next(pattern.size());
    for (double r : candidates[depth]) {
      std::size_t distinct = 0;
      seen.assign(need, 0);
      for (std::size_t f = 0; f < t.members; ++f) {
        next[f] = -1;
        if (pattern[f] < 0) continue;
        const double v = t.at(f, x);
        std::int64_t bit = -1;
        if (v - r >= gamma - kFatSlack) {
          bit = 1;
        } else if (r - v >= gamma - kFatSlack) {
          bit = 0;
        }
        if (bit < 0) continue;
        next[f] = pattern[f] | (bit << depth);
        if (!seen[static_cast<std::size_t>(next[f])]) {
          seen[static_cast<std::size_t>(next[f])] = 1;
          ++distinct;
        }
      }
      if (distinct < need) continue;
      shifts.push_back(r);
      if (search(depth + 1, next)) return true;
      shifts.pop_back();
    }
    return false;
  }
};

std::optional<std::vector<double>> shatter_shifts(const ValueTable& t, double gamma,
                                                  const std::vector<std::size_t>& points) {
  if (points.empty()) return std::vector<double>{};
  if (points.size() >= 63 || (std::size_t{1} << points.size()) > t.members) return std::nullopt;
  ShatterSearch s{t, gamma, points, {}, {}, {}};
  for (std::size_t x : points) {
    s.candidates.push_back(shift_candidates(t, x, gamma));
    if (s.candidates.back().empty()) return std::nullopt;
  }
  std::vector<std::int64_t> start(t.members, 0);
  if (!s.search(0, start)) return std::nullopt;
  return s.shifts;
}

bool verify_table(const ValueTable& t, double gamma, const std::vector<std::size_t>& points,
                  const std::vector<double>& shifts) {
  if (points.size() != shifts.size() || points.size() >= 63) return false;
  const std::size_t patterns = std::size_t{1} << points.size();
  for (std::size_t b = 0; b < patterns; ++b) {
    bool found = false;
    for (std::size_t f = 0; f < t.members && !found; ++f) {
      bool ok = true;
      for (std::size_t i = 0; i < points.size() && ok; ++i) {
        const double sign = ((b >> i) & 1) ? 1.0 : -1.0;
        ok = sign * (t.at(f, points[i]) - shifts[i]) >= gamma - kFatSlack;
      }
      found = ok;
    }
    if (!found) return false;
  }
  return true;
}

void check_points(const ValueTable& t, const std::vector<std::size_t>& points) {
  for (std::size_t x : points) require(x < t.domain, ErrorKind::Argument, "witness point outside the domain");
  auto sorted = points;
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), ErrorKind::Argument,
          "witness points must be distinct");
}

// Advances `idx` to the next k-subset of {0..n-1} in lexicographic order.
bool next_subset(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t i = k; i-- > 0;) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

bool verify_fat_witness(const FnClass& cls, double gamma, const std::vector<std::size_t>& points,
                        const std::vector<double>& shifts) {
  const auto t = table_of(cls);
  check_points(t, points);
  return verify_table(t, gamma, points, shifts);
}

std::optional<std::vector<double>> find_shattering_shifts(const FnClass& cls, double gamma,
                                                          const std::vector<std::size_t>& points) {
  const auto t = table_of(cls);
  check_points(t, points);
  return shatter_shifts(t, gamma, points);
}

FatResult fat_exact(const FnClass& cls, double gamma, std::size_t max_points, const SearchCaps& caps) {
  require(gamma >= 0.0, ErrorKind::Argument, "gamma must be nonnegative");
  if (max_points > 1) {
    require(max_points <= caps.fat_points, ErrorKind::CapExceeded,
            "fat_exact limited to maxPoints <= " + std::to_string(caps.fat_points) + "; use fat_lower");
    require(cls.domain_size() <= caps.fat_domain, ErrorKind::CapExceeded,
            "fat_exact limited to |X| <= " + std::to_string(caps.fat_domain) + "; use fat_lower");
  }
  const auto t = table_of(cls);
  FatResult best;
  const std::size_t top = std::min(max_points, t.domain);
  for (std::size_t k = 1; k <= top; ++k) {
    if ((std::size_t{1} << k) > t.members) break;
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    bool found = false;
    do {
      if (auto shifts = shatter_shifts(t, gamma, idx)) {
        require(verify_table(t, gamma, idx, *shifts), ErrorKind::Invariant, "fat witness failed verification");
        best.dimension = k;
        best.witness_points = idx;
        best.witness_shifts = std::move(*shifts);
        found = true;
        break;
      }
    } while (next_subset(idx, t.domain));
    // Shattering is hereditary, so no larger set can succeed.
    if (!found) break;
  }
  return best;
}

FatResult fat_lower(const FnClass& cls, double gamma, std::size_t max_points, std::size_t trials,
                    std::uint64_t seed) {
  require(gamma >= 0.0, ErrorKind::Argument, "gamma must be nonnegative");
  const auto t = table_of(cls);
  CounterRng rng(seed);
  FatResult best;
  std::vector<std::size_t> order(t.domain);
  auto extend = [&](std::vector<std::size_t>& set, std::vector<double>& shifts) {
    for (std::size_t x : order) {
      if (set.size() >= max_points) break;
      if (std::find(set.begin(), set.end(), x) != set.end()) continue;
      set.push_back(x);
      if (auto s = shatter_shifts(t, gamma, set)) {
        shifts = std::move(*s);
      } else {
        set.pop_back();
      }
    }
  };
  for (std::size_t trial = 0; trial < std::max<std::size_t>(trials, 1); ++trial) {
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    std::vector<std::size_t> set;
    std::vector<double> shifts;
    extend(set, shifts);
    // Local search: swap one point for an outside point when that lets the set grow.
    bool improved = true;
    while (improved && set.size() < max_points) {
      improved = false;
      for (std::size_t i = 0; i < set.size() && !improved; ++i) {
        for (std::size_t x : order) {
          if (std::find(set.begin(), set.end(), x) != set.end()) continue;
          auto trial_set = set;
          trial_set[i] = x;
          auto s = shatter_shifts(t, gamma, trial_set);
          if (!s) continue;
          auto trial_shifts = std::move(*s);
          const std::size_t before = trial_set.size();
          extend(trial_set, trial_shifts);
          if (trial_set.size() > before) {
            set = std::move(trial_set);
            shifts = std::move(trial_shifts);
            improved = true;
            break;
          }
        }
      }
    }
    if (set.size() > best.dimension && verify_table(t, gamma, set, shifts)) {
      best.dimension = set.size();
      best.witness_points = set;
      best.witness_shifts = shifts;
    }
  }
  return best;
}

FnClass lift_distinguisher_class(const FnClass& d) {
  const auto& members = d.members();
  std::vector<Fn> lifted;
  lifted.reserve(members.size());
  for (const auto& f : members) {
    std::vector<double> v(2 * f.size(), 0.0);
    for (std::size_t x = 0; x < f.size(); ++x) v[2 * x + 1] = f[x];
    lifted.emplace_back(std::move(v), f.kind(), f.bound());
  }
  return FnClass::explicit_members(std::move(lifted), d.kind(), d.bound());
}

FnClass restrict_class(const FnClass& cls, const std::vector<std::size_t>& points) {
  require(!points.empty(), ErrorKind::Argument, "restriction to an empty point set");
  const auto& members = cls.members();
  std::vector<Fn> out;
  out.reserve(members.size());
  for (const auto& f : members) {
    std::vector<double> v;
    v.reserve(points.size());
    for (std::size_t x : points) {
      require(x < f.size(), ErrorKind::Argument, "restriction point outside the domain");
      v.push_back(f[x]);
    }
    out.emplace_back(std::move(v), f.kind(), f.bound());
  }
  return FnClass::explicit_members(std::move(out), cls.kind(), cls.bound());
}

// ---------------------------------------------------------------------------
// Duality and the Hadamard tightness geometry

namespace {

double sup_norm(const FnClass& cls) {
  double m = 0.0;
  for (const auto& f : cls.members()) m = std::max(m, kernels::max_abs(f.values()));
  return m;
}

}  // namespace

DualityReport duality_check(const FnClass& f1, const FnClass& f2, const Distribution& mu, double eps, double c,
                            const SearchCaps& caps) {
  require(eps > 0.0, ErrorKind::Argument, "duality check needs eps > 0");
  require(c >= 0.0, ErrorKind::Argument, "duality constant must be nonnegative");
  DualityReport r;
  r.epsilon = eps;
  r.constant = c;
  r.m1 = sup_norm(f1);
  r.m2 = sup_norm(f2);
  r.lhs = std::log2(static_cast<double>(covering_exact(f1, f2, mu, eps, caps).size));
  r.rhs = std::log2(static_cast<double>(covering_exact(f2, f1, mu, eps / 8.0, caps).size));
  const double scale = r.m1 * r.m2 / eps;
  r.bound = c * scale * scale * (1.0 + r.rhs);
  r.holds = r.lhs <= r.bound;
  return r;
}

FnClass hadamard_class(std::size_t m) {
  return FnClass::explicit_members(FnClass::hadamard(m).materialize(kMaxDomainSize), FnKind::Distinguisher);
}

std::size_t cube_packing_lower(double eps, std::size_t n, double grid_step, const FnClass& f1, const Distribution& mu,
                               double lo, double hi, const SearchCaps& caps) {
  check_eps(eps);
  check_same_domain(n, f1.domain_size(), "cube packing");
  const auto grid = FnClass::grid(n, lo, hi, grid_step);
  const auto count = grid.cardinality();
  require(count.has_value() && *count <= caps.grid_points, ErrorKind::CapExceeded,
          "grid cube has more than " + std::to_string(caps.grid_points) + " points");
  const std::size_t levels = static_cast<std::size_t>(std::llround((hi - lo) / grid_step)) + 1;
  const std::size_t total = *count;

  auto value_at = [&](std::size_t level) {
    return level + 1 == levels ? hi : lo + static_cast<double>(level) * grid_step;
  };
  auto decode = [&](std::size_t code, std::vector<double>& out) {
    for (std::size_t i = n; i-- > 0;) {
      out[i] = value_at(code % levels);
      code /= levels;
    }
  };

  // Stable bucket order: more boundary coordinates first, then lexicographic.
  std::vector<std::vector<std::uint32_t>> buckets(n + 1);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    std::size_t boundary = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t level = c % levels;
      boundary += level == 0 || level + 1 == levels;
      c /= levels;
    }
    buckets[n - boundary].push_back(static_cast<std::uint32_t>(code));
  }

  NormMetric metric(f1, mu);
  std::vector<std::vector<double>> chosen;
  std::vector<double> point(n);
  for (const auto& bucket : buckets) {
    for (std::uint32_t code : bucket) {
      decode(code, point);
      auto p = metric.prepare(point);
      bool separated = true;
      for (const auto& q : chosen) {
        if (metric.distance(p, q) <= 2.0 * eps + kPackSlack) {
          separated = false;
          break;
        }
      }
      if (separated) chosen.push_back(std::move(p));
    }
  }
  return chosen.size();
}

}  // namespace oi
