#include <cmath>
#include <vector>

#include "doctest.h"
#include "oi/kernels.hpp"
#include "oi/rng.hpp"

namespace kern = oi::kernels;

namespace {

std::vector<double> random_vec(oi::CounterRng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
  return v;
}

void check_close(double a, double b, double scale) { CHECK(std::fabs(a - b) <= 1e-12 * std::max(1.0, scale)); }

}  // namespace

TEST_CASE("scalar fwht matches the Sylvester matrix product") {
  oi::CounterRng rng(3);
  for (std::size_t n : {1u, 2u, 4u, 8u, 32u}) {
    auto v = random_vec(rng, n);
    std::vector<double> expect(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) expect[j] += ((__builtin_popcountll(i & j) & 1) ? -1.0 : 1.0) * v[i];
    }
    kern::scalar_table().fwht(v.data(), n);
    for (std::size_t j = 0; j < n; ++j) CHECK(v[j] == doctest::Approx(expect[j]).epsilon(1e-12));
  }
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const auto* simd = kern::avx2_table();
  if (simd == nullptr || !kern::available(kern::Backend::Avx2)) {
    MESSAGE("avx2 backend unavailable; skipping");
    return;
  }
  const auto& ref = kern::scalar_table();
  oi::CounterRng rng(11);
  // Odd lengths exercise the scalar tails.
  for (std::size_t n : {0u, 1u, 3u, 7u, 8u, 9u, 15u, 16u, 33u, 1000u, 4097u}) {
    auto a = random_vec(rng, n);
    auto b = random_vec(rng, n);
    std::vector<double> w(n);
    for (double& x : w) x = rng.uniform();
    const double scale = static_cast<double>(n);
    check_close(ref.dot(a.data(), b.data(), n), simd->dot(a.data(), b.data(), n), scale);
    check_close(ref.weighted_dot(w.data(), a.data(), b.data(), n), simd->weighted_dot(w.data(), a.data(), b.data(), n),
                scale);
    check_close(ref.weighted_abs(w.data(), a.data(), n), simd->weighted_abs(w.data(), a.data(), n), scale);
    check_close(ref.weighted_abs_diff(w.data(), a.data(), b.data(), n),
                simd->weighted_abs_diff(w.data(), a.data(), b.data(), n), scale);
    CHECK(ref.max_abs_diff(a.data(), b.data(), n) == simd->max_abs_diff(a.data(), b.data(), n));
    CHECK(ref.max_abs(a.data(), n) == simd->max_abs(a.data(), n));
  }
  for (std::size_t n : {1u, 2u, 4u, 8u, 16u, 64u, 1024u}) {
    auto a = random_vec(rng, n);
    auto b = a;
    ref.fwht(a.data(), n);
    simd->fwht(b.data(), n);
    for (std::size_t i = 0; i < n; ++i) check_close(a[i], b[i], static_cast<double>(n));
  }
}

TEST_CASE("backend switching") {
  const auto before = kern::active_backend();
  CHECK(kern::set_backend(kern::Backend::Scalar));
  CHECK(kern::active_backend() == kern::Backend::Scalar);
  CHECK(kern::name(kern::Backend::Scalar) == "scalar");
  kern::set_backend(before);
}
