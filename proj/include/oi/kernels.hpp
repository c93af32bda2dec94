#pragma once

// Data-parallel inner loops behind the norm calculus. Each kernel has a scalar
// reference implementation and (on x86-64) an AVX2+FMA variant; the active
// table is chosen once at startup from CPU features and can be forced with
// OI_KERNELS=scalar|avx2 or set_backend().

#include <cstddef>
#include <span>
#include <string_view>

namespace oi::kernels {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  Backend backend;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*weighted_dot)(const double* w, const double* a, const double* b, std::size_t n);
  double (*weighted_abs)(const double* w, const double* a, std::size_t n);
  double (*weighted_abs_diff)(const double* w, const double* a, const double* b, std::size_t n);
  double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
  double (*max_abs)(const double* a, std::size_t n);
  void (*fwht)(double* data, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
/// Null when the AVX2 variant was not compiled in.
const KernelTable* avx2_table() noexcept;

bool available(Backend b) noexcept;
Backend active_backend() noexcept;
/// Returns false (and leaves the table unchanged) if `b` is unavailable.
bool set_backend(Backend b) noexcept;
const KernelTable& active() noexcept;

std::string_view name(Backend b) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double weighted_dot(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
  return active().weighted_dot(w.data(), a.data(), b.data(), w.size());
}
inline double weighted_abs(std::span<const double> w, std::span<const double> a) {
  return active().weighted_abs(w.data(), a.data(), w.size());
}
inline double weighted_abs_diff(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
  return active().weighted_abs_diff(w.data(), a.data(), b.data(), w.size());
}
inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  return active().max_abs_diff(a.data(), b.data(), a.size());
}
inline double max_abs(std::span<const double> a) { return active().max_abs(a.data(), a.size()); }
/// Unnormalized in-place Walsh-Hadamard transform; size must be a power of two.
inline void fwht(std::span<double> data) { active().fwht(data.data(), data.size()); }

}  // namespace oi::kernels
