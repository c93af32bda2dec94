#include <atomic>
#include <cstdlib>
#include <string_view>

#include "oi/kernels.hpp"

namespace oi::kernels {

#ifndef OI_HAVE_AVX2
const KernelTable* avx2_table() noexcept { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() noexcept {
#if defined(OI_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_table() noexcept {
  const char* env = std::getenv("OI_KERNELS");
  if (env != nullptr && std::string_view(env) == "scalar") return &scalar_table();
  if (cpu_has_avx2()) return avx2_table();
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

bool available(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
      return avx2_table() != nullptr && cpu_has_avx2();
  }
  return false;
}

Backend active_backend() noexcept { return active().backend; }

bool set_backend(Backend b) noexcept {
  if (!available(b)) return false;
  slot().store(b == Backend::Avx2 ? avx2_table() : &scalar_table());
  return true;
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_relaxed); }

std::string_view name(Backend b) noexcept { return b == Backend::Avx2 ? "avx2" : "scalar"; }

}  // namespace oi::kernels
