#include "polarsep/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "polarsep/log.hpp"

namespace polarsep::kernels {

#if defined(POLARSEP_BUILD_AVX2)
const KernelTable* avx2_build_table();  // defined in avx2.cpp
#endif

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const KernelTable* select_table() {
  const KernelTable* best = &scalar_table();
#if defined(POLARSEP_BUILD_AVX2)
  if (cpu_has_avx2()) {
    best = avx2_build_table();
  }
#endif
  const char* request = std::getenv("POLARSEP_KERNELS");
  if (request == nullptr || std::strcmp(request, "auto") == 0) {
    return best;
  }
  if (std::strcmp(request, "scalar") == 0) {
    return &scalar_table();
  }
  if (std::strcmp(request, "avx2") == 0) {
    if (const KernelTable* t = avx2_table()) {
      return t;
    }
    log_warn("POLARSEP_KERNELS=avx2 requested but unavailable; using scalar");
    return &scalar_table();
  }
  log_warn("unknown POLARSEP_KERNELS value '%s'; using auto", request);
  return best;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{select_table()};
  return slot;
}

}  // namespace

const KernelTable* avx2_table() {
#if defined(POLARSEP_BUILD_AVX2)
  if (cpu_has_avx2()) {
    return avx2_build_table();
  }
#endif
  return nullptr;
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

void set_active(const KernelTable& table) {
  active_slot().store(&table, std::memory_order_release);
}

}  // namespace polarsep::kernels
