#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "axisforge/simd/kernels.hpp"

namespace axisforge::simd {

#if !defined(AXISFORGE_HAVE_AVX2)
const KernelTable* avx2_kernels() { return nullptr; }
#endif
#if !defined(AXISFORGE_HAVE_NEON)
const KernelTable* neon_kernels() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(AXISFORGE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return &scalar_kernels();
    case Backend::kAvx2:
      return cpu_has_avx2() ? avx2_kernels() : nullptr;
    case Backend::kNeon:
      return neon_kernels();  // NEON is baseline on aarch64
  }
  return nullptr;
}

Backend detect() {
  if (const char* env = std::getenv("AXISFORGE_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Backend::kScalar;
    if (want == "avx2" && table_for(Backend::kAvx2)) return Backend::kAvx2;
    if (want == "neon" && table_for(Backend::kNeon)) return Backend::kNeon;
  }
  if (table_for(Backend::kAvx2)) return Backend::kAvx2;
  if (table_for(Backend::kNeon)) return Backend::kNeon;
  return Backend::kScalar;
}

struct State {
  std::atomic<Backend> backend;
  std::atomic<const KernelTable*> table;
  State() : backend(detect()), table(table_for(backend.load())) {}
};

State& state() {
  static State s;
  return s;
}

}  // namespace

bool backend_available(Backend b) { return table_for(b) != nullptr; }

void set_backend(Backend b) {
  const KernelTable* t = table_for(b);
  if (!t) throw std::invalid_argument("SIMD backend " + std::string(backend_name(b)) + " unavailable");
  state().backend.store(b);
  state().table.store(t);
}

Backend active_backend() { return state().backend.load(); }

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& active() { return *state().table.load(std::memory_order_relaxed); }

}  // namespace axisforge::simd
