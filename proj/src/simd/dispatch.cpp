#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "gpmal/simd/kernels.hpp"

namespace gpmal::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Kernels* default_kernels() {
  if (const char* forced = std::getenv("GPMAL_SIMD")) {
    const std::string name(forced);
    if (name == "scalar") return &detail::scalar_kernels();
    if (name == "avx2" && isa_supported(Isa::avx2)) return detail::avx2_kernels();
  }
  if (isa_supported(Isa::avx2)) return detail::avx2_kernels();
  return &detail::scalar_kernels();
}

std::atomic<const Kernels*>& active_slot() {
  static std::atomic<const Kernels*> slot{default_kernels()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return detail::avx2_kernels() != nullptr && cpu_has_avx2();
  }
  return false;
}

const Kernels& kernels_for(Isa isa) {
  if (!isa_supported(isa))
    throw std::runtime_error("instruction set not supported: " + std::string(isa_name(isa)));
  return isa == Isa::avx2 ? *detail::avx2_kernels() : detail::scalar_kernels();
}

const Kernels& active() { return *active_slot().load(std::memory_order_acquire); }

void set_active(Isa isa) { active_slot().store(&kernels_for(isa), std::memory_order_release); }

}  // namespace gpmal::simd
