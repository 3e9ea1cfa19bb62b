#pragma once

// Data-parallel kernels behind distance computation and batch tree evaluation.
//
// Every kernel exists as a scalar reference and, where the CPU supports it, an
// AVX2 variant. Variants vectorise across independent elements (points or
// instances) and keep the per-element operation order of the scalar kernel, so
// results are bit-identical; the test suite checks this.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace gpmal::simd {

/// Arithmetic results saturate to +-kValueLimit. Squared distances between
/// saturated values stay finite, and no primitive can produce NaN or inf.
inline constexpr double kValueLimit = 1e100;

/// Protected division returns 0 when |denominator| <= kDivisionEpsilon.
inline constexpr double kDivisionEpsilon = 1e-9;

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);

struct Kernels {
  Isa isa;

  /// out[k] = squared distance between `query` and row ids[k] of the row-major
  /// block `points` (row stride `dim`).
  void (*sq_dist_ids)(const double* points, std::size_t dim, const double* query,
                      const std::uint32_t* ids, std::size_t count, double* out);
  /// out[r] = squared distance between `query` and row r, for r < count.
  void (*sq_dist_rows)(const double* points, std::size_t dim, const double* query,
                       std::size_t count, double* out);

  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  void (*protected_div)(const double* a, const double* b, double* out, std::size_t n);
  void (*max)(const double* a, const double* b, double* out, std::size_t n);
  void (*min)(const double* a, const double* b, double* out, std::size_t n);
  void (*sigmoid)(const double* a, double* out, std::size_t n);
  void (*relu)(const double* a, double* out, std::size_t n);
  /// out[i] = cond[i] < 0 ? if_negative[i] : otherwise[i]
  void (*select_negative)(const double* cond, const double* if_negative,
                          const double* otherwise, double* out, std::size_t n);
};

/// Kernel table for a specific instruction set. Throws std::runtime_error if
/// the running CPU (or the build) does not support it.
const Kernels& kernels_for(Isa isa);

/// The table in use. Defaults to the widest supported ISA; the environment
/// variable GPMAL_SIMD=scalar|avx2 overrides the default.
const Kernels& active();
void set_active(Isa isa);

/// Scalar element semantics shared by the reference kernels and recursive
/// tree evaluation.
namespace element {

inline double saturate(double v) {
  return v > kValueLimit ? kValueLimit : (v < -kValueLimit ? -kValueLimit : v);
}
inline double add(double a, double b) { return saturate(a + b); }
inline double sub(double a, double b) { return saturate(a - b); }
inline double mul(double a, double b) { return saturate(a * b); }
inline double protected_div(double a, double b) {
  return std::fabs(b) > kDivisionEpsilon ? saturate(a / b) : 0.0;
}
inline double max(double a, double b) { return a > b ? a : b; }
inline double min(double a, double b) { return a < b ? a : b; }
inline double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }
inline double relu(double a) { return a > 0.0 ? a : 0.0; }
inline double select_negative(double c, double y, double z) { return c < 0.0 ? y : z; }

inline double sq_dist(const double* a, const double* b, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double diff = a[j] - b[j];
    acc += diff * diff;
  }
  return acc;
}

}  // namespace element

namespace detail {
const Kernels& scalar_kernels();
/// nullptr when the build target has no AVX2 code path.
const Kernels* avx2_kernels();
}  // namespace detail

}  // namespace gpmal::simd
