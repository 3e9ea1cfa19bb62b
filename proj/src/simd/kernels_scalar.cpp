#include "gpmal/simd/kernels.hpp"

namespace gpmal::simd::detail {
namespace {

void sq_dist_ids(const double* points, std::size_t dim, const double* query,
                 const std::uint32_t* ids, std::size_t count, double* out) {
  for (std::size_t k = 0; k < count; ++k)
    out[k] = element::sq_dist(points + static_cast<std::size_t>(ids[k]) * dim, query, dim);
}

void sq_dist_rows(const double* points, std::size_t dim, const double* query,
                  std::size_t count, double* out) {
  for (std::size_t r = 0; r < count; ++r) out[r] = element::sq_dist(points + r * dim, query, dim);
}

template <double (*Op)(double, double)>
void binary(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = Op(a[i], b[i]);
}

template <double (*Op)(double)>
void unary(const double* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = Op(a[i]);
}

void select_negative(const double* c, const double* y, const double* z, double* out,
                     std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = element::select_negative(c[i], y[i], z[i]);
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels table{
      Isa::scalar,
      &sq_dist_ids,
      &sq_dist_rows,
      &binary<element::add>,
      &binary<element::sub>,
      &binary<element::mul>,
      &binary<element::protected_div>,
      &binary<element::max>,
      &binary<element::min>,
      &unary<element::sigmoid>,
      &unary<element::relu>,
      &select_negative,
  };
  return table;
}

}  // namespace gpmal::simd::detail
