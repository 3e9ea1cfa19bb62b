#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "gpmal/matrix.hpp"

namespace gpmal {

struct PcaModel {
  std::vector<double> mean;                 ///< length m
  Matrix components;                        ///< d x m, orthonormal rows
  std::vector<double> explained_variance;   ///< length d, non-increasing
};

/// Principal axes of the sample covariance (n - 1 denominator). Each
/// component is signed so its largest-magnitude entry is positive. Throws
/// ConfigError unless 1 <= components <= min(n, m).
PcaModel pca_fit(const Matrix& points, std::size_t components);

/// (points - mean) * components^T.
Matrix pca_transform(const PcaModel& model, const Matrix& points);

void to_json(nlohmann::json& j, const PcaModel& model);

}  // namespace gpmal
