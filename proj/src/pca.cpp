#include "gpmal/pca.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "gpmal/error.hpp"

namespace gpmal {

PcaModel pca_fit(const Matrix& points, std::size_t components) {
  const std::size_t n = points.rows();
  const std::size_t m = points.cols();
  if (components < 1 || components > std::min(n, m))
    throw ConfigError("pca: components must lie in [1, min(n, m)]");
  if (n < 2) throw ConfigError("pca: needs at least two instances");

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> x(points.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centred = x.rowwise() - mean;
  const Eigen::MatrixXd covariance = (centred.transpose() * centred) / static_cast<double>(n - 1);

  // Eigenvalues come back ascending.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success) throw DataError("pca: eigendecomposition failed");

  PcaModel model;
  model.mean.assign(mean.data(), mean.data() + m);
  model.components = Matrix(components, m);
  for (std::size_t c = 0; c < components; ++c) {
    const auto source = static_cast<Eigen::Index>(m - 1 - c);
    Eigen::VectorXd axis = solver.eigenvectors().col(source);
    Eigen::Index largest = 0;
    axis.cwiseAbs().maxCoeff(&largest);
    if (axis(largest) < 0.0) axis = -axis;
    for (std::size_t j = 0; j < m; ++j) model.components(c, j) = axis(static_cast<Eigen::Index>(j));
    model.explained_variance.push_back(std::max(0.0, solver.eigenvalues()(source)));
  }
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& points) {
  const std::size_t m = model.mean.size();
  if (points.cols() != m) throw ConfigError("pca_transform: point width differs from the fitted width");
  const std::size_t d = model.components.rows();
  Matrix out(points.rows(), d);
  std::vector<double> centred(m);
  for (std::size_t r = 0; r < points.rows(); ++r) {
    for (std::size_t j = 0; j < m; ++j) centred[j] = points(r, j) - model.mean[j];
    for (std::size_t c = 0; c < d; ++c) {
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) sum += centred[j] * model.components(c, j);
      out(r, c) = sum;
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const PcaModel& model) {
  auto rows = nlohmann::json::array();
  for (std::size_t c = 0; c < model.components.rows(); ++c) {
    const auto row = model.components.row(c);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j = nlohmann::json{{"mean", model.mean}, {"components", rows}, {"explained_variance", model.explained_variance}};
}

}  // namespace gpmal
