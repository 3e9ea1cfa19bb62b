#pragma once

#include <cstddef>

#include <json.hpp>

#include "gpmal/matrix.hpp"
#include "gpmal/neighbors.hpp"

namespace gpmal {

/// Mean fraction of each instance's K input neighbours that are also among
/// its K embedded neighbours. 1 when the lists agree as sets.
double local_continuity(const NeighborList& input, const NeighborList& embedded);

/// 2 / (nK(2n - 3K - 1)). Throws DomainError when the denominator is not
/// positive, i.e. K is too large for n.
double h_k(std::size_t n, std::size_t k);

/// 1 - H_K * sum over intruders j of (r(i,j) - K), with r the full
/// input-space rank.
double trustworthiness(const NeighborList& input, const NeighborList& embedded,
                       const RankTable& input_ranks, const RankTable& embedded_ranks);

/// 1 - H_K * sum over missing neighbours j of (r_hat(i,j) - K), with r_hat
/// the full embedded-space rank.
double continuity(const NeighborList& input, const NeighborList& embedded,
                  const RankTable& input_ranks, const RankTable& embedded_ranks);

/// (1 - lambda) t + lambda c. Throws ConfigError unless lambda is in [0,1].
double tc_scalar(double t, double c, double lambda);

struct QualityReport {
  std::size_t k = 0;
  double lambda = 0.5;
  double local_continuity = 0.0;
  double trustworthiness = 0.0;
  double continuity = 0.0;
  double tc_scalar = 0.0;
};

/// All measures from exact neighbourhoods of the two point sets.
QualityReport quality_report(const Matrix& input, const Matrix& embedded, std::size_t k,
                             double lambda = 0.5);

void to_json(nlohmann::json& j, const QualityReport& r);

}  // namespace gpmal
