#include "gpmal/metrics.hpp"

#include <algorithm>
#include <string>

#include "gpmal/error.hpp"

namespace gpmal {

namespace {

void check_shapes(const NeighborList& input, const NeighborList& embedded) {
  if (input.n() != embedded.n() || input.k() != embedded.k())
    throw DataError("neighbour lists differ in shape");
  if (input.k() == 0 || input.n() == 0) throw ConfigError("neighbour lists are empty");
}

void check_tables(const NeighborList& input, const RankTable& a, const RankTable& b) {
  if (a.n() != input.n() || b.n() != input.n()) throw DataError("rank tables do not match the neighbour lists");
}

bool contains(std::span<const NodeId> row, NodeId id) {
  return std::find(row.begin(), row.end(), id) != row.end();
}

// Sum over instances of (rank - K) for ids in `from` but not in `other`,
// with ranks looked up in `ranks`.
double rank_excess(const NeighborList& from, const NeighborList& other, const RankTable& ranks) {
  const auto k = static_cast<double>(from.k());
  double total = 0.0;
  for (std::size_t i = 0; i < from.n(); ++i) {
    const auto row = from.row(i);
    const auto other_row = other.row(i);
    for (NodeId j : row)
      if (!contains(other_row, j)) total += static_cast<double>(ranks.rank(i, j)) - k;
  }
  return total;
}

}  // namespace

double local_continuity(const NeighborList& input, const NeighborList& embedded) {
  check_shapes(input, embedded);
  std::size_t shared = 0;
  for (std::size_t i = 0; i < input.n(); ++i) {
    const auto embedded_row = embedded.row(i);
    for (NodeId j : input.row(i)) shared += contains(embedded_row, j) ? 1 : 0;
  }
  return static_cast<double>(shared) / static_cast<double>(input.n() * input.k());
}

double h_k(std::size_t n, std::size_t k) {
  if (n < 2 || k < 1) throw DomainError("h_k requires n >= 2 and K >= 1");
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double denominator = nd * kd * (2.0 * nd - 3.0 * kd - 1.0);
  if (denominator <= 0.0)
    throw DomainError("h_k: K=" + std::to_string(k) + " is too large for n=" + std::to_string(n));
  return 2.0 / denominator;
}

double trustworthiness(const NeighborList& input, const NeighborList& embedded,
                       const RankTable& input_ranks, const RankTable& embedded_ranks) {
  check_shapes(input, embedded);
  check_tables(input, input_ranks, embedded_ranks);
  return 1.0 - h_k(input.n(), input.k()) * rank_excess(embedded, input, input_ranks);
}

double continuity(const NeighborList& input, const NeighborList& embedded,
                  const RankTable& input_ranks, const RankTable& embedded_ranks) {
  check_shapes(input, embedded);
  check_tables(input, input_ranks, embedded_ranks);
  return 1.0 - h_k(input.n(), input.k()) * rank_excess(input, embedded, embedded_ranks);
}

double tc_scalar(double t, double c, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0,1]");
  return (1.0 - lambda) * t + lambda * c;
}

QualityReport quality_report(const Matrix& input, const Matrix& embedded, std::size_t k,
                             double lambda) {
  if (input.rows() != embedded.rows()) throw ConfigError("input and embedding row counts differ");
  if (k < 1 || k >= input.rows()) throw ConfigError("K must lie in [1, n-1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0,1]");
  const auto input_ranks = RankTable::from_points(input);
  const auto embedded_ranks = RankTable::from_points(embedded);
  const auto input_nl = input_ranks.neighbor_list(k);
  const auto embedded_nl = embedded_ranks.neighbor_list(k);

  QualityReport r;
  r.k = k;
  r.lambda = lambda;
  r.local_continuity = local_continuity(input_nl, embedded_nl);
  r.trustworthiness = trustworthiness(input_nl, embedded_nl, input_ranks, embedded_ranks);
  r.continuity = continuity(input_nl, embedded_nl, input_ranks, embedded_ranks);
  r.tc_scalar = tc_scalar(r.trustworthiness, r.continuity, lambda);
  return r;
}

void to_json(nlohmann::json& j, const QualityReport& r) {
  j = nlohmann::json{{"local_continuity", r.local_continuity},
                     {"trustworthiness", r.trustworthiness},
                     {"continuity", r.continuity},
                     {"tc_scalar", r.tc_scalar},
                     {"k", r.k},
                     {"lambda", r.lambda}};
}

}  // namespace gpmal
