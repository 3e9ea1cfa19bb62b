#include "gpmal/fitness.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <vector>

#include "gpmal/error.hpp"

namespace gpmal {

NeighborSets neighbor_sets(const NeighborList& input, const NeighborList& embedded, std::size_t i) {
  if (input.n() != embedded.n() || input.k() != embedded.k())
    throw DataError("neighbor_sets: neighbour lists differ in shape");
  const std::size_t k = input.k();
  const auto x = input.row(i);
  const auto y = embedded.row(i);

  NeighborSets sets;
  sets.k = k;
  for (std::size_t r = 0; r < k; ++r) {
    const auto hit = std::find(y.begin(), y.end(), x[r]);
    if (hit == y.end()) {
      sets.missing.push_back({x[r], r + 1});
    } else {
      sets.retained.push_back({x[r], r + 1, static_cast<std::size_t>(hit - y.begin()) + 1});
    }
  }
  for (std::size_t r = 0; r < k; ++r) {
    if (std::find(x.begin(), x.end(), y[r]) == x.end()) sets.intruders.push_back({y[r], r + 1});
  }
  return sets;
}

double deviation(std::size_t r, std::size_t r_hat, std::size_t k) {
  if (r < 1 || r > k || r_hat < 1 || r_hat > k)
    throw DomainError("deviation: ranks must lie in [1, K]");
  const double diff = r > r_hat ? static_cast<double>(r - r_hat) : static_cast<double>(r_hat - r);
  return diff / static_cast<double>(std::max(r, k - r));
}

double cost(const NeighborSets& sets) {
  double spread = 0.0;
  for (const auto& w : sets.retained) spread += deviation(w.input_rank, w.embedded_rank, sets.k);
  const double mean = sets.retained.empty() ? 0.0 : spread / static_cast<double>(sets.retained.size());
  return static_cast<double>(sets.missing.size()) + mean;
}

double cost_weighted(const NeighborSets& sets) {
  const auto k = static_cast<double>(sets.k);
  auto weight = [k](std::size_t rank) { return (k - static_cast<double>(rank)) / k; };

  double lost = 0.0;
  for (const auto& v : sets.missing) lost += weight(v.input_rank);
  double spread = 0.0;
  for (const auto& w : sets.retained)
    spread += weight(w.input_rank) * deviation(w.input_rank, w.embedded_rank, sets.k);
  const double mean = sets.retained.empty() ? 0.0 : spread / static_cast<double>(sets.retained.size());
  return lost + mean;
}

double neighborhood_fitness(const NeighborList& input, const NeighborList& embedded) {
  if (input.n() != embedded.n() || input.k() != embedded.k())
    throw DataError("fitness: neighbour lists differ in shape");
  // Same arithmetic, in the same order, as cost_weighted(neighbor_sets(...)),
  // without materialising the sets.
  const std::size_t n = input.n();
  const std::size_t k = input.k();
  const auto kd = static_cast<double>(k);
  std::vector<std::size_t> embedded_rank(n, 0);  // 0 when absent
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = input.row(i);
    const auto y = embedded.row(i);
    for (std::size_t r = 0; r < k; ++r) embedded_rank[y[r]] = r + 1;
    double lost = 0.0;
    double spread = 0.0;
    std::size_t retained = 0;
    for (std::size_t r = 0; r < k; ++r) {
      const double weight = (kd - static_cast<double>(r + 1)) / kd;
      const std::size_t r_hat = embedded_rank[x[r]];
      if (r_hat == 0) {
        lost += weight;
      } else {
        spread += weight * deviation(r + 1, r_hat, k);
        ++retained;
      }
    }
    total += lost + (retained == 0 ? 0.0 : spread / static_cast<double>(retained));
    for (std::size_t r = 0; r < k; ++r) embedded_rank[y[r]] = 0;
  }
  return total / static_cast<double>(n);
}

namespace {

void check_inputs(const FeatureColumns& features, const NeighborList& input, std::size_t k) {
  if (input.k() != k) throw DataError("fitness: input neighbour list was built for a different K");
  if (input.n() != features.n()) throw DataError("fitness: input neighbour list has wrong instance count");
}

}  // namespace

double fitness(const Individual& ind, const FeatureColumns& features, const NeighborList& input,
               const HnswParams& params, std::size_t k) {
  check_inputs(features, input, k);
  const Matrix embedding = eval_individual(ind, features);
  const HnswIndex index = build_hnsw(embedding, params);
  const NeighborList embedded = approx_neighbor_list(index, k, params.resolved_ef_search(k));
  return neighborhood_fitness(input, embedded);
}

double fitness_exact(const Individual& ind, const FeatureColumns& features,
                     const NeighborList& input, std::size_t k) {
  check_inputs(features, input, k);
  return embedding_fitness_exact(eval_individual(ind, features), input, k);
}

double embedding_fitness_exact(const Matrix& embedding, const NeighborList& input, std::size_t k) {
  return neighborhood_fitness(input, exact_neighbor_list(embedding, k));
}

}  // namespace gpmal
