#pragma once

#include <cstddef>
#include <vector>

#include "gpmal/hnsw.hpp"
#include "gpmal/matrix.hpp"
#include "gpmal/neighbors.hpp"
#include "gpmal/tree.hpp"

namespace gpmal {

/// How instance i's input-space neighbourhood compares with its embedded one.
struct NeighborSets {
  struct Missing {
    NodeId id;
    std::size_t input_rank;
  };
  struct Retained {
    NodeId id;
    std::size_t input_rank;
    std::size_t embedded_rank;
  };
  struct Intruder {
    NodeId id;
    std::size_t embedded_rank;
  };

  std::size_t k = 0;
  std::vector<Missing> missing;      ///< in the input neighbourhood only, by input rank
  std::vector<Retained> retained;    ///< in both, by input rank
  std::vector<Intruder> intruders;   ///< in the embedded neighbourhood only, by embedded rank
};

NeighborSets neighbor_sets(const NeighborList& input, const NeighborList& embedded, std::size_t i);

/// |r - r_hat| / max(r, K - r), in [0, 1]. Throws DomainError for ranks
/// outside [1, K].
double deviation(std::size_t r, std::size_t r_hat, std::size_t k);

/// Missing count plus mean deviation of the retained neighbours (0 when none
/// are retained). Lies in [0, K].
double cost(const NeighborSets& sets);

/// Rank-weighted cost: each missing neighbour of input rank r costs (K-r)/K,
/// and retained deviations are weighted the same way before averaging.
/// Lies in [0, (K-1)/2].
double cost_weighted(const NeighborSets& sets);

/// Mean weighted cost over all instances of an embedded neighbour list.
double neighborhood_fitness(const NeighborList& input, const NeighborList& embedded);

/// Fitness of an individual (minimised): evaluate it to an embedding, index
/// the embedding with HNSW, and score the approximate K-neighbourhoods.
/// `input` must be the exact input-space list for the same K.
double fitness(const Individual& ind, const FeatureColumns& features, const NeighborList& input,
               const HnswParams& params, std::size_t k);

/// As fitness() but with brute-force neighbours in the embedded space.
double fitness_exact(const Individual& ind, const FeatureColumns& features,
                     const NeighborList& input, std::size_t k);

/// Scores a precomputed embedding with brute-force neighbours.
double embedding_fitness_exact(const Matrix& embedding, const NeighborList& input, std::size_t k);

}  // namespace gpmal
