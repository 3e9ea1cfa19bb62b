#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gpmal/matrix.hpp"

namespace gpmal {

using NodeId = std::uint32_t;

/// For each instance, its K nearest neighbours in rank order: entry j of
/// row i (0-based) holds the neighbour of rank j+1.
class NeighborList {
 public:
  NeighborList() = default;
  NeighborList(std::size_t n, std::size_t k, std::vector<NodeId> ids);

  std::size_t n() const noexcept { return n_; }
  std::size_t k() const noexcept { return k_; }
  std::span<const NodeId> row(std::size_t i) const { return {ids_.data() + i * k_, k_}; }
  const std::vector<NodeId>& ids() const noexcept { return ids_; }

  /// Throws DataError when a row holds its own id or repeats an id.
  void check() const;

  friend bool operator==(const NeighborList&, const NeighborList&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::vector<NodeId> ids_;
};

/// Candidate neighbour with its squared Euclidean distance. Ordered by
/// distance, then ascending id.
struct Neighbor {
  double distance;
  NodeId id;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  }
  friend bool operator>(const Neighbor& a, const Neighbor& b) { return b < a; }
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Brute-force K nearest neighbours under Euclidean distance, self excluded,
/// ties broken by ascending id. Theta(n^2) distance evaluations.
NeighborList exact_neighbor_list(const Matrix& points, std::size_t k);

/// Full rank table: rank(i, j) is the 1-based position of j in i's ordering of
/// all n-1 other instances (same ordering rule as exact_neighbor_list).
/// rank(i, i) is 0.
class RankTable {
 public:
  RankTable() = default;
  /// Builds from per-instance orderings; orderings[i] must be a permutation
  /// of all ids except i.
  static RankTable from_orderings(const std::vector<std::vector<NodeId>>& orderings);
  static RankTable from_points(const Matrix& points);

  std::size_t n() const noexcept { return n_; }
  std::uint32_t rank(std::size_t i, std::size_t j) const { return ranks_[i * n_ + j]; }
  /// The first k entries of every ordering.
  NeighborList neighbor_list(std::size_t k) const;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint32_t> ranks_;
  std::vector<NodeId> order_;
};

/// Mean over instances of |exact_i intersect approx_i| / K.
double recall_at_k(const NeighborList& exact, const NeighborList& approx);

}  // namespace gpmal
