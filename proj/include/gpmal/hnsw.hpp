#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gpmal/matrix.hpp"
#include "gpmal/neighbors.hpp"

namespace gpmal {

struct HnswParams {
  std::size_t M = 16;                ///< links per node on upper layers; layer 0 allows 2M
  std::size_t ef_construction = 100;
  std::size_t ef_search = 0;         ///< 0 selects max(2K, 64)
  std::uint64_t seed = 42;           ///< drives node level assignment
  bool keep_pruned = false;          ///< top link lists up to capacity with pruned candidates

  std::size_t resolved_ef_search(std::size_t k) const;
  /// Throws ConfigError unless M >= 2 and ef_construction >= M.
  void validate() const;
};

struct SearchStats {
  std::uint64_t distance_computations = 0;
};

/// Hierarchical navigable small-world graph over a fixed point set.
/// Immutable once built; const member functions may be called concurrently.
class HnswIndex {
 public:
  HnswIndex() = default;

  std::size_t size() const noexcept { return points_.rows(); }
  std::size_t dim() const noexcept { return points_.cols(); }
  const Matrix& points() const noexcept { return points_; }
  const HnswParams& params() const noexcept { return params_; }

  int top_level() const noexcept { return top_level_; }
  NodeId entry_point() const noexcept { return entry_; }
  int level(NodeId node) const { return levels_[node]; }
  std::span<const NodeId> links(NodeId node, int level) const { return links_[node][static_cast<std::size_t>(level)]; }

  std::uint64_t build_distance_computations() const noexcept { return build_distances_; }

  /// Up to k nearest indexed points to `query`, ascending by (distance, id).
  /// The layer-0 beam holds max(ef, k) candidates.
  std::vector<Neighbor> search(std::span<const double> query, std::size_t k, std::size_t ef,
                               SearchStats* stats = nullptr) const;

  /// Up to k nearest indexed points to node `self`, never including `self`.
  std::vector<Neighbor> search_excluding(NodeId self, std::size_t k, std::size_t ef,
                                         SearchStats* stats = nullptr) const;

  friend HnswIndex build_hnsw(const Matrix& points, const HnswParams& params);
  friend class HnswSearcher;

 private:
  std::size_t max_links(int level) const { return level == 0 ? 2 * params_.M : params_.M; }

  Matrix points_;
  HnswParams params_;
  std::vector<int> levels_;
  std::vector<std::vector<std::vector<NodeId>>> links_;  // [node][level]
  NodeId entry_ = 0;
  int top_level_ = -1;
  std::uint64_t build_distances_ = 0;
};

/// Inserts points in row order. Levels are drawn from an exponential
/// distribution seeded by params.seed, so a fixed seed and point set always
/// yield the same graph.
HnswIndex build_hnsw(const Matrix& points, const HnswParams& params);

/// Queries every indexed point for its k nearest other points.
/// Throws ConfigError if ef_search < k or k >= n.
NeighborList approx_neighbor_list(const HnswIndex& index, std::size_t k, std::size_t ef_search,
                                  SearchStats* stats = nullptr);

}  // namespace gpmal
