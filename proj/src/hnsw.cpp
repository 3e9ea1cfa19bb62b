#include "gpmal/hnsw.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "gpmal/error.hpp"
#include "gpmal/simd/kernels.hpp"

namespace gpmal {

std::size_t HnswParams::resolved_ef_search(std::size_t k) const {
  return ef_search != 0 ? ef_search : std::max<std::size_t>(2 * k, 64);
}

void HnswParams::validate() const {
  if (M < 2) throw ConfigError("HNSW: M must be at least 2");
  if (ef_construction < M) throw ConfigError("HNSW: ef_construction must be at least M");
}

// Beam search machinery shared by construction and queries. Holds the visited
// marks so repeated searches avoid reallocating them.
class HnswSearcher {
 public:
  explicit HnswSearcher(const HnswIndex& index)
      : index_(index), kernels_(simd::active()), visited_(index.size(), 0) {}

  std::uint64_t distances() const noexcept { return distances_; }

  double distance(const double* query, NodeId node) {
    ++distances_;
    return simd::element::sq_dist(index_.points_.row(node).data(), query, index_.dim());
  }

  void distances_to(const double* query, std::span<const NodeId> ids, std::vector<double>& out) {
    if (out.size() < ids.size()) out.resize(ids.size());
    distances_ += ids.size();
    kernels_.sq_dist_ids(index_.points_.data(), index_.dim(), query, ids.data(), ids.size(), out.data());
  }

  // Greedy descent on one layer from `current` towards `query`.
  Neighbor greedy(const double* query, Neighbor current, int level) {
    for (bool moved = true; moved;) {
      moved = false;
      const auto links = index_.links(current.id, level);
      distances_to(query, links, scratch_dist_);
      for (std::size_t k = 0; k < links.size(); ++k) {
        const Neighbor candidate{scratch_dist_[k], links[k]};
        if (candidate < current) {
          current = candidate;
          moved = true;
        }
      }
    }
    return current;
  }

  // Up to ef nearest elements found from `entry`, ascending. The beam is a
  // sorted array with an expanded flag per entry; expanding the nearest
  // unexpanded entry until none is left visits exactly what the classic
  // two-heap formulation does, because an evicted candidate is always
  // farther than everything still in the beam. The result lives in a member
  // buffer that the next call overwrites.
  const std::vector<Neighbor>& search_layer(const double* query, std::span<const Neighbor> entry,
                                            std::size_t ef, int level) {
    next_epoch();
    beam_.clear();
    for (const auto& e : entry) {
      visited_[e.id] = epoch_;
      offer(e, ef);
    }

    // Every beam entry before `cursor` has been expanded.
    std::size_t cursor = 0;
    while (cursor < beam_.size()) {
      const NodeId current = beam_[cursor].neighbor.id;
      beam_[cursor].expanded = true;
      fresh_.clear();
      for (NodeId id : index_.links(current, level)) {
        if (visited_[id] == epoch_) continue;
        visited_[id] = epoch_;
        fresh_.push_back(id);
      }
      distances_to(query, fresh_, scratch_dist_);
      for (std::size_t k = 0; k < fresh_.size(); ++k) {
        const std::size_t at = offer({scratch_dist_[k], fresh_[k]}, ef);
        cursor = std::min(cursor, at);
      }
      while (cursor < beam_.size() && beam_[cursor].expanded) ++cursor;
    }

    results_.clear();
    for (const auto& b : beam_) results_.push_back(b.neighbor);
    return results_;
  }

  // Neighbour selection heuristic: keep a candidate only if it is closer to
  // the base point than to every neighbour already kept. With keep_pruned the
  // discarded candidates (nearest first) then top the list up to `limit`.
  void select_neighbors(std::span<const Neighbor> sorted_candidates, std::size_t limit,
                        std::vector<NodeId>& kept) {
    kept.clear();
    discarded_.clear();
    const Matrix& points = index_.points_;
    const std::size_t dim = index_.dim();
    for (const auto& candidate : sorted_candidates) {
      if (kept.size() >= limit) break;
      const double* here = points.row(candidate.id).data();
      bool diverse = true;
      for (NodeId other : kept) {
        ++distances_;
        if (simd::element::sq_dist(points.row(other).data(), here, dim) < candidate.distance) {
          diverse = false;
          break;
        }
      }
      (diverse ? kept : discarded_).push_back(candidate.id);
    }
    if (!index_.params_.keep_pruned) return;
    for (std::size_t i = 0; i < discarded_.size() && kept.size() < limit; ++i) kept.push_back(discarded_[i]);
  }

  std::vector<Neighbor> knn(const double* query, std::size_t k, std::size_t ef) {
    if (index_.size() == 0 || k == 0) return {};
    Neighbor current{distance(query, index_.entry_), index_.entry_};
    for (int level = index_.top_level_; level > 0; --level) current = greedy(query, current, level);
    const auto& found = search_layer(query, std::span(&current, 1), std::max(ef, k), 0);
    return {found.begin(), found.begin() + static_cast<std::ptrdiff_t>(std::min(k, found.size()))};
  }

 private:
  void next_epoch() {
    if (++epoch_ == 0) {
      std::fill(visited_.begin(), visited_.end(), 0);
      epoch_ = 1;
    }
  }

  // Inserts a candidate into the beam if it belongs among the ef nearest.
  // Returns its position, or the beam size when rejected.
  std::size_t offer(const Neighbor& nb, std::size_t ef) {
    if (beam_.size() >= ef) {
      if (!(nb < beam_.back().neighbor)) return beam_.size();
      beam_.pop_back();
    }
    const auto it = std::upper_bound(beam_.begin(), beam_.end(), nb,
                                     [](const Neighbor& a, const BeamEntry& b) { return a < b.neighbor; });
    const auto at = static_cast<std::size_t>(it - beam_.begin());
    beam_.insert(it, BeamEntry{nb, false});
    return at;
  }

  struct BeamEntry {
    Neighbor neighbor;
    bool expanded;
  };

  friend HnswIndex build_hnsw(const Matrix& points, const HnswParams& params);

  const HnswIndex& index_;
  const simd::Kernels& kernels_;
  std::vector<BeamEntry> beam_;
  std::vector<Neighbor> results_;
  std::vector<NodeId> fresh_;
  std::vector<NodeId> discarded_;
  std::vector<std::uint32_t> visited_;
  std::uint32_t epoch_ = 0;
  std::uint64_t distances_ = 0;
  std::vector<double> scratch_dist_;
};

namespace {

// Fallback when the graph search reaches fewer than k other nodes.
std::vector<Neighbor> exhaustive(const HnswIndex& index, NodeId self, std::size_t k, SearchStats* stats) {
  const Matrix& points = index.points();
  std::vector<double> dist(points.rows());
  simd::active().sq_dist_rows(points.data(), points.cols(), points.row(self).data(), points.rows(), dist.data());
  if (stats) stats->distance_computations += points.rows();
  std::vector<Neighbor> out;
  for (std::size_t j = 0; j < points.rows(); ++j)
    if (j != self) out.push_back({dist[j], static_cast<NodeId>(j)});
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k), out.end());
  out.resize(k);
  return out;
}

}  // namespace

HnswIndex build_hnsw(const Matrix& points, const HnswParams& params) {
  params.validate();
  if (!points.all_finite()) throw DataError("build_hnsw: non-finite coordinates");

  HnswIndex index;
  index.points_ = points;
  index.params_ = params;
  const std::size_t n = points.rows();
  index.levels_.resize(n);
  index.links_.resize(n);

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double level_scale = 1.0 / std::log(static_cast<double>(params.M));
  for (std::size_t i = 0; i < n; ++i) {
    const double u = 1.0 - unit(rng);  // (0, 1]
    index.levels_[i] = std::min(static_cast<int>(-std::log(u) * level_scale), 30);
    index.links_[i].resize(static_cast<std::size_t>(index.levels_[i]) + 1);
  }

  for (auto& node_links : index.links_)
    for (std::size_t level = 0; level < node_links.size(); ++level)
      node_links[level].reserve(index.max_links(static_cast<int>(level)) + 1);

  HnswSearcher searcher(index);
  std::vector<Neighbor> entry;
  std::vector<Neighbor> relinked;
  std::vector<NodeId> chosen;
  std::vector<double> dist;
  for (std::size_t i = 0; i < n; ++i) {
    const auto node = static_cast<NodeId>(i);
    const int node_level = index.levels_[i];
    if (index.top_level_ < 0) {
      index.entry_ = node;
      index.top_level_ = node_level;
      continue;
    }
    const double* query = points.row(i).data();

    Neighbor current{searcher.distance(query, index.entry_), index.entry_};
    for (int level = index.top_level_; level > node_level; --level)
      current = searcher.greedy(query, current, level);

    entry.assign(1, current);
    for (int level = std::min(node_level, index.top_level_); level >= 0; --level) {
      const auto& found = searcher.search_layer(query, entry, params.ef_construction, level);
      searcher.select_neighbors(found, params.M, chosen);
      const auto lvl = static_cast<std::size_t>(level);
      index.links_[i][lvl].assign(chosen.begin(), chosen.end());
      entry.assign(found.begin(), found.end());

      for (NodeId other : chosen) {
        auto& back = index.links_[other][lvl];
        back.push_back(node);
        if (back.size() <= index.max_links(level)) continue;
        searcher.distances_to(points.row(other).data(), back, dist);
        relinked.clear();
        for (std::size_t k = 0; k < back.size(); ++k) relinked.push_back({dist[k], back[k]});
        std::sort(relinked.begin(), relinked.end());
        searcher.select_neighbors(relinked, index.max_links(level), back);
      }
    }

    if (node_level > index.top_level_) {
      index.top_level_ = node_level;
      index.entry_ = node;
    }
  }
  index.build_distances_ = searcher.distances();
  return index;
}

std::vector<Neighbor> HnswIndex::search(std::span<const double> query, std::size_t k,
                                        std::size_t ef, SearchStats* stats) const {
  if (query.size() != dim()) throw DataError("HnswIndex::search: query has wrong dimension");
  HnswSearcher searcher(*this);
  auto out = searcher.knn(query.data(), k, ef);
  if (stats) stats->distance_computations += searcher.distances();
  return out;
}

std::vector<Neighbor> HnswIndex::search_excluding(NodeId self, std::size_t k, std::size_t ef,
                                                  SearchStats* stats) const {
  HnswSearcher searcher(*this);
  auto out = searcher.knn(points_.row(self).data(), k + 1, std::max(ef, k + 1));
  std::erase_if(out, [self](const Neighbor& nb) { return nb.id == self; });
  if (out.size() > k) out.resize(k);
  if (stats) stats->distance_computations += searcher.distances();
  return out;
}

NeighborList approx_neighbor_list(const HnswIndex& index, std::size_t k, std::size_t ef_search,
                                  SearchStats* stats) {
  const std::size_t n = index.size();
  if (k == 0 || k >= n)
    throw ConfigError("approx_neighbor_list: need 1 <= K <= n-1 (K=" + std::to_string(k) + ")");
  if (ef_search < k) throw ConfigError("approx_neighbor_list: ef_search must be at least K");

  HnswSearcher searcher(index);
  std::vector<NodeId> ids(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    auto found = searcher.knn(index.points().row(i).data(), k + 1, std::max(ef_search, k + 1));
    std::erase_if(found, [i](const Neighbor& nb) { return nb.id == i; });
    if (found.size() < k) found = exhaustive(index, static_cast<NodeId>(i), k, stats);
    for (std::size_t j = 0; j < k; ++j) ids[i * k + j] = found[j].id;
  }
  if (stats) stats->distance_computations += searcher.distances();
  return NeighborList(n, k, std::move(ids));
}

}  // namespace gpmal
