#include "gpmal/neighbors.hpp"

#include <algorithm>
#include <string>

#include "gpmal/error.hpp"
#include "gpmal/simd/kernels.hpp"

namespace gpmal {
namespace {

std::vector<Neighbor> sorted_others(const Matrix& points, std::size_t i, std::vector<double>& dist) {
  const std::size_t n = points.rows();
  simd::active().sq_dist_rows(points.data(), points.cols(), points.row(i).data(), n, dist.data());
  std::vector<Neighbor> others;
  others.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j)
    if (j != i) others.push_back({dist[j], static_cast<NodeId>(j)});
  return others;
}

}  // namespace

NeighborList::NeighborList(std::size_t n, std::size_t k, std::vector<NodeId> ids)
    : n_(n), k_(k), ids_(std::move(ids)) {
  if (ids_.size() != n_ * k_) throw DataError("NeighborList: id count does not match n*K");
}

void NeighborList::check() const {
  for (std::size_t i = 0; i < n_; ++i) {
    auto r = row(i);
    std::vector<NodeId> sorted(r.begin(), r.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw DataError("NeighborList: repeated id in row " + std::to_string(i));
    for (NodeId id : r) {
      if (id == i) throw DataError("NeighborList: row " + std::to_string(i) + " contains itself");
      if (id >= n_) throw DataError("NeighborList: id out of range in row " + std::to_string(i));
    }
  }
}

NeighborList exact_neighbor_list(const Matrix& points, std::size_t k) {
  const std::size_t n = points.rows();
  if (k == 0 || k >= n)
    throw ConfigError("exact_neighbor_list: need 1 <= K <= n-1 (K=" + std::to_string(k) +
                      ", n=" + std::to_string(n) + ")");
  if (!points.all_finite()) throw DataError("exact_neighbor_list: non-finite coordinates");

  std::vector<NodeId> ids(n * k);
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto others = sorted_others(points, i, dist);
    std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k), others.end());
    for (std::size_t j = 0; j < k; ++j) ids[i * k + j] = others[j].id;
  }
  return NeighborList(n, k, std::move(ids));
}

RankTable RankTable::from_orderings(const std::vector<std::vector<NodeId>>& orderings) {
  RankTable t;
  t.n_ = orderings.size();
  t.ranks_.assign(t.n_ * t.n_, 0);
  t.order_.reserve(t.n_ * (t.n_ - 1));
  for (std::size_t i = 0; i < t.n_; ++i) {
    if (orderings[i].size() + 1 != t.n_) throw DataError("RankTable: ordering has wrong length");
    for (std::size_t pos = 0; pos < orderings[i].size(); ++pos) {
      const NodeId j = orderings[i][pos];
      if (j == i || j >= t.n_ || t.ranks_[i * t.n_ + j] != 0)
        throw DataError("RankTable: ordering is not a permutation of the other ids");
      t.ranks_[i * t.n_ + j] = static_cast<std::uint32_t>(pos + 1);
      t.order_.push_back(j);
    }
  }
  return t;
}

RankTable RankTable::from_points(const Matrix& points) {
  const std::size_t n = points.rows();
  std::vector<std::vector<NodeId>> orderings(n);
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto others = sorted_others(points, i, dist);
    std::sort(others.begin(), others.end());
    orderings[i].reserve(others.size());
    for (const auto& nb : others) orderings[i].push_back(nb.id);
  }
  return from_orderings(orderings);
}

NeighborList RankTable::neighbor_list(std::size_t k) const {
  if (k == 0 || k >= n_) throw ConfigError("RankTable::neighbor_list: need 1 <= K <= n-1");
  std::vector<NodeId> ids(n_ * k);
  for (std::size_t i = 0; i < n_; ++i)
    std::copy_n(order_.begin() + static_cast<std::ptrdiff_t>(i * (n_ - 1)), k, ids.begin() + static_cast<std::ptrdiff_t>(i * k));
  return NeighborList(n_, k, std::move(ids));
}

double recall_at_k(const NeighborList& exact, const NeighborList& approx) {
  if (exact.n() != approx.n() || exact.k() != approx.k())
    throw DataError("recall_at_k: neighbour lists differ in shape");
  if (exact.n() == 0 || exact.k() == 0) return 1.0;
  double total = 0.0;
  for (std::size_t i = 0; i < exact.n(); ++i) {
    auto e = exact.row(i);
    auto a = approx.row(i);
    std::size_t hits = 0;
    for (NodeId id : a)
      if (std::find(e.begin(), e.end(), id) != e.end()) ++hits;
    total += static_cast<double>(hits) / static_cast<double>(exact.k());
  }
  return total / static_cast<double>(exact.n());
}

}  // namespace gpmal
