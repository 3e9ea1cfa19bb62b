#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <random>

#include "gpmal/error.hpp"
#include "gpmal/fitness.hpp"
#include "support/oracles.hpp"

using namespace gpmal;

namespace {

// Instance 0 with input list [a,b,c] and embedded list [b,d,a], where
// a=1, b=2, c=3, d=4.
NeighborSets worked_example() {
  const NeighborList input(5, 3, {1, 2, 3, 0, 2, 3, 0, 1, 3, 0, 1, 2, 0, 1, 2});
  const NeighborList embedded(5, 3, {2, 4, 1, 0, 2, 3, 0, 1, 3, 0, 1, 2, 0, 1, 2});
  return neighbor_sets(input, embedded, 0);
}

Individual identity(std::size_t m) {
  Individual ind;
  for (std::uint32_t i = 0; i < m; ++i) ind.trees.push_back(Tree::feature(i));
  return ind;
}

Individual random_individual(Rng& rng, std::size_t d, std::size_t m) {
  Individual ind;
  for (std::size_t t = 0; t < d; ++t) ind.trees.push_back(random_tree(rng, InitMethod::grow, 2, 5, m));
  return ind;
}

}  // namespace

TEST_CASE("neighbor_sets on the worked example") {
  const auto s = worked_example();
  REQUIRE(s.missing.size() == 1);
  CHECK(s.missing[0].id == 3);
  CHECK(s.missing[0].input_rank == 3);
  REQUIRE(s.retained.size() == 2);
  CHECK(s.retained[0].id == 1);
  CHECK(s.retained[0].input_rank == 1);
  CHECK(s.retained[0].embedded_rank == 3);
  CHECK(s.retained[1].id == 2);
  CHECK(s.retained[1].input_rank == 2);
  CHECK(s.retained[1].embedded_rank == 1);
  REQUIRE(s.intruders.size() == 1);
  CHECK(s.intruders[0].id == 4);
  CHECK(s.intruders[0].embedded_rank == 2);
}

TEST_CASE("identical and disjoint neighbour lists") {
  const NeighborList a(4, 1, {1, 0, 3, 2});
  const NeighborList b(4, 1, {2, 3, 0, 1});
  const auto same = neighbor_sets(a, a, 0);
  CHECK(same.missing.empty());
  CHECK(same.intruders.empty());
  CHECK(same.retained.size() == 1);
  CHECK(cost(same) == 0.0);
  CHECK(cost_weighted(same) == 0.0);
  const auto apart = neighbor_sets(a, b, 0);
  CHECK(apart.missing.size() == 1);
  CHECK(apart.retained.empty());
  CHECK(apart.intruders.size() == 1);
  CHECK_THROWS_AS(neighbor_sets(a, NeighborList(4, 2, {1, 2, 0, 2, 0, 1, 0, 1}), 0), DataError);
}

TEST_CASE("deviation fixtures") {
  CHECK(deviation(4, 4, 10) == 0.0);
  CHECK(std::fabs(deviation(3, 7, 30) - 4.0 / 27.0) <= 1e-12);
  CHECK(deviation(1, 10, 10) == 1.0);
  CHECK_THROWS_AS(deviation(0, 1, 5), DomainError);
  CHECK_THROWS_AS(deviation(1, 6, 5), DomainError);
}

TEST_CASE("cost fixtures") {
  const auto s = worked_example();
  CHECK(std::fabs(cost(s) - 1.75) <= 1e-12);
  CHECK(std::fabs(cost_weighted(s) - 5.0 / 12.0) <= 1e-12);
}

TEST_CASE("all neighbours missing") {
  const std::size_t k = 30;
  const std::size_t n = 2 * k + 1;
  std::vector<NodeId> in(n * k), out(n * k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      in[i * k + j] = static_cast<NodeId>((i + 1 + j) % n);
      out[i * k + j] = static_cast<NodeId>((i + 1 + k + j) % n);
    }
  const auto s = neighbor_sets(NeighborList(n, k, in), NeighborList(n, k, out), 0);
  CHECK(cost(s) == 30.0);
  CHECK(std::fabs(cost_weighted(s) - 14.5) <= 1e-12);
}

TEST_CASE("bounds over random neighbour sets") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + rng() % 20;
    const std::size_t n = k + 1 + rng() % 20;
    std::vector<NodeId> in, out;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<NodeId> others;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) others.push_back(static_cast<NodeId>(j));
      std::shuffle(others.begin(), others.end(), rng);
      in.insert(in.end(), others.begin(), others.begin() + static_cast<long>(k));
      std::shuffle(others.begin(), others.end(), rng);
      out.insert(out.end(), others.begin(), others.begin() + static_cast<long>(k));
    }
    const NeighborList a(n, k, in), b(n, k, out);
    const auto s = neighbor_sets(a, b, rng() % n);
    CHECK(s.missing.size() + s.retained.size() == k);
    CHECK(s.intruders.size() + s.retained.size() == k);
    for (const auto& r : s.retained) {
      const double dev = deviation(r.input_rank, r.embedded_rank, k);
      CHECK(dev >= 0.0);
      CHECK(dev <= 1.0);
    }
    CHECK(cost(s) >= 0.0);
    CHECK(cost(s) <= static_cast<double>(k));
    CHECK(cost_weighted(s) >= 0.0);
    CHECK(cost_weighted(s) <= (static_cast<double>(k) - 1.0) / 2.0);
    oracle::Lists la(n), lb(n);
    for (std::size_t i = 0; i < n; ++i) {
      la[i].assign(a.row(i).begin(), a.row(i).end());
      lb[i].assign(b.row(i).begin(), b.row(i).end());
    }
    CHECK(std::fabs(neighborhood_fitness(a, b) - oracle::fitness(la, lb)) <= 1e-12);
  }
}

TEST_CASE("neighborhood_fitness matches the set-arithmetic oracle") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = oracle::random_matrix(45, 5, rng);
    const auto y = oracle::random_matrix(45, 2, rng);
    const auto ours = embedding_fitness_exact(y, exact_neighbor_list(x, 10), 10);
    CHECK(std::fabs(ours - oracle::embedding_fitness(x, y, 10)) <= 1e-12);
  }
}

TEST_CASE("identity mapping has zero fitness on both paths") {
  std::mt19937_64 rng(3);
  const auto x = oracle::random_matrix(40, 4, rng);
  const FeatureColumns cols(x);
  const auto input = exact_neighbor_list(x, 10);
  CHECK(fitness_exact(identity(4), cols, input, 10) == 0.0);
  HnswParams params;
  params.ef_search = 40;
  CHECK(fitness(identity(4), cols, input, params, 10) == 0.0);
}

TEST_CASE("collapsed embeddings are penalised") {
  std::mt19937_64 rng(4);
  const auto x = oracle::random_matrix(40, 3, rng);
  Individual flat;
  flat.trees = {Tree::constant(0.3), Tree::constant(-0.1)};
  CHECK(fitness_exact(flat, FeatureColumns(x), exact_neighbor_list(x, 10), 10) > 0.0);
}

TEST_CASE("HNSW fitness with an exhaustive beam equals the exact path") {
  Rng gp(8);
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto x = oracle::random_matrix(40, 5, rng);
    const FeatureColumns cols(x);
    const auto input = exact_neighbor_list(x, 10);
    const auto ind = random_individual(gp, 2, 5);
    HnswParams params;
    params.ef_search = 40;
    params.seed = rng();
    const double exact = fitness_exact(ind, cols, input, 10);
    CHECK(std::fabs(fitness(ind, cols, input, params, 10) - exact) <= 1e-12);
    CHECK(std::fabs(exact - oracle::embedding_fitness(x, eval_individual(ind, x), 10)) <= 1e-12);
  }
}

TEST_CASE("exact fitness is invariant under similarity transforms") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = oracle::random_matrix(40, 6, rng);
    const auto y = oracle::random_matrix(40, 3, rng);
    const auto input = exact_neighbor_list(x, 8);
    const double before = embedding_fitness_exact(y, input, 8);
    CHECK(std::fabs(embedding_fitness_exact(oracle::similarity_transform(y, rng), input, 8) - before) <= 1e-12);
    Matrix doubled = y;
    for (std::size_t r = 0; r < y.rows(); ++r)
      for (std::size_t c = 0; c < y.cols(); ++c) doubled(r, c) = 2.0 * y(r, c);
    CHECK(embedding_fitness_exact(doubled, input, 8) == before);
  }
}

TEST_CASE("fitness checks the input list against K and n") {
  std::mt19937_64 rng(10);
  const auto x = oracle::random_matrix(20, 2, rng);
  const auto input = exact_neighbor_list(x, 5);
  CHECK_THROWS_AS(fitness_exact(identity(2), FeatureColumns(x), input, 6), DataError);
}
