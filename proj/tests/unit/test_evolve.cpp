#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "gpmal/error.hpp"
#include "gpmal/evolve.hpp"
#include "gpmal/fitness.hpp"
#include "support/helpers.hpp"

using namespace gpmal;

namespace {

EvolutionConfig small_config(std::uint64_t seed) {
  EvolutionConfig c;
  c.population_size = 50;
  c.generations = 50;
  c.elitism_count = 10;
  c.d = 2;
  c.k = 10;
  c.seed = seed;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("initial population shape and depth ramp") {
  EvolutionConfig c;
  c.d = 2;
  Rng rng(1);
  const auto pop = initialize_population(c, 7, rng);
  REQUIRE(pop.size() == 100);
  std::set<std::size_t> depths;
  for (const auto& ind : pop) {
    CHECK(ind.d() == 2);
    for (const auto& t : ind.trees) {
      CHECK(t.depth() >= 2);
      CHECK(t.depth() <= 6);
      depths.insert(t.depth());
    }
  }
  CHECK(depths.size() == 5);
  Rng again(1);
  const auto repeat = initialize_population(c, 7, again);
  for (std::size_t i = 0; i < pop.size(); ++i) CHECK(pop[i].trees == repeat[i].trees);
}

TEST_CASE("tournament selection") {
  const std::vector<double> fitnesses{5, 3, 9, 1, 7, 2, 8, 4, 6, 10};
  Rng rng(2);
  SUBCASE("an exhaustive tournament usually finds the best") {
    std::size_t best_hits = 0;
    for (int i = 0; i < 200; ++i) best_hits += tournament_select(fitnesses, rng, 200) == 3 ? 1 : 0;
    CHECK(best_hits == 200);
  }
  SUBCASE("size one is uniform") {
    std::vector<std::size_t> hits(10);
    for (int i = 0; i < 20000; ++i) ++hits[tournament_select(fitnesses, rng, 1)];
    for (auto h : hits) CHECK(static_cast<double>(h) / 20000.0 == doctest::Approx(0.1).epsilon(0.15));
  }
  SUBCASE("selection probability falls with rank") {
    std::vector<std::size_t> by_rank(10);
    for (int i = 0; i < 10000; ++i) {
      const auto w = tournament_select(fitnesses, rng, 7);
      const auto rank = static_cast<std::size_t>(
          std::count_if(fitnesses.begin(), fitnesses.end(), [&](double f) { return f < fitnesses[w]; }));
      ++by_rank[rank];
    }
    for (std::size_t r = 1; r < 6; ++r) CHECK(by_rank[r] < by_rank[r - 1]);
    for (std::size_t r = 6; r < 10; ++r) CHECK(by_rank[r] <= by_rank[5]);
  }
  CHECK_THROWS_AS(tournament_select(std::vector<double>{}, rng, 3), ConfigError);
}

TEST_CASE("configuration invariants") {
  EvolutionConfig c;
  c.crossover_rate = 0.7;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.elitism_count = c.population_size;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.d = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.k = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("zero generations returns the best initial individual") {
  const auto data = testing::blobs(30, 3, 2, 4, 1);
  auto c = small_config(3);
  c.generations = 0;
  const auto r = evolve(c, data);
  REQUIRE(r.history.size() == 1);
  CHECK(r.best_fitness == r.history[0].best);
  CHECK(r.embedding.rows() == 30);
  CHECK(r.embedding.cols() == 2);
}

TEST_CASE("history is non-increasing and the run reproducible") {
  const auto data = testing::blobs(30, 3, 2, 4, 2);
  auto c = small_config(4);
  c.generations = 15;
  std::ostringstream log;
  const auto a = evolve(c, data, &log);
  REQUIRE(a.history.size() == 16);
  for (std::size_t g = 1; g < a.history.size(); ++g) CHECK(a.history[g].best <= a.history[g - 1].best);
  CHECK(a.best_fitness == a.history.back().best);
  const auto b = evolve(c, data);
  CHECK(a.best.trees == b.best.trees);
  CHECK(a.embedding == b.embedding);
  for (std::size_t g = 0; g < a.history.size(); ++g) {
    CHECK(a.history[g].best == b.history[g].best);
    CHECK(a.history[g].mean == b.history[g].mean);
  }
  std::size_t lines = 0;
  for (char ch : log.str()) lines += ch == '\n';
  CHECK(lines == 16);
  CHECK(log.str().rfind("0,", 0) == 0);
}

TEST_CASE("thread count does not change the outcome") {
  const auto data = testing::blobs(40, 2, 3, 3, 5);
  auto c = small_config(6);
  c.generations = 5;
  const auto one = evolve(c, data);
  c.threads = 4;
  const auto four = evolve(c, data);
  CHECK(one.best.trees == four.best.trees);
  CHECK(one.best_fitness == four.best_fitness);
}

TEST_CASE("the best individual's reported fitness is reproducible") {
  const auto data = testing::blobs(30, 3, 2, 4, 7);
  auto c = small_config(8);
  c.generations = 10;
  c.exact_neighbors = true;
  const auto r = evolve(c, data);
  const auto input = exact_neighbor_list(data.features, c.k);
  CHECK(fitness_exact(r.best, FeatureColumns(data.features), input, c.k) == r.best_fitness);
}

TEST_CASE("evolution improves on the initial population across seeds") {
  std::size_t improved = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto data = testing::blobs(30, 3, 2, 4, 100 + seed);
    const auto r = evolve(small_config(seed), data);
    improved += r.history.back().best < r.history.front().best ? 1 : 0;
  }
  CHECK(improved >= 28);
}

TEST_CASE("evolve rejects unscaled data and oversize K") {
  auto data = testing::blobs(20, 2, 2, 2, 1);
  auto c = small_config(1);
  c.generations = 1;
  c.k = 20;
  CHECK_THROWS_AS(evolve(c, data), ConfigError);
  data.scaled = false;
  c.k = 5;
  CHECK_THROWS_AS(evolve(c, data), ConfigError);
}
