#include <doctest.h>

#include <set>

#include "gpmal/error.hpp"
#include "gpmal/tree_io.hpp"
#include "gpmal/variation.hpp"

using namespace gpmal;

namespace {

Individual random_individual(Rng& rng, std::size_t d, std::size_t lo, std::size_t hi, std::size_t m) {
  Individual ind;
  for (std::size_t t = 0; t < d; ++t) ind.trees.push_back(random_tree(rng, InitMethod::grow, lo, hi, m));
  return ind;
}

// Every subtree of a child must occur somewhere in one of the parents or be
// a whole parent tree; checking leaves is the cheap version of that.
std::multiset<std::string> leaves(const Tree& t) {
  std::multiset<std::string> out;
  for (const auto& n : t.nodes())
    if (is_terminal(n.op)) out.insert(to_prefix_string(Tree(std::vector<Node>{n})));
  return out;
}

}  // namespace

TEST_CASE("crossover preserves the tree count and depth bounds") {
  Rng rng(1);
  const DepthBounds bounds{2, 14};
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_individual(rng, 3, 2, 14, 5);
    const auto b = random_individual(rng, 3, 2, 14, 5);
    auto [x, y] = crossover_all_pairs(a, b, rng, bounds);
    REQUIRE(x.d() == 3);
    REQUIRE(y.d() == 3);
    CHECK_FALSE(x.fitness.has_value());
    for (const auto* child : {&x, &y})
      for (const auto& t : child->trees) {
        CHECK(t.depth() >= 2);
        CHECK(t.depth() <= 14);
      }
  }
}

TEST_CASE("crossover children are built from parent material") {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_individual(rng, 2, 2, 6, 4);
    const auto b = random_individual(rng, 2, 2, 6, 4);
    auto [x, y] = crossover_all_pairs(a, b, rng);
    for (std::size_t t = 0; t < 2; ++t) {
      auto pool = leaves(a.trees[t]);
      for (const auto& l : leaves(b.trees[t])) pool.insert(l);
      auto produced = leaves(x.trees[t]);
      for (const auto& l : leaves(y.trees[t])) produced.insert(l);
      CHECK(produced == pool);
      CHECK(x.trees[t].size() + y.trees[t].size() == a.trees[t].size() + b.trees[t].size());
    }
  }
}

TEST_CASE("crossing an individual with itself keeps its material") {
  Rng rng(3);
  const auto a = random_individual(rng, 2, 2, 6, 4);
  auto [x, y] = crossover_all_pairs(a, a, rng);
  for (std::size_t t = 0; t < 2; ++t) {
    auto pool = leaves(a.trees[t]);
    for (const auto& l : leaves(a.trees[t])) pool.insert(l);
    auto produced = leaves(x.trees[t]);
    for (const auto& l : leaves(y.trees[t])) produced.insert(l);
    CHECK(produced == pool);
  }
}

TEST_CASE("crossover rejects mismatched tree counts") {
  Rng rng(4);
  CHECK_THROWS_AS(crossover_all_pairs(random_individual(rng, 2, 2, 4, 3), random_individual(rng, 3, 2, 4, 3), rng),
                  ConfigError);
}

TEST_CASE("crossover points favour function nodes") {
  Rng rng(5);
  const auto t = random_tree(rng, InitMethod::full, 4, 4, 3);
  std::size_t functions = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) functions += is_terminal(t.node(pick_crossover_point(t, rng)).op) ? 0 : 1;
  CHECK(static_cast<double>(functions) / draws == doctest::Approx(kFunctionPointBias).epsilon(0.02));
}

TEST_CASE("mutation changes exactly one tree position") {
  Rng rng(6);
  std::vector<std::size_t> hits(5);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_individual(rng, 5, 2, 6, 4);
    std::size_t picked = 99;
    const auto child = mutate_single_tree(a, rng, 4, {}, &picked);
    REQUIRE(picked < 5);
    ++hits[picked];
    for (std::size_t t = 0; t < 5; ++t) {
      if (t != picked) CHECK(child.trees[t] == a.trees[t]);
      CHECK(child.trees[t].depth() >= 2);
      CHECK(child.trees[t].depth() <= 14);
    }
    CHECK_FALSE(child.fitness.has_value());
  }
  for (auto h : hits) CHECK(static_cast<double>(h) / 1000.0 == doctest::Approx(0.2).epsilon(0.25));
}

TEST_CASE("mutation of a single-tree individual hits that tree") {
  Rng rng(7);
  const auto a = random_individual(rng, 1, 2, 5, 3);
  std::size_t picked = 99;
  mutate_single_tree(a, rng, 3, {}, &picked);
  CHECK(picked == 0);
}

TEST_CASE("mutation respects the depth cap on deep parents") {
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    Individual a;
    a.trees.push_back(random_tree(rng, InitMethod::full, 14, 14, 2));
    const auto child = mutate_single_tree(a, rng, 2);
    CHECK(child.trees[0].depth() <= 14);
    CHECK(child.trees[0].depth() >= 2);
  }
}
