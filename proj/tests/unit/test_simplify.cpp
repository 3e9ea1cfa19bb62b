#include <doctest.h>

#include <cmath>
#include <random>

#include "gpmal/fitness.hpp"
#include "gpmal/simplify.hpp"
#include "gpmal/tree_io.hpp"
#include "support/oracles.hpp"

using namespace gpmal;

namespace {

Tree f(std::uint32_t i) { return Tree::feature(i); }
Tree c(double v) { return Tree::constant(v); }
Tree op(Op o, std::vector<Tree> kids) { return Tree::apply(o, kids); }

}  // namespace

TEST_CASE("rewrite fixtures") {
  CHECK(simplify_tree(op(Op::add, {f(2), c(0)})) == f(2));
  CHECK(simplify_tree(op(Op::add, {c(0), f(2)})) == f(2));
  CHECK(simplify_tree(op(Op::sub, {f(1), c(0)})) == f(1));
  CHECK(simplify_tree(op(Op::mul, {c(0.5), c(-0.4)})) == c(-0.2));
  CHECK(simplify_tree(op(Op::mul, {f(0), c(1)})) == f(0));
  CHECK(simplify_tree(op(Op::mul, {c(0), op(Op::sigmoid, {f(3)})})) == c(0));
  CHECK(simplify_tree(op(Op::protected_div, {c(0), f(1)})) == c(0));
  CHECK(simplify_tree(op(Op::protected_div, {c(0.7), c(0.7)})) == c(1));
  CHECK(simplify_tree(op(Op::protected_div, {c(1e-12), c(1e-12)})) == c(0));
  CHECK(simplify_tree(op(Op::max, {f(4), f(4)})) == f(4));
  CHECK(simplify_tree(op(Op::min, {op(Op::relu, {f(1)}), op(Op::relu, {f(1)})})) == op(Op::relu, {f(1)}));
  CHECK(simplify_tree(op(Op::if_negative, {c(-0.3), f(0), f(1)})) == f(0));
  CHECK(simplify_tree(op(Op::if_negative, {c(0.0), f(0), f(1)})) == f(1));
  CHECK(simplify_tree(op(Op::relu, {op(Op::relu, {f(2)})})) == op(Op::relu, {f(2)}));
  CHECK(simplify_tree(op(Op::sigmoid, {c(0)})) == c(0.5));
  // Rules compose to a fixpoint.
  CHECK(simplify_tree(op(Op::add, {f(0), op(Op::mul, {c(0), f(1)})})) == f(0));
  // Nothing applies.
  const Tree plain = op(Op::sub, {f(0), op(Op::max, {f(1), c(0.2)})});
  CHECK(simplify_tree(plain) == plain);
}

TEST_CASE("simplification preserves semantics and never grows a tree") {
  Rng rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> inputs(1000, std::vector<double>(4));
  for (auto& x : inputs)
    for (auto& v : x) v = u(rng);
  std::size_t shrunk = 0;
  for (int t = 0; t < 200; ++t) {
    Tree tree = random_tree(rng, t % 2 ? InitMethod::grow : InitMethod::full, 2, 6, 4);
    // Seed some reducible structure.
    if (t % 3 == 0) tree = op(Op::add, {tree, op(Op::mul, {c(0), f(1)})});
    const Tree simple = simplify_tree(tree);
    CHECK(simple.size() <= tree.size());
    shrunk += simple.size() < tree.size() ? 1 : 0;
    CHECK(simplify_tree(simple) == simple);
    for (const auto& x : inputs) {
      const double a = eval_tree(tree, x);
      const double b = eval_tree(simple, x);
      if (std::fabs(a - b) > 1e-9 * std::max(1.0, std::fabs(a))) {
        FAIL_CHECK(to_prefix_string(tree), " -> ", to_prefix_string(simple));
        break;
      }
    }
  }
  CHECK(shrunk > 0);
}

TEST_CASE("structural statistics") {
  const auto lone = tree_stats(f(0));
  CHECK(lone.node_count == 1);
  CHECK(lone.function_count == 0);
  CHECK(lone.terminal_count == 1);
  CHECK(lone.unique_features == 1);

  const auto twice = tree_stats(op(Op::add, {f(0), f(0)}));
  CHECK(twice.feature_occurrences == 2);
  CHECK(twice.unique_features == 1);
  CHECK(twice.function_usage.at("add") == 1);

  Individual ind;
  ind.trees = {op(Op::add, {f(0), f(1)}), op(Op::mul, {f(1), op(Op::sigmoid, {c(0.3)})})};
  const auto stats = model_stats(ind);
  REQUIRE(stats.trees.size() == 2);
  CHECK(stats.total.node_count == 7);
  CHECK(stats.total.function_count == 3);
  CHECK(stats.total.terminal_count == 4);
  CHECK(stats.total.feature_occurrences == 3);
  CHECK(stats.total.unique_features == 2);
  CHECK(stats.total.function_usage.at("mul") == 1);

  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto s = tree_stats(random_tree(rng, InitMethod::grow, 2, 7, 6));
    CHECK(s.function_count + s.terminal_count == s.node_count);
    CHECK(s.unique_features <= s.feature_occurrences);
  }

  const nlohmann::json j = stats;
  CHECK(j["total"]["unique_features"] == 2);
  CHECK(j["trees"].size() == 2);
}

TEST_CASE("fitness contribution ordering") {
  std::mt19937_64 rng(5);
  const Matrix x = oracle::random_matrix(60, 3, rng);
  const std::size_t k = 8;
  const auto input = exact_neighbor_list(x, k);
  const FeatureColumns columns(x);

  SUBCASE("one tree") {
    Individual ind;
    ind.trees = {op(Op::add, {f(0), f(2)})};
    const auto steps = fitness_contribution(ind, x, input, k);
    REQUIRE(steps.size() == 1);
    CHECK(steps[0].tree_index == 0);
    CHECK(steps[0].cumulative_fitness == fitness_exact(ind, columns, input, k));
  }

  SUBCASE("a duplicate is not preferred over a new direction") {
    const std::vector<std::size_t> two{0, 1};
    const Matrix plane = x.select_cols(two);
    const auto plane_input = exact_neighbor_list(plane, k);
    Individual ind;
    ind.trees = {f(0), f(0), f(1)};
    const auto steps = fitness_contribution(ind, plane, plane_input, k);
    REQUIRE(steps.size() == 3);
    const auto first = ind.trees[steps[0].tree_index];
    const auto second = ind.trees[steps[1].tree_index];
    CHECK(!(first == second));
    CHECK(steps[1].cumulative_fitness == 0.0);
    CHECK(steps[1].cumulative_fitness <= steps[0].cumulative_fitness);
    CHECK(steps.back().cumulative_fitness == fitness_exact(ind, FeatureColumns(plane), plane_input, k));
  }

  SUBCASE("the identity trees reach zero") {
    Individual ind;
    ind.trees = {f(2), f(0), f(1)};
    const auto steps = fitness_contribution(ind, x, input, k);
    CHECK(steps.back().cumulative_fitness == 0.0);
    for (std::size_t s = 1; s < steps.size(); ++s)
      CHECK(steps[s].cumulative_fitness < steps[s - 1].cumulative_fitness);
    const nlohmann::json j = steps.front();
    CHECK(j.contains("tree"));
    CHECK(j.contains("cumulative_fitness"));
  }
}

TEST_CASE("simplify_individual keeps fitness") {
  Individual ind;
  ind.trees = {op(Op::add, {f(0), c(0)}), op(Op::mul, {f(1), c(1)})};
  ind.fitness = 3.0;
  const auto s = simplify_individual(ind);
  CHECK(s.trees[0] == f(0));
  CHECK(s.trees[1] == f(1));
}
