#include "gpmal/variation.hpp"

#include "gpmal/error.hpp"

namespace gpmal {

std::size_t pick_crossover_point(const Tree& tree, Rng& rng) {
  std::vector<std::size_t> functions;
  std::vector<std::size_t> terminals;
  for (std::size_t i = 0; i < tree.size(); ++i)
    (is_terminal(tree.node(i).op) ? terminals : functions).push_back(i);

  std::bernoulli_distribution prefer_function(kFunctionPointBias);
  const bool use_functions = !functions.empty() && (terminals.empty() || prefer_function(rng));
  const auto& pool = use_functions ? functions : terminals;
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return pool[pick(rng)];
}

std::pair<Tree, Tree> subtree_crossover(const Tree& a, const Tree& b, Rng& rng, DepthBounds bounds) {
  for (int attempt = 0; attempt <= kVariationRetries; ++attempt) {
    const std::size_t pa = pick_crossover_point(a, rng);
    const std::size_t pb = pick_crossover_point(b, rng);
    Tree child_a = a.with_subtree(pa, b.subtree(pb));
    Tree child_b = b.with_subtree(pb, a.subtree(pa));
    if (bounds.contains(child_a.depth()) && bounds.contains(child_b.depth()))
      return {std::move(child_a), std::move(child_b)};
  }
  return {a, b};
}

std::pair<Individual, Individual> crossover_all_pairs(const Individual& a, const Individual& b,
                                                      Rng& rng, DepthBounds bounds) {
  if (a.d() != b.d()) throw ConfigError("crossover: parents have different tree counts");
  Individual child_a;
  Individual child_b;
  child_a.trees.reserve(a.d());
  child_b.trees.reserve(b.d());
  for (std::size_t t = 0; t < a.d(); ++t) {
    auto [x, y] = subtree_crossover(a.trees[t], b.trees[t], rng, bounds);
    child_a.trees.push_back(std::move(x));
    child_b.trees.push_back(std::move(y));
  }
  return {std::move(child_a), std::move(child_b)};
}

Individual mutate_single_tree(const Individual& a, Rng& rng, std::size_t feature_count,
                              DepthBounds bounds, std::size_t* mutated_tree) {
  if (a.d() == 0) throw ConfigError("mutation: individual has no trees");
  std::uniform_int_distribution<std::size_t> pick_tree(0, a.d() - 1);
  const std::size_t t = pick_tree(rng);
  if (mutated_tree) *mutated_tree = t;

  Individual child{a.trees, std::nullopt};
  const Tree& parent = a.trees[t];
  std::uniform_int_distribution<std::size_t> pick_point(0, parent.size() - 1);
  for (int attempt = 0; attempt <= kVariationRetries; ++attempt) {
    const std::size_t point = pick_point(rng);
    const Tree grown =
        detail::generate_tree(rng, InitMethod::grow, 0, kMutationSubtreeDepth, feature_count);
    Tree candidate = parent.with_subtree(point, grown);
    if (bounds.contains(candidate.depth())) {
      child.trees[t] = std::move(candidate);
      break;
    }
  }
  return child;
}

}  // namespace gpmal
