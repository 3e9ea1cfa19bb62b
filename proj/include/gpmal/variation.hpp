#pragma once

#include <cstddef>
#include <utility>

#include "gpmal/tree.hpp"

namespace gpmal {

struct DepthBounds {
  std::size_t min = 2;
  std::size_t max = 14;

  bool contains(std::size_t depth) const noexcept { return depth >= min && depth <= max; }
};

/// Attempts beyond the first before a variation falls back to copying parents.
inline constexpr int kVariationRetries = 3;
/// Probability that a crossover point is drawn from the function nodes.
inline constexpr double kFunctionPointBias = 0.9;
/// Depth limit of subtrees grown by mutation.
inline constexpr std::size_t kMutationSubtreeDepth = 4;

/// Crossover point: a function node with probability kFunctionPointBias
/// (when the tree has any), otherwise a terminal.
std::size_t pick_crossover_point(const Tree& tree, Rng& rng);

/// Standard subtree crossover. Retries when either child leaves `bounds`;
/// after kVariationRetries failed retries the parents are returned unchanged.
std::pair<Tree, Tree> subtree_crossover(const Tree& a, const Tree& b, Rng& rng, DepthBounds bounds);

/// Crosses every pair of same-position trees. Children carry no fitness.
/// Throws ConfigError when the parents have different tree counts.
std::pair<Individual, Individual> crossover_all_pairs(const Individual& a, const Individual& b,
                                                      Rng& rng, DepthBounds bounds = {});

/// Replaces a uniformly chosen subtree of one uniformly chosen tree with a
/// freshly grown subtree. If `mutated_tree` is given it receives the index of
/// the tree that was picked.
Individual mutate_single_tree(const Individual& a, Rng& rng, std::size_t feature_count,
                              DepthBounds bounds = {}, std::size_t* mutated_tree = nullptr);

}  // namespace gpmal
