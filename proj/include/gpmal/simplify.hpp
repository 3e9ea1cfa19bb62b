#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpmal/matrix.hpp"
#include "gpmal/neighbors.hpp"
#include "gpmal/tree.hpp"

namespace gpmal {

/// Rewrites a tree to a fixpoint of: constant folding, x+0, x-0, x*1 -> x,
/// x*0 -> 0, div(0,x) -> 0, max(x,x) and min(x,x) -> x, if with a constant
/// condition -> the taken branch, relu(relu(x)) -> relu(x). The result
/// evaluates identically on every input and is never larger.
Tree simplify_tree(const Tree& tree);
Individual simplify_individual(const Individual& ind);

struct TreeStats {
  std::size_t node_count = 0;
  std::size_t function_count = 0;
  std::size_t terminal_count = 0;
  std::size_t unique_features = 0;
  std::size_t feature_occurrences = 0;
  std::map<std::string, std::size_t> function_usage;  ///< by function name
};

struct ModelStats {
  std::vector<TreeStats> trees;
  TreeStats total;  ///< unique_features counts distinct features across all trees
};

TreeStats tree_stats(const Tree& tree);
ModelStats model_stats(const Individual& ind);

struct ContributionStep {
  std::size_t tree_index = 0;
  double cumulative_fitness = 0.0;
};

/// Greedy forward ordering of the trees: each step adds the tree that gives
/// the partial embedding the lowest exact fitness (ties to the lower index).
std::vector<ContributionStep> fitness_contribution(const Individual& ind, const Matrix& features,
                                                   const NeighborList& input, std::size_t k);

void to_json(nlohmann::json& j, const TreeStats& s);
void to_json(nlohmann::json& j, const ModelStats& s);
void to_json(nlohmann::json& j, const ContributionStep& s);

}  // namespace gpmal
