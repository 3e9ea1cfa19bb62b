#include "gpmal/simplify.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "gpmal/error.hpp"
#include "gpmal/fitness.hpp"
#include "gpmal/simd/kernels.hpp"

namespace gpmal {

namespace {

namespace el = simd::element;

bool is_constant(const Tree& t) { return t.size() == 1 && t.node(0).op == Op::constant; }
bool is_constant(const Tree& t, double v) { return is_constant(t) && t.node(0).value == v; }

double fold(Op op, const std::vector<Tree>& c) {
  auto v = [&](std::size_t i) { return c[i].node(0).value; };
  switch (op) {
    case Op::add: return el::add(v(0), v(1));
    case Op::sub: return el::sub(v(0), v(1));
    case Op::mul: return el::mul(v(0), v(1));
    case Op::protected_div: return el::protected_div(v(0), v(1));
    case Op::max: return el::max(v(0), v(1));
    case Op::min: return el::min(v(0), v(1));
    case Op::sigmoid: return el::sigmoid(v(0));
    case Op::relu: return el::relu(v(0));
    case Op::if_negative: return el::select_negative(v(0), v(1), v(2));
    default: throw DomainError("fold: not a function");
  }
}

Tree rewrite(Op op, std::vector<Tree> c) {
  if (std::all_of(c.begin(), c.end(), [](const Tree& t) { return is_constant(t); }))
    return Tree::constant(fold(op, c));
  switch (op) {
    case Op::add:
      if (is_constant(c[1], 0.0)) return c[0];
      if (is_constant(c[0], 0.0)) return c[1];
      break;
    case Op::sub:
      if (is_constant(c[1], 0.0)) return c[0];
      break;
    case Op::mul:
      // Subtree values are always finite, so multiplying by zero gives zero.
      if (is_constant(c[0], 0.0) || is_constant(c[1], 0.0)) return Tree::constant(0.0);
      if (is_constant(c[1], 1.0)) return c[0];
      if (is_constant(c[0], 1.0)) return c[1];
      break;
    case Op::protected_div:
      if (is_constant(c[0], 0.0)) return Tree::constant(0.0);
      break;
    case Op::max:
    case Op::min:
      if (c[0] == c[1]) return c[0];
      break;
    case Op::if_negative:
      if (is_constant(c[0])) return c[0].node(0).value < 0.0 ? c[1] : c[2];
      break;
    case Op::relu:
      if (c[0].node(0).op == Op::relu) return c[0];
      break;
    default:
      break;
  }
  return Tree::apply(op, c);
}

Tree simplify_once(const Tree& tree, std::size_t pos) {
  const Node& node = tree.node(pos);
  if (is_terminal(node.op)) return Tree(std::vector<Node>{node});
  std::vector<Tree> children;
  std::size_t child = pos + 1;
  for (int a = 0; a < arity(node.op); ++a) {
    children.push_back(simplify_once(tree, child));
    child = tree.subtree_end(child);
  }
  return rewrite(node.op, std::move(children));
}

}  // namespace

Tree simplify_tree(const Tree& tree) {
  Tree current = tree;
  for (;;) {
    Tree next = simplify_once(current, 0);
    if (next == current) return current;
    current = std::move(next);
  }
}

Individual simplify_individual(const Individual& ind) {
  Individual out;
  for (const auto& t : ind.trees) out.trees.push_back(simplify_tree(t));
  return out;
}

TreeStats tree_stats(const Tree& tree) {
  TreeStats s;
  std::set<std::uint32_t> features;
  for (const auto& node : tree.nodes()) {
    ++s.node_count;
    if (is_terminal(node.op)) {
      ++s.terminal_count;
      if (node.op == Op::feature) {
        ++s.feature_occurrences;
        features.insert(node.feature);
      }
    } else {
      ++s.function_count;
      ++s.function_usage[std::string(op_name(node.op))];
    }
  }
  s.unique_features = features.size();
  return s;
}

ModelStats model_stats(const Individual& ind) {
  ModelStats stats;
  std::set<std::uint32_t> features;
  for (const auto& tree : ind.trees) {
    stats.trees.push_back(tree_stats(tree));
    const auto& t = stats.trees.back();
    stats.total.node_count += t.node_count;
    stats.total.function_count += t.function_count;
    stats.total.terminal_count += t.terminal_count;
    stats.total.feature_occurrences += t.feature_occurrences;
    for (const auto& [name, count] : t.function_usage) stats.total.function_usage[name] += count;
    for (const auto& node : tree.nodes())
      if (node.op == Op::feature) features.insert(node.feature);
  }
  stats.total.unique_features = features.size();
  return stats;
}

std::vector<ContributionStep> fitness_contribution(const Individual& ind, const Matrix& features,
                                                   const NeighborList& input, std::size_t k) {
  if (ind.d() == 0) throw ConfigError("fitness_contribution: individual has no trees");
  const Matrix embedding = eval_individual(ind, features);

  std::vector<std::size_t> chosen;
  std::vector<bool> used(ind.d(), false);
  std::vector<ContributionStep> steps;
  while (chosen.size() < ind.d()) {
    std::size_t best_tree = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < ind.d(); ++t) {
      if (used[t]) continue;
      auto columns = chosen;
      columns.push_back(t);
      const double f = embedding_fitness_exact(embedding.select_cols(columns), input, k);
      if (f < best) {
        best = f;
        best_tree = t;
      }
    }
    used[best_tree] = true;
    chosen.push_back(best_tree);
    steps.push_back({best_tree, best});
  }
  return steps;
}

void to_json(nlohmann::json& j, const TreeStats& s) {
  j = nlohmann::json{{"node_count", s.node_count},
                     {"function_count", s.function_count},
                     {"terminal_count", s.terminal_count},
                     {"unique_features", s.unique_features},
                     {"feature_occurrences", s.feature_occurrences},
                     {"function_usage", s.function_usage}};
}

void to_json(nlohmann::json& j, const ModelStats& s) {
  j = nlohmann::json{{"trees", s.trees}, {"total", s.total}};
}

void to_json(nlohmann::json& j, const ContributionStep& s) {
  j = nlohmann::json{{"tree", s.tree_index}, {"cumulative_fitness", s.cumulative_fitness}};
}

}  // namespace gpmal
