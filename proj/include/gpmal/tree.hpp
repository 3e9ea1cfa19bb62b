#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "gpmal/matrix.hpp"

namespace gpmal {

using Rng = std::mt19937_64;

/// Function and terminal set.
enum class Op : std::uint8_t {
  add,
  sub,
  mul,
  protected_div,
  sigmoid,
  relu,
  max,
  min,
  if_negative,  ///< if (x < 0) y else z
  feature,
  constant,
};

inline constexpr std::size_t kFunctionCount = 9;

constexpr int arity(Op op) {
  switch (op) {
    case Op::sigmoid:
    case Op::relu: return 1;
    case Op::if_negative: return 3;
    case Op::feature:
    case Op::constant: return 0;
    default: return 2;
  }
}

constexpr bool is_terminal(Op op) { return arity(op) == 0; }

std::string_view op_name(Op op);

struct Node {
  Op op = Op::constant;
  std::uint32_t feature = 0;  ///< column index when op == feature
  double value = 0.0;         ///< value when op == constant

  static Node function(Op op) { return {op, 0, 0.0}; }
  static Node feature_ref(std::uint32_t index) { return {Op::feature, index, 0.0}; }
  static Node constant_of(double v) { return {Op::constant, 0, v}; }

  friend bool operator==(const Node&, const Node&) = default;
};

/// Expression tree stored as a prefix-ordered node array. Every subtree is a
/// contiguous range starting at its root.
class Tree {
 public:
  Tree() = default;
  /// Throws DataError unless `prefix` encodes exactly one complete tree.
  explicit Tree(std::vector<Node> prefix);

  static Tree feature(std::uint32_t index);
  static Tree constant(double value);
  static Tree apply(Op op, const std::vector<Tree>& children);

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& node(std::size_t pos) const { return nodes_[pos]; }

  /// One past the last node of the subtree rooted at `pos`.
  std::size_t subtree_end(std::size_t pos) const;
  Tree subtree(std::size_t pos) const;
  Tree with_subtree(std::size_t pos, const Tree& replacement) const;

  /// Edges on the longest root-to-leaf path; a lone terminal has depth 0.
  std::size_t depth() const;
  /// Depth of the node at `pos` below the root.
  std::size_t depth_of(std::size_t pos) const;

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  std::vector<Node> nodes_;
};

/// d trees, one per embedding dimension.
struct Individual {
  std::vector<Tree> trees;
  std::optional<double> fitness;

  std::size_t d() const noexcept { return trees.size(); }
};

/// Recursive reference evaluation on one instance.
double eval_tree(const Tree& tree, std::span<const double> instance);

/// Features stored column-major so each terminal is a contiguous vector.
class FeatureColumns {
 public:
  explicit FeatureColumns(const Matrix& features) : columns_(features.transposed()) {}
  std::size_t n() const noexcept { return columns_.cols(); }
  std::size_t m() const noexcept { return columns_.rows(); }
  std::span<const double> column(std::size_t c) const { return columns_.row(c); }

 private:
  Matrix columns_;
};

/// Evaluates whole trees over all instances at once with the active SIMD
/// kernels. Reuses its buffers between calls; not thread-safe.
class BatchEvaluator {
 public:
  explicit BatchEvaluator(const FeatureColumns& columns) : columns_(columns) {}
  void evaluate(const Tree& tree, std::span<double> out);

 private:
  std::size_t acquire();
  const FeatureColumns& columns_;
  std::vector<std::vector<double>> buffers_;
  std::vector<std::size_t> free_;
};

/// n x d embedding: entry (i, t) is tree t evaluated on instance i.
Matrix eval_individual(const Individual& ind, const FeatureColumns& columns);
Matrix eval_individual(const Individual& ind, const Matrix& features);

enum class InitMethod { grow, full };

/// Random tree over `feature_count` features. `full` puts every terminal at
/// depth max_depth; `grow` puts terminals anywhere in [min_depth, max_depth].
/// Constants are drawn from U[-1, 1]. Requires 2 <= min_depth <= max_depth.
Tree random_tree(Rng& rng, InitMethod method, std::size_t min_depth, std::size_t max_depth,
                 std::size_t feature_count);

namespace detail {
/// random_tree without the lower bound on min_depth (used for mutation).
Tree generate_tree(Rng& rng, InitMethod method, std::size_t min_depth, std::size_t max_depth,
                   std::size_t feature_count);
}  // namespace detail

}  // namespace gpmal
