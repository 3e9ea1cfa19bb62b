#include "gpmal/tree.hpp"

#include <algorithm>
#include <string>

#include "gpmal/error.hpp"
#include "gpmal/simd/kernels.hpp"

namespace gpmal {

std::string_view op_name(Op op) {
  switch (op) {
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::protected_div: return "div";
    case Op::sigmoid: return "sigmoid";
    case Op::relu: return "relu";
    case Op::max: return "max";
    case Op::min: return "min";
    case Op::if_negative: return "if";
    case Op::feature: return "f";
    case Op::constant: return "c";
  }
  return "?";
}

Tree::Tree(std::vector<Node> prefix) : nodes_(std::move(prefix)) {
  std::size_t open = 1;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (open == 0) throw DataError("tree: trailing nodes after a complete tree");
    open += static_cast<std::size_t>(arity(nodes_[i].op));
    --open;
  }
  if (nodes_.empty() || open != 0) throw DataError("tree: incomplete prefix encoding");
}

Tree Tree::feature(std::uint32_t index) { return Tree({Node::feature_ref(index)}); }

Tree Tree::constant(double value) { return Tree({Node::constant_of(value)}); }

Tree Tree::apply(Op op, const std::vector<Tree>& children) {
  if (static_cast<std::size_t>(arity(op)) != children.size() || is_terminal(op))
    throw DataError("tree: wrong number of children for " + std::string(op_name(op)));
  std::vector<Node> nodes{Node::function(op)};
  for (const auto& child : children) nodes.insert(nodes.end(), child.nodes_.begin(), child.nodes_.end());
  return Tree(std::move(nodes));
}

std::size_t Tree::subtree_end(std::size_t pos) const {
  std::size_t open = 1;
  while (open > 0) {
    open += static_cast<std::size_t>(arity(nodes_[pos].op));
    --open;
    ++pos;
  }
  return pos;
}

Tree Tree::subtree(std::size_t pos) const {
  const auto first = nodes_.begin() + static_cast<std::ptrdiff_t>(pos);
  const auto last = nodes_.begin() + static_cast<std::ptrdiff_t>(subtree_end(pos));
  Tree out;
  out.nodes_.assign(first, last);
  return out;
}

Tree Tree::with_subtree(std::size_t pos, const Tree& replacement) const {
  const std::size_t end = subtree_end(pos);
  Tree out;
  out.nodes_.reserve(nodes_.size() - (end - pos) + replacement.size());
  out.nodes_.insert(out.nodes_.end(), nodes_.begin(), nodes_.begin() + static_cast<std::ptrdiff_t>(pos));
  out.nodes_.insert(out.nodes_.end(), replacement.nodes_.begin(), replacement.nodes_.end());
  out.nodes_.insert(out.nodes_.end(), nodes_.begin() + static_cast<std::ptrdiff_t>(end), nodes_.end());
  return out;
}

std::size_t Tree::depth() const {
  // Stack of remaining-children counts; its height is the current depth.
  std::vector<int> pending;
  std::size_t deepest = 0;
  for (const auto& node : nodes_) {
    deepest = std::max(deepest, pending.size());
    if (!pending.empty()) --pending.back();
    if (arity(node.op) > 0) pending.push_back(arity(node.op));
    while (!pending.empty() && pending.back() == 0) pending.pop_back();
  }
  return deepest;
}

std::size_t Tree::depth_of(std::size_t pos) const {
  std::vector<int> pending;
  for (std::size_t i = 0; i < pos; ++i) {
    if (!pending.empty()) --pending.back();
    if (arity(nodes_[i].op) > 0) pending.push_back(arity(nodes_[i].op));
    while (!pending.empty() && pending.back() == 0) pending.pop_back();
  }
  return pending.size();
}

namespace {

double eval_at(const std::vector<Node>& nodes, std::size_t& pos, std::span<const double> x) {
  namespace el = simd::element;
  const Node& node = nodes[pos++];
  switch (node.op) {
    case Op::feature: return x[node.feature];
    case Op::constant: return node.value;
    case Op::sigmoid: return el::sigmoid(eval_at(nodes, pos, x));
    case Op::relu: return el::relu(eval_at(nodes, pos, x));
    case Op::if_negative: {
      const double c = eval_at(nodes, pos, x);
      const double y = eval_at(nodes, pos, x);
      const double z = eval_at(nodes, pos, x);
      return el::select_negative(c, y, z);
    }
    default: break;
  }
  const double a = eval_at(nodes, pos, x);
  const double b = eval_at(nodes, pos, x);
  switch (node.op) {
    case Op::add: return el::add(a, b);
    case Op::sub: return el::sub(a, b);
    case Op::mul: return el::mul(a, b);
    case Op::protected_div: return el::protected_div(a, b);
    case Op::max: return el::max(a, b);
    case Op::min: return el::min(a, b);
    default: return 0.0;
  }
}

}  // namespace

double eval_tree(const Tree& tree, std::span<const double> instance) {
  std::size_t pos = 0;
  return eval_at(tree.nodes(), pos, instance);
}

std::size_t BatchEvaluator::acquire() {
  if (!free_.empty()) {
    const std::size_t id = free_.back();
    free_.pop_back();
    return id;
  }
  buffers_.emplace_back(columns_.n());
  return buffers_.size() - 1;
}

void BatchEvaluator::evaluate(const Tree& tree, std::span<double> out) {
  struct Slot {
    const double* data;
    std::ptrdiff_t buffer;  // -1 when borrowed from the feature columns
  };
  const auto& k = simd::active();
  const std::size_t n = columns_.n();
  std::vector<Slot> stack;
  auto release = [&](const Slot& s) {
    if (s.buffer >= 0) free_.push_back(static_cast<std::size_t>(s.buffer));
  };

  // Reverse prefix order: operands are on the stack, first child on top.
  const auto& nodes = tree.nodes();
  for (std::size_t i = nodes.size(); i-- > 0;) {
    const Node& node = nodes[i];
    if (node.op == Op::feature) {
      stack.push_back({columns_.column(node.feature).data(), -1});
      continue;
    }
    const std::size_t id = acquire();
    double* dst = buffers_[id].data();
    if (node.op == Op::constant) {
      std::fill_n(dst, n, node.value);
      stack.push_back({dst, static_cast<std::ptrdiff_t>(id)});
      continue;
    }
    const int a = arity(node.op);
    Slot args[3];
    for (int c = 0; c < a; ++c) {
      args[c] = stack.back();
      stack.pop_back();
    }
    switch (node.op) {
      case Op::add: k.add(args[0].data, args[1].data, dst, n); break;
      case Op::sub: k.sub(args[0].data, args[1].data, dst, n); break;
      case Op::mul: k.mul(args[0].data, args[1].data, dst, n); break;
      case Op::protected_div: k.protected_div(args[0].data, args[1].data, dst, n); break;
      case Op::max: k.max(args[0].data, args[1].data, dst, n); break;
      case Op::min: k.min(args[0].data, args[1].data, dst, n); break;
      case Op::sigmoid: k.sigmoid(args[0].data, dst, n); break;
      case Op::relu: k.relu(args[0].data, dst, n); break;
      case Op::if_negative: k.select_negative(args[0].data, args[1].data, args[2].data, dst, n); break;
      default: break;
    }
    for (int c = 0; c < a; ++c) release(args[c]);
    stack.push_back({dst, static_cast<std::ptrdiff_t>(id)});
  }
  std::copy_n(stack.back().data, n, out.begin());
  release(stack.back());
}

Matrix eval_individual(const Individual& ind, const FeatureColumns& columns) {
  const std::size_t n = columns.n();
  const std::size_t d = ind.d();
  Matrix out(n, d);
  BatchEvaluator evaluator(columns);
  std::vector<double> column(n);
  for (std::size_t t = 0; t < d; ++t) {
    evaluator.evaluate(ind.trees[t], column);
    for (std::size_t i = 0; i < n; ++i) out(i, t) = column[i];
  }
  return out;
}

Matrix eval_individual(const Individual& ind, const Matrix& features) {
  return eval_individual(ind, FeatureColumns(features));
}

namespace detail {
namespace {

void grow_into(Rng& rng, InitMethod method, std::size_t depth, std::size_t min_depth,
               std::size_t max_depth, std::size_t feature_count, std::vector<Node>& out) {
  // Terminal set: the features plus one ephemeral random constant.
  const std::size_t terminal_count = feature_count + 1;
  bool terminal = depth >= max_depth;
  if (!terminal && depth >= min_depth && method == InitMethod::grow) {
    std::uniform_int_distribution<std::size_t> pick(0, terminal_count + kFunctionCount - 1);
    terminal = pick(rng) < terminal_count;
  }
  if (terminal) {
    std::uniform_int_distribution<std::size_t> pick(0, feature_count);
    const std::size_t choice = pick(rng);
    if (choice == feature_count) {
      std::uniform_real_distribution<double> value(-1.0, 1.0);
      out.push_back(Node::constant_of(value(rng)));
    } else {
      out.push_back(Node::feature_ref(static_cast<std::uint32_t>(choice)));
    }
    return;
  }
  std::uniform_int_distribution<std::size_t> pick(0, kFunctionCount - 1);
  const auto op = static_cast<Op>(pick(rng));
  out.push_back(Node::function(op));
  for (int c = 0; c < arity(op); ++c)
    grow_into(rng, method, depth + 1, min_depth, max_depth, feature_count, out);
}

}  // namespace

Tree generate_tree(Rng& rng, InitMethod method, std::size_t min_depth, std::size_t max_depth,
                   std::size_t feature_count) {
  if (feature_count == 0) throw ConfigError("random_tree: need at least one feature");
  if (min_depth > max_depth) throw ConfigError("random_tree: min_depth exceeds max_depth");
  std::vector<Node> nodes;
  grow_into(rng, method, 0, min_depth, max_depth, feature_count, nodes);
  return Tree(std::move(nodes));
}

}  // namespace detail

Tree random_tree(Rng& rng, InitMethod method, std::size_t min_depth, std::size_t max_depth,
                 std::size_t feature_count) {
  if (min_depth < 2) throw ConfigError("random_tree: min_depth must be at least 2");
  return detail::generate_tree(rng, method, min_depth, max_depth, feature_count);
}

}  // namespace gpmal
