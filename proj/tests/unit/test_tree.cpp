#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "gpmal/error.hpp"
#include "gpmal/tree.hpp"
#include "gpmal/simd/kernels.hpp"
#include "gpmal/tree_io.hpp"
#include "support/oracles.hpp"

using namespace gpmal;

namespace {

Tree f(std::uint32_t i) { return Tree::feature(i); }
Tree c(double v) { return Tree::constant(v); }
Tree op(Op o, std::vector<Tree> kids) { return Tree::apply(o, kids); }

// Depth of every leaf, by walking the prefix array.
void leaf_depths(const Tree& t, std::size_t pos, std::size_t depth, std::vector<std::size_t>& out) {
  const auto& node = t.node(pos);
  if (is_terminal(node.op)) {
    out.push_back(depth);
    return;
  }
  std::size_t child = pos + 1;
  for (int a = 0; a < arity(node.op); ++a) {
    leaf_depths(t, child, depth + 1, out);
    child = t.subtree_end(child);
  }
}

}  // namespace

TEST_CASE("primitive semantics") {
  const std::vector<double> x{0.3, -2.0};
  CHECK(eval_tree(op(Op::sigmoid, {c(0)}), x) == 0.5);
  CHECK(eval_tree(op(Op::protected_div, {c(1), c(0)}), x) == 0.0);
  CHECK(eval_tree(op(Op::protected_div, {c(1), c(1e-9)}), x) == 0.0);
  CHECK(eval_tree(op(Op::protected_div, {c(1), c(-0.5)}), x) == -2.0);
  CHECK(eval_tree(op(Op::if_negative, {f(0), c(-1), c(1)}), x) == 1.0);
  CHECK(eval_tree(op(Op::if_negative, {f(1), c(-1), c(1)}), x) == -1.0);
  CHECK(eval_tree(op(Op::if_negative, {c(0), c(-1), c(1)}), x) == 1.0);
  CHECK(eval_tree(op(Op::relu, {op(Op::sub, {c(0.2), c(0.9)})}), x) == 0.0);
  CHECK(eval_tree(op(Op::max, {f(0), f(1)}), x) == 0.3);
  CHECK(eval_tree(op(Op::min, {f(0), f(1)}), x) == -2.0);
  CHECK(eval_tree(op(Op::mul, {f(0), f(1)}), x) == doctest::Approx(-0.6));
}

TEST_CASE("arithmetic saturates instead of overflowing") {
  Tree big = c(1.0);
  for (int i = 0; i < 12; ++i) big = op(Op::mul, {op(Op::add, {big, c(1.0)}), c(1e30)});
  const double v = eval_tree(big, std::vector<double>{});
  CHECK(std::isfinite(v));
  CHECK(v == simd::kValueLimit);
  CHECK(std::isfinite(eval_tree(op(Op::sub, {op(Op::mul, {c(-1e99), c(1e99)}), c(1e99)}), std::vector<double>{})));
}

TEST_CASE("eval never produces non-finite values on random trees") {
  Rng rng(4);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int t = 0; t < 300; ++t) {
    const auto tree = random_tree(rng, t % 2 ? InitMethod::grow : InitMethod::full, 2, 8, 3);
    for (int s = 0; s < 20; ++s) {
      const std::vector<double> x{u(rng), u(rng) * 1e-12, u(rng) * 1e90};
      CHECK(std::isfinite(eval_tree(tree, x)));
    }
  }
}

TEST_CASE("eval_individual") {
  const Matrix x(2, 2, std::vector<double>{0.1, 0.2, 0.5, 0.5});
  Individual sum;
  sum.trees.push_back(op(Op::add, {f(0), f(1)}));
  const auto e = eval_individual(sum, x);
  CHECK(e(0, 0) == doctest::Approx(0.3));
  CHECK(e(1, 0) == 1.0);

  std::mt19937_64 rng(2);
  const auto data = oracle::random_matrix(20, 5, rng);
  Individual identity;
  for (std::uint32_t i = 0; i < 3; ++i) identity.trees.push_back(f(i));
  const auto ide = eval_individual(identity, data);
  for (std::size_t r = 0; r < 20; ++r)
    for (std::size_t col = 0; col < 3; ++col) CHECK(ide(r, col) == data(r, col));

  Individual constant;
  constant.trees = {c(0.25), c(-0.5)};
  const auto ce = eval_individual(constant, data);
  for (std::size_t r = 1; r < 20; ++r) CHECK(ce.row(r)[0] == ce.row(0)[0]);
}

TEST_CASE("batch evaluation equals recursive evaluation bit for bit") {
  Rng rng(6);
  std::mt19937_64 data_rng(6);
  const auto data = oracle::random_matrix(37, 6, data_rng, -2.0, 2.0);
  const FeatureColumns columns(data);
  BatchEvaluator batch(columns);
  std::vector<double> out(37);
  for (int t = 0; t < 200; ++t) {
    const auto tree = random_tree(rng, t % 2 ? InitMethod::grow : InitMethod::full, 2, 9, 6);
    batch.evaluate(tree, out);
    for (std::size_t r = 0; r < 37; ++r) {
      const double expected = eval_tree(tree, data.row(r));
      CHECK(std::memcmp(&out[r], &expected, sizeof(double)) == 0);
    }
  }
}

TEST_CASE("full trees have every leaf at the target depth") {
  Rng rng(1);
  for (std::size_t depth = 2; depth <= 6; ++depth) {
    const auto t = random_tree(rng, InitMethod::full, depth, depth, 4);
    std::vector<std::size_t> leaves;
    leaf_depths(t, 0, 0, leaves);
    for (auto d : leaves) CHECK(d == depth);
    CHECK(t.depth() == depth);
  }
}

TEST_CASE("grow trees stay within their depth bounds") {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const auto t = random_tree(rng, InitMethod::grow, 2, 6, 5);
    CHECK(t.depth() >= 2);
    CHECK(t.depth() <= 6);
    for (const auto& node : t.nodes())
      if (node.op == Op::feature) CHECK(node.feature < 5);
  }
}

TEST_CASE("constants are uniform on [-1, 1]") {
  Rng rng(3);
  std::vector<double> values;
  while (values.size() < 10000) {
    const auto t = random_tree(rng, InitMethod::full, 2, 4, 1);
    for (const auto& node : t.nodes())
      if (node.op == Op::constant) values.push_back(node.value);
  }
  double lo = 1, hi = -1, sum = 0;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  CHECK(lo >= -1.0);
  CHECK(hi <= 1.0);
  CHECK(std::fabs(sum / static_cast<double>(values.size())) < 0.05);
}

TEST_CASE("random_tree is deterministic and validates bounds") {
  Rng a(9), b(9);
  for (int i = 0; i < 20; ++i)
    CHECK(random_tree(a, InitMethod::grow, 2, 6, 3) == random_tree(b, InitMethod::grow, 2, 6, 3));
  CHECK_THROWS_AS(random_tree(a, InitMethod::grow, 1, 6, 3), ConfigError);
  CHECK_THROWS_AS(random_tree(a, InitMethod::grow, 5, 4, 3), ConfigError);
  CHECK_THROWS_AS(random_tree(a, InitMethod::grow, 2, 4, 0), ConfigError);
}

TEST_CASE("tree structure helpers") {
  const Tree t = op(Op::add, {op(Op::mul, {f(0), c(2)}), op(Op::sigmoid, {f(1)})});
  CHECK(t.size() == 6);
  CHECK(t.depth() == 2);
  CHECK(t.subtree_end(1) == 4);
  CHECK(t.subtree(4) == op(Op::sigmoid, {f(1)}));
  CHECK(t.depth_of(5) == 2);
  CHECK(t.with_subtree(1, f(3)) == op(Op::add, {f(3), op(Op::sigmoid, {f(1)})}));
  CHECK(f(0).depth() == 0);
  CHECK_THROWS_AS(Tree(std::vector<Node>{Node::function(Op::add), Node::feature_ref(0)}), DataError);
  CHECK_THROWS_AS(Tree(std::vector<Node>{Node::feature_ref(0), Node::feature_ref(1)}), DataError);
}

TEST_CASE("prefix text round-trips") {
  const Tree t = op(Op::add, {f(3), c(-0.25)});
  CHECK(to_prefix_string(t) == "(add (f 3) (c -0.25))");
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const auto r = random_tree(rng, InitMethod::grow, 2, 7, 9);
    CHECK(parse_tree(to_prefix_string(r)) == r);
  }
  Individual ind;
  ind.trees = {t, op(Op::if_negative, {f(0), c(0.1), op(Op::relu, {f(2)})})};
  CHECK(parse_model(format_model(ind)).trees == ind.trees);
  CHECK_THROWS_AS(parse_tree("(add (f 1))"), DataError);
  CHECK_THROWS_AS(parse_tree("(frob (f 1) (f 2))"), DataError);
  CHECK_THROWS_AS(parse_tree("(f 1) trailing"), DataError);
  CHECK_THROWS_AS(parse_model(""), DataError);
}
