#include "gpmal/tree_io.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "gpmal/error.hpp"

namespace gpmal {
namespace {

void append_number(std::string& out, double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

void write(const Tree& tree, std::size_t& pos, std::string& out) {
  const Node& node = tree.node(pos++);
  out += '(';
  out += op_name(node.op);
  if (node.op == Op::feature) {
    out += ' ';
    out += std::to_string(node.feature);
  } else if (node.op == Op::constant) {
    out += ' ';
    append_number(out, node.value);
  } else {
    for (int c = 0; c < arity(node.op); ++c) {
      out += ' ';
      write(tree, pos, out);
    }
  }
  out += ')';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Tree parse() {
    std::vector<Node> nodes;
    node(nodes);
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
    return Tree(std::move(nodes));
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("tree parse error at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char ch) {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != ch) fail(std::string("expected '") + ch + "'");
    ++pos_;
  }

  std::string_view token() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')')
      ++pos_;
    if (start == pos_) fail("expected a token");
    return text_.substr(start, pos_ - start);
  }

  static bool lookup(std::string_view name, Op& op) {
    for (int i = 0; i <= static_cast<int>(Op::constant); ++i) {
      if (op_name(static_cast<Op>(i)) == name) {
        op = static_cast<Op>(i);
        return true;
      }
    }
    return false;
  }

  void node(std::vector<Node>& out) {
    expect('(');
    const auto name = token();
    Op op{};
    if (!lookup(name, op)) fail("unknown primitive '" + std::string(name) + "'");
    if (op == Op::feature) {
      const auto t = token();
      std::uint32_t index = 0;
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), index);
      if (ec != std::errc() || ptr != t.data() + t.size()) fail("bad feature index");
      out.push_back(Node::feature_ref(index));
    } else if (op == Op::constant) {
      const auto t = token();
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) fail("bad constant");
      out.push_back(Node::constant_of(v));
    } else {
      out.push_back(Node::function(op));
      for (int c = 0; c < arity(op); ++c) node(out);
    }
    expect(')');
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string to_prefix_string(const Tree& tree) {
  std::string out;
  std::size_t pos = 0;
  write(tree, pos, out);
  return out;
}

Tree parse_tree(std::string_view text) { return Parser(text).parse(); }

std::string format_model(const Individual& ind) {
  std::string out;
  for (const auto& tree : ind.trees) {
    out += to_prefix_string(tree);
    out += '\n';
  }
  return out;
}

Individual parse_model(std::string_view text) {
  Individual ind;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ind.trees.push_back(parse_tree(line));
  }
  if (ind.trees.empty()) throw DataError("model contains no trees");
  return ind;
}

}  // namespace gpmal
