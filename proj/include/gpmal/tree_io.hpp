#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gpmal/tree.hpp"

namespace gpmal {

/// Lisp-style prefix text, e.g. "(add (f 3) (c -0.25))". Constants use the
/// shortest representation that parses back to the same double.
std::string to_prefix_string(const Tree& tree);

/// Inverse of to_prefix_string. Throws DataError on malformed input.
Tree parse_tree(std::string_view text);

/// One tree per line.
std::string format_model(const Individual& ind);
Individual parse_model(std::string_view text);

}  // namespace gpmal
