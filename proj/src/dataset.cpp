#include "gpmal/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "gpmal/error.hpp"

namespace gpmal {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

// Splits one CSV record. Double-quoted fields may contain commas; "" inside
// quotes is a literal quote.
std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        current.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  fields.push_back(trim(current));
  return fields;
}

bool parse_real(const std::string& cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

std::vector<std::string> Dataset::classes() const {
  std::vector<std::string> out;
  for (const auto& label : labels)
    if (std::find(out.begin(), out.end(), label) == out.end()) out.push_back(label);
  return out;
}

void validate(const Dataset& d) {
  if (d.n() < 2) throw DataError("dataset needs at least 2 instances");
  if (d.m() < 1) throw DataError("dataset needs at least 1 feature");
  if (d.labels.size() != d.n()) throw DataError("label count does not match instance count");
  if (!d.feature_names.empty() && d.feature_names.size() != d.m())
    throw DataError("feature name count does not match feature count");
  if (!d.features.all_finite()) throw DataError("dataset contains non-finite values");
  if (d.scaled) {
    for (double v : d.features.values())
      if (v < 0.0 || v > 1.0) throw DataError("scaled dataset has values outside [0,1]");
  }
}

LabelColumn parse_label_column(const std::string& text) {
  if (!text.empty() && std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); }))
    return static_cast<std::size_t>(std::stoull(text));
  return text;
}

namespace {

// Reads a numeric table. Without a label column every cell is a feature and
// the returned labels stay empty.
Dataset read_table(const std::filesystem::path& path, const std::optional<LabelColumn>& label_column,
                   bool has_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  std::vector<std::string> header;
  std::size_t label_index = std::numeric_limits<std::size_t>::max();
  std::size_t rows = 0;

  auto resolve_label = [&](std::size_t columns) {
    if (!label_column) return;
    if (const auto* index = std::get_if<std::size_t>(&*label_column)) {
      if (*index >= columns)
        throw DataError("label column index " + std::to_string(*index) + " out of range");
      label_index = *index;
      return;
    }
    const auto& name = std::get<std::string>(*label_column);
    if (!has_header) throw DataError("label column '" + name + "' given by name but file has no header");
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("label column '" + name + "' not found in header");
    label_index = static_cast<std::size_t>(it - header.begin());
  };

  Dataset d;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_record(line);
    if (width == 0) {
      width = fields.size();
      if (label_column && width < 2)
        throw DataError("line " + std::to_string(line_no) + ": need at least 2 columns");
      if (has_header) {
        header = fields;
        resolve_label(width);
        continue;
      }
      resolve_label(width);
    }
    if (fields.size() != width) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                      " columns, found " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_index) continue;
      double v = 0.0;
      if (!parse_real(fields[c], v)) {
        throw DataError("line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                        ": cannot parse '" + fields[c] + "' as a finite number");
      }
      values.push_back(v);
    }
    if (label_column) d.labels.push_back(fields[label_index]);
    ++rows;
  }
  if (width == 0) throw DataError(path.string() + " is empty");

  const std::size_t m = label_column ? width - 1 : width;
  d.features = Matrix(rows, m, std::move(values));
  for (std::size_t c = 0; c < width; ++c) {
    if (c == label_index) continue;
    d.feature_names.push_back(has_header ? header[c] : "f" + std::to_string(d.feature_names.size()));
  }
  return d;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label_column,
                 bool has_header) {
  Dataset d = read_table(path, label_column, has_header);
  validate(d);
  return d;
}

Matrix load_embedding_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string first;
  std::getline(in, first);
  const auto header = split_record(first);
  const bool labelled = std::find(header.begin(), header.end(), "label") != header.end();
  auto table = read_table(path, labelled ? std::optional<LabelColumn>(std::string("label")) : std::nullopt, true);
  if (table.features.rows() == 0) throw DataError(path.string() + " has no rows");
  return std::move(table.features);
}

Dataset scale_min_max(Dataset d) {
  Matrix& x = d.features;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double lo = x(0, c);
    double hi = x(0, c);
    for (std::size_t r = 1; r < x.rows(); ++r) {
      lo = std::min(lo, x(r, c));
      hi = std::max(hi, x(r, c));
    }
    const double range = hi - lo;
    for (std::size_t r = 0; r < x.rows(); ++r)
      x(r, c) = range > 0.0 ? std::clamp((x(r, c) - lo) / range, 0.0, 1.0) : 0.0;
  }
  d.scaled = true;
  return d;
}

std::vector<std::size_t> FoldAssignment::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_instance.size(); ++i)
    if (fold_of_instance[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldAssignment::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_instance.size(); ++i)
    if (fold_of_instance[i] != fold) out.push_back(i);
  return out;
}

FoldAssignment stratified_folds(const std::vector<std::string>& labels, std::size_t k_folds,
                                std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (k_folds < 2 || k_folds > n)
    throw ConfigError("k_folds must lie in [2, n]; got " + std::to_string(k_folds));

  // Group by class (first-appearance order), shuffle each class, then deal
  // round-robin with a cursor that carries over between classes.
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = members.try_emplace(labels[i]);
    if (inserted) order.push_back(labels[i]);
    it->second.push_back(i);
  }

  std::mt19937_64 rng(seed);
  FoldAssignment folds{k_folds, std::vector<std::size_t>(n, 0)};
  std::size_t cursor = 0;
  for (const auto& label : order) {
    auto& ids = members[label];
    std::shuffle(ids.begin(), ids.end(), rng);
    for (std::size_t id : ids) {
      folds.fold_of_instance[id] = cursor;
      cursor = (cursor + 1) % k_folds;
    }
  }
  return folds;
}

FoldAssignment stratified_folds(const Dataset& d, std::size_t k_folds, std::uint64_t seed) {
  return stratified_folds(d.labels, k_folds, seed);
}

}  // namespace gpmal
