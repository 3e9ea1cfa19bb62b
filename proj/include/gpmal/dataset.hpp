#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "gpmal/matrix.hpp"

namespace gpmal {

/// Tabular classification data. Labels travel with the features for
/// evaluation only; nothing in the fitness path takes a Dataset.
struct Dataset {
  Matrix features;
  std::vector<std::string> labels;
  std::vector<std::string> feature_names;
  bool scaled = false;

  std::size_t n() const noexcept { return features.rows(); }
  std::size_t m() const noexcept { return features.cols(); }
  /// Distinct labels in order of first appearance.
  std::vector<std::string> classes() const;
};

/// Throws DataError unless the dataset satisfies its invariants.
void validate(const Dataset& d);

/// Label column given by header name or 0-based index.
using LabelColumn = std::variant<std::string, std::size_t>;

/// Parses "3" as index 3 and anything else as a column name.
LabelColumn parse_label_column(const std::string& text);

/// Reads a comma-separated file. Every non-label cell must parse as a finite
/// real; errors name the 1-based file line and column.
Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label_column,
                 bool has_header = true);

/// Reads a headed numeric CSV such as an exported embedding. A column named
/// "label" is skipped if present.
Matrix load_embedding_csv(const std::filesystem::path& path);

/// Maps each column onto [0,1] by (v - min) / (max - min). Constant columns
/// become all zeros so feature indices stay stable.
Dataset scale_min_max(Dataset d);

struct FoldAssignment {
  std::size_t k_folds = 0;
  std::vector<std::size_t> fold_of_instance;

  /// Instance ids in fold f, ascending.
  std::vector<std::size_t> test_indices(std::size_t fold) const;
  /// Instance ids outside fold f, ascending.
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

/// Class-stratified assignment: within each class, per-fold counts differ by
/// at most one, and overall fold sizes differ by at most one.
FoldAssignment stratified_folds(const std::vector<std::string>& labels, std::size_t k_folds,
                                std::uint64_t seed);
FoldAssignment stratified_folds(const Dataset& d, std::size_t k_folds, std::uint64_t seed);

}  // namespace gpmal
