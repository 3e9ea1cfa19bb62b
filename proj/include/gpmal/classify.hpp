#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpmal/dataset.hpp"
#include "gpmal/matrix.hpp"

namespace gpmal {

/// Labels as dense codes 0..C-1, numbered by first appearance.
struct LabelCodes {
  std::vector<std::string> classes;
  std::vector<std::size_t> codes;
};

LabelCodes encode_labels(const std::vector<std::string>& labels);

/// Majority vote over the k Euclidean-nearest training rows (ties between
/// equally distant rows go to the lower row index). A tied vote is won by
/// the tied class whose nearest member is closest.
std::vector<std::size_t> knn_predict(const Matrix& train, std::span<const std::size_t> train_labels,
                                     const Matrix& test, std::size_t k);

struct RandomForestParams {
  std::size_t n_trees = 100;
  std::size_t min_samples_leaf = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

/// Bagged CART trees split on Gini impurity over ceil(sqrt(p)) candidate
/// features per node. Each tree draws from its own seed-derived stream, so
/// the result does not depend on the thread count.
std::vector<std::size_t> rf_predict(const Matrix& train, std::span<const std::size_t> train_labels,
                                    const Matrix& test, const RandomForestParams& params);

enum class ClassifierKind { knn, random_forest };

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::knn;
  std::size_t knn_k = 5;
  RandomForestParams forest;
};

std::string classifier_name(ClassifierKind kind);
/// Accepts "knn", "rf" and "random_forest".
ClassifierKind parse_classifier(const std::string& name);

struct CvAccuracy {
  std::string classifier;
  double mean_accuracy = 0.0;
  std::vector<double> per_fold;
  nlohmann::json params;
};

/// Trains on the rows outside each fold and scores the rows inside it.
CvAccuracy cv_accuracy(const Matrix& embedding, const std::vector<std::string>& labels,
                       const FoldAssignment& folds, const ClassifierConfig& config);

void to_json(nlohmann::json& j, const CvAccuracy& r);

}  // namespace gpmal
