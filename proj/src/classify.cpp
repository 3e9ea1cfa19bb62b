#include "gpmal/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <unordered_map>

#include "gpmal/error.hpp"
#include "gpmal/neighbors.hpp"
#include "gpmal/tree.hpp"
#include "gpmal/parallel.hpp"
#include "gpmal/seed.hpp"
#include "gpmal/simd/kernels.hpp"

namespace gpmal {

LabelCodes encode_labels(const std::vector<std::string>& labels) {
  LabelCodes out;
  std::unordered_map<std::string, std::size_t> index;
  out.codes.reserve(labels.size());
  for (const auto& label : labels) {
    auto [it, inserted] = index.try_emplace(label, out.classes.size());
    if (inserted) out.classes.push_back(label);
    out.codes.push_back(it->second);
  }
  return out;
}

namespace {

void check_training(const Matrix& train, std::span<const std::size_t> labels, const Matrix& test) {
  if (train.rows() == 0) throw DataError("empty training set");
  if (labels.size() != train.rows()) throw ConfigError("training labels do not match training rows");
  if (test.rows() > 0 && test.cols() != train.cols()) throw ConfigError("test width differs from training width");
}

std::size_t class_count(std::span<const std::size_t> labels) {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

}  // namespace

std::vector<std::size_t> knn_predict(const Matrix& train, std::span<const std::size_t> train_labels,
                                     const Matrix& test, std::size_t k) {
  check_training(train, train_labels, test);
  if (k < 1 || k > train.rows()) throw ConfigError("knn: k must lie in [1, training size]");
  const auto& kernels = simd::active();
  const std::size_t classes = class_count(train_labels);

  std::vector<double> distances(train.rows());
  std::vector<Neighbor> candidates(train.rows());
  std::vector<std::size_t> votes(classes);
  std::vector<std::size_t> first_seen(classes);
  std::vector<std::size_t> predictions;
  predictions.reserve(test.rows());
  for (std::size_t t = 0; t < test.rows(); ++t) {
    kernels.sq_dist_rows(train.data(), train.cols(), test.row(t).data(), train.rows(), distances.data());
    for (std::size_t r = 0; r < train.rows(); ++r) candidates[r] = {distances[r], static_cast<NodeId>(r)};
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end());

    std::fill(votes.begin(), votes.end(), 0);
    std::fill(first_seen.begin(), first_seen.end(), k);
    for (std::size_t pos = 0; pos < k; ++pos) {
      const std::size_t label = train_labels[candidates[pos].id];
      if (votes[label]++ == 0) first_seen[label] = pos;
    }
    std::size_t winner = train_labels[candidates[0].id];
    for (std::size_t c = 0; c < classes; ++c)
      if (votes[c] > votes[winner] || (votes[c] == votes[winner] && first_seen[c] < first_seen[winner]))
        winner = c;
    predictions.push_back(winner);
  }
  return predictions;
}

namespace {

struct TreeNode {
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t left = 0;   // 0 marks a leaf
  std::size_t right = 0;
  std::size_t label = 0;
};

class CartBuilder {
 public:
  CartBuilder(const Matrix& x, std::span<const std::size_t> y, std::size_t classes,
              std::size_t min_leaf, Rng& rng)
      : x_(x), y_(y), classes_(classes), min_leaf_(std::max<std::size_t>(min_leaf, 1)), rng_(rng) {
    const auto p = static_cast<double>(x.cols());
    max_features_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(p))));
  }

  std::vector<TreeNode> build(std::vector<std::size_t> samples) {
    nodes_.clear();
    grow(samples);
    return std::move(nodes_);
  }

 private:
  struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
  };

  std::size_t majority(std::span<const std::size_t> samples) const {
    std::vector<std::size_t> counts(classes_);
    for (auto s : samples) ++counts[y_[s]];
    return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  }

  std::size_t grow(std::vector<std::size_t>& samples) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({});
    nodes_[id].label = majority(samples);
    const bool pure = std::all_of(samples.begin(), samples.end(),
                                  [&](std::size_t s) { return y_[s] == y_[samples.front()]; });
    if (pure || samples.size() < 2 * min_leaf_) return id;
    const auto split = best_split(samples);
    if (!split) return id;

    std::vector<std::size_t> left, right;
    for (auto s : samples) (x_(s, split->feature) <= split->threshold ? left : right).push_back(s);
    samples.clear();
    samples.shrink_to_fit();
    nodes_[id].feature = split->feature;
    nodes_[id].threshold = split->threshold;
    const std::size_t l = grow(left);
    const std::size_t r = grow(right);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  // Draws features in random order; stops after max_features_ have been
  // examined, but keeps drawing while none of them admits a split.
  std::optional<Split> best_split(const std::vector<std::size_t>& samples) {
    std::vector<std::size_t> features(x_.cols());
    std::iota(features.begin(), features.end(), 0);
    std::shuffle(features.begin(), features.end(), rng_);

    Split best;
    bool found = false;
    std::vector<std::pair<double, std::size_t>> column(samples.size());
    std::vector<std::size_t> left_counts(classes_), right_counts(classes_), total(classes_);
    for (auto s : samples) ++total[y_[s]];
    const auto n = static_cast<double>(samples.size());

    for (std::size_t examined = 0; examined < features.size(); ++examined) {
      if (examined >= max_features_ && found) break;
      const std::size_t f = features[examined];
      for (std::size_t i = 0; i < samples.size(); ++i) column[i] = {x_(samples[i], f), y_[samples[i]]};
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;

      std::fill(left_counts.begin(), left_counts.end(), 0);
      right_counts = total;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        ++left_counts[column[i].second];
        --right_counts[column[i].second];
        if (column[i].first == column[i + 1].first) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = column.size() - nl;
        if (nl < min_leaf_ || nr < min_leaf_) continue;
        const double impurity = (static_cast<double>(nl) * gini(left_counts, nl) +
                                 static_cast<double>(nr) * gini(right_counts, nr)) / n;
        if (impurity < best.impurity) {
          double threshold = 0.5 * (column[i].first + column[i + 1].first);
          if (threshold >= column[i + 1].first) threshold = column[i].first;
          best = {f, threshold, impurity};
          found = true;
        }
      }
    }
    if (!found) return std::nullopt;
    return best;
  }

  static double gini(const std::vector<std::size_t>& counts, std::size_t total) {
    double sum = 0.0;
    for (auto c : counts) {
      const double p = static_cast<double>(c) / static_cast<double>(total);
      sum += p * p;
    }
    return 1.0 - sum;
  }

  const Matrix& x_;
  std::span<const std::size_t> y_;
  std::size_t classes_;
  std::size_t min_leaf_;
  std::size_t max_features_ = 1;
  Rng& rng_;
  std::vector<TreeNode> nodes_;
};

std::size_t predict_tree(const std::vector<TreeNode>& tree, std::span<const double> point) {
  std::size_t at = 0;
  while (tree[at].left != 0) at = point[tree[at].feature] <= tree[at].threshold ? tree[at].left : tree[at].right;
  return tree[at].label;
}

}  // namespace

std::vector<std::size_t> rf_predict(const Matrix& train, std::span<const std::size_t> train_labels,
                                    const Matrix& test, const RandomForestParams& params) {
  check_training(train, train_labels, test);
  if (params.n_trees < 1) throw ConfigError("random forest needs at least one tree");
  const std::size_t classes = class_count(train_labels);
  const std::size_t n = train.rows();

  std::vector<std::vector<TreeNode>> forest(params.n_trees);
  parallel_for(params.n_trees, resolve_threads(params.threads), [&](std::size_t t) {
    Rng rng(derive_seed(params.seed, 0, t));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> bootstrap(n);
    for (auto& s : bootstrap) s = pick(rng);
    CartBuilder builder(train, train_labels, classes, params.min_samples_leaf, rng);
    forest[t] = builder.build(std::move(bootstrap));
  });

  std::vector<std::size_t> predictions;
  predictions.reserve(test.rows());
  std::vector<std::size_t> votes(classes);
  for (std::size_t r = 0; r < test.rows(); ++r) {
    std::fill(votes.begin(), votes.end(), 0);
    for (const auto& tree : forest) ++votes[predict_tree(tree, test.row(r))];
    predictions.push_back(static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin()));
  }
  return predictions;
}

std::string classifier_name(ClassifierKind kind) {
  return kind == ClassifierKind::knn ? "knn" : "random_forest";
}

ClassifierKind parse_classifier(const std::string& name) {
  if (name == "knn") return ClassifierKind::knn;
  if (name == "rf" || name == "random_forest") return ClassifierKind::random_forest;
  throw ConfigError("unknown classifier '" + name + "' (expected knn or rf)");
}

CvAccuracy cv_accuracy(const Matrix& embedding, const std::vector<std::string>& labels,
                       const FoldAssignment& folds, const ClassifierConfig& config) {
  if (embedding.rows() != labels.size() || folds.fold_of_instance.size() != labels.size())
    throw ConfigError("embedding, labels and folds must describe the same instances");
  const auto coded = encode_labels(labels);

  CvAccuracy result;
  result.classifier = classifier_name(config.kind);
  if (config.kind == ClassifierKind::knn) {
    result.params = {{"k", config.knn_k}};
  } else {
    result.params = {{"n_trees", config.forest.n_trees},
                     {"min_samples_leaf", config.forest.min_samples_leaf},
                     {"seed", config.forest.seed}};
  }

  for (std::size_t f = 0; f < folds.k_folds; ++f) {
    const auto test_ids = folds.test_indices(f);
    const auto train_ids = folds.train_indices(f);
    if (test_ids.empty()) throw ConfigError("fold " + std::to_string(f) + " is empty");
    std::vector<std::size_t> train_labels;
    train_labels.reserve(train_ids.size());
    for (auto i : train_ids) train_labels.push_back(coded.codes[i]);
    const Matrix train = embedding.select_rows(train_ids);
    const Matrix test = embedding.select_rows(test_ids);

    std::vector<std::size_t> predicted;
    if (config.kind == ClassifierKind::knn) {
      predicted = knn_predict(train, train_labels, test, std::min(config.knn_k, train.rows()));
    } else {
      RandomForestParams forest = config.forest;
      forest.seed = derive_seed(config.forest.seed, 1, f);
      predicted = rf_predict(train, train_labels, test, forest);
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test_ids.size(); ++i) correct += predicted[i] == coded.codes[test_ids[i]] ? 1 : 0;
    result.per_fold.push_back(static_cast<double>(correct) / static_cast<double>(test_ids.size()));
  }
  result.mean_accuracy = std::accumulate(result.per_fold.begin(), result.per_fold.end(), 0.0) /
                         static_cast<double>(result.per_fold.size());
  return result;
}

void to_json(nlohmann::json& j, const CvAccuracy& r) {
  j = nlohmann::json{{"classifier", r.classifier},
                     {"mean_accuracy", r.mean_accuracy},
                     {"per_fold", r.per_fold},
                     {"params", r.params}};
}

}  // namespace gpmal
