#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpmal/classify.hpp"
#include "gpmal/dataset.hpp"
#include "gpmal/evolve.hpp"
#include "gpmal/metrics.hpp"

namespace gpmal {

struct ExperimentConfig {
  std::filesystem::path dataset;
  std::string label_column = "class";      ///< header name, or a 0-based index as digits
  std::vector<std::size_t> d_values{2};
  std::vector<std::size_t> k_values{30};
  EvolutionConfig evolution;               ///< d, k and seed are filled per run
  std::size_t repeats = 30;
  std::uint64_t base_seed = 0;
  std::filesystem::path out_dir = "results";
  ClassifierConfig classifier;
  std::size_t folds = 10;
  double lambda = 0.5;

  /// Throws ConfigError on empty sweep lists or a missing dataset file.
  void validate() const;
};

/// Unknown keys are rejected so typos surface instead of being ignored.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
void to_json(nlohmann::json& j, const ExperimentConfig& c);
void to_json(nlohmann::json& j, const EvolutionConfig& c);

/// Reads and min-max scales the configured dataset.
Dataset load_experiment_dataset(const ExperimentConfig& config);

struct RunRecord {
  std::size_t d = 0;
  std::size_t k = 0;
  std::size_t repeat = 0;
  std::filesystem::path directory;
  RunResult result;
};

/// Relative directory of one (d, K, repeat) cell.
std::filesystem::path run_directory(std::size_t d, std::size_t k, std::size_t repeat);

/// Runs every (d, K, repeat) cell with seed base_seed + repeat and writes
/// result.json, embedding.csv, model.gp and history.csv to each run
/// directory. Progress lines go to `progress` when given.
std::vector<RunRecord> cmd_evolve(const ExperimentConfig& config, std::ostream* progress = nullptr);

/// Cross-validated accuracy of an embedding file against the dataset labels.
CvAccuracy cmd_eval(const std::filesystem::path& embedding_csv, const ExperimentConfig& config);

/// Quality measures of an embedding file against the scaled dataset, using
/// the first configured K.
QualityReport cmd_metrics(const std::filesystem::path& embedding_csv, const ExperimentConfig& config);

struct SweepRow {
  std::size_t d = 0;
  std::size_t k = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double scaled_accuracy = 0.0;
};

/// Min-max scales values onto [0,1]; when all values are equal every entry
/// becomes 1.
std::vector<double> minmax_scale(const std::vector<double>& values);

/// Evolves every cell, evaluates each embedding, and writes sweep_k.csv with
/// the mean accuracy per (d, K) and its min-max scaling across K within d.
std::vector<SweepRow> cmd_sweep_k(const ExperimentConfig& config, std::ostream* progress = nullptr);

struct CompareRow {
  std::size_t d = 0;
  double gp_mean = 0.0;
  double gp_std = 0.0;
  double gp_min = 0.0;
  double gp_max = 0.0;
  double pca = 0.0;          ///< NaN when d exceeds min(n, m)
  double all_features = 0.0;
};

/// For each d: GP accuracy over repeats (first K only), PCA accuracy, and the
/// accuracy of the full scaled feature set. Writes compare.csv.
std::vector<CompareRow> cmd_compare(const ExperimentConfig& config, std::ostream* progress = nullptr);

/// Shortest round-trip decimal text.
std::string format_real(double v);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string embedding_csv(const Matrix& embedding, const std::vector<std::string>& labels);
std::string history_csv(const std::vector<GenerationStats>& history);
/// result.json body. Timing lives under its own "timing" key.
nlohmann::json result_json(const ExperimentConfig& config, const RunRecord& record);

}  // namespace gpmal
