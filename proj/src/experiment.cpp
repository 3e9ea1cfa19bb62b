#include "gpmal/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "gpmal/error.hpp"
#include "gpmal/pca.hpp"
#include "gpmal/tree_io.hpp"

namespace gpmal {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (d_values.empty()) throw ConfigError("d list is empty");
  if (k_values.empty()) throw ConfigError("K list is empty");
  if (std::find(d_values.begin(), d_values.end(), 0) != d_values.end()) throw ConfigError("d must be positive");
  if (std::find(k_values.begin(), k_values.end(), 0) != k_values.end()) throw ConfigError("K must be positive");
  if (repeats < 1) throw ConfigError("repeats must be at least 1");
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0,1]");
  if (dataset.empty()) throw ConfigError("no dataset given");
  if (!std::filesystem::exists(dataset)) throw ConfigError("dataset not found: " + dataset.string());
  EvolutionConfig probe = evolution;
  probe.d = d_values.front();
  probe.k = k_values.front();
  probe.validate();
}

namespace {

std::vector<std::size_t> size_list(const json& v, const char* key) {
  if (v.is_number_unsigned()) return {v.get<std::size_t>()};
  if (v.is_array() && !v.empty()) return v.get<std::vector<std::size_t>>();
  throw ConfigError(std::string("'") + key + "' must be a positive integer or a non-empty list");
}

template <typename T>
void read(const json& obj, const char* key, T& target) {
  if (const auto it = obj.find(key); it != obj.end()) target = it->get<T>();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
      throw ConfigError("unknown key '" + key + "' in " + where);
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j, {"dataset", "label_column", "d", "k", "repeats", "seed", "out", "classifier", "knn_k",
                     "rf_trees", "folds", "lambda", "evolution"},
                 "config");
  ExperimentConfig c;
  try {
    if (const auto it = j.find("dataset"); it != j.end()) c.dataset = it->get<std::string>();
    if (const auto it = j.find("label_column"); it != j.end())
      c.label_column = it->is_number_unsigned() ? std::to_string(it->get<std::size_t>()) : it->get<std::string>();
    if (const auto it = j.find("d"); it != j.end()) c.d_values = size_list(*it, "d");
    if (const auto it = j.find("k"); it != j.end()) c.k_values = size_list(*it, "k");
    read(j, "repeats", c.repeats);
    read(j, "seed", c.base_seed);
    if (const auto it = j.find("out"); it != j.end()) c.out_dir = it->get<std::string>();
    if (const auto it = j.find("classifier"); it != j.end()) c.classifier.kind = parse_classifier(it->get<std::string>());
    read(j, "knn_k", c.classifier.knn_k);
    read(j, "rf_trees", c.classifier.forest.n_trees);
    read(j, "folds", c.folds);
    read(j, "lambda", c.lambda);
    if (const auto it = j.find("evolution"); it != j.end()) {
      const json& e = *it;
      reject_unknown(e, {"population_size", "generations", "crossover_rate", "mutation_rate", "elitism_count",
                         "tournament_size", "min_depth", "max_depth", "init_max_depth", "exact_nn", "threads",
                         "hnsw"},
                     "evolution");
      auto& ev = c.evolution;
      read(e, "population_size", ev.population_size);
      read(e, "generations", ev.generations);
      read(e, "crossover_rate", ev.crossover_rate);
      read(e, "mutation_rate", ev.mutation_rate);
      read(e, "elitism_count", ev.elitism_count);
      read(e, "tournament_size", ev.tournament_size);
      read(e, "min_depth", ev.min_depth);
      read(e, "max_depth", ev.max_depth);
      read(e, "init_max_depth", ev.init_max_depth);
      read(e, "exact_nn", ev.exact_neighbors);
      read(e, "threads", ev.threads);
      if (const auto h = e.find("hnsw"); h != e.end()) {
        reject_unknown(*h, {"M", "ef_construction", "ef_search"}, "evolution.hnsw");
        read(*h, "M", ev.hnsw.M);
        read(*h, "ef_construction", ev.hnsw.ef_construction);
        read(*h, "ef_search", ev.hnsw.ef_search);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return experiment_config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

void to_json(json& j, const EvolutionConfig& c) {
  j = json{{"population_size", c.population_size},
           {"generations", c.generations},
           {"crossover_rate", c.crossover_rate},
           {"mutation_rate", c.mutation_rate},
           {"elitism_count", c.elitism_count},
           {"tournament_size", c.tournament_size},
           {"d", c.d},
           {"k", c.k},
           {"min_depth", c.min_depth},
           {"max_depth", c.max_depth},
           {"init_max_depth", c.init_max_depth},
           {"seed", c.seed},
           {"exact_nn", c.exact_neighbors},
           {"hnsw", {{"M", c.hnsw.M}, {"ef_construction", c.hnsw.ef_construction}, {"ef_search", c.hnsw.ef_search}}}};
}

void to_json(json& j, const ExperimentConfig& c) {
  json evolution = c.evolution;
  for (const char* per_run : {"d", "k", "seed"}) evolution.erase(per_run);
  j = json{{"dataset", c.dataset.string()},
           {"label_column", c.label_column},
           {"d", c.d_values},
           {"k", c.k_values},
           {"repeats", c.repeats},
           {"seed", c.base_seed},
           {"out", c.out_dir.string()},
           {"classifier", classifier_name(c.classifier.kind)},
           {"knn_k", c.classifier.knn_k},
           {"rf_trees", c.classifier.forest.n_trees},
           {"folds", c.folds},
           {"lambda", c.lambda},
           {"evolution", evolution}};
}

Dataset load_experiment_dataset(const ExperimentConfig& config) {
  if (!std::filesystem::exists(config.dataset)) throw DataError("dataset not found: " + config.dataset.string());
  return scale_min_max(load_csv(config.dataset, parse_label_column(config.label_column)));
}

std::filesystem::path run_directory(std::size_t d, std::size_t k, std::size_t repeat) {
  char run[32];
  std::snprintf(run, sizeof run, "run_%03zu", repeat);
  return std::filesystem::path("d" + std::to_string(d) + "_k" + std::to_string(k)) / run;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "";
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, v);
  return std::string(buffer, end);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto temporary = path;
  temporary += ".tmp";
  {
    std::ofstream out(temporary, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + temporary.string());
    out << contents;
    if (!out.flush()) throw DataError("cannot write " + temporary.string());
  }
  std::filesystem::rename(temporary, path);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string embedding_csv(const Matrix& embedding, const std::vector<std::string>& labels) {
  std::ostringstream out;
  for (std::size_t c = 0; c < embedding.cols(); ++c) out << "dim_" << c << ',';
  out << "label\n";
  for (std::size_t r = 0; r < embedding.rows(); ++r) {
    for (std::size_t c = 0; c < embedding.cols(); ++c) out << format_real(embedding(r, c)) << ',';
    out << csv_field(labels.at(r)) << '\n';
  }
  return out.str();
}

std::string history_csv(const std::vector<GenerationStats>& history) {
  std::ostringstream out;
  out << "generation,best_fitness,mean_fitness\n";
  for (const auto& g : history) out << g.generation << ',' << format_real(g.best) << ',' << format_real(g.mean) << '\n';
  return out.str();
}

json result_json(const ExperimentConfig& config, const RunRecord& record) {
  std::vector<std::string> trees;
  for (const auto& t : record.result.best.trees) trees.push_back(to_prefix_string(t));
  json history = json::array();
  for (const auto& g : record.result.history) history.push_back({g.best, g.mean});
  return json{{"config", config},
              {"evolution", record.result.config},
              {"d", record.d},
              {"k", record.k},
              {"repeat", record.repeat},
              {"seed", record.result.seed},
              {"best_fitness", record.result.best_fitness},
              {"best", trees},
              {"history", history},
              {"timing", {{"elapsed_ms", record.result.elapsed_ms}}}};
}

std::vector<RunRecord> cmd_evolve(const ExperimentConfig& config, std::ostream* progress) {
  config.validate();
  const Dataset data = load_experiment_dataset(config);
  std::vector<RunRecord> records;
  for (std::size_t d : config.d_values) {
    for (std::size_t k : config.k_values) {
      if (k >= data.n()) throw ConfigError("K=" + std::to_string(k) + " needs more than " + std::to_string(data.n()) + " instances");
      for (std::size_t repeat = 0; repeat < config.repeats; ++repeat) {
        EvolutionConfig ev = config.evolution;
        ev.d = d;
        ev.k = k;
        ev.seed = config.base_seed + repeat;
        if (progress) *progress << "# d=" << d << " k=" << k << " repeat=" << repeat << " seed=" << ev.seed << '\n';

        RunRecord record{d, k, repeat, config.out_dir / run_directory(d, k, repeat), evolve(ev, data, progress)};
        write_file_atomic(record.directory / "result.json", result_json(config, record).dump(2) + "\n");
        write_file_atomic(record.directory / "embedding.csv", embedding_csv(record.result.embedding, data.labels));
        write_file_atomic(record.directory / "model.gp", format_model(record.result.best));
        write_file_atomic(record.directory / "history.csv", history_csv(record.result.history));
        records.push_back(std::move(record));
      }
    }
  }
  return records;
}

CvAccuracy cmd_eval(const std::filesystem::path& embedding_csv_path, const ExperimentConfig& config) {
  const Dataset data = load_experiment_dataset(config);
  const Matrix embedding = load_embedding_csv(embedding_csv_path);
  if (embedding.rows() != data.n())
    throw DataError("embedding has " + std::to_string(embedding.rows()) + " rows but the dataset has " +
                    std::to_string(data.n()));
  return cv_accuracy(embedding, data.labels, stratified_folds(data, config.folds, config.base_seed), config.classifier);
}

QualityReport cmd_metrics(const std::filesystem::path& embedding_csv_path, const ExperimentConfig& config) {
  const Dataset data = load_experiment_dataset(config);
  const Matrix embedding = load_embedding_csv(embedding_csv_path);
  if (embedding.rows() != data.n())
    throw DataError("embedding has " + std::to_string(embedding.rows()) + " rows but the dataset has " +
                    std::to_string(data.n()));
  return quality_report(data.features, embedding, config.k_values.front(), config.lambda);
}

std::vector<double> minmax_scale(const std::vector<double>& values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(*hi == *lo ? 1.0 : (v - *lo) / (*hi - *lo));
  return out;
}

namespace {

struct Summary {
  double mean = 0.0, std = 0.0, min = 0.0, max = 0.0;
};

Summary summarise(const std::vector<double>& v) {
  Summary s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  return s;
}

}  // namespace

std::vector<SweepRow> cmd_sweep_k(const ExperimentConfig& config, std::ostream* progress) {
  const auto records = cmd_evolve(config, progress);
  const Dataset data = load_experiment_dataset(config);
  const auto folds = stratified_folds(data, config.folds, config.base_seed);

  std::vector<SweepRow> rows;
  for (std::size_t d : config.d_values) {
    const std::size_t first = rows.size();
    for (std::size_t k : config.k_values) {
      std::vector<double> accuracies;
      for (const auto& r : records)
        if (r.d == d && r.k == k)
          accuracies.push_back(cv_accuracy(r.result.embedding, data.labels, folds, config.classifier).mean_accuracy);
      const auto s = summarise(accuracies);
      rows.push_back({d, k, s.mean, s.std, 0.0});
    }
    std::vector<double> means;
    for (std::size_t i = first; i < rows.size(); ++i) means.push_back(rows[i].mean_accuracy);
    const auto scaled = minmax_scale(means);
    for (std::size_t i = first; i < rows.size(); ++i) rows[i].scaled_accuracy = scaled[i - first];
  }

  std::ostringstream csv;
  csv << "d,k,n,mean_accuracy,std_accuracy,scaled_accuracy\n";
  for (const auto& r : rows)
    csv << r.d << ',' << r.k << ',' << data.n() << ',' << format_real(r.mean_accuracy) << ','
        << format_real(r.std_accuracy) << ',' << format_real(r.scaled_accuracy) << '\n';
  write_file_atomic(config.out_dir / "sweep_k.csv", csv.str());
  return rows;
}

std::vector<CompareRow> cmd_compare(const ExperimentConfig& config, std::ostream* progress) {
  ExperimentConfig single_k = config;
  single_k.k_values = {config.k_values.front()};
  const auto records = cmd_evolve(single_k, progress);
  const Dataset data = load_experiment_dataset(config);
  const auto folds = stratified_folds(data, config.folds, config.base_seed);
  const double all_features = cv_accuracy(data.features, data.labels, folds, config.classifier).mean_accuracy;

  std::vector<CompareRow> rows;
  for (std::size_t d : config.d_values) {
    std::vector<double> accuracies;
    for (const auto& r : records)
      if (r.d == d) accuracies.push_back(cv_accuracy(r.result.embedding, data.labels, folds, config.classifier).mean_accuracy);
    const auto s = summarise(accuracies);
    double pca = std::numeric_limits<double>::quiet_NaN();
    if (d <= std::min(data.n(), data.m())) {
      const auto model = pca_fit(data.features, d);
      pca = cv_accuracy(pca_transform(model, data.features), data.labels, folds, config.classifier).mean_accuracy;
    }
    rows.push_back({d, s.mean, s.std, s.min, s.max, pca, all_features});
  }

  std::ostringstream csv;
  csv << "d,gp_mean,gp_std,gp_min,gp_max,pca,all_features\n";
  for (const auto& r : rows)
    csv << r.d << ',' << format_real(r.gp_mean) << ',' << format_real(r.gp_std) << ',' << format_real(r.gp_min)
        << ',' << format_real(r.gp_max) << ',' << format_real(r.pca) << ',' << format_real(r.all_features) << '\n';
  write_file_atomic(config.out_dir / "compare.csv", csv.str());
  return rows;
}

}  // namespace gpmal
