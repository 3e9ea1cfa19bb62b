// Command-line front end: evolve, eval, metrics, sweep-k, compare.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gpmal/error.hpp"
#include "gpmal/experiment.hpp"

namespace {

using gpmal::ExperimentConfig;

struct Flags {
  std::string config;
  std::string dataset;
  std::string label_col;
  std::vector<std::size_t> d;
  std::vector<std::size_t> k;
  std::optional<std::size_t> pop;
  std::optional<std::size_t> gens;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repeats;
  std::string out;
  std::string classifier;
  std::optional<std::size_t> ef_search;
  bool exact_nn = false;
  std::optional<double> lambda;
  bool quiet = false;
  std::string embedding;
};

void add_common(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "JSON experiment config; flags override its values");
  app.add_option("--dataset", f.dataset, "CSV dataset with a header row");
  app.add_option("--label-col", f.label_col, "label column name or 0-based index");
  app.add_option("--d", f.d, "embedding dimensionality (repeatable)")->delimiter(',');
  app.add_option("--k", f.k, "neighbourhood size (repeatable)")->delimiter(',');
  app.add_option("--seed", f.seed, "base seed");
  app.add_option("--out", f.out, "output directory");
  app.add_option("--classifier", f.classifier, "knn or rf")->check(CLI::IsMember({"knn", "rf", "random_forest"}));
}

void add_evolution(CLI::App& app, Flags& f) {
  app.add_option("--pop", f.pop, "population size");
  app.add_option("--gens", f.gens, "generations");
  app.add_option("--repeats", f.repeats, "independent runs per cell");
  app.add_option("--ef-search", f.ef_search, "HNSW search width (0 picks max(2K, 64))");
  app.add_flag("--exact-nn", f.exact_nn, "score fitness with brute-force neighbours");
  app.add_flag("--quiet", f.quiet, "no per-generation progress on stderr");
}

ExperimentConfig resolve(const Flags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : gpmal::load_experiment_config(f.config);
  if (!f.dataset.empty()) c.dataset = f.dataset;
  if (!f.label_col.empty()) c.label_column = f.label_col;
  if (!f.d.empty()) c.d_values = f.d;
  if (!f.k.empty()) c.k_values = f.k;
  if (f.pop) c.evolution.population_size = *f.pop;
  if (f.gens) c.evolution.generations = *f.gens;
  if (f.seed) c.base_seed = *f.seed;
  if (f.repeats) c.repeats = *f.repeats;
  if (!f.out.empty()) c.out_dir = f.out;
  if (!f.classifier.empty()) c.classifier.kind = gpmal::parse_classifier(f.classifier);
  if (f.ef_search) c.evolution.hnsw.ef_search = *f.ef_search;
  if (f.exact_nn) c.evolution.exact_neighbors = true;
  if (f.lambda) c.lambda = *f.lambda;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Genetic-programming manifold learning"};
  app.require_subcommand(1);
  Flags f;

  auto* evolve = app.add_subcommand("evolve", "evolve embeddings and write per-run artefacts");
  add_common(*evolve, f);
  add_evolution(*evolve, f);

  auto* eval = app.add_subcommand("eval", "cross-validated accuracy of an embedding");
  add_common(*eval, f);
  eval->add_option("embedding", f.embedding, "embedding CSV")->required();

  auto* metrics = app.add_subcommand("metrics", "neighbourhood quality measures of an embedding");
  add_common(*metrics, f);
  metrics->add_option("embedding", f.embedding, "embedding CSV")->required();
  metrics->add_option("--lambda", f.lambda, "trustworthiness/continuity weighting in [0,1]");

  auto* sweep = app.add_subcommand("sweep-k", "accuracy as a function of K");
  add_common(*sweep, f);
  add_evolution(*sweep, f);

  auto* compare = app.add_subcommand("compare", "GP against PCA and all features, per d");
  add_common(*compare, f);
  add_evolution(*compare, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const ExperimentConfig config = resolve(f);
    std::ostream* progress = f.quiet ? nullptr : &std::cerr;
    if (evolve->parsed()) {
      const auto records = gpmal::cmd_evolve(config, progress);
      for (const auto& r : records)
        std::cout << r.directory.string() << " best_fitness=" << r.result.best_fitness << '\n';
    } else if (eval->parsed()) {
      std::cout << nlohmann::json(gpmal::cmd_eval(f.embedding, config)).dump(2) << '\n';
    } else if (metrics->parsed()) {
      std::cout << nlohmann::json(gpmal::cmd_metrics(f.embedding, config)).dump(2) << '\n';
    } else if (sweep->parsed()) {
      gpmal::cmd_sweep_k(config, progress);
      std::cout << (config.out_dir / "sweep_k.csv").string() << '\n';
    } else if (compare->parsed()) {
      gpmal::cmd_compare(config, progress);
      std::cout << (config.out_dir / "compare.csv").string() << '\n';
    }
  } catch (const gpmal::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const gpmal::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const gpmal::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
