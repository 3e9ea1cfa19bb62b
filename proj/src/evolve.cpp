#include "gpmal/evolve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "gpmal/error.hpp"
#include "gpmal/fitness.hpp"
#include "gpmal/parallel.hpp"
#include "gpmal/seed.hpp"
#include "gpmal/variation.hpp"

namespace gpmal {

void EvolutionConfig::validate() const {
  if (population_size < 2) throw ConfigError("population_size must be at least 2");
  if (elitism_count >= population_size) throw ConfigError("elitism_count must be below population_size");
  if (crossover_rate < 0.0 || mutation_rate < 0.0 || std::fabs(crossover_rate + mutation_rate - 1.0) > 1e-9)
    throw ConfigError("crossover_rate and mutation_rate must be non-negative and sum to 1");
  if (tournament_size < 1) throw ConfigError("tournament_size must be at least 1");
  if (d < 1) throw ConfigError("d must be at least 1");
  if (k < 1) throw ConfigError("K must be at least 1");
  if (min_depth < 2 || min_depth > init_max_depth || init_max_depth > max_depth)
    throw ConfigError("depths must satisfy 2 <= min_depth <= init_max_depth <= max_depth");
  hnsw.validate();
}

std::vector<Individual> initialize_population(const EvolutionConfig& config,
                                              std::size_t feature_count, Rng& rng) {
  const std::size_t ramp = config.init_max_depth - config.min_depth + 1;
  std::vector<Individual> population(config.population_size);
  for (std::size_t i = 0; i < population.size(); ++i) {
    const auto method = (i / ramp) % 2 == 0 ? InitMethod::full : InitMethod::grow;
    for (std::size_t t = 0; t < config.d; ++t) {
      const std::size_t depth = config.min_depth + (i + t) % ramp;
      population[i].trees.push_back(random_tree(rng, method, config.min_depth, depth, feature_count));
    }
  }
  return population;
}

std::size_t tournament_select(std::span<const double> fitnesses, Rng& rng,
                              std::size_t tournament_size) {
  if (fitnesses.empty()) throw ConfigError("tournament_select: empty population");
  std::uniform_int_distribution<std::size_t> pick(0, fitnesses.size() - 1);
  std::size_t winner = pick(rng);
  for (std::size_t draw = 1; draw < tournament_size; ++draw) {
    const std::size_t contender = pick(rng);
    if (fitnesses[contender] < fitnesses[winner]) winner = contender;
  }
  return winner;
}

namespace {

class Evaluator {
 public:
  Evaluator(const EvolutionConfig& config, const Matrix& features)
      : config_(config),
        columns_(features),
        input_(exact_neighbor_list(features, config.k)),
        threads_(resolve_threads(config.threads)) {}

  void evaluate(std::vector<Individual>& population, std::size_t generation) const {
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < population.size(); ++i)
      if (!population[i].fitness) pending.push_back(i);
    parallel_for(pending.size(), threads_, [&](std::size_t job) {
      const std::size_t i = pending[job];
      Individual& ind = population[i];
      if (config_.exact_neighbors) {
        ind.fitness = fitness_exact(ind, columns_, input_, config_.k);
      } else {
        // The HNSW seed depends only on the individual's slot, so a cached
        // fitness is what a re-evaluation would give.
        HnswParams params = config_.hnsw;
        params.seed = derive_seed(config_.seed, generation, i);
        ind.fitness = fitness(ind, columns_, input_, params, config_.k);
      }
    });
  }

  const FeatureColumns& columns() const { return columns_; }

 private:
  const EvolutionConfig& config_;
  FeatureColumns columns_;
  NeighborList input_;
  std::size_t threads_;
};

std::vector<double> fitness_values(const std::vector<Individual>& population) {
  std::vector<double> out;
  out.reserve(population.size());
  for (const auto& ind : population) out.push_back(*ind.fitness);
  return out;
}

}  // namespace

RunResult evolve(const EvolutionConfig& config, const Matrix& features, std::ostream* progress) {
  config.validate();
  if (features.rows() < 2 || config.k >= features.rows())
    throw ConfigError("evolve: K must be below the instance count");
  const auto started = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  };

  const std::size_t m = features.cols();
  const DepthBounds bounds{config.min_depth, config.max_depth};
  const Evaluator evaluator(config, features);
  Rng rng(config.seed);

  RunResult result;
  result.config = config;
  result.seed = config.seed;

  std::vector<Individual> population = initialize_population(config, m, rng);
  std::bernoulli_distribution use_crossover(config.crossover_rate);

  for (std::size_t generation = 0;; ++generation) {
    evaluator.evaluate(population, generation);
    const auto scores = fitness_values(population);
    const auto best_it = std::min_element(scores.begin(), scores.end());
    const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
    result.history.push_back({generation, *best_it, mean});
    if (generation == 0 || *best_it < result.best_fitness) {
      result.best = population[static_cast<std::size_t>(best_it - scores.begin())];
      result.best_fitness = *best_it;
    }
    if (progress) *progress << generation << ',' << *best_it << ',' << mean << ',' << elapsed_ms() << '\n';
    if (generation == config.generations) break;

    std::vector<std::size_t> ranking(population.size());
    std::iota(ranking.begin(), ranking.end(), 0);
    std::stable_sort(ranking.begin(), ranking.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    std::vector<Individual> next;
    next.reserve(population.size());
    for (std::size_t e = 0; e < config.elitism_count; ++e) next.push_back(population[ranking[e]]);
    while (next.size() < population.size()) {
      if (use_crossover(rng)) {
        const auto& a = population[tournament_select(scores, rng, config.tournament_size)];
        const auto& b = population[tournament_select(scores, rng, config.tournament_size)];
        auto [x, y] = crossover_all_pairs(a, b, rng, bounds);
        next.push_back(std::move(x));
        if (next.size() < population.size()) next.push_back(std::move(y));
      } else {
        const auto& parent = population[tournament_select(scores, rng, config.tournament_size)];
        next.push_back(mutate_single_tree(parent, rng, m, bounds));
      }
    }
    population = std::move(next);
  }

  result.embedding = eval_individual(result.best, evaluator.columns());
  result.elapsed_ms = elapsed_ms();
  return result;
}

RunResult evolve(const EvolutionConfig& config, const Dataset& dataset, std::ostream* progress) {
  if (!dataset.scaled) throw ConfigError("evolve: dataset must be scaled to [0,1] first");
  return evolve(config, dataset.features, progress);
}

}  // namespace gpmal
