#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gpmal/dataset.hpp"
#include "gpmal/hnsw.hpp"
#include "gpmal/tree.hpp"

namespace gpmal {

struct EvolutionConfig {
  std::size_t population_size = 100;
  std::size_t generations = 1000;
  double crossover_rate = 0.8;
  double mutation_rate = 0.2;
  std::size_t elitism_count = 10;
  std::size_t tournament_size = 7;
  std::size_t d = 2;                 ///< trees per individual
  std::size_t k = 30;                ///< neighbourhood size
  std::size_t min_depth = 2;
  std::size_t max_depth = 14;
  std::size_t init_max_depth = 6;    ///< ramped half-and-half spans [min_depth, init_max_depth]
  std::uint64_t seed = 0;
  HnswParams hnsw;
  bool exact_neighbors = false;      ///< score with brute-force neighbours instead of HNSW
  std::size_t threads = 0;           ///< 0: see resolve_threads()

  /// Throws ConfigError when the configuration breaks an invariant.
  void validate() const;
};

struct GenerationStats {
  std::size_t generation = 0;
  double best = 0.0;
  double mean = 0.0;
};

struct RunResult {
  Individual best;
  double best_fitness = 0.0;
  std::vector<GenerationStats> history;  ///< generation 0 included
  Matrix embedding;                      ///< best individual on every instance
  EvolutionConfig config;
  std::uint64_t seed = 0;
  double elapsed_ms = 0.0;
};

/// Ramped half-and-half: depths cycle through [min_depth, init_max_depth] and
/// the method alternates between full and grow.
std::vector<Individual> initialize_population(const EvolutionConfig& config,
                                              std::size_t feature_count, Rng& rng);

/// Index of the lowest-fitness individual among `tournament_size` uniform
/// draws with replacement; ties go to the earliest draw.
std::size_t tournament_select(std::span<const double> fitnesses, Rng& rng,
                              std::size_t tournament_size);

/// Generational GP run. `features` must be scaled; the input-space neighbour
/// list is computed once, exactly. When `progress` is set, one line
/// "gen,best_fitness,mean_fitness,elapsed_ms" is written per generation.
RunResult evolve(const EvolutionConfig& config, const Matrix& features,
                 std::ostream* progress = nullptr);
RunResult evolve(const EvolutionConfig& config, const Dataset& dataset,
                 std::ostream* progress = nullptr);

}  // namespace gpmal
