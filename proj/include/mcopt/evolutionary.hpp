#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mcopt/core.hpp"
#include "mcopt/cosolver.hpp"
#include "mcopt/search.hpp"

namespace mcopt {

enum class MemeticHook { none, joint_local_search, cosolver };

std::string_view to_string(MemeticHook hook);
std::optional<MemeticHook> parse_memetic_hook(std::string_view text);

struct EaConfig {
  std::size_t population_size = 20;
  std::size_t tournament_size = 2;
  double crossover_rate = 0.9;
  double mutation_rate = 0.2;
  std::size_t elitism_count = 1;

  MemeticHook memetic_hook = MemeticHook::none;
  /// Evaluations granted to one application of the hook.
  std::uint64_t memetic_budget = 200;
  double memetic_probability = 1.0;
  /// Used by the cosolver hook, one per component.
  std::vector<SubSolver> subsolvers;

  std::optional<std::uint64_t> generations;
  /// max_stale_passes counts generations without best-ever improvement.
  StopCondition stop;
  /// Workers for offspring construction; results are reduced in index order.
  unsigned threads = 1;

  /// Throws InvalidConfig.
  void validate(const CompositeProblem& problem) const;
};

struct Individual {
  CompositeSolution genome;
  double fitness = 0.0;
  bool clean = false;
  std::uint64_t age = 0;
};

/// Per-component registered crossover. Throws NoOperatorRegistered.
CompositeSolution crossover_composite(const CompositeProblem& problem,
                                      const CompositeSolution& parent1,
                                      const CompositeSolution& parent2, Rng& rng);

struct MutationOutcome {
  CompositeSolution solution;
  std::size_t moves_attempted = 0;
};

/// With probability `rate` per component, applies one random neighborhood move.
MutationOutcome mutate_composite(const CompositeProblem& problem, const CompositeSolution& sol,
                                 double rate, Rng& rng);

/// Index of the tournament winner (ties go to the lower index).
std::size_t tournament_select(const CompositeProblem& problem,
                              std::span<const Individual> population, std::size_t size, Rng& rng);

using GenerationObserver =
    std::function<void(std::uint64_t generation, std::span<const Individual> population)>;

/// Generational GA with tournament selection, elitism and an optional memetic
/// improvement of offspring.
RunResult evolve(const CompositeProblem& problem, const EaConfig& config, std::uint64_t seed,
                 const GenerationObserver& observer = {});

}  // namespace mcopt
