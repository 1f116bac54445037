#include "mcopt/evolutionary.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace mcopt {

std::string_view to_string(MemeticHook hook) {
  switch (hook) {
    case MemeticHook::none: return "none";
    case MemeticHook::joint_local_search: return "jls";
    case MemeticHook::cosolver: return "cosolver";
  }
  return "unknown";
}

std::optional<MemeticHook> parse_memetic_hook(std::string_view text) {
  for (auto h : {MemeticHook::none, MemeticHook::joint_local_search, MemeticHook::cosolver}) {
    if (to_string(h) == text) return h;
  }
  return std::nullopt;
}

void EaConfig::validate(const CompositeProblem& problem) const {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (population_size < 2) throw InvalidConfig("population_size must be >= 2");
  if (tournament_size < 1) throw InvalidConfig("tournament_size must be >= 1");
  if (!in_unit(crossover_rate)) throw InvalidConfig("crossover_rate must be in [0, 1]");
  if (!in_unit(mutation_rate)) throw InvalidConfig("mutation_rate must be in [0, 1]");
  if (!in_unit(memetic_probability)) throw InvalidConfig("memetic_probability must be in [0, 1]");
  if (elitism_count >= population_size) {
    throw InvalidConfig("elitism_count must be smaller than population_size");
  }
  if (memetic_hook == MemeticHook::cosolver && subsolvers.size() != problem.size()) {
    throw InvalidConfig("cosolver memetic hook needs one sub-solver per component");
  }
  if (!generations && !stop.max_evaluations && !stop.max_wall_time && !stop.max_stale_passes &&
      !stop.target_value) {
    throw InvalidConfig("evolve needs a generation count or a stop bound");
  }
}

CompositeSolution crossover_composite(const CompositeProblem& problem,
                                      const CompositeSolution& parent1,
                                      const CompositeSolution& parent2, Rng& rng) {
  CompositeSolution child;
  child.parts.reserve(problem.size());
  for (std::size_t i = 0; i < problem.size(); ++i) {
    const auto& op = problem.component(i).crossover;
    if (!op) {
      throw NoOperatorRegistered("component '" + problem.component(i).name +
                                 "' has no crossover operator");
    }
    child.parts.push_back(op(parent1.parts.at(i), parent2.parts.at(i), rng));
  }
  return child;
}

MutationOutcome mutate_composite(const CompositeProblem& problem, const CompositeSolution& sol,
                                 double rate, Rng& rng) {
  MutationOutcome out{sol, 0};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < problem.size(); ++i) {
    if (unit(rng) < rate) {
      ++out.moves_attempted;
      out.solution.parts[i] = random_move(problem.component(i), out.solution.parts[i], rng);
    }
  }
  return out;
}

std::size_t tournament_select(const CompositeProblem& problem,
                              std::span<const Individual> population, std::size_t size, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, population.size() - 1);
  std::size_t winner = pick(rng);
  for (std::size_t t = 1; t < size; ++t) {
    const std::size_t challenger = pick(rng);
    const double a = population[challenger].fitness;
    const double b = population[winner].fitness;
    if (problem.better(a, b) || (a == b && challenger < winner)) winner = challenger;
  }
  return winner;
}

namespace {

struct OffspringPlan {
  std::size_t parent1;
  std::size_t parent2;
  std::uint64_t seed;
};

struct Offspring {
  Individual individual;
  std::uint64_t evaluations = 0;
};

/// Local descent from an already evaluated tuple.
std::pair<CompositeSolution, double> memetic_local_search(const CompositeProblem& problem,
                                                          CompositeSolution sol, double value,
                                                          std::uint64_t budget,
                                                          std::uint64_t& spent) {
  StopCondition stop;
  stop.max_evaluations = budget;
  stop.max_stale_passes = 1;
  RunTracker tracker(problem, stop, 0);
  tracker.offer(sol, value);
  detail::local_search(tracker, sol, value, LocalSearchPolicy::first_improvement_restart, 1);
  spent += tracker.evaluations();
  return {tracker.best(), tracker.best_value()};
}

/// Cosolver rounds until a fixed point or the budget is spent.
std::pair<CompositeSolution, double> memetic_cosolver(const CompositeProblem& problem,
                                                      std::span<const SubSolver> subsolvers,
                                                      CompositeSolution sol, double value,
                                                      std::uint64_t budget, std::uint64_t& spent) {
  RunContext counter;
  RoundOptions options;
  options.counter = &counter;
  options.budget_per_call = std::max<std::uint64_t>(1, budget / (2 * problem.size()));
  CosolverState state{std::move(sol), value, 0, true};
  while (state.last_round_changed && counter.evaluations.load() < budget) {
    state = cosolver_round(problem, state, subsolvers, options);
  }
  spent += counter.evaluations.load();
  return {std::move(state.incumbent), state.value};
}

}  // namespace

RunResult evolve(const CompositeProblem& problem, const EaConfig& config, std::uint64_t seed,
                 const GenerationObserver& observer) {
  config.validate(problem);
  const std::vector<SubSolver> subsolvers =
      config.memetic_hook == MemeticHook::cosolver
          ? ordered_subsolvers(problem.dependencies(), config.subsolvers)
          : std::vector<SubSolver>{};

  Rng rng(seed);
  RunTracker tracker(problem, config.stop, seed);
  auto& result = tracker.result();

  std::vector<Individual> population;
  population.reserve(config.population_size);
  for (std::size_t i = 0; i < config.population_size; ++i) {
    Individual ind;
    ind.genome = initial_solution(problem, rng());
    ind.fitness = tracker.evaluate(ind.genome);
    ind.clean = true;
    tracker.offer(ind.genome, ind.fitness);
    population.push_back(std::move(ind));
  }
  if (observer) observer(0, population);

  auto make_offspring = [&](const OffspringPlan& plan, std::uint64_t memetic_budget) {
    Rng local(plan.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Offspring out;
    CompositeSolution child = population[plan.parent1].genome;
    if (unit(local) < config.crossover_rate) {
      child = crossover_composite(problem, population[plan.parent1].genome,
                                  population[plan.parent2].genome, local);
    }
    child = mutate_composite(problem, child, config.mutation_rate, local).solution;
    double value = evaluate(problem, child);
    out.evaluations = 1;
    if (config.memetic_hook != MemeticHook::none && memetic_budget > 0 &&
        unit(local) < config.memetic_probability) {
      auto improved =
          config.memetic_hook == MemeticHook::joint_local_search
              ? memetic_local_search(problem, std::move(child), value, memetic_budget,
                                     out.evaluations)
              : memetic_cosolver(problem, subsolvers, std::move(child), value, memetic_budget,
                                 out.evaluations);
      child = std::move(improved.first);
      value = improved.second;
    }
    out.individual = Individual{std::move(child), value, true, 0};
    return out;
  };

  std::uint64_t generation = 0;
  std::uint64_t stale = 0;
  const std::size_t offspring_count = config.population_size - config.elitism_count;
  while (true) {
    if (config.generations && generation >= *config.generations) {
      return tracker.finish(StopReason::generations);
    }
    if (auto reason = tracker.budget_tripped()) return tracker.finish(*reason);

    std::vector<std::size_t> ranking(population.size());
    std::iota(ranking.begin(), ranking.end(), 0);
    std::stable_sort(ranking.begin(), ranking.end(), [&](std::size_t a, std::size_t b) {
      return problem.better(population[a].fitness, population[b].fitness);
    });

    std::vector<Individual> next;
    next.reserve(config.population_size);
    for (std::size_t e = 0; e < config.elitism_count; ++e) {
      next.push_back(population[ranking[e]]);
      ++next.back().age;
    }

    std::vector<OffspringPlan> plans(offspring_count);
    for (auto& plan : plans) {
      plan.parent1 = tournament_select(problem, population, config.tournament_size, rng);
      plan.parent2 = tournament_select(problem, population, config.tournament_size, rng);
      plan.seed = rng();
    }
    std::uint64_t memetic_budget = config.memetic_budget;
    if (auto left = tracker.remaining()) {
      memetic_budget = std::min<std::uint64_t>(memetic_budget, *left / offspring_count);
    }

    std::vector<Offspring> offspring(offspring_count);
    const unsigned workers = std::min<std::size_t>(std::max(1U, config.threads), offspring_count);
    if (workers <= 1) {
      for (std::size_t j = 0; j < offspring_count; ++j) {
        offspring[j] = make_offspring(plans[j], memetic_budget);
      }
    } else {
      std::exception_ptr failure;
      std::mutex failure_mutex;
      {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
          pool.emplace_back([&, w] {
            try {
              for (std::size_t j = w; j < offspring_count; j += workers) {
                offspring[j] = make_offspring(plans[j], memetic_budget);
              }
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
            }
          });
        }
      }
      if (failure) std::rethrow_exception(failure);
    }

    bool improved = false;
    for (auto& child : offspring) {
      tracker.charge(child.evaluations);
      improved = tracker.offer(child.individual.genome, child.individual.fitness) || improved;
      next.push_back(std::move(child.individual));
    }
    population = std::move(next);
    ++generation;
    ++result.iterations;

    double generation_best = population.front().fitness;
    for (const auto& ind : population) {
      if (problem.better(ind.fitness, generation_best)) generation_best = ind.fitness;
    }
    result.round_values.push_back(generation_best);
    if (observer) observer(generation, population);

    if (improved) {
      stale = 0;
    } else if (config.stop.max_stale_passes && ++stale >= *config.stop.max_stale_passes) {
      return tracker.finish(StopReason::stale);
    }
  }
}

}  // namespace mcopt
