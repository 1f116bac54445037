#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcopt/core.hpp"
#include "mcopt/search.hpp"

namespace mcopt {

enum class Guarantee { improving, arbitrary };

/// What a sub-solver sees: the whole current tuple (its own part sits at
/// `context.parts[component]`), an evaluation budget and a counter to charge.
struct SolveRequest {
  const CompositeSolution& context;
  std::size_t component;
  std::uint64_t budget;
  RunContext& counter;
};

/// Component-isolated solver: returns a new part for its own component with
/// every other component frozen.
struct SubSolver {
  std::size_t component = 0;
  Guarantee guarantee = Guarantee::improving;
  std::function<Part(const SolveRequest&)> solve;
  std::string label;
};

struct CosolverState {
  CompositeSolution incumbent;
  double value = 0.0;
  std::uint64_t round = 0;
  bool last_round_changed = true;
};

/// Observer of a single sub-solver call within a round.
using SubSolverObserver =
    std::function<void(std::size_t position, const CompositeSolution& input, const Part& output)>;

struct RoundOptions {
  std::uint64_t budget_per_call = std::numeric_limits<std::uint64_t>::max();
  RunContext* counter = nullptr;
  SubSolverObserver on_call;
};

/// One pass over `subsolvers` in order. Sub-solver i sees the parts already
/// updated this round and the previous-round parts of the rest.
///
/// Throws SubSolverContractViolation when an improving sub-solver degrades the
/// objective in its context, InvalidSolution when it returns an invalid part.
CosolverState cosolver_round(const CompositeProblem& problem, const CosolverState& state,
                             std::span<const SubSolver> subsolvers,
                             const RoundOptions& options = {});

struct CosolverOptions {
  /// Defaults to max_evaluations / (2 * component count).
  std::optional<std::uint64_t> budget_per_call;
  /// Crossover with the best-ever tuple plus mutation between rounds.
  bool perturb_with_genetic_operators = false;
  double perturbation_rate = 0.5;
  std::function<void(const CosolverState&)> on_round;
  SubSolverObserver on_call;
};

/// Repeats rounds until a stop bound trips or a fixed point is reached.
RunResult cosolver(const CompositeProblem& problem, const CompositeSolution& init,
                   std::span<const SubSolver> subsolvers, const StopCondition& stop,
                   const CosolverOptions& options = {}, std::uint64_t seed = 0);

/// Round-robin order: dependees before dependents, declared order when the
/// dependency graph is cyclic.
std::vector<std::size_t> coordination_order(const DependencyGraph& graph);

/// Reorders `subsolvers` along coordination_order().
std::vector<SubSolver> ordered_subsolvers(const DependencyGraph& graph,
                                          std::vector<SubSolver> subsolvers);

/// First-improvement descent over the component's own neighborhood.
SubSolver local_search_subsolver(std::shared_ptr<const CompositeProblem> problem,
                                 std::size_t component);

/// Exact conditional optimum by enumeration. Keeps the current part when it is
/// among the optima; otherwise returns the smallest optimal part.
SubSolver exhaustive_subsolver(std::shared_ptr<const CompositeProblem> problem,
                               std::size_t component, double enumeration_cap = 1e6);

struct ConcurrentCosolverOptions {
  /// Sub-solver invocations per worker.
  std::uint64_t calls_per_worker = 10;
  std::uint64_t budget_per_call = std::numeric_limits<std::uint64_t>::max();
};

/// Runs every sub-solver on its own worker. Workers read the latest published
/// tuple (possibly stale) and publish their part through an ordered channel;
/// the coordinator validates each published tuple and keeps the best-ever.
/// Not deterministic; round-level monotonicity is not guaranteed.
RunResult cosolver_concurrent(const CompositeProblem& problem, const CompositeSolution& init,
                              std::span<const SubSolver> subsolvers,
                              const ConcurrentCosolverOptions& options = {});

}  // namespace mcopt
