#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "mcopt/core.hpp"

namespace mcopt {

/// Disjunction of budget bounds; a run halts as soon as any bound trips.
struct StopCondition {
  std::optional<std::uint64_t> max_evaluations;
  std::optional<std::chrono::milliseconds> max_wall_time;
  std::optional<std::uint64_t> max_stale_passes;
  /// Raw objective value that counts as good enough.
  std::optional<double> target_value;

  /// One stale pass plus a 10^6-evaluation safety cap.
  static StopCondition defaults();
  /// Throws InvalidStopCondition when no bound is set.
  void validate() const;
};

enum class StopReason { stale, evaluations, wall_time, target, fixed_point, generations, restarts, completed };

std::string_view to_string(StopReason reason);

struct TrajectoryPoint {
  std::uint64_t evaluation = 0;
  double value = 0.0;     // raw objective of the incumbent
  double wall_ms = 0.0;   // elapsed time, never part of deterministic output
};

struct RunResult {
  CompositeSolution best;
  double best_value = 0.0;
  std::vector<TrajectoryPoint> trajectory;
  std::uint64_t evaluations = 0;
  std::uint64_t iterations = 0;
  std::uint64_t seed = 0;
  std::chrono::duration<double> wall_time{0};
  StopReason stop_reason = StopReason::stale;
  std::uint64_t accepted_moves = 0;
  std::uint64_t accepted_worsening = 0;
  /// Incumbent value at the end of every round/generation (cosolver, EA).
  std::vector<double> round_values;
};

/// Budget, timing and best-ever bookkeeping shared by every search.
class RunTracker {
 public:
  RunTracker(const CompositeProblem& problem, StopCondition stop, std::uint64_t seed);

  [[nodiscard]] const CompositeProblem& problem() const { return problem_; }
  [[nodiscard]] const StopCondition& stop() const { return stop_; }
  [[nodiscard]] RunContext& context() { return context_; }
  [[nodiscard]] std::uint64_t evaluations() const { return context_.evaluations.load(); }
  /// Evaluations left before the cap, or std::nullopt when uncapped.
  [[nodiscard]] std::optional<std::uint64_t> remaining() const;

  double evaluate(const CompositeSolution& sol);
  /// Adds evaluations spent elsewhere (sub-runs).
  void charge(std::uint64_t evaluations);

  /// Records `sol` when strictly better than the best so far.
  bool offer(const CompositeSolution& sol, double value);
  [[nodiscard]] bool has_best() const { return has_best_; }
  [[nodiscard]] double best_value() const { return best_value_; }
  [[nodiscard]] const CompositeSolution& best() const { return best_; }

  /// Evaluation budget, wall time or target tripped.
  [[nodiscard]] std::optional<StopReason> budget_tripped() const;
  [[nodiscard]] double elapsed_ms() const;

  RunResult& result() { return result_; }
  RunResult finish(StopReason reason);

 private:
  const CompositeProblem& problem_;
  StopCondition stop_;
  RunContext context_;
  std::chrono::steady_clock::time_point start_;
  bool has_best_ = false;
  double best_value_ = 0.0;
  CompositeSolution best_;
  RunResult result_;
};

enum class LocalSearchPolicy { first_improvement_restart, best_improvement_pass, paper_literal };

std::string_view to_string(LocalSearchPolicy policy);
std::optional<LocalSearchPolicy> parse_local_search_policy(std::string_view text);

/// Joint neighborhood of `sol`: one factor per component, in component order.
JointNeighborhood joint_neighborhood_of(const CompositeProblem& problem,
                                        const CompositeSolution& sol);

/// Local search over the Cartesian product of the component neighborhoods.
///
/// Only strictly improving tuples are accepted. A pass is one enumeration of
/// the joint neighborhood; under first-improvement-restart a pass ends at the
/// first accepted tuple. A pass that accepts nothing is stale.
RunResult joint_local_search(const CompositeProblem& problem, const CompositeSolution& init,
                             const StopCondition& stop,
                             LocalSearchPolicy policy = LocalSearchPolicy::first_improvement_restart,
                             std::uint64_t seed = 0);

namespace detail {

/// Runs local search from `incumbent` (value `value`) using `tracker` for
/// budget and best-ever bookkeeping. Returns the reason it stopped.
StopReason local_search(RunTracker& tracker, CompositeSolution& incumbent, double& value,
                        LocalSearchPolicy policy, std::optional<std::uint64_t> stale_limit);

}  // namespace detail

struct IlsParams {
  /// Random moves applied per component when perturbing; empty means one each.
  std::vector<std::size_t> perturbation_strength;
  LocalSearchPolicy inner_policy = LocalSearchPolicy::first_improvement_restart;
  std::optional<std::uint64_t> max_restarts;
};

/// Perturb-then-descend loop; keeps the candidate when it is not worse.
RunResult iterated_local_search(const CompositeProblem& problem, const CompositeSolution& init,
                                const StopCondition& stop, const IlsParams& params,
                                std::uint64_t seed);

/// Applies `strength[i]` random moves to component i.
CompositeSolution perturb(const CompositeProblem& problem, const CompositeSolution& sol,
                          const std::vector<std::size_t>& strength, Rng& rng);

/// Decides whether a worsening move (delta < 0 on the maximization scale)
/// is accepted at `temperature`.
using AcceptanceRule = std::function<bool(double delta, double temperature, Rng& rng)>;

/// exp(delta / T) for T > 0; never at T = 0.
bool metropolis_accepts(double delta, double temperature, Rng& rng);

struct AnnealingSchedule {
  double initial_temperature = 1.0;
  /// Multiplies the temperature after every `step_length` proposals.
  double cooling = 0.95;
  std::uint64_t step_length = 100;
  AcceptanceRule acceptance = metropolis_accepts;

  /// Throws InvalidSchedule.
  void validate() const;
};

/// Proposes uniform joint-neighborhood moves (independent uniform choice per
/// factor). Returns the best-ever solution.
RunResult simulated_annealing(const CompositeProblem& problem, const CompositeSolution& init,
                              const StopCondition& stop, const AnnealingSchedule& schedule,
                              std::uint64_t seed);

}  // namespace mcopt
