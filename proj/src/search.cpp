#include "mcopt/search.hpp"

#include <cmath>

namespace mcopt {

StopCondition StopCondition::defaults() {
  StopCondition stop;
  stop.max_stale_passes = 1;
  stop.max_evaluations = 1'000'000;
  return stop;
}

void StopCondition::validate() const {
  if (!max_evaluations && !max_wall_time && !max_stale_passes && !target_value) {
    throw InvalidStopCondition("stop condition needs at least one bound");
  }
  if (max_stale_passes && *max_stale_passes == 0) {
    throw InvalidStopCondition("max_stale_passes must be >= 1");
  }
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::stale: return "stale";
    case StopReason::evaluations: return "evaluations";
    case StopReason::wall_time: return "wall_time";
    case StopReason::target: return "target";
    case StopReason::fixed_point: return "fixed_point";
    case StopReason::generations: return "generations";
    case StopReason::restarts: return "restarts";
    case StopReason::completed: return "completed";
  }
  return "unknown";
}

// RunTracker ------------------------------------------------------------------

RunTracker::RunTracker(const CompositeProblem& problem, StopCondition stop, std::uint64_t seed)
    : problem_(problem), stop_(std::move(stop)), start_(std::chrono::steady_clock::now()) {
  result_.seed = seed;
}

std::optional<std::uint64_t> RunTracker::remaining() const {
  if (!stop_.max_evaluations) return std::nullopt;
  const auto used = evaluations();
  return used >= *stop_.max_evaluations ? 0 : *stop_.max_evaluations - used;
}

double RunTracker::evaluate(const CompositeSolution& sol) {
  return mcopt::evaluate(problem_, sol, &context_);
}

void RunTracker::charge(std::uint64_t evaluations) {
  context_.evaluations.fetch_add(evaluations, std::memory_order_relaxed);
}

bool RunTracker::offer(const CompositeSolution& sol, double value) {
  if (has_best_ && !problem_.better(value, best_value_)) return false;
  has_best_ = true;
  best_value_ = value;
  best_ = sol;
  result_.trajectory.push_back({evaluations(), value, elapsed_ms()});
  return true;
}

double RunTracker::elapsed_ms() const {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
      .count();
}

std::optional<StopReason> RunTracker::budget_tripped() const {
  if (stop_.target_value && has_best_ && !problem_.better(*stop_.target_value, best_value_)) {
    return StopReason::target;
  }
  if (stop_.max_evaluations && evaluations() >= *stop_.max_evaluations) {
    return StopReason::evaluations;
  }
  if (stop_.max_wall_time && elapsed_ms() >= static_cast<double>(stop_.max_wall_time->count())) {
    return StopReason::wall_time;
  }
  return std::nullopt;
}

RunResult RunTracker::finish(StopReason reason) {
  result_.best = best_;
  result_.best_value = best_value_;
  result_.evaluations = evaluations();
  result_.wall_time = std::chrono::steady_clock::now() - start_;
  result_.stop_reason = reason;
  return result_;
}

// Local search ----------------------------------------------------------------

std::string_view to_string(LocalSearchPolicy policy) {
  switch (policy) {
    case LocalSearchPolicy::first_improvement_restart: return "first-improvement-restart";
    case LocalSearchPolicy::best_improvement_pass: return "best-improvement-pass";
    case LocalSearchPolicy::paper_literal: return "paper-literal";
  }
  return "unknown";
}

std::optional<LocalSearchPolicy> parse_local_search_policy(std::string_view text) {
  for (auto p : {LocalSearchPolicy::first_improvement_restart,
                 LocalSearchPolicy::best_improvement_pass, LocalSearchPolicy::paper_literal}) {
    if (to_string(p) == text) return p;
  }
  return std::nullopt;
}

JointNeighborhood joint_neighborhood_of(const CompositeProblem& problem,
                                        const CompositeSolution& sol) {
  std::vector<Neighborhood> factors;
  factors.reserve(problem.size());
  for (std::size_t i = 0; i < problem.size(); ++i) {
    factors.push_back(problem.component(i).neighborhood(sol.parts.at(i)));
  }
  return JointNeighborhood(std::move(factors));
}

namespace detail {

StopReason local_search(RunTracker& tracker, CompositeSolution& incumbent, double& value,
                        LocalSearchPolicy policy, std::optional<std::uint64_t> stale_limit) {
  const auto& problem = tracker.problem();
  auto& result = tracker.result();
  std::uint64_t stale = 0;
  CompositeSolution candidate;

  auto accept = [&](CompositeSolution&& sol, double v) {
    incumbent = std::move(sol);
    value = v;
    ++result.accepted_moves;
    tracker.offer(incumbent, value);
  };

  while (true) {
    if (auto reason = tracker.budget_tripped()) return *reason;
    const auto joint = joint_neighborhood_of(problem, incumbent);
    bool improved = false;
    std::optional<StopReason> interrupted;

    switch (policy) {
      case LocalSearchPolicy::first_improvement_restart:
        for (std::size_t idx = 0; idx < joint.size(); ++idx) {
          if (joint.is_identity(idx)) continue;
          if ((interrupted = tracker.budget_tripped())) break;
          candidate.parts = joint.at(idx);
          const double v = tracker.evaluate(candidate);
          if (problem.better(v, value)) {
            accept(std::move(candidate), v);
            improved = true;
            break;
          }
        }
        break;

      case LocalSearchPolicy::best_improvement_pass: {
        std::optional<std::size_t> best_idx;
        double best_v = value;
        for (std::size_t idx = 0; idx < joint.size(); ++idx) {
          if (joint.is_identity(idx)) continue;
          if ((interrupted = tracker.budget_tripped())) break;
          candidate.parts = joint.at(idx);
          const double v = tracker.evaluate(candidate);
          if (problem.better(v, best_v)) {
            best_v = v;
            best_idx = idx;
          }
        }
        if (best_idx) {
          candidate.parts = joint.at(*best_idx);
          accept(std::move(candidate), best_v);
          improved = true;
        }
        break;
      }

      case LocalSearchPolicy::paper_literal:
        // The enumeration keeps ranging over the pass-start neighborhoods.
        for (std::size_t idx = 0; idx < joint.size(); ++idx) {
          if (joint.is_identity(idx)) continue;
          if ((interrupted = tracker.budget_tripped())) break;
          candidate.parts = joint.at(idx);
          const double v = tracker.evaluate(candidate);
          if (problem.better(v, value)) {
            accept(std::move(candidate), v);
            improved = true;
          }
        }
        break;
    }

    if (interrupted) return *interrupted;
    ++result.iterations;
    if (improved) {
      stale = 0;
    } else if (stale_limit && ++stale >= *stale_limit) {
      return StopReason::stale;
    }
  }
}

}  // namespace detail

RunResult joint_local_search(const CompositeProblem& problem, const CompositeSolution& init,
                             const StopCondition& stop, LocalSearchPolicy policy,
                             std::uint64_t seed) {
  stop.validate();
  RunTracker tracker(problem, stop, seed);
  CompositeSolution incumbent = init;
  double value = tracker.evaluate(incumbent);
  tracker.offer(incumbent, value);
  const auto reason = detail::local_search(tracker, incumbent, value, policy, stop.max_stale_passes);
  return tracker.finish(reason);
}

// Iterated local search -------------------------------------------------------

CompositeSolution perturb(const CompositeProblem& problem, const CompositeSolution& sol,
                          const std::vector<std::size_t>& strength, Rng& rng) {
  CompositeSolution out = sol;
  for (std::size_t i = 0; i < problem.size(); ++i) {
    const std::size_t moves = strength.empty() ? 1 : strength.at(i);
    for (std::size_t m = 0; m < moves; ++m) {
      out.parts[i] = random_move(problem.component(i), out.parts[i], rng);
    }
  }
  return out;
}

RunResult iterated_local_search(const CompositeProblem& problem, const CompositeSolution& init,
                                const StopCondition& stop, const IlsParams& params,
                                std::uint64_t seed) {
  stop.validate();
  if (!params.perturbation_strength.empty() &&
      params.perturbation_strength.size() != problem.size()) {
    throw InvalidConfig("perturbation_strength needs one entry per component");
  }
  if (!stop.max_evaluations && !stop.max_wall_time && !stop.target_value && !params.max_restarts) {
    throw InvalidStopCondition("iterated local search needs a budget, a target or max_restarts");
  }
  const auto inner_stale = stop.max_stale_passes.value_or(1);

  Rng rng(seed);
  RunTracker tracker(problem, stop, seed);
  CompositeSolution incumbent = init;
  double value = tracker.evaluate(incumbent);
  tracker.offer(incumbent, value);
  auto reason = detail::local_search(tracker, incumbent, value, params.inner_policy, inner_stale);

  std::uint64_t restarts = 0;
  while (reason == StopReason::stale) {
    if (auto tripped = tracker.budget_tripped()) {
      reason = *tripped;
      break;
    }
    if (params.max_restarts && restarts >= *params.max_restarts) {
      reason = StopReason::restarts;
      break;
    }
    CompositeSolution candidate = perturb(problem, incumbent, params.perturbation_strength, rng);
    double candidate_value = tracker.evaluate(candidate);
    tracker.offer(candidate, candidate_value);
    reason = detail::local_search(tracker, candidate, candidate_value, params.inner_policy,
                                  inner_stale);
    ++restarts;
    if (!problem.better(value, candidate_value)) {
      incumbent = std::move(candidate);
      value = candidate_value;
    }
  }
  auto result = tracker.finish(reason);
  result.iterations = restarts;
  return result;
}

// Simulated annealing ---------------------------------------------------------

bool metropolis_accepts(double delta, double temperature, Rng& rng) {
  if (delta >= 0.0) return true;
  if (temperature <= 0.0) return false;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return unit(rng) < std::exp(delta / temperature);
}

void AnnealingSchedule::validate() const {
  if (!std::isfinite(initial_temperature) || initial_temperature < 0.0) {
    throw InvalidSchedule("initial temperature must be finite and >= 0");
  }
  if (!(cooling > 0.0 && cooling <= 1.0)) throw InvalidSchedule("cooling factor must be in (0, 1]");
  if (step_length == 0) throw InvalidSchedule("step length must be >= 1");
  if (!acceptance) throw InvalidSchedule("acceptance rule is empty");
}

RunResult simulated_annealing(const CompositeProblem& problem, const CompositeSolution& init,
                              const StopCondition& stop, const AnnealingSchedule& schedule,
                              std::uint64_t seed) {
  stop.validate();
  schedule.validate();

  Rng rng(seed);
  RunTracker tracker(problem, stop, seed);
  auto& result = tracker.result();
  CompositeSolution current = init;
  double value = tracker.evaluate(current);
  tracker.offer(current, value);

  double temperature = schedule.initial_temperature;
  std::uint64_t in_step = 0;
  std::uint64_t stale_steps = 0;
  double best_at_step_start = tracker.best_value();
  CompositeSolution candidate = current;

  while (true) {
    if (auto reason = tracker.budget_tripped()) return tracker.finish(*reason);

    for (std::size_t i = 0; i < problem.size(); ++i) {
      const auto hood = problem.component(i).neighborhood(current.parts[i]);
      if (hood.empty()) {
        candidate.parts[i] = current.parts[i];
        continue;
      }
      std::uniform_int_distribution<std::size_t> pick(0, hood.size() - 1);
      candidate.parts[i] = hood.at(pick(rng));
    }
    const double candidate_value = tracker.evaluate(candidate);
    const double delta = problem.score(candidate_value) - problem.score(value);
    if (delta >= 0.0 || schedule.acceptance(delta, temperature, rng)) {
      current = candidate;
      value = candidate_value;
      ++result.accepted_moves;
      if (delta < 0.0) ++result.accepted_worsening;
      tracker.offer(current, value);
    }
    ++result.iterations;

    if (++in_step == schedule.step_length) {
      in_step = 0;
      temperature *= schedule.cooling;
      if (problem.better(tracker.best_value(), best_at_step_start)) {
        stale_steps = 0;
        best_at_step_start = tracker.best_value();
      } else if (stop.max_stale_passes && ++stale_steps >= *stop.max_stale_passes) {
        return tracker.finish(StopReason::stale);
      }
    }
  }
}

}  // namespace mcopt
