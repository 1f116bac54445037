#include "mcopt/cosolver.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "mcopt/evolutionary.hpp"

namespace mcopt {

namespace {

void check_cover(const CompositeProblem& problem, std::span<const SubSolver> subsolvers) {
  if (subsolvers.size() != problem.size()) {
    throw std::invalid_argument("cosolver needs exactly one sub-solver per component");
  }
  std::vector<bool> seen(problem.size(), false);
  for (const auto& s : subsolvers) {
    if (s.component >= problem.size() || seen[s.component]) {
      throw std::invalid_argument("cosolver sub-solvers must cover each component once");
    }
    if (!s.solve) throw std::invalid_argument("sub-solver has no solve function");
    seen[s.component] = true;
  }
}

std::string describe(const CompositeProblem& problem, const SubSolver& s) {
  return s.label.empty() ? problem.component(s.component).name : s.label;
}

}  // namespace

CosolverState cosolver_round(const CompositeProblem& problem, const CosolverState& state,
                             std::span<const SubSolver> subsolvers, const RoundOptions& options) {
  check_cover(problem, subsolvers);
  RunContext local;
  RunContext& counter = options.counter != nullptr ? *options.counter : local;

  CosolverState next = state;
  next.last_round_changed = false;
  ++next.round;
  for (std::size_t position = 0; position < subsolvers.size(); ++position) {
    const auto& sub = subsolvers[position];
    const CompositeSolution input = next.incumbent;
    Part output = sub.solve(SolveRequest{input, sub.component, options.budget_per_call, counter});
    if (options.on_call) options.on_call(position, input, output);
    if (output == input.parts[sub.component]) continue;

    next.incumbent.parts[sub.component] = std::move(output);
    const double value = evaluate(problem, next.incumbent, &counter);
    if (sub.guarantee == Guarantee::improving && problem.better(next.value, value)) {
      throw SubSolverContractViolation("sub-solver '" + describe(problem, sub) +
                                       "' degraded the objective in round " +
                                       std::to_string(next.round));
    }
    next.value = value;
    next.last_round_changed = true;
  }
  return next;
}

RunResult cosolver(const CompositeProblem& problem, const CompositeSolution& init,
                   std::span<const SubSolver> subsolvers, const StopCondition& stop,
                   const CosolverOptions& options, std::uint64_t seed) {
  stop.validate();
  check_cover(problem, subsolvers);
  const std::uint64_t total = stop.max_evaluations.value_or(1'000'000);
  const std::uint64_t slice =
      options.budget_per_call.value_or(std::max<std::uint64_t>(1, total / (2 * problem.size())));

  Rng rng(seed);
  RunTracker tracker(problem, stop, seed);
  auto& result = tracker.result();
  CosolverState state{init, tracker.evaluate(init), 0, true};
  tracker.offer(state.incumbent, state.value);

  RoundOptions round_options;
  round_options.counter = &tracker.context();
  round_options.on_call = options.on_call;

  std::uint64_t stale_rounds = 0;
  while (true) {
    if (auto reason = tracker.budget_tripped()) return tracker.finish(*reason);
    if (auto left = tracker.remaining()) round_options.budget_per_call = std::min(slice, *left);
    else round_options.budget_per_call = slice;

    state = cosolver_round(problem, state, subsolvers, round_options);
    ++result.iterations;
    result.round_values.push_back(state.value);
    if (options.on_round) options.on_round(state);
    const bool improved = tracker.offer(state.incumbent, state.value);

    if (!options.perturb_with_genetic_operators && !state.last_round_changed) {
      return tracker.finish(StopReason::fixed_point);
    }
    if (improved) {
      stale_rounds = 0;
    } else if (stop.max_stale_passes && ++stale_rounds >= *stop.max_stale_passes) {
      return tracker.finish(StopReason::stale);
    }

    if (options.perturb_with_genetic_operators) {
      if (auto reason = tracker.budget_tripped()) return tracker.finish(*reason);
      CompositeSolution child = state.incumbent;
      bool can_cross = true;
      for (const auto& c : problem.components()) can_cross = can_cross && bool(c.crossover);
      if (can_cross) child = crossover_composite(problem, child, tracker.best(), rng);
      child = mutate_composite(problem, child, options.perturbation_rate, rng).solution;
      state.incumbent = std::move(child);
      state.value = tracker.evaluate(state.incumbent);
      tracker.offer(state.incumbent, state.value);
    }
  }
}

std::vector<std::size_t> coordination_order(const DependencyGraph& graph) {
  if (auto order = graph.topological_order()) return *order;
  std::vector<std::size_t> declared(graph.node_count());
  for (std::size_t i = 0; i < declared.size(); ++i) declared[i] = i;
  return declared;
}

std::vector<SubSolver> ordered_subsolvers(const DependencyGraph& graph,
                                          std::vector<SubSolver> subsolvers) {
  std::vector<SubSolver> out;
  out.reserve(subsolvers.size());
  for (auto component : coordination_order(graph)) {
    for (auto& s : subsolvers) {
      if (s.component == component) out.push_back(std::move(s));
    }
  }
  return out;
}

SubSolver local_search_subsolver(std::shared_ptr<const CompositeProblem> problem,
                                 std::size_t component) {
  SubSolver sub;
  sub.component = component;
  sub.guarantee = Guarantee::improving;
  sub.label = problem->component(component).name + "/local";
  sub.solve = [problem, component](const SolveRequest& request) -> Part {
    CompositeSolution current = request.context;
    double value = evaluate(*problem, current, &request.counter);
    std::uint64_t spent = 1;
    CompositeSolution candidate = current;
    bool improved = true;
    while (improved && spent < request.budget) {
      improved = false;
      const auto hood = problem->component(component).neighborhood(current.parts[component]);
      for (std::size_t i = hood.includes_identity() ? 1 : 0; i < hood.size(); ++i) {
        if (spent >= request.budget) break;
        candidate.parts[component] = hood.at(i);
        const double v = evaluate(*problem, candidate, &request.counter);
        ++spent;
        if (problem->better(v, value)) {
          current.parts[component] = candidate.parts[component];
          value = v;
          improved = true;
          break;
        }
      }
    }
    return current.parts[component];
  };
  return sub;
}

SubSolver exhaustive_subsolver(std::shared_ptr<const CompositeProblem> problem,
                               std::size_t component, double enumeration_cap) {
  SubSolver sub;
  sub.component = component;
  sub.guarantee = Guarantee::improving;
  sub.label = problem->component(component).name + "/exact";
  sub.solve = [problem, component, enumeration_cap](const SolveRequest& request) -> Part {
    DependencyOptions options;
    options.enumeration_cap = enumeration_cap;
    auto optimum = conditional_optima(*problem, request.context, component, options);
    request.counter.evaluations.fetch_add(optimum.candidates, std::memory_order_relaxed);
    const Part& own = request.context.parts[component];
    if (optimum.optima.contains(own)) return own;
    return *optimum.optima.begin();
  };
  return sub;
}

// Concurrent mode -------------------------------------------------------------

namespace {

struct Publication {
  std::size_t component;
  Part part;
};

template <typename T>
class Channel {
 public:
  void push(T value) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back(std::move(value));
    }
    ready_.notify_one();
  }
  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    ready_.notify_all();
  }
  /// Blocks until a value arrives; std::nullopt once closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return closed_ || !queue_.empty(); });
    if (queue_.empty()) return std::nullopt;
    T value = std::move(queue_.front());
    queue_.pop_front();
    return value;
  }

 private:
  std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<T> queue_;
  bool closed_ = false;
};

/// Latest validated tuple, shared with the workers as immutable snapshots.
class Board {
 public:
  explicit Board(CompositeSolution initial)
      : snapshot_(std::make_shared<const CompositeSolution>(std::move(initial))) {}

  std::shared_ptr<const CompositeSolution> snapshot() const {
    std::lock_guard lock(mutex_);
    return snapshot_;
  }
  void publish(CompositeSolution next) {
    auto fresh = std::make_shared<const CompositeSolution>(std::move(next));
    std::lock_guard lock(mutex_);
    snapshot_ = std::move(fresh);
  }

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const CompositeSolution> snapshot_;
};

}  // namespace

RunResult cosolver_concurrent(const CompositeProblem& problem, const CompositeSolution& init,
                              std::span<const SubSolver> subsolvers,
                              const ConcurrentCosolverOptions& options) {
  check_cover(problem, subsolvers);
  StopCondition unbounded;
  unbounded.max_stale_passes = 1;
  RunTracker tracker(problem, unbounded, 0);
  CompositeSolution current = init;
  tracker.offer(current, tracker.evaluate(current));

  Board board(current);
  Channel<Publication> channel;
  std::atomic<std::size_t> running{subsolvers.size()};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  {
    std::vector<std::jthread> workers;
    workers.reserve(subsolvers.size());
    for (const auto& sub : subsolvers) {
      workers.emplace_back([&, sub] {
        try {
          for (std::uint64_t call = 0; call < options.calls_per_worker; ++call) {
            const auto snapshot = board.snapshot();
            Part part = sub.solve(
                SolveRequest{*snapshot, sub.component, options.budget_per_call, tracker.context()});
            channel.push(Publication{sub.component, std::move(part)});
          }
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
        if (running.fetch_sub(1) == 1) channel.close();
      });
    }

    while (auto message = channel.pop()) {
      CompositeSolution next = current;
      next.parts[message->component] = std::move(message->part);
      const double value = tracker.evaluate(next);  // validates the published tuple
      current = std::move(next);
      board.publish(current);
      tracker.offer(current, value);
      ++tracker.result().iterations;
    }
  }
  if (failure) std::rethrow_exception(failure);
  return tracker.finish(StopReason::completed);
}

}  // namespace mcopt
