#include "mcopt/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_set>

namespace mcopt {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// DependencyGraph -------------------------------------------------------------

void DependencyGraph::add_edge(std::size_t dependent, std::size_t dependee) {
  if (dependent >= node_count_ || dependee >= node_count_) {
    throw std::out_of_range("dependency edge endpoint is not a declared component");
  }
  if (dependent == dependee) throw std::invalid_argument("dependency graph forbids self-loops");
  edges_.insert({dependent, dependee});
}

bool DependencyGraph::depends_on(std::size_t dependent, std::size_t dependee) const {
  return edges_.contains({dependent, dependee});
}

std::optional<std::vector<std::size_t>> DependencyGraph::topological_order() const {
  std::vector<std::size_t> pending(node_count_, 0);
  std::vector<std::vector<std::size_t>> dependents(node_count_);
  for (const auto& e : edges_) {
    ++pending[e.dependent];
    dependents[e.dependee].push_back(e.dependent);
  }
  // min-heap keeps declared order among ready nodes
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < node_count_; ++i) {
    if (pending[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const auto node = ready.top();
    ready.pop();
    order.push_back(node);
    for (auto d : dependents[node]) {
      if (--pending[d] == 0) ready.push(d);
    }
  }
  if (order.size() != node_count_) return std::nullopt;
  return order;
}

// CompositeProblem ------------------------------------------------------------

CompositeProblem::CompositeProblem(std::vector<Component> components, DependencyGraph dependencies,
                                   Objective objective, Orientation orientation)
    : components_(std::move(components)),
      dependencies_(std::move(dependencies)),
      objective_(std::move(objective)),
      orientation_(orientation) {
  if (components_.empty()) throw std::invalid_argument("a composite problem needs >= 1 component");
  if (dependencies_.node_count() != components_.size()) {
    throw std::invalid_argument("dependency graph size does not match the component count");
  }
  std::unordered_set<std::string> names;
  for (const auto& c : components_) {
    if (c.name.empty()) throw std::invalid_argument("component names must be non-empty");
    if (!names.insert(c.name).second) {
      throw std::invalid_argument("duplicate component name '" + c.name + "'");
    }
    if (!c.check || !c.initial || !c.neighborhood) {
      throw std::invalid_argument("component '" + c.name + "' lacks a mandatory callback");
    }
  }
  if (!objective_) throw std::invalid_argument("composite problem needs an objective");
}

ComponentId CompositeProblem::id(std::size_t index) const {
  return {components_.at(index).name, index};
}

ComponentId CompositeProblem::find(std::string_view name) const {
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (components_[i].name == name) return {components_[i].name, i};
  }
  throw std::out_of_range("unknown component '" + std::string(name) + "'");
}

// Evaluation ------------------------------------------------------------------

void validate(const CompositeProblem& problem, const CompositeSolution& sol) {
  if (sol.parts.size() != problem.size()) {
    throw MissingPart("composite solution has " + std::to_string(sol.parts.size()) +
                      " parts, problem has " + std::to_string(problem.size()) + " components");
  }
  for (std::size_t i = 0; i < problem.size(); ++i) {
    if (auto error = problem.component(i).check(sol.parts[i])) {
      throw InvalidSolution("component '" + problem.component(i).name + "': " + *error);
    }
  }
}

double evaluate(const CompositeProblem& problem, const CompositeSolution& sol, RunContext* context) {
  validate(problem, sol);
  const double value = problem.objective()(sol);
  if (!std::isfinite(value)) throw InvalidSolution("objective returned a non-finite value");
  if (context != nullptr) context->evaluations.fetch_add(1, std::memory_order_relaxed);
  return value;
}

CompositeSolution initial_solution(const CompositeProblem& problem, std::uint64_t seed) {
  CompositeSolution sol;
  sol.parts.reserve(problem.size());
  for (std::size_t i = 0; i < problem.size(); ++i) {
    Rng rng(mix_seed(seed, i));
    sol.parts.push_back(problem.component(i).initial(rng));
  }
  return sol;
}

Part random_move(const Component& component, const Part& part, Rng& rng) {
  const auto hood = component.neighborhood(part);
  const std::size_t first = hood.includes_identity() ? 1 : 0;
  if (hood.size() <= first) return part;
  std::uniform_int_distribution<std::size_t> pick(first, hood.size() - 1);
  return hood.at(pick(rng));
}

// Dependency detection --------------------------------------------------------

namespace {

bool within_tolerance(double a, double b, double tolerance) {
  return std::abs(a - b) <= tolerance * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

ConditionalOptimum conditional_optima(const CompositeProblem& problem,
                                      const CompositeSolution& context, std::size_t target,
                                      const DependencyOptions& options) {
  const auto& component = problem.component(target);
  if (!component.enumerate || !component.space_size) {
    throw SpaceTooLarge("component '" + component.name + "' is not enumerable");
  }
  const double space = component.space_size();
  if (space > options.enumeration_cap) {
    throw SpaceTooLarge("component '" + component.name + "' has " + std::to_string(space) +
                        " candidates, cap is " + std::to_string(options.enumeration_cap));
  }

  ConditionalOptimum result;
  std::vector<std::pair<double, Part>> near_best;
  double best = -std::numeric_limits<double>::infinity();
  CompositeSolution probe = context;
  component.enumerate([&](const Part& part) {
    probe.parts[target] = part;
    const double s = problem.score(evaluate(problem, probe));
    ++result.candidates;
    if (s > best && !within_tolerance(s, best, options.tie_tolerance)) {
      best = s;
      std::erase_if(near_best, [&](const auto& entry) {
        return !within_tolerance(entry.first, best, options.tie_tolerance);
      });
      near_best.emplace_back(s, part);
    } else if (within_tolerance(s, best, options.tie_tolerance)) {
      best = std::max(best, s);
      near_best.emplace_back(s, part);
    }
  });
  if (result.candidates == 0) {
    throw InvalidSolution("component '" + component.name + "' enumerated no candidates");
  }
  for (auto& entry : near_best) {
    if (within_tolerance(entry.first, best, options.tie_tolerance)) {
      result.optima.insert(std::move(entry.second));
    }
  }
  result.value = problem.score(best);  // score is an involution
  return result;
}

bool optima_differ(const ConditionalOptimum& a, const ConditionalOptimum& b,
                   const DependencyOptions& options) {
  if (options.reading == DependencyReading::optimal_value) {
    return !within_tolerance(a.value, b.value, options.tie_tolerance);
  }
  return a.optima != b.optima;
}

DependencyVerdict detect_dependency(const CompositeProblem& problem, const ComponentId& dependee,
                                    const ComponentId& dependent, std::size_t sample_count,
                                    std::uint64_t seed, const DependencyOptions& options) {
  if (sample_count < 2) throw TooFewSamples("dependency detection needs sample_count >= 2");
  if (dependee.index >= problem.size() || dependent.index >= problem.size()) {
    throw std::out_of_range("unknown component in dependency query");
  }
  if (dependee.index == dependent.index) {
    throw std::invalid_argument("dependee and dependent must be different components");
  }
  const auto& target = problem.component(dependent.index);
  if (!target.space_size || target.space_size() > options.enumeration_cap) {
    throw SpaceTooLarge("dependent component '" + target.name + "' exceeds the enumeration cap");
  }

  DependencyVerdict verdict;
  verdict.frozen_context = initial_solution(problem, seed);

  // Distinct dependee samples: initializer output plus a short random walk.
  const auto& source = problem.component(dependee.index);
  Rng rng(mix_seed(seed, 0xde9e4dULL));
  std::set<Part> seen;
  std::vector<Part> samples;
  std::uniform_int_distribution<int> walk_length(0, 8);
  for (std::size_t attempt = 0; attempt < 64 * sample_count && samples.size() < sample_count;
       ++attempt) {
    Part part = source.initial(rng);
    for (int step = walk_length(rng); step > 0; --step) part = random_move(source, part, rng);
    if (seen.insert(part).second) samples.push_back(std::move(part));
  }
  if (samples.size() < 2) {
    throw TooFewSamples("could not draw two distinct solutions of component '" + source.name + "'");
  }

  CompositeSolution context = verdict.frozen_context;
  context.parts[dependee.index] = samples.front();
  const auto reference = conditional_optima(problem, context, dependent.index, options);
  verdict.samples_used = 1;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    context.parts[dependee.index] = samples[i];
    auto optimum = conditional_optima(problem, context, dependent.index, options);
    ++verdict.samples_used;
    if (optima_differ(reference, optimum, options)) {
      verdict.dependent = true;
      verdict.witness = DependencyWitness{samples.front(), samples[i], reference, std::move(optimum)};
      break;
    }
  }
  return verdict;
}

}  // namespace mcopt
