#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mcopt/errors.hpp"
#include "mcopt/neighborhood.hpp"

namespace mcopt {

using Rng = std::mt19937_64;

/// 64-bit mixing function used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

enum class Orientation { minimize, maximize };

struct ComponentId {
  std::string name;
  std::size_t index = 0;

  friend bool operator==(const ComponentId&, const ComponentId&) = default;
};

/// One solution value per component, indexed by the component's dense index.
struct CompositeSolution {
  std::vector<Part> parts;

  friend bool operator==(const CompositeSolution&, const CompositeSolution&) = default;
  friend auto operator<=>(const CompositeSolution&, const CompositeSolution&) = default;
};

/// Descriptor of one sub-problem.
///
/// `initial`, `neighborhood` and `check` are mandatory. `crossover` is used by
/// the evolutionary layer, `enumerate`/`space_size` by the exhaustive tools
/// (dependency detector, exact sub-solvers). Callbacks must be pure.
struct Component {
  std::string name;
  /// Returns an error message when the part is not structurally valid.
  std::function<std::optional<std::string>(const Part&)> check;
  std::function<Part(Rng&)> initial;
  std::function<Neighborhood(const Part&)> neighborhood;
  std::function<Part(const Part&, const Part&, Rng&)> crossover;
  /// Visits every valid part once, in a deterministic order.
  std::function<void(const std::function<void(const Part&)>&)> enumerate;
  /// Upper bound on the number of parts `enumerate` visits.
  std::function<double()> space_size;
};

/// Directed "dependent <- dependee" edges between components.
///
/// Only declared edges are stored; transitive dependence is never inferred.
class DependencyGraph {
 public:
  struct Edge {
    std::size_t dependent;
    std::size_t dependee;
    friend auto operator<=>(const Edge&, const Edge&) = default;
  };

  DependencyGraph() = default;
  explicit DependencyGraph(std::size_t node_count) : node_count_(node_count) {}

  void add_edge(std::size_t dependent, std::size_t dependee);
  [[nodiscard]] bool depends_on(std::size_t dependent, std::size_t dependee) const;
  [[nodiscard]] std::size_t node_count() const { return node_count_; }
  [[nodiscard]] const std::set<Edge>& edges() const { return edges_; }

  /// Dependees before dependents; std::nullopt when the graph has a cycle.
  [[nodiscard]] std::optional<std::vector<std::size_t>> topological_order() const;

 private:
  std::size_t node_count_ = 0;
  std::set<Edge> edges_;
};

/// Evaluation counter of a running search. Safe to share between workers.
struct RunContext {
  std::atomic<std::uint64_t> evaluations{0};
};

class CompositeProblem {
 public:
  using Objective = std::function<double(const CompositeSolution&)>;

  CompositeProblem(std::vector<Component> components, DependencyGraph dependencies,
                   Objective objective, Orientation orientation);

  [[nodiscard]] std::size_t size() const { return components_.size(); }
  [[nodiscard]] const Component& component(std::size_t index) const { return components_.at(index); }
  [[nodiscard]] const std::vector<Component>& components() const { return components_; }
  [[nodiscard]] ComponentId id(std::size_t index) const;
  /// Throws std::out_of_range for unknown names.
  [[nodiscard]] ComponentId find(std::string_view name) const;
  [[nodiscard]] const DependencyGraph& dependencies() const { return dependencies_; }
  [[nodiscard]] Orientation orientation() const { return orientation_; }
  [[nodiscard]] const Objective& objective() const { return objective_; }

  /// Maps a raw objective value onto the internal maximization scale.
  [[nodiscard]] double score(double value) const {
    return orientation_ == Orientation::maximize ? value : -value;
  }
  [[nodiscard]] bool better(double candidate, double incumbent) const {
    return score(candidate) > score(incumbent);
  }

 private:
  std::vector<Component> components_;
  DependencyGraph dependencies_;
  Objective objective_;
  Orientation orientation_;
};

/// Throws MissingPart or InvalidSolution.
void validate(const CompositeProblem& problem, const CompositeSolution& sol);

/// Validates `sol` and returns its raw objective value.
double evaluate(const CompositeProblem& problem, const CompositeSolution& sol,
                RunContext* context = nullptr);

/// Each component initializer gets its own seed stream and never sees the
/// other components' parts.
CompositeSolution initial_solution(const CompositeProblem& problem, std::uint64_t seed);

/// Uniformly random non-identity neighbor; returns `part` when none exists.
Part random_move(const Component& component, const Part& part, Rng& rng);

// Dependency detection ------------------------------------------------------

enum class DependencyReading { optimizer_set, optimal_value };

struct DependencyOptions {
  double enumeration_cap = 1e6;
  DependencyReading reading = DependencyReading::optimizer_set;
  double tie_tolerance = 1e-9;
};

struct ConditionalOptimum {
  double value = 0.0;         // raw objective value of the optima
  std::set<Part> optima;      // every part attaining it (tie-aware)
  std::uint64_t candidates = 0;
};

/// Exhaustive optimum of component `target` with every other part of
/// `context` frozen.
ConditionalOptimum conditional_optima(const CompositeProblem& problem,
                                      const CompositeSolution& context, std::size_t target,
                                      const DependencyOptions& options = {});

struct DependencyWitness {
  Part first;
  Part second;
  ConditionalOptimum first_optimum;
  ConditionalOptimum second_optimum;
};

struct DependencyVerdict {
  bool dependent = false;
  std::optional<DependencyWitness> witness;
  std::size_t samples_used = 0;
  /// Context every sample was plugged into (the frozen components).
  CompositeSolution frozen_context;
};

DependencyVerdict detect_dependency(const CompositeProblem& problem, const ComponentId& dependee,
                                    const ComponentId& dependent, std::size_t sample_count,
                                    std::uint64_t seed, const DependencyOptions& options = {});

/// Whether two conditional optima disagree under the given reading.
bool optima_differ(const ConditionalOptimum& a, const ConditionalOptimum& b,
                   const DependencyOptions& options);

}  // namespace mcopt
