#include "mcopt/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>

#include "mcopt/cosolver.hpp"
#include "mcopt/evolutionary.hpp"
#include "mcopt/killer_sudoku.hpp"
#include "mcopt/search.hpp"
#include "mcopt/text.hpp"
#include "mcopt/ttp.hpp"

namespace mcopt::verify {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::pass: return "PASS";
    case Outcome::fail: return "FAIL";
    case Outcome::skipped: return "SKIPPED";
  }
  return "?";
}

const std::vector<std::string>& fault_names() {
  static const std::vector<std::string> names = {"sa-t0-accept"};
  return names;
}

namespace {

using Check = std::optional<std::string>;

class Suite {
 public:
  explicit Suite(const Options& options) : options_(options) {}

  template <typename Body>
  void property(const std::string& name, int min_scale, std::uint64_t seed, Body&& body) {
    PropertyResult r{name, Outcome::pass, {}, seed};
    if (options_.scale_cap < min_scale) {
      r.outcome = Outcome::skipped;
      r.detail = "needs scale " + std::to_string(min_scale);
    } else {
      try {
        if (auto failure = body(seed)) {
          r.outcome = Outcome::fail;
          r.detail = *failure;
        }
      } catch (const std::exception& e) {
        r.outcome = Outcome::fail;
        r.detail = std::string("exception: ") + e.what();
      }
    }
    if (options_.report) options_.report(r);
    results_.push_back(std::move(r));
  }

  [[nodiscard]] bool fault(const std::string& name) const { return options_.faults.contains(name); }
  std::vector<PropertyResult>& results() { return results_; }

 private:
  const Options& options_;
  std::vector<PropertyResult> results_;
};

std::shared_ptr<const ttp::Instance> ttp_fixture(double renting_rate) {
  ttp::Instance inst;
  inst.name = "verify-4-3";
  inst.city_count = 4;
  inst.coordinates = {{0, 0}, {6, 0}, {8, 5}, {2, 7}};
  inst.items = {{40, 30, 1}, {30, 20, 2}, {25, 25, 3}};
  inst.capacity = 50;
  inst.renting_rate = renting_rate;
  ttp::compute_distances(inst);
  inst.validate();
  return std::make_shared<const ttp::Instance>(std::move(inst));
}

// Single integer part; each proposal worsens the score by exactly `step`.
CompositeProblem constant_worsening(double step) {
  Component c;
  c.name = "X";
  c.check = [](const Part& p) -> std::optional<std::string> {
    if (p.size() != 1) return "expected one value";
    return std::nullopt;
  };
  c.initial = [](Rng&) { return Part{0}; };
  c.neighborhood = [](const Part& p) {
    return Neighborhood::from_moves(p, 1, [](const Part& s, std::size_t) { return Part{s[0] + 1}; },
                                    false);
  };
  return CompositeProblem({c}, DependencyGraph(1),
                          [step](const CompositeSolution& s) { return -step * s.parts[0][0]; },
                          Orientation::maximize);
}

// f(a) + g(b) over two small integer ranges.
CompositeProblem additive_problem() {
  auto make = [](std::string name, int range) {
    Component c;
    c.name = std::move(name);
    c.check = [range](const Part& p) -> std::optional<std::string> {
      if (p.size() != 1 || p[0] < 0 || p[0] >= range) return "value out of range";
      return std::nullopt;
    };
    c.initial = [range](Rng& rng) {
      return Part{std::uniform_int_distribution<int>(0, range - 1)(rng)};
    };
    c.neighborhood = [range](const Part& p) {
      return Neighborhood::from_moves(
          p, 2, [range](const Part& s, std::size_t k) {
            return Part{(s[0] + (k == 0 ? 1 : range - 1)) % range};
          },
          true);
    };
    c.enumerate = [range](const std::function<void(const Part&)>& visit) {
      for (int v = 0; v < range; ++v) visit(Part{v});
    };
    c.space_size = [range] { return static_cast<double>(range); };
    return c;
  };
  DependencyGraph graph(2);
  return CompositeProblem({make("A", 7), make("B", 5)}, graph,
                          [](const CompositeSolution& s) {
                            const int a = s.parts[0][0];
                            const int b = s.parts[1][0];
                            return -(a - 3) * (a - 3) + 2.0 * ((b * 3) % 5);
                          },
                          Orientation::maximize);
}

Check local_optimum_violation(const CompositeProblem& problem, const CompositeSolution& sol,
                              double value) {
  const auto hood = joint_neighborhood_of(problem, sol);
  for (std::size_t i = 0; i < hood.size(); ++i) {
    const CompositeSolution neighbor{hood.at(i)};
    const double v = evaluate(problem, neighbor);
    if (problem.better(v, value)) {
      return "joint neighbor " + std::to_string(i) + " scores " + text::format_number(v) +
             ", incumbent " + text::format_number(value);
    }
  }
  return std::nullopt;
}

Check coordinate_wise_violation(const CompositeProblem& problem, const CompositeSolution& sol,
                                double value) {
  for (std::size_t i = 0; i < problem.size(); ++i) {
    const auto optimum = conditional_optima(problem, sol, i);
    if (problem.better(optimum.value, value) &&
        std::abs(optimum.value - value) > 1e-9 * std::max(1.0, std::abs(value))) {
      return "component " + problem.component(i).name + " can still reach " +
             text::format_number(optimum.value);
    }
  }
  return std::nullopt;
}

void core_section(Suite& suite, std::uint64_t seed) {
  suite.property("core/product-law", 2, seed, [](std::uint64_t s) -> Check {
    Rng rng(s);
    std::uniform_int_distribution<int> factor_count(1, 4);
    std::uniform_int_distribution<std::size_t> factor_size(0, 8);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<Neighborhood> factors;
      std::size_t product = 1;
      for (int f = factor_count(rng); f > 0; --f) {
        const auto size = factor_size(rng);
        product *= size;
        factors.emplace_back(Part{0}, size, [](std::size_t k) { return Part{static_cast<int>(k)}; },
                             false);
      }
      const auto joint = joint_neighborhood(std::move(factors));
      std::size_t counted = 0;
      for (auto it = joint.begin(); it != joint.end(); ++it) ++counted;
      if (counted != product || joint.size() != product) {
        return "trial " + std::to_string(trial) + ": enumerated " + std::to_string(counted) +
               ", expected " + std::to_string(product);
      }
    }
    return std::nullopt;
  });

  suite.property("core/detector-additive-independent", 2, seed, [](std::uint64_t s) -> Check {
    const auto problem = additive_problem();
    for (std::size_t dependee = 0; dependee < 2; ++dependee) {
      const auto verdict =
          detect_dependency(problem, problem.id(dependee), problem.id(1 - dependee), 5, s);
      if (verdict.dependent) return "additive problem reported dependent";
    }
    return std::nullopt;
  });

  suite.property("search/sa-acceptance-rate", 1, seed, [](std::uint64_t s) -> Check {
    const double temperature = 2.0;
    const auto problem = constant_worsening(temperature * std::log(2.0));
    StopCondition stop;
    stop.max_evaluations = 10'001;
    AnnealingSchedule schedule;
    schedule.initial_temperature = temperature;
    schedule.cooling = 1.0;
    const auto r = simulated_annealing(problem, initial_solution(problem, s), stop, schedule, s);
    const double rate = static_cast<double>(r.accepted_worsening) / static_cast<double>(r.iterations);
    if (std::abs(rate - 0.5) > 0.02) return "worsening acceptance " + text::format_number(rate);
    return std::nullopt;
  });

  suite.property("search/sa-zero-temperature", 1, seed, [&suite](std::uint64_t s) -> Check {
    const auto problem = constant_worsening(1.0);
    StopCondition stop;
    stop.max_evaluations = 10'001;
    AnnealingSchedule schedule;
    schedule.initial_temperature = 0.0;
    schedule.cooling = 1.0;
    if (suite.fault("sa-t0-accept")) {
      schedule.acceptance = [](double delta, double t, Rng& rng) {
        return t <= 0.0 || metropolis_accepts(delta, t, rng);
      };
    }
    const auto r = simulated_annealing(problem, initial_solution(problem, s), stop, schedule, s);
    if (r.accepted_worsening != 0) {
      return std::to_string(r.accepted_worsening) + " worsening moves accepted at T = 0";
    }
    return std::nullopt;
  });
}

void ttp_section(Suite& suite, std::uint64_t seed) {
  suite.property("ttp/two-city-objective", 2, seed, [](std::uint64_t) -> Check {
    const auto inst = ttp::from_matrix({{0, 10}, {10, 0}}, {{5, 1, 1}}, 1, 0.1, 1, 1);
    const double v = ttp::objective(inst, {{0, 1}, {0}});
    if (v != -20.0) return "empty plan scored " + text::format_number(v) + ", expected -20";
    return std::nullopt;
  });

  suite.property("ttp/brute-force-consistency", 4, seed, [](std::uint64_t) -> Check {
    const auto inst = ttp_fixture(1.0);
    const auto bf = ttp::brute_force_solve(*inst);
    const auto problem = ttp::as_composite(inst);
    double best = -std::numeric_limits<double>::infinity();
    problem.component(0).enumerate([&](const Part& tour) {
      problem.component(1).enumerate([&](const Part& plan) {
        best = std::max(best, evaluate(problem, CompositeSolution{{tour, plan}}));
      });
    });
    if (std::abs(best - bf.value) > 1e-9 * std::max(1.0, std::abs(best))) {
      return "brute force " + text::format_number(bf.value) + " vs composite " +
             text::format_number(best);
    }
    return std::nullopt;
  });

  suite.property("ttp/detector-plan-on-tour", 4, seed, [](std::uint64_t s) -> Check {
    const auto problem = ttp::as_composite(ttp_fixture(1.0));
    const auto verdict = detect_dependency(problem, problem.find(ttp::kTourComponent),
                                           problem.find(ttp::kPlanComponent), 6, s);
    if (!verdict.dependent) return "PLAN <- TOUR not detected with R > 0";
    const auto& w = *verdict.witness;
    auto context = verdict.frozen_context;
    context.parts[0] = w.first;
    const auto a = conditional_optima(problem, context, 1);
    context.parts[0] = w.second;
    const auto b = conditional_optima(problem, context, 1);
    if (a.optima == b.optima) return "witness does not replay";
    return std::nullopt;
  });

  suite.property("ttp/detector-zero-rent", 4, seed, [](std::uint64_t s) -> Check {
    const auto problem = ttp::as_composite(ttp_fixture(0.0));
    const auto verdict = detect_dependency(problem, problem.find(ttp::kTourComponent),
                                           problem.find(ttp::kPlanComponent), 6, s);
    if (verdict.dependent) return "PLAN <- TOUR reported with R = 0";
    return std::nullopt;
  });

  suite.property("ttp/jls-joint-local-optimum", 4, seed, [](std::uint64_t s) -> Check {
    const auto problem = ttp::as_composite(ttp_fixture(1.0));
    for (std::uint64_t k = 0; k < 20; ++k) {
      const auto init = initial_solution(problem, s + k);
      const auto r = joint_local_search(problem, init, StopCondition::defaults(),
                                        LocalSearchPolicy::first_improvement_restart, s + k);
      if (r.stop_reason != StopReason::stale) continue;
      if (auto v = local_optimum_violation(problem, r.best, r.best_value)) {
        return "seed " + std::to_string(s + k) + ": " + *v;
      }
      if (problem.better(evaluate(problem, init), r.best_value)) {
        return "seed " + std::to_string(s + k) + ": result worse than its start";
      }
    }
    return std::nullopt;
  });

  suite.property("ttp/cosolver-fixed-point", 4, seed, [](std::uint64_t s) -> Check {
    const auto inst = ttp_fixture(1.0);
    const auto problem = ttp::as_composite(inst);
    const std::vector<SubSolver> subs = {ttp::subsolver_tour(inst, ttp::SubSolverMode::exact),
                                         ttp::subsolver_plan(inst, ttp::SubSolverMode::exact)};
    for (std::uint64_t k = 0; k < 20; ++k) {
      const auto r = cosolver(problem, initial_solution(problem, s + k), subs,
                              StopCondition::defaults(), {}, s + k);
      const auto tag = "seed " + std::to_string(s + k) + ": ";
      for (std::size_t i = 1; i < r.round_values.size(); ++i) {
        if (problem.better(r.round_values[i - 1], r.round_values[i])) {
          return tag + "round " + std::to_string(i + 1) + " degraded the objective";
        }
      }
      if (r.stop_reason != StopReason::fixed_point || r.iterations > 10) {
        return tag + "no fixed point within 10 rounds";
      }
      if (auto v = coordinate_wise_violation(problem, r.best, r.best_value)) return tag + *v;
    }
    return std::nullopt;
  });

  suite.property("ttp/ea-elitism-monotone", 4, seed, [](std::uint64_t s) -> Check {
    const auto problem = ttp::as_composite(ttp_fixture(1.0));
    EaConfig config;
    config.population_size = 8;
    config.generations = 25;
    config.stop.max_evaluations = 100'000;
    for (std::uint64_t k = 0; k < 5; ++k) {
      const auto r = evolve(problem, config, s + k);
      for (std::size_t g = 1; g < r.round_values.size(); ++g) {
        if (problem.better(r.round_values[g - 1], r.round_values[g])) {
          return "seed " + std::to_string(s + k) + ": generation " + std::to_string(g) +
                 " lost the elite";
        }
      }
    }
    return std::nullopt;
  });
}

void killer_sudoku_section(Suite& suite, std::uint64_t seed) {
  namespace ks = killer_sudoku;

  suite.property("killersudoku/all-ones-counts", 4, seed, [](std::uint64_t s) -> Check {
    const auto g = ks::generate(2, s, 3);
    const auto v = ks::violations(g.instance, ks::Grid(4, 1));
    if (v.rows != 12 || v.cols != 12 || v.boxes != 12) {
      return "rows/cols/boxes " + std::to_string(v.rows) + "/" + std::to_string(v.cols) + "/" +
             std::to_string(v.boxes) + ", expected 12/12/12";
    }
    return std::nullopt;
  });

  suite.property("killersudoku/generator-brute-force", 4, seed, [](std::uint64_t s) -> Check {
    for (std::uint64_t k = 0; k < 20; ++k) {
      const auto g = ks::generate(2, s + k, 3);
      if (ks::violations(g.instance, g.solution).total != 0.0) {
        return "seed " + std::to_string(s + k) + ": reference solution violates the rules";
      }
      const auto all = ks::brute_force_solve(g.instance);
      if (std::find(all.begin(), all.end(), g.solution) == all.end()) {
        return "seed " + std::to_string(s + k) + ": brute force misses the reference solution";
      }
    }
    return std::nullopt;
  });

  suite.property("killersudoku/detector-sud-kak", 4, seed, [](std::uint64_t s) -> Check {
    auto inst = std::make_shared<const ks::Instance>(ks::generate(2, s, 3).instance);
    const auto problem = ks::as_composite(inst);
    const auto sud = problem.find(ks::kSudokuComponent);
    const auto kak = problem.find(ks::kCageComponent);
    if (!detect_dependency(problem, sud, kak, 6, s).dependent) return "KAK <- SUD not detected";
    if (!detect_dependency(problem, kak, sud, 3, s).dependent) return "SUD <- KAK not detected";
    return std::nullopt;
  });

  suite.property("killersudoku/jls-joint-local-optimum", 4, seed, [](std::uint64_t s) -> Check {
    const auto inst = std::make_shared<const ks::Instance>(ks::generate(2, s, 3).instance);
    const auto problem = ks::as_composite(inst);
    for (std::uint64_t k = 0; k < 20; ++k) {
      const auto init = initial_solution(problem, s + k);
      const auto r = joint_local_search(problem, init, StopCondition::defaults(),
                                        LocalSearchPolicy::first_improvement_restart, s + k);
      if (r.stop_reason != StopReason::stale) continue;
      if (auto v = local_optimum_violation(problem, r.best, r.best_value)) {
        return "seed " + std::to_string(s + k) + ": " + *v;
      }
    }
    return std::nullopt;
  });
}

}  // namespace

std::vector<PropertyResult> run(const Options& options) {
  static const std::vector<std::string> kinds = {"all", "core", "ttp", "killersudoku"};
  if (std::find(kinds.begin(), kinds.end(), options.kind) == kinds.end()) {
    throw InvalidConfig("unknown verify kind '" + options.kind + "'");
  }
  for (const auto& f : options.faults) {
    if (std::find(fault_names().begin(), fault_names().end(), f) == fault_names().end()) {
      throw InvalidConfig("unknown fault '" + f + "'");
    }
  }
  Suite suite(options);
  const bool all = options.kind == "all";
  if (all || options.kind == "core") core_section(suite, options.seed);
  if (all || options.kind == "ttp") ttp_section(suite, options.seed);
  if (all || options.kind == "killersudoku") killer_sudoku_section(suite, options.seed);
  return std::move(suite.results());
}

}  // namespace mcopt::verify
