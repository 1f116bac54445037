#include <doctest.h>

#include <cmath>
#include <cstring>

#include "fixtures.hpp"
#include "mcopt/search.hpp"

using namespace mcopt;

namespace {

bool bit_identical(const RunResult& a, const RunResult& b) {
  if (a.best != b.best || a.evaluations != b.evaluations || a.iterations != b.iterations ||
      a.trajectory.size() != b.trajectory.size() || a.stop_reason != b.stop_reason) {
    return false;
  }
  if (std::memcmp(&a.best_value, &b.best_value, sizeof(double)) != 0) return false;
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    if (a.trajectory[i].evaluation != b.trajectory[i].evaluation ||
        a.trajectory[i].value != b.trajectory[i].value) {
      return false;
    }
  }
  return true;
}

void check_monotone(const CompositeProblem& p, const RunResult& r) {
  for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
    CHECK(p.better(r.trajectory[i].value, r.trajectory[i - 1].value));
    CHECK(r.trajectory[i].evaluation >= r.trajectory[i - 1].evaluation);
  }
  CHECK(evaluate(p, r.best) == r.best_value);
}

// One integer part; every proposal is worse by exactly `step`.
CompositeProblem downhill(double step) {
  Component c;
  c.name = "X";
  c.check = [](const Part& p) -> std::optional<std::string> {
    return p.size() == 1 ? std::nullopt : std::optional<std::string>("one value");
  };
  c.initial = [](Rng&) { return Part{0}; };
  c.neighborhood = [](const Part& p) {
    return Neighborhood::from_moves(p, 1, [](const Part& s, std::size_t) { return Part{s[0] + 1}; }, false);
  };
  return CompositeProblem({c}, DependencyGraph(1),
                          [step](const CompositeSolution& s) { return step * s.parts[0][0]; },
                          Orientation::minimize);
}

oracle::TtpPair as_pair(const CompositeSolution& s) { return {s.parts[0], s.parts[1]}; }

}  // namespace

TEST_SUITE("search") {
  TEST_CASE("stop condition validation") {
    CHECK_THROWS_AS(StopCondition{}.validate(), InvalidStopCondition);
    StopCondition zero;
    zero.max_stale_passes = 0;
    CHECK_THROWS_AS(zero.validate(), InvalidStopCondition);
    const auto d = StopCondition::defaults();
    CHECK(d.max_stale_passes == 1u);
    CHECK(d.max_evaluations == 1'000'000u);
  }

  TEST_CASE("policy names round-trip") {
    for (auto p : {LocalSearchPolicy::first_improvement_restart, LocalSearchPolicy::best_improvement_pass,
                   LocalSearchPolicy::paper_literal}) {
      CHECK(parse_local_search_policy(to_string(p)) == p);
    }
    CHECK_FALSE(parse_local_search_policy("greedy").has_value());
  }

  TEST_CASE("starting at a joint local optimum changes nothing") {
    const auto problem = ttp::as_composite(fixtures::ttp_4_3());
    const CompositeSolution best{{{0, 3, 2, 1}, {1, 0, 0}}};
    REQUIRE(oracle::ttp_joint_local_optimum(oracle::ttp_fixture(), as_pair(best)));
    const auto r = joint_local_search(problem, best, StopCondition::defaults());
    CHECK(r.best == best);
    CHECK(r.accepted_moves == 0);
    CHECK(r.stop_reason == StopReason::stale);
  }

  TEST_CASE("local search ends in the oracle's joint local optima") {
    const auto problem = ttp::as_composite(fixtures::ttp_4_3());
    const auto optima = oracle::ttp_joint_local_optima(oracle::ttp_fixture());
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto init = initial_solution(problem, seed);
      const auto r = joint_local_search(problem, init, StopCondition::defaults(),
                                        LocalSearchPolicy::first_improvement_restart, seed);
      REQUIRE(r.stop_reason == StopReason::stale);
      CHECK(optima.contains(as_pair(r.best)));
      CHECK_FALSE(problem.better(evaluate(problem, init), r.best_value));
      check_monotone(problem, r);
    }
  }

  TEST_CASE("every policy is monotone and never worse than its start") {
    const auto problem = ttp::as_composite(fixtures::ttp_4_3());
    const auto optima = oracle::ttp_joint_local_optima(oracle::ttp_fixture());
    for (auto policy : {LocalSearchPolicy::best_improvement_pass, LocalSearchPolicy::paper_literal}) {
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto init = initial_solution(problem, seed);
        const auto r = joint_local_search(problem, init, StopCondition::defaults(), policy, seed);
        CHECK_FALSE(problem.better(evaluate(problem, init), r.best_value));
        check_monotone(problem, r);
        if (policy == LocalSearchPolicy::best_improvement_pass) CHECK(optima.contains(as_pair(r.best)));
      }
    }
  }

  TEST_CASE("local search is seed-deterministic") {
    auto ks = std::make_shared<const killer_sudoku::Instance>(killer_sudoku::generate(2, 4, 3).instance);
    const auto problem = killer_sudoku::as_composite(ks);
    const auto init = initial_solution(problem, 9);
    CHECK(bit_identical(joint_local_search(problem, init, StopCondition::defaults()),
                        joint_local_search(problem, init, StopCondition::defaults())));
  }

  TEST_CASE("evaluation cap and target stop the search") {
    auto ks = std::make_shared<const killer_sudoku::Instance>(killer_sudoku::generate(2, 4, 3).instance);
    const auto problem = killer_sudoku::as_composite(ks);
    StopCondition capped;
    capped.max_evaluations = 37;
    const auto r = joint_local_search(problem, initial_solution(problem, 1), capped);
    CHECK(r.evaluations <= 37);

    StopCondition target;
    target.target_value = 1e9;  // any value satisfies a minimization target this loose
    target.max_evaluations = 1000;
    CHECK(joint_local_search(problem, initial_solution(problem, 1), target).stop_reason == StopReason::target);
  }

  TEST_CASE("ILS with zero perturbation repeats the first descent") {
    const auto problem = ttp::as_composite(fixtures::ttp_4_3());
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto init = initial_solution(problem, seed);
      const auto ls = joint_local_search(problem, init, StopCondition::defaults(),
                                         LocalSearchPolicy::first_improvement_restart, seed);
      IlsParams params;
      params.perturbation_strength = {0, 0};
      params.max_restarts = 5;
      StopCondition stop;
      stop.max_stale_passes = 1;
      const auto ils = iterated_local_search(problem, init, stop, params, seed);
      CHECK(ils.best == ls.best);
      CHECK(ils.stop_reason == StopReason::restarts);
    }
  }

  TEST_CASE("ILS is never worse than its first local optimum and respects the budget") {
    auto ks = std::make_shared<const killer_sudoku::Instance>(killer_sudoku::generate(2, 8, 3).instance);
    const auto problem = killer_sudoku::as_composite(ks);
    const auto pass = joint_neighborhood_of(problem, initial_solution(problem, 0)).size();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto init = initial_solution(problem, seed);
      const auto ls = joint_local_search(problem, init, StopCondition::defaults());
      StopCondition stop;
      stop.max_evaluations = 3000;
      stop.max_stale_passes = 1;
      const auto ils = iterated_local_search(problem, init, stop, {}, seed);
      CHECK(ils.best_value <= ls.best_value);
      CHECK(ils.evaluations <= 3000 + pass);
      check_monotone(problem, ils);
    }
  }

  TEST_CASE("ILS mean is no worse than plain local search on a multi-optimum 4x4 instance") {
    auto ks = std::make_shared<const killer_sudoku::Instance>(killer_sudoku::generate(2, 3, 3).instance);
    const auto problem = killer_sudoku::as_composite(ks);
    std::set<double> local_optimum_values;
    std::vector<double> ls_values, ils_values;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto init = initial_solution(problem, seed);
      const auto ls = joint_local_search(problem, init, StopCondition::defaults());
      if (ls.stop_reason == StopReason::stale) local_optimum_values.insert(ls.best_value);
      ls_values.push_back(ls.best_value);
      StopCondition stop;
      stop.max_evaluations = 5000;
      stop.max_stale_passes = 1;
      ils_values.push_back(iterated_local_search(problem, init, stop, {}, seed).best_value);
    }
    REQUIRE(local_optimum_values.size() >= 2);
    CHECK(oracle::mean(ils_values) <= oracle::mean(ls_values));
  }

  TEST_CASE("ILS argument checks") {
    const auto problem = ttp::as_composite(fixtures::ttp_4_3());
    IlsParams bad;
    bad.perturbation_strength = {1};
    CHECK_THROWS_AS(iterated_local_search(problem, initial_solution(problem, 0), StopCondition::defaults(),
                                          bad, 0),
                    InvalidConfig);
    StopCondition only_stale;
    only_stale.max_stale_passes = 1;
    CHECK_THROWS_AS(iterated_local_search(problem, initial_solution(problem, 0), only_stale, {}, 0),
                    InvalidStopCondition);
  }

  TEST_CASE("Metropolis rule") {
    Rng rng(1);
    CHECK_FALSE(metropolis_accepts(-1e-12, 0.0, rng));
    int accepted = 0;
    for (int i = 0; i < 10'000; ++i) accepted += metropolis_accepts(-std::log(2.0), 1.0, rng);
    CHECK(std::abs(accepted / 10'000.0 - 0.5) <= 0.02);
  }

  TEST_CASE("SA at T = 0 never accepts a worsening move") {
    const auto problem = downhill(1.0);
    StopCondition stop;
    stop.max_evaluations = 10'001;
    AnnealingSchedule s;
    s.initial_temperature = 0.0;
    s.cooling = 1.0;
    const auto r = simulated_annealing(problem, initial_solution(problem, 0), stop, s, 11);
    CHECK(r.iterations == 10'000);
    CHECK(r.accepted_worsening == 0);
    CHECK(r.best.parts[0][0] == 0);
  }

  TEST_CASE("SA accepts a T ln 2 worsening half the time") {
    const double t = 3.0;
    const auto problem = downhill(t * std::log(2.0));
    StopCondition stop;
    stop.max_evaluations = 10'001;
    AnnealingSchedule s;
    s.initial_temperature = t;
    s.cooling = 1.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto r = simulated_annealing(problem, initial_solution(problem, 0), stop, s, seed);
      const double rate = double(r.accepted_worsening) / double(r.iterations);
      CHECK(std::abs(rate - 0.5) <= 0.02);
      // best-ever is the start, never the final state
      CHECK(r.best.parts[0][0] == 0);
    }
  }

  TEST_CASE("SA returns the best-ever solution and is seed-deterministic") {
    auto ks = std::make_shared<const killer_sudoku::Instance>(killer_sudoku::generate(2, 2, 3).instance);
    const auto problem = killer_sudoku::as_composite(ks);
    StopCondition stop;
    stop.max_evaluations = 4000;
    AnnealingSchedule s;
    s.initial_temperature = 2.0;
    const auto a = simulated_annealing(problem, initial_solution(problem, 5), stop, s, 5);
    const auto b = simulated_annealing(problem, initial_solution(problem, 5), stop, s, 5);
    CHECK(bit_identical(a, b));
    for (const auto& point : a.trajectory) CHECK(a.best_value <= point.value);
    check_monotone(problem, a);
  }

  TEST_CASE("SA schedule validation") {
    const auto problem = downhill(1.0);
    auto run = [&](AnnealingSchedule s) {
      return simulated_annealing(problem, initial_solution(problem, 0), StopCondition::defaults(), s, 0);
    };
    AnnealingSchedule negative;
    negative.initial_temperature = -1;
    CHECK_THROWS_AS(run(negative), InvalidSchedule);
    AnnealingSchedule frozen;
    frozen.cooling = 0;
    CHECK_THROWS_AS(run(frozen), InvalidSchedule);
    AnnealingSchedule heating;
    heating.cooling = 1.5;
    CHECK_THROWS_AS(run(heating), InvalidSchedule);
  }
}
