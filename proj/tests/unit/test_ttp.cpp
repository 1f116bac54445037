#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "mcopt/cosolver.hpp"
#include "mcopt/search.hpp"

using namespace mcopt;

namespace {

oracle::Ttp to_oracle(const ttp::Instance& inst) {
  oracle::Ttp t;
  t.dist.assign(inst.city_count, std::vector<double>(inst.city_count));
  for (std::size_t a = 0; a < inst.city_count; ++a)
    for (std::size_t b = 0; b < inst.city_count; ++b) t.dist[a][b] = inst.distance(a, b);
  for (const auto& item : inst.items) {
    t.profit.push_back(item.profit);
    t.weight.push_back(item.weight);
    t.city.push_back(static_cast<int>(item.city));
  }
  t.capacity = inst.capacity;
  t.vmin = inst.min_speed;
  t.vmax = inst.max_speed;
  t.rent = inst.renting_rate;
  return t;
}

ttp::Instance parse_text(const std::string& body) {
  std::istringstream in(body);
  return ttp::parse(in, "mem");
}

std::size_t error_line(const std::string& body) {
  try {
    parse_text(body);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

std::string read_all(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kHeader =
    "PROBLEM NAME: t\n"
    "KNAPSACK DATA TYPE: x\n"
    "DIMENSION: 3\n"
    "NUMBER OF ITEMS: 2\n"
    "CAPACITY OF KNAPSACK: 10\n"
    "MIN SPEED: 0.1\n"
    "MAX SPEED: 1\n"
    "RENTING RATIO: 1\n"
    "EDGE_WEIGHT_TYPE: EUC_2D\n";

}  // namespace

TEST_SUITE("ttp") {
  TEST_CASE("tour time on the two-city matrix instance") {
    const auto inst = ttp::parse_file(fixtures::data("ttp_2_matrix.ttp"));
    CHECK(inst.source == ttp::DistanceSource::matrix);
    CHECK(inst.distance(0, 1) == 10.0);
    CHECK(ttp::tour_time(inst, {0, 1}, {0}) == doctest::Approx(20.0));
    // 5 of 10 capacity: speed 1 - 0.5 * 0.9 = 0.55 on the way back
    CHECK(ttp::tour_time(inst, {0, 1}, {1}) == doctest::Approx(10.0 + 10.0 / 0.55));

    const auto full = ttp::from_matrix({{0, 10}, {10, 0}}, {{30, 10, 1}}, 10, 0.1, 1.0, 1.0);
    CHECK(ttp::tour_time(full, {0, 1}, {1}) == doctest::Approx(10.0 + 100.0));
    CHECK_THROWS_AS(ttp::tour_time(full, {0, 1}, {2}), InvalidSolution);
    const auto tight = ttp::from_matrix({{0, 10}, {10, 0}}, {{30, 11, 1}}, 10, 0.1, 1.0, 1.0);
    CHECK_THROWS_AS(ttp::tour_time(tight, {0, 1}, {1}), CapacityExceeded);
    CHECK_THROWS_AS(ttp::tour_time(full, {1, 0}, {0}), InvalidSolution);
  }

  TEST_CASE("objective agrees with the reference evaluator on random instances") {
    std::mt19937_64 rng(77);
    for (int k = 0; k < 1000; ++k) {
      ttp::GenerateParams gp;
      gp.cities = 2 + rng() % 6;
      gp.items = rng() % 7;
      gp.seed = rng();
      const auto inst = ttp::generate(gp);
      const auto t = to_oracle(inst);
      std::vector<int> tour(inst.city_count);
      std::iota(tour.begin(), tour.end(), 0);
      std::shuffle(tour.begin() + 1, tour.end(), rng);
      std::vector<int> plan(inst.items.size(), 0);
      for (auto& bit : plan) {
        bit = rng() % 2;
        if (oracle::ttp_weight(t, plan) > t.capacity) bit = 0;
      }
      const double expected = oracle::ttp_value(t, tour, plan);
      CHECK(ttp::objective(inst, {tour, plan}) == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  TEST_CASE("coordinate distances are Euclidean, optionally rounded") {
    const auto inst = *fixtures::ttp_4_3();
    CHECK(inst.distance(1, 2) == doctest::Approx(std::sqrt(29.0)));
    ttp::ParseOptions rounded;
    rounded.round_distances = true;
    const auto r = ttp::parse_file(fixtures::data("ttp_4_3.ttp"), rounded);
    CHECK(r.distance(1, 2) == 5.0);
    CHECK(r.distance(0, 3) == 7.0);  // sqrt(53) = 7.28
  }

  TEST_CASE("more weight never shortens the tour") {
    const auto inst = *fixtures::ttp_4_3();
    const std::vector<int> tour{0, 2, 3, 1};
    const double none = ttp::tour_time(inst, tour, {0, 0, 0});
    for (const auto& plan : oracle::all_plans(oracle::ttp_fixture())) {
      const double t = ttp::tour_time(inst, tour, plan);
      CHECK(t >= none);
      for (std::size_t j = 0; j < 3; ++j) {
        auto more = plan;
        if (more[j]) continue;
        more[j] = 1;
        if (oracle::ttp_weight(oracle::ttp_fixture(), more) > 50) continue;
        CHECK(ttp::tour_time(inst, tour, more) >= t);
      }
    }
  }

  TEST_CASE("brute force on two cities takes the item") {
    const auto inst = ttp::parse_file(fixtures::data("ttp_2_matrix.ttp"));
    const auto bf = ttp::brute_force_solve(inst);
    REQUIRE(bf.optima.size() == 1);
    CHECK(bf.optima[0].plan == std::vector<int>{1});
    CHECK(bf.value == doctest::Approx(30.0 - 10.0 - 10.0 / 0.55));
    CHECK(bf.evaluated == 2);
  }

  TEST_CASE("golden optimum of the 4-city fixture") {
    std::ifstream in(fixtures::data("ttp_4_3.golden"));
    std::string key, line;
    double value = 0;
    std::vector<int> tour(4), plan(3);
    while (in >> key) {
      if (key == "#") std::getline(in, line);
      else if (key == "value") in >> value;
      else if (key == "tour") for (auto& v : tour) in >> v;
      else if (key == "plan") for (auto& v : plan) in >> v;
    }
    const auto bf = ttp::brute_force_solve(*fixtures::ttp_4_3());
    CHECK(bf.value == doctest::Approx(value).epsilon(1e-12));
    CHECK(std::find(bf.optima.begin(), bf.optima.end(), ttp::Solution{tour, plan}) != bf.optima.end());
    CHECK(bf.value == doctest::Approx(oracle::ttp_optimum(oracle::ttp_fixture())).epsilon(1e-12));
    CHECK(bf.evaluated == 6 * oracle::all_plans(oracle::ttp_fixture()).size());
    CHECK_THROWS_AS(ttp::brute_force_solve(*fixtures::ttp_4_3(), 10), SpaceTooLarge);
  }

  TEST_CASE("without rent the plan no longer depends on the tour") {
    const auto t = oracle::ttp_fixture(0.0);
    const auto problem = ttp::as_composite(fixtures::ttp_4_3(0.0));
    for (const auto& tour : oracle::all_tours(4)) {
      CHECK(oracle::ttp_best_plans(t, tour) == std::set<std::vector<int>>{{1, 1, 0}});
      const auto opt = conditional_optima(problem, CompositeSolution{{tour, {0, 0, 0}}}, 1);
      CHECK(opt.value == doctest::Approx(70.0));
      CHECK(opt.optima == std::set<Part>{{1, 1, 0}});
    }
  }

  TEST_CASE("joint neighborhood size is swaps times feasible flips") {
    const auto inst = fixtures::ttp_4_3();
    const CompositeSolution s{{{0, 1, 2, 3}, {1, 0, 0}}};
    const auto plain = ttp::as_composite(inst, {false});
    // 3 swaps; flips of items 0 and 1 fit, item 2 would reach 55 > 50
    CHECK(joint_neighborhood_of(plain, s).size() == 3 * 2);
    const auto with_id = ttp::as_composite(inst);
    CHECK(joint_neighborhood_of(with_id, s).size() == 4 * 3);
  }

  TEST_CASE("parser reports the offending line") {
    const std::string coords = "NODE_COORD_SECTION\n1 0 0\n2 3 4\n3 6 8\n";
    const std::string items = "ITEMS SECTION\n1 5 4 2\n2 6 3 3\n";
    CHECK_NOTHROW(parse_text(kHeader + coords + items));
    CHECK(error_line(std::string(kHeader) + "COLOUR: red\n" + coords + items) == 10);
    CHECK(error_line(std::string(kHeader) + "DIMENSION: 3\n" + coords + items) == 10);
    CHECK(error_line(kHeader + coords + "ITEMS SECTION\n1 5 4 2\n1 6 3 3\n") == 16);
    CHECK(error_line(kHeader + coords + "ITEMS SECTION\n1 5 4 1\n2 6 3 3\n") == 15);
    CHECK(error_line(kHeader + std::string("NODE_COORD_SECTION\n1 0 0\n2 3\n3 6 8\n") + items) == 12);
    CHECK(error_line(kHeader + std::string("NODE_COORD_SECTION\n1 0 0\n2 3 x\n3 6 8\n") + items) == 12);
    CHECK(error_line(kHeader + std::string("NODE_COORD_SECTION\n1 0 0\n1 3 4\n3 6 8\n") + items) == 12);
    std::string missing = kHeader;
    missing.erase(missing.find("MIN SPEED"), std::string("MIN SPEED: 0.1\n").size());
    CHECK(error_line(missing + coords + items) > 0);
    CHECK_THROWS_AS(ttp::parse_file(fixtures::data("does-not-exist.ttp")), ParseError);
  }

  TEST_CASE("serialize and parse round-trip") {
    for (const char* name : {"ttp_4_3.ttp", "ttp_2_matrix.ttp"}) {
      const auto once = ttp::serialize(ttp::parse_file(fixtures::data(name)));
      CHECK(ttp::serialize(parse_text(once)) == once);
      const auto a = ttp::parse_file(fixtures::data(name));
      const auto b = parse_text(once);
      CHECK(a.distances == b.distances);
    }
    CHECK(ttp::serialize(ttp::parse_file(fixtures::data("ttp_4_3.ttp"))) == read_all(fixtures::data("ttp_4_3.ttp")));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      ttp::GenerateParams gp;
      gp.seed = seed;
      const auto text = ttp::serialize(ttp::generate(gp));
      CHECK(ttp::serialize(parse_text(text)) == text);
    }
  }

  TEST_CASE("generator: distinct valid instances per seed") {
    std::set<std::string> seen;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      ttp::GenerateParams gp;
      gp.seed = seed;
      const auto inst = ttp::generate(gp);
      CHECK_NOTHROW(inst.validate());
      CHECK(inst.city_count == 10);
      CHECK(inst.items.size() == 9);
      double total = 0;
      for (const auto& item : inst.items) {
        CHECK(item.city != 0);
        total += item.weight;
      }
      CHECK(inst.capacity <= total);
      CHECK(inst.renting_rate > 0);
      seen.insert(ttp::serialize(inst));
    }
    CHECK(seen.size() == 100);
    ttp::GenerateParams same;
    CHECK(ttp::serialize(ttp::generate(same)) == ttp::serialize(ttp::generate(same)));
    ttp::GenerateParams bad;
    bad.cities = 1;
    CHECK_THROWS_AS(ttp::generate(bad), InvalidConfig);
  }

  TEST_CASE("exact sub-solvers return a conditional optimum") {
    const auto inst = fixtures::ttp_4_3();
    const auto t = oracle::ttp_fixture();
    const auto plan_sub = ttp::subsolver_plan(inst, ttp::SubSolverMode::exact);
    const auto tour_sub = ttp::subsolver_tour(inst, ttp::SubSolverMode::exact);
    for (const auto& tour : oracle::all_tours(4)) {
      for (const auto& plan : oracle::all_plans(t)) {
        RunContext counter;
        const CompositeSolution ctx{{tour, plan}};
        const auto best_plan = plan_sub.solve(SolveRequest{ctx, 1, 1000, counter});
        CHECK(oracle::ttp_best_plans(t, tour).contains(best_plan));

        const auto best_tour = tour_sub.solve(SolveRequest{ctx, 0, 1000, counter});
        double top = -1e300;
        for (const auto& other : oracle::all_tours(4)) top = std::max(top, oracle::ttp_value(t, other, plan));
        CHECK(oracle::ttp_value(t, best_tour, plan) == doctest::Approx(top));
      }
    }
  }

  TEST_CASE("local sub-solvers never worsen their context") {
    const auto inst = fixtures::ttp_4_3();
    const auto t = oracle::ttp_fixture();
    const std::vector<SubSolver> subs{ttp::subsolver_tour(inst), ttp::subsolver_plan(inst)};
    for (const auto& tour : oracle::all_tours(4)) {
      for (const auto& plan : oracle::all_plans(t)) {
        for (const auto& sub : subs) {
          RunContext counter;
          CompositeSolution ctx{{tour, plan}};
          const double before = oracle::ttp_value(t, tour, plan);
          ctx.parts[sub.component] = sub.solve(SolveRequest{ctx, sub.component, 1000, counter});
          CHECK(oracle::ttp_value(t, ctx.parts[0], ctx.parts[1]) >= before);
        }
      }
    }
  }
}
