#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"

using namespace mcopt;
using killer_sudoku::Grid;

namespace {

killer_sudoku::Instance parse_text(const std::string& body) {
  std::istringstream in(body);
  return killer_sudoku::parse(in, "mem");
}

std::size_t error_line(const std::string& body) {
  try {
    parse_text(body);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

/// One single-cell cage per cell holding that cell's digit.
killer_sudoku::Instance singletons(const Grid& g, int box) {
  killer_sudoku::Instance inst;
  inst.box_size = box;
  for (int r = 0; r < g.n(); ++r)
    for (int c = 0; c < g.n(); ++c) inst.cages.push_back({g.at(r, c), {{r, c}}});
  return inst;
}

Grid relabel(const Grid& g, const std::vector<int>& map) {
  Grid out = g;
  for (int r = 0; r < g.n(); ++r)
    for (int c = 0; c < g.n(); ++c) out.at(r, c) = map[g.at(r, c)];
  return out;
}

}  // namespace

TEST_SUITE("killer_sudoku") {
  TEST_CASE("violation counts match the reference counter on random grids") {
    std::mt19937_64 rng(3);
    int solved = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto gen = killer_sudoku::generate(2, seed, 1 + seed % 4);
      const auto cages = fixtures::to_cages(gen.instance);
      // mix random grids with near-solutions so both sides of the iff are hit
      Grid g = gen.solution;
      const int noise = seed % 3 == 0 ? 0 : 1 + rng() % 6;
      for (int k = 0; k < noise; ++k) g.at(rng() % 4, rng() % 4) = 1 + rng() % 4;
      const auto v = killer_sudoku::violations(gen.instance, g);
      const auto expected = oracle::ks_count(2, cages, fixtures::to_rows(g));
      CHECK(v.rows == expected.rows);
      CHECK(v.cols == expected.cols);
      CHECK(v.boxes == expected.boxes);
      CHECK(v.cage_duplicates == expected.cage_repeats);
      CHECK(v.cage_sum_deviation == expected.cage_sum);
      CHECK(v.total == expected.total());
      const bool ok = oracle::ks_is_solution(2, cages, fixtures::to_rows(g));
      CHECK((v.total == 0) == ok);
      solved += ok;
    }
    CHECK(solved >= 50);
  }

  TEST_CASE("swapping two different digits of a solved row breaks the grid") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto gen = killer_sudoku::generate(3, seed, 4);
      Grid g = gen.solution;
      std::swap(g.at(4, 0), g.at(4, 7));
      CHECK(killer_sudoku::violations(gen.instance, g).total > 0);
      CHECK(killer_sudoku::violations(gen.instance, g).cols > 0);
    }
  }

  TEST_CASE("a plain sudoku that misses a cage target scores above zero") {
    const auto gen = killer_sudoku::generate(2, 12, 3);
    const auto cages = fixtures::to_cages(gen.instance);
    bool tested = false;
    for (const auto& map : {std::vector<int>{0, 4, 3, 2, 1}, std::vector<int>{0, 2, 1, 4, 3},
                            std::vector<int>{0, 2, 3, 4, 1}}) {
      const Grid g = relabel(gen.solution, map);
      const auto expected = oracle::ks_count(2, cages, fixtures::to_rows(g));
      if (expected.cage_sum == 0) continue;
      const auto v = killer_sudoku::violations(gen.instance, g);
      CHECK(v.rows + v.cols + v.boxes == 0);
      CHECK(v.total > 0);
      tested = true;
    }
    CHECK(tested);
  }

  TEST_CASE("digits outside 1..n are rejected") {
    const auto gen = killer_sudoku::generate(2, 1, 3);
    Grid g = gen.solution;
    g.at(0, 0) = 0;
    CHECK_THROWS_AS(killer_sudoku::violations(gen.instance, g), DigitOutOfRange);
    g.at(0, 0) = 5;
    CHECK_THROWS_AS(killer_sudoku::violations(gen.instance, g), DigitOutOfRange);
    CHECK_THROWS_AS(killer_sudoku::violations(gen.instance, Grid(9, 1)), DigitOutOfRange);
  }

  TEST_CASE("generator output is a valid puzzle with its reference solution") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const int box = seed % 5 == 0 ? 3 : 2;
      const int max_cage = 2 + seed % 3;
      const auto gen = killer_sudoku::generate(box, seed, max_cage);
      const int n = box * box;
      CHECK_NOTHROW(gen.instance.validate());
      int total = 0;
      std::set<std::pair<int, int>> covered;
      for (const auto& cage : gen.instance.cages) {
        total += cage.target;
        CHECK(static_cast<int>(cage.cells.size()) <= max_cage);
        std::vector<std::pair<int, int>> cells;
        for (const auto& c : cage.cells) cells.emplace_back(c.row, c.col);
        CHECK(oracle::connected(cells));
        covered.insert(cells.begin(), cells.end());
      }
      CHECK(covered.size() == static_cast<std::size_t>(n * n));
      CHECK(total == n * n * (n + 1) / 2);
      CHECK(oracle::ks_is_solution(box, fixtures::to_cages(gen.instance), fixtures::to_rows(gen.solution)));
      CHECK(killer_sudoku::violations(gen.instance, gen.solution).total == 0);
    }
    CHECK_THROWS_AS(killer_sudoku::generate(4, 0, 3), InvalidConfig);
  }

  TEST_CASE("brute force finds the reference solution, and only solutions") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto gen = killer_sudoku::generate(2, seed, 3);
      const auto all = killer_sudoku::brute_force_solve(gen.instance);
      CHECK(std::find(all.begin(), all.end(), gen.solution) != all.end());
      const auto cages = fixtures::to_cages(gen.instance);
      for (const auto& g : all) CHECK(oracle::ks_is_solution(2, cages, fixtures::to_rows(g)));
    }
    CHECK_THROWS_AS(killer_sudoku::brute_force_solve(killer_sudoku::generate(3, 0, 3).instance),
                    SpaceTooLarge);
  }

  TEST_CASE("singleton cages pin a unique grid; inconsistent pins have none") {
    const auto gen = killer_sudoku::generate(2, 4, 3);
    const auto pinned = singletons(gen.solution, 2);
    const auto one = killer_sudoku::brute_force_solve(pinned);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == gen.solution);

    Grid swapped = gen.solution;
    std::swap(swapped.at(0, 0), swapped.at(0, 1));
    CHECK(killer_sudoku::brute_force_solve(singletons(swapped, 2)).empty());
  }

  TEST_CASE("composite view: displayed grid and move closure") {
    auto inst = std::make_shared<const killer_sudoku::Instance>(killer_sudoku::generate(2, 9, 4).instance);
    const auto problem = killer_sudoku::as_composite(inst);
    const auto gen = killer_sudoku::generate(2, 9, 4);
    CHECK(killer_sudoku::displayed_grid(*inst, killer_sudoku::from_grid(*inst, gen.solution)) == gen.solution);

    Rng rng(4);
    auto s = initial_solution(problem, 1);
    for (int i = 0; i < 10'000; ++i) {
      const auto c = rng() % 2;
      s.parts[c] = random_move(problem.component(c), s.parts[c], rng);
      REQUIRE_NOTHROW(validate(problem, s));
      // every row of the displayed grid holds n digits in range
      const auto g = killer_sudoku::displayed_grid(*inst, s);
      for (int d : g.cells()) REQUIRE((d >= 1 && d <= 4));
    }
    const auto score = evaluate(problem, s);
    CHECK(score == killer_sudoku::violations(*inst, killer_sudoku::displayed_grid(*inst, s)).total);
  }

  TEST_CASE("parser reports the offending line") {
    CHECK_NOTHROW(parse_text(killer_sudoku::serialize(killer_sudoku::generate(2, 0, 3).instance)));
    CHECK(error_line("sudoku 2\n") == 1);
    CHECK(error_line("killersudoku 1\n") == 1);
    CHECK(error_line("# comment\n\nkillersudoku 2\nbox 3 0,0\n") == 4);
    CHECK(error_line("killersudoku 2\ncage x 0,0\n") == 2);
    CHECK(error_line("killersudoku 2\ncage 3 0,0\ncage 4 0;1\n") == 3);
    CHECK(error_line("killersudoku 2\ncage 3 0,0 0,1\ncage 4 0,1\n") == 3);
    CHECK(error_line("killersudoku 2\ncage 3 0,4\n") == 2);
    CHECK(error_line("killersudoku 2\ncage 9 0,0 0,1\n") == 2);
    // complete partition with the wrong total is reported at the last cage
    std::string body = "killersudoku 2\n";
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) body += "cage 1 " + std::to_string(r) + "," + std::to_string(c) + "\n";
    CHECK(error_line(body) == 17);
    CHECK(error_line("killersudoku 2\ncage 3 0,0 0,1\n") == 2);  // cells left uncovered
  }

  TEST_CASE("serialize and parse round-trip") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto text = killer_sudoku::serialize(killer_sudoku::generate(2 + seed % 2, seed, 4).instance);
      CHECK(killer_sudoku::serialize(parse_text(text)) == text);
    }
  }
}
