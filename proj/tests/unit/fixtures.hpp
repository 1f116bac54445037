#pragma once

#include <memory>
#include <random>
#include <string>

#include "mcopt/core.hpp"
#include "mcopt/killer_sudoku.hpp"
#include "mcopt/ttp.hpp"
#include "oracles.hpp"

namespace fixtures {

inline std::string data(const std::string& name) { return std::string(MCOPT_TEST_DATA) + "/" + name; }

inline std::shared_ptr<const mcopt::ttp::Instance> ttp_4_3(double rent = 1.0) {
  auto inst = mcopt::ttp::parse_file(data("ttp_4_3.ttp"));
  inst.renting_rate = rent;
  return std::make_shared<const mcopt::ttp::Instance>(std::move(inst));
}

inline oracle::KsGrid to_rows(const mcopt::killer_sudoku::Grid& g) {
  oracle::KsGrid rows(g.n(), std::vector<int>(g.n()));
  for (int r = 0; r < g.n(); ++r)
    for (int c = 0; c < g.n(); ++c) rows[r][c] = g.at(r, c);
  return rows;
}

inline std::vector<oracle::KsCage> to_cages(const mcopt::killer_sudoku::Instance& inst) {
  std::vector<oracle::KsCage> out;
  for (const auto& cage : inst.cages) {
    oracle::KsCage c{cage.target, {}};
    for (const auto& cell : cage.cells) c.cells.emplace_back(cell.row, cell.col);
    out.push_back(std::move(c));
  }
  return out;
}

/// Integer components A in 0..range_a-1 and B in 0..range_b-1 with
/// objective f(a) + g(b).
inline mcopt::CompositeProblem additive(int range_a = 6, int range_b = 4) {
  using namespace mcopt;
  auto make = [](std::string name, int range) {
    Component c;
    c.name = std::move(name);
    c.check = [range](const Part& p) -> std::optional<std::string> {
      if (p.size() != 1 || p[0] < 0 || p[0] >= range) return "out of range";
      return std::nullopt;
    };
    c.initial = [range](Rng& rng) { return Part{std::uniform_int_distribution<int>(0, range - 1)(rng)}; };
    c.neighborhood = [range](const Part& p) {
      return Neighborhood::from_moves(
          p, 2, [range](const Part& s, std::size_t k) { return Part{(s[0] + (k ? range - 1 : 1)) % range}; },
          true);
    };
    c.crossover = [](const Part& a, const Part& b, Rng& rng) {
      return std::bernoulli_distribution(0.5)(rng) ? a : b;
    };
    c.enumerate = [range](const std::function<void(const Part&)>& visit) {
      for (int v = 0; v < range; ++v) visit(Part{v});
    };
    c.space_size = [range] { return double(range); };
    return c;
  };
  return CompositeProblem({make("A", range_a), make("B", range_b)}, DependencyGraph(2),
                          [](const CompositeSolution& s) {
                            const int a = s.parts[0][0], b = s.parts[1][0];
                            return -(a - 2) * (a - 2) + 3.0 * (b % 3);
                          },
                          Orientation::maximize);
}

}  // namespace fixtures
