#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mcopt/core.hpp"

/// Killer Sudoku: sudoku rules and cage-sum rules over one grid.
namespace mcopt::killer_sudoku {

inline constexpr const char* kSudokuComponent = "SUD";
inline constexpr const char* kCageComponent = "KAK";

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct Cage {
  int target = 0;
  std::vector<Cell> cells;
};

struct Instance {
  int box_size = 2;
  std::vector<Cage> cages;

  [[nodiscard]] int n() const { return box_size * box_size; }
  /// Throws InvalidInstance on partition, size or sum violations.
  void validate() const;
};

/// n x n digits, row-major.
class Grid {
 public:
  Grid() = default;
  explicit Grid(int n, int fill = 1) : n_(n), cells_(static_cast<std::size_t>(n * n), fill) {}
  Grid(int n, std::vector<int> cells);

  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] int at(int row, int col) const { return cells_[row * n_ + col]; }
  int& at(int row, int col) { return cells_[row * n_ + col]; }
  [[nodiscard]] const std::vector<int>& cells() const { return cells_; }

  friend bool operator==(const Grid&, const Grid&) = default;
  friend auto operator<=>(const Grid&, const Grid&) = default;

 private:
  int n_ = 0;
  std::vector<int> cells_;
};

struct ViolationWeights {
  double rows = 1.0;
  double cols = 1.0;
  double boxes = 1.0;
  double cage_duplicates = 1.0;
  double cage_sum = 1.0;
  /// Standard rule: no digit repeats inside a cage.
  bool cage_no_repeat = true;
};

struct Violations {
  int rows = 0;
  int cols = 0;
  int boxes = 0;
  int cage_duplicates = 0;
  int cage_sum_deviation = 0;
  double total = 0.0;
};

/// Duplicates per unit are (cells - distinct digits); cage sums contribute
/// |sum - target|. Throws DigitOutOfRange.
Violations violations(const Instance& instance, const Grid& grid,
                      const ViolationWeights& weights = {});

struct Generated {
  Instance instance;
  Grid solution;
};

/// Random valid grid, then a random partition into connected cages of at most
/// `max_cage_size` cells with no repeated digit. Box size 2 or 3.
Generated generate(int box_size, std::uint64_t seed, int max_cage_size);

/// Every grid with zero violations. Restricted to box size <= `max_box_size`;
/// throws SpaceTooLarge beyond.
std::vector<Grid> brute_force_solve(const Instance& instance, const ViolationWeights& weights = {},
                                    int max_box_size = 2);

/// SUD: base grid whose rows are permutations (swap two cells of a row).
/// KAK: per-cage permutation of cell contents (swap two cells of a cage).
/// The displayed grid is KAK applied to SUD; objective is its violation total
/// (minimize); SUD <-> KAK.
CompositeProblem as_composite(std::shared_ptr<const Instance> instance,
                              const ViolationWeights& weights = {}, bool include_identity = true);

/// Grid described by a composite solution of as_composite().
Grid displayed_grid(const Instance& instance, const CompositeSolution& solution);

/// Composite solution whose displayed grid is `grid` (identity cage permutations).
CompositeSolution from_grid(const Instance& instance, const Grid& grid);

Instance parse(std::istream& in, const std::string& source_name = "<input>");
Instance parse_file(const std::string& path);
std::string serialize(const Instance& instance);

}  // namespace mcopt::killer_sudoku
