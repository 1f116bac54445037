#include "mcopt/killer_sudoku.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <span>

namespace mcopt::killer_sudoku {

Grid::Grid(int n, std::vector<int> cells) : n_(n), cells_(std::move(cells)) {
  if (cells_.size() != static_cast<std::size_t>(n * n)) {
    throw std::invalid_argument("grid needs n*n cells");
  }
}

void Instance::validate() const {
  if (box_size < 2) throw InvalidInstance("box size must be >= 2");
  const int size = n();
  std::vector<int> owner(static_cast<std::size_t>(size * size), -1);
  long long total = 0;
  for (std::size_t c = 0; c < cages.size(); ++c) {
    const auto& cage = cages[c];
    const auto k = static_cast<int>(cage.cells.size());
    const std::string where = "cage " + std::to_string(c + 1);
    if (k == 0) throw InvalidInstance(where + " is empty");
    if (k > size) throw InvalidInstance(where + " has more than n cells");
    if (cage.target < k || cage.target > k * size) {
      throw InvalidInstance(where + " target " + std::to_string(cage.target) + " is unreachable");
    }
    for (const auto& cell : cage.cells) {
      if (cell.row < 0 || cell.row >= size || cell.col < 0 || cell.col >= size) {
        throw InvalidInstance(where + " has a cell outside the grid");
      }
      auto& slot = owner[cell.row * size + cell.col];
      if (slot != -1) throw InvalidInstance(where + " overlaps another cage");
      slot = static_cast<int>(c);
    }
    total += cage.target;
  }
  if (std::find(owner.begin(), owner.end(), -1) != owner.end()) {
    throw InvalidInstance("cages do not cover every cell");
  }
  const long long expected = static_cast<long long>(size) * size * (size + 1) / 2;
  if (total != expected) {
    throw InvalidInstance("cage targets sum to " + std::to_string(total) + ", expected " +
                          std::to_string(expected));
  }
}

// Violations ------------------------------------------------------------------

namespace {

/// (cells - distinct digits) of one unit, digits in 1..n.
int duplicates(const std::vector<int>& digits) {
  std::uint64_t mask = 0;
  for (int d : digits) mask |= std::uint64_t{1} << d;
  return static_cast<int>(digits.size()) - std::popcount(mask);
}

}  // namespace

Violations violations(const Instance& instance, const Grid& grid, const ViolationWeights& weights) {
  const int n = instance.n();
  if (grid.n() != n) throw DigitOutOfRange("grid size does not match the instance");
  for (int d : grid.cells()) {
    if (d < 1 || d > n) throw DigitOutOfRange("digit " + std::to_string(d) + " outside 1.." +
                                              std::to_string(n));
  }
  const int b = instance.box_size;
  Violations v;
  std::vector<int> unit(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) unit[c] = grid.at(r, c);
    v.rows += duplicates(unit);
  }
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) unit[r] = grid.at(r, c);
    v.cols += duplicates(unit);
  }
  for (int box = 0; box < n; ++box) {
    const int r0 = (box / b) * b;
    const int c0 = (box % b) * b;
    for (int i = 0; i < n; ++i) unit[i] = grid.at(r0 + i / b, c0 + i % b);
    v.boxes += duplicates(unit);
  }
  std::vector<int> cage_digits;
  for (const auto& cage : instance.cages) {
    cage_digits.clear();
    int sum = 0;
    for (const auto& cell : cage.cells) {
      cage_digits.push_back(grid.at(cell.row, cell.col));
      sum += cage_digits.back();
    }
    if (weights.cage_no_repeat) v.cage_duplicates += duplicates(cage_digits);
    v.cage_sum_deviation += std::abs(sum - cage.target);
  }
  v.total = weights.rows * v.rows + weights.cols * v.cols + weights.boxes * v.boxes +
            weights.cage_duplicates * v.cage_duplicates + weights.cage_sum * v.cage_sum_deviation;
  return v;
}

// Generator -------------------------------------------------------------------

Generated generate(int box_size, std::uint64_t seed, int max_cage_size) {
  if (box_size != 2 && box_size != 3) throw InvalidConfig("box size must be 2 or 3");
  if (max_cage_size < 1) throw InvalidConfig("max cage size must be >= 1");
  const int b = box_size;
  const int n = b * b;
  max_cage_size = std::min(max_cage_size, n);
  Rng rng(seed);

  // Pattern grid shuffled by validity-preserving symmetries.
  auto shuffled_blocks = [&]() {
    std::vector<int> bands(b), order;
    std::iota(bands.begin(), bands.end(), 0);
    std::shuffle(bands.begin(), bands.end(), rng);
    for (int band : bands) {
      std::vector<int> inner(b);
      std::iota(inner.begin(), inner.end(), 0);
      std::shuffle(inner.begin(), inner.end(), rng);
      for (int i : inner) order.push_back(band * b + i);
    }
    return order;
  };
  const auto rows = shuffled_blocks();
  const auto cols = shuffled_blocks();
  std::vector<int> relabel(n);
  std::iota(relabel.begin(), relabel.end(), 1);
  std::shuffle(relabel.begin(), relabel.end(), rng);

  Grid grid(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const int pr = rows[r];
      const int pc = cols[c];
      grid.at(r, c) = relabel[(b * (pr % b) + pr / b + pc) % n];
    }
  }

  // Connected cages with distinct digits.
  std::vector<int> owner(static_cast<std::size_t>(n * n), -1);
  std::vector<int> order(static_cast<std::size_t>(n * n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_int_distribution<int> cage_size(1, max_cage_size);
  Instance instance;
  instance.box_size = b;
  for (int start : order) {
    if (owner[start] != -1) continue;
    const int id = static_cast<int>(instance.cages.size());
    Cage cage;
    std::uint64_t digits = 0;
    auto add = [&](int index) {
      owner[index] = id;
      cage.cells.push_back({index / n, index % n});
      digits |= std::uint64_t{1} << grid.cells()[index];
    };
    add(start);
    const int wanted = cage_size(rng);
    while (static_cast<int>(cage.cells.size()) < wanted) {
      std::vector<int> frontier;
      for (const auto& cell : cage.cells) {
        const int dr[] = {-1, 1, 0, 0};
        const int dc[] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int r = cell.row + dr[k];
          const int c = cell.col + dc[k];
          if (r < 0 || r >= n || c < 0 || c >= n) continue;
          const int index = r * n + c;
          if (owner[index] != -1 || (digits >> grid.cells()[index]) & 1U) continue;
          if (std::find(frontier.begin(), frontier.end(), index) == frontier.end()) {
            frontier.push_back(index);
          }
        }
      }
      if (frontier.empty()) break;
      std::sort(frontier.begin(), frontier.end());
      std::uniform_int_distribution<std::size_t> pick(0, frontier.size() - 1);
      add(frontier[pick(rng)]);
    }
    for (const auto& cell : cage.cells) cage.target += grid.at(cell.row, cell.col);
    instance.cages.push_back(std::move(cage));
  }
  instance.validate();
  return {std::move(instance), std::move(grid)};
}

// Brute force -----------------------------------------------------------------

std::vector<Grid> brute_force_solve(const Instance& instance, const ViolationWeights& weights,
                                    int max_box_size) {
  instance.validate();
  if (instance.box_size > max_box_size) {
    throw SpaceTooLarge("brute force is limited to box size " + std::to_string(max_box_size));
  }
  const int n = instance.n();
  const int b = instance.box_size;
  std::vector<std::vector<int>> perms;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 1);
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<int> cage_of(static_cast<std::size_t>(n * n));
  for (std::size_t c = 0; c < instance.cages.size(); ++c) {
    for (const auto& cell : instance.cages[c].cells) cage_of[cell.row * n + cell.col] = static_cast<int>(c);
  }
  const auto cage_count = instance.cages.size();
  std::vector<int> cage_sum(cage_count, 0), cage_left(cage_count);
  std::vector<std::uint64_t> cage_mask(cage_count, 0);
  for (std::size_t c = 0; c < cage_count; ++c) {
    cage_left[c] = static_cast<int>(instance.cages[c].cells.size());
  }
  std::vector<std::uint64_t> col_mask(n, 0), box_mask(n, 0);
  const bool check_cols = weights.cols > 0.0;
  const bool check_boxes = weights.boxes > 0.0;
  const bool check_repeat = weights.cage_no_repeat && weights.cage_duplicates > 0.0;
  const bool check_sums = weights.cage_sum > 0.0;

  Grid grid(n);
  std::vector<Grid> solutions;

  auto place_row = [&](auto&& self, int r) -> void {
    if (r == n) {
      if (violations(instance, grid, weights).total == 0.0) solutions.push_back(grid);
      return;
    }
    for (const auto& p : perms) {
      bool ok = true;
      int c = 0;
      for (; c < n && ok; ++c) {
        const int d = p[c];
        const std::uint64_t bit = std::uint64_t{1} << d;
        const int box = (r / b) * b + c / b;
        const int cage = cage_of[r * n + c];
        const auto& target = instance.cages[cage].target;
        const int sum = cage_sum[cage] + d;
        const int left = cage_left[cage] - 1;
        if ((check_cols && (col_mask[c] & bit)) || (check_boxes && (box_mask[box] & bit)) ||
            (check_repeat && (cage_mask[cage] & bit)) ||
            (check_sums && (sum + left > target || sum + left * n < target))) {
          ok = false;
          break;
        }
        col_mask[c] |= bit;
        box_mask[box] |= bit;
        cage_mask[cage] |= bit;
        cage_sum[cage] = sum;
        cage_left[cage] = left;
        grid.at(r, c) = d;
      }
      if (ok) self(self, r + 1);
      // undo the cells placed so far (columns 0..c-1)
      for (int u = c - 1; u >= 0; --u) {
        const int d = p[u];
        const std::uint64_t bit = std::uint64_t{1} << d;
        const int box = (r / b) * b + u / b;
        const int cage = cage_of[r * n + u];
        col_mask[u] &= ~bit;
        box_mask[box] &= ~bit;
        cage_mask[cage] &= ~bit;
        cage_sum[cage] -= d;
        ++cage_left[cage];
      }
    }
  };
  place_row(place_row, 0);
  return solutions;
}

// Composite view ----------------------------------------------------------------

namespace {

struct CageLayout {
  std::vector<std::size_t> offsets;  // start of each cage inside the KAK part
  std::vector<std::pair<std::size_t, std::size_t>> swaps;
  double space = 1.0;
};

CageLayout layout_of(const Instance& instance) {
  CageLayout layout;
  std::size_t offset = 0;
  for (const auto& cage : instance.cages) {
    layout.offsets.push_back(offset);
    const auto k = cage.cells.size();
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) layout.swaps.emplace_back(offset + i, offset + j);
    }
    for (std::size_t f = 2; f <= k; ++f) layout.space *= static_cast<double>(f);
    offset += k;
  }
  layout.offsets.push_back(offset);
  return layout;
}

bool is_permutation_of(std::span<const int> values, int first, int last) {
  std::uint64_t mask = 0;
  for (int v : values) {
    if (v < first || v > last) return false;
    mask |= std::uint64_t{1} << (v - first);
  }
  return std::popcount(mask) == last - first + 1 &&
         static_cast<int>(values.size()) == last - first + 1;
}

}  // namespace

Grid displayed_grid(const Instance& instance, const CompositeSolution& solution) {
  const int n = instance.n();
  const auto& base = solution.parts.at(0);
  const auto& perm = solution.parts.at(1);
  Grid grid(n);
  std::size_t offset = 0;
  for (const auto& cage : instance.cages) {
    for (std::size_t j = 0; j < cage.cells.size(); ++j) {
      const auto& from = cage.cells[perm[offset + j]];
      grid.at(cage.cells[j].row, cage.cells[j].col) = base[from.row * n + from.col];
    }
    offset += cage.cells.size();
  }
  return grid;
}

CompositeSolution from_grid(const Instance& instance, const Grid& grid) {
  Part identity;
  for (const auto& cage : instance.cages) {
    for (std::size_t j = 0; j < cage.cells.size(); ++j) identity.push_back(static_cast<int>(j));
  }
  return CompositeSolution{{grid.cells(), std::move(identity)}};
}

CompositeProblem as_composite(std::shared_ptr<const Instance> instance,
                              const ViolationWeights& weights, bool include_identity) {
  instance->validate();
  const int n = instance->n();
  auto layout = std::make_shared<const CageLayout>(layout_of(*instance));

  std::vector<std::pair<int, int>> row_pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) row_pairs.emplace_back(i, j);
  }
  auto pairs = std::make_shared<const std::vector<std::pair<int, int>>>(std::move(row_pairs));

  Component sud;
  sud.name = kSudokuComponent;
  sud.check = [n](const Part& p) -> std::optional<std::string> {
    if (p.size() != static_cast<std::size_t>(n * n)) return "grid needs n*n cells";
    for (int r = 0; r < n; ++r) {
      if (!is_permutation_of(std::span<const int>(p).subspan(r * n, n), 1, n)) {
        return "row " + std::to_string(r + 1) + " is not a permutation of 1..n";
      }
    }
    return std::nullopt;
  };
  sud.initial = [n](Rng& rng) {
    Part p(static_cast<std::size_t>(n * n));
    for (int r = 0; r < n; ++r) {
      std::iota(p.begin() + r * n, p.begin() + (r + 1) * n, 1);
      std::shuffle(p.begin() + r * n, p.begin() + (r + 1) * n, rng);
    }
    return p;
  };
  sud.neighborhood = [n, pairs, include_identity](const Part& p) {
    return Neighborhood::from_moves(
        p, static_cast<std::size_t>(n) * pairs->size(),
        [n, pairs](const Part& src, std::size_t k) {
          const auto row = static_cast<int>(k / pairs->size());
          const auto& [a, b] = (*pairs)[k % pairs->size()];
          Part out = src;
          std::swap(out[row * n + a], out[row * n + b]);
          return out;
        },
        include_identity);
  };
  sud.crossover = [n](const Part& a, const Part& b, Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    Part child = a;
    for (int r = 0; r < n; ++r) {
      if (coin(rng)) std::copy(b.begin() + r * n, b.begin() + (r + 1) * n, child.begin() + r * n);
    }
    return child;
  };
  sud.enumerate = [n](const std::function<void(const Part&)>& visit) {
    std::vector<std::vector<int>> perms;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 1);
    do {
      perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::vector<std::size_t> digit(n, 0);
    Part p(static_cast<std::size_t>(n * n));
    auto write = [&](int r) { std::copy(perms[digit[r]].begin(), perms[digit[r]].end(), p.begin() + r * n); };
    for (int r = 0; r < n; ++r) write(r);
    while (true) {
      visit(p);
      int r = n - 1;
      while (r >= 0 && ++digit[r] == perms.size()) {
        digit[r] = 0;
        write(r);
        --r;
      }
      if (r < 0) break;
      write(r);
    }
  };
  sud.space_size = [n] {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return std::pow(f, n);
  };

  Component kak;
  kak.name = kCageComponent;
  kak.check = [instance, layout, n](const Part& p) -> std::optional<std::string> {
    if (p.size() != static_cast<std::size_t>(n * n)) return "cage permutation needs n*n entries";
    for (std::size_t c = 0; c < instance->cages.size(); ++c) {
      const auto first = layout->offsets[c];
      const auto k = static_cast<int>(layout->offsets[c + 1] - first);
      if (!is_permutation_of(std::span<const int>(p).subspan(first, k), 0, k - 1)) {
        return "cage " + std::to_string(c + 1) + " entries are not a permutation";
      }
    }
    return std::nullopt;
  };
  kak.initial = [instance](Rng&) {
    Part p;
    for (const auto& cage : instance->cages) {
      for (std::size_t j = 0; j < cage.cells.size(); ++j) p.push_back(static_cast<int>(j));
    }
    return p;
  };
  kak.neighborhood = [layout, include_identity](const Part& p) {
    return Neighborhood::from_moves(
        p, layout->swaps.size(),
        [layout](const Part& src, std::size_t k) {
          Part out = src;
          std::swap(out[layout->swaps[k].first], out[layout->swaps[k].second]);
          return out;
        },
        include_identity);
  };
  kak.crossover = [layout](const Part& a, const Part& b, Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    Part child = a;
    for (std::size_t c = 0; c + 1 < layout->offsets.size(); ++c) {
      if (coin(rng)) {
        std::copy(b.begin() + layout->offsets[c], b.begin() + layout->offsets[c + 1],
                  child.begin() + layout->offsets[c]);
      }
    }
    return child;
  };
  kak.enumerate = [layout](const std::function<void(const Part&)>& visit) {
    const auto cages = layout->offsets.size() - 1;
    Part p(layout->offsets.back());
    for (std::size_t c = 0; c < cages; ++c) {
      std::iota(p.begin() + layout->offsets[c], p.begin() + layout->offsets[c + 1], 0);
    }
    while (true) {
      visit(p);
      // odometer: the last cage advances fastest
      std::size_t c = cages;
      while (c > 0) {
        --c;
        auto first = p.begin() + layout->offsets[c];
        auto last = p.begin() + layout->offsets[c + 1];
        if (std::next_permutation(first, last)) break;  // wraps to sorted on false
        if (c == 0) return;
      }
      if (cages == 0) return;
    }
  };
  kak.space_size = [layout] { return layout->space; };

  DependencyGraph graph(2);
  graph.add_edge(1, 0);  // KAK <- SUD
  graph.add_edge(0, 1);  // SUD <- KAK

  auto score = [instance, weights](const CompositeSolution& sol) {
    return violations(*instance, displayed_grid(*instance, sol), weights).total;
  };
  return CompositeProblem({std::move(sud), std::move(kak)}, std::move(graph), std::move(score),
                          Orientation::minimize);
}

}  // namespace mcopt::killer_sudoku
