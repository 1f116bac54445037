#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mcopt/core.hpp"
#include "mcopt/cosolver.hpp"

/// Travelling Thief Problem: a tour over all cities and a packing plan whose
/// carried weight slows the thief down.
namespace mcopt::ttp {

inline constexpr const char* kTourComponent = "TOUR";
inline constexpr const char* kPlanComponent = "PLAN";

struct Item {
  double profit = 0.0;
  double weight = 0.0;
  std::size_t city = 0;  // zero-based home city, never 0
};

enum class DistanceSource { coordinates, matrix };

struct Instance {
  std::string name = "unnamed";
  std::string knapsack_data_type = "unspecified";
  std::string edge_weight_type = "EUC_2D";
  std::size_t city_count = 0;
  DistanceSource source = DistanceSource::coordinates;
  std::vector<std::array<double, 2>> coordinates;  // coordinates source only
  std::vector<double> distances;                    // row-major city_count^2
  std::vector<Item> items;
  double capacity = 0.0;
  double min_speed = 0.1;
  double max_speed = 1.0;
  double renting_rate = 0.0;

  [[nodiscard]] double distance(std::size_t from, std::size_t to) const {
    return distances[from * city_count + to];
  }
  /// Throws InvalidInstance.
  void validate() const;
};

/// Fills `distances` from coordinates (Euclidean, optionally rounded to the
/// nearest integer).
void compute_distances(Instance& instance, bool round_to_integer = false);

/// Builds an instance from an explicit distance matrix.
Instance from_matrix(std::vector<std::vector<double>> matrix, std::vector<Item> items,
                     double capacity, double min_speed, double max_speed, double renting_rate);

/// Tour: permutation of 0..n-1 starting at city 0. Plan: one 0/1 flag per item.
struct Solution {
  std::vector<int> tour;
  std::vector<int> plan;

  friend bool operator==(const Solution&, const Solution&) = default;
  friend auto operator<=>(const Solution&, const Solution&) = default;
};

/// Empty-weight speed is max_speed; speed falls linearly to min_speed at full
/// capacity. Items are picked on arrival; the tour closes back at city 0.
/// Throws CapacityExceeded, InvalidSolution.
double tour_time(const Instance& instance, const std::vector<int>& tour,
                 const std::vector<int>& plan);

/// Picked profit minus renting_rate * tour_time (maximize).
double objective(const Instance& instance, const Solution& solution);

[[nodiscard]] double picked_weight(const Instance& instance, const std::vector<int>& plan);
[[nodiscard]] std::optional<std::string> check_tour(const Instance& instance,
                                                    const std::vector<int>& tour);
[[nodiscard]] std::optional<std::string> check_plan(const Instance& instance,
                                                    const std::vector<int>& plan);

struct BruteForceResult {
  double value = 0.0;
  std::vector<Solution> optima;
  std::uint64_t evaluated = 0;
};

/// Exhaustive search over (n-1)! tours x 2^m plans. Throws SpaceTooLarge.
BruteForceResult brute_force_solve(const Instance& instance, double cap = 1e6);

struct CompositeOptions {
  /// Prefix each component neighborhood with the identity move.
  bool include_identity = true;
};

/// Two components, TOUR (position swaps, order crossover) and PLAN
/// (capacity-feasible bit flips, uniform crossover), TOUR <-> PLAN.
CompositeProblem as_composite(std::shared_ptr<const Instance> instance,
                              const CompositeOptions& options = {});

CompositeSolution to_composite(const Solution& solution);
Solution from_composite(const CompositeSolution& solution);

enum class SubSolverMode { local, exact };

SubSolver subsolver_tour(std::shared_ptr<const Instance> instance,
                         SubSolverMode mode = SubSolverMode::local);
SubSolver subsolver_plan(std::shared_ptr<const Instance> instance,
                         SubSolverMode mode = SubSolverMode::local);

struct GenerateParams {
  std::size_t cities = 10;
  std::size_t items = 9;
  std::uint64_t seed = 1;
  /// Fraction of the total item weight that fits in the knapsack.
  double capacity_fraction = 0.5;
  /// Negative selects a rate that makes rent comparable to profit.
  double renting_rate = -1.0;
};

Instance generate(const GenerateParams& params);

struct ParseOptions {
  bool round_distances = false;
};

/// Reads the TTP benchmark text layout or its MATRIX SECTION variant.
/// Throws ParseError with the line number.
Instance parse(std::istream& in, const std::string& source_name = "<input>",
               const ParseOptions& options = {});
Instance parse_file(const std::string& path, const ParseOptions& options = {});
std::string serialize(const Instance& instance);

}  // namespace mcopt::ttp
