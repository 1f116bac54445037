#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mcopt/evolutionary.hpp"
#include "mcopt/search.hpp"

namespace mcopt::cli {

enum class ProblemKind { ttp, killersudoku };
enum class Algorithm { jls, ils, sa, cosolver, ea };
enum class SummaryFormat { csv, jsonl };
enum class SubSolverChoice { local, exact };

// Exit codes of every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPropertyFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitParse = 3;
inline constexpr int kExitRuntime = 4;

std::string_view to_string(ProblemKind kind);
std::string_view to_string(Algorithm algorithm);

/// Algorithm-specific knobs. Only the fields of the selected algorithm are
/// accepted in a config file.
struct AlgorithmParams {
  LocalSearchPolicy policy = LocalSearchPolicy::first_improvement_restart;  // jls, ils

  std::vector<std::size_t> perturbation_strength;  // ils
  std::optional<std::uint64_t> max_restarts;

  double initial_temperature = 1.0;  // sa
  double cooling = 0.95;
  std::uint64_t step_length = 100;

  SubSolverChoice subsolver = SubSolverChoice::local;  // cosolver, ea with the cosolver hook
  bool perturb_with_genetic_operators = false;
  double perturbation_rate = 0.5;
  std::optional<std::uint64_t> budget_per_call;

  std::size_t population_size = 20;  // ea
  std::size_t tournament_size = 2;
  double crossover_rate = 0.9;
  double mutation_rate = 0.2;
  std::size_t elitism_count = 1;
  MemeticHook memetic_hook = MemeticHook::none;
  std::uint64_t memetic_budget = 200;
  double memetic_probability = 1.0;
  std::uint64_t generations = 50;
};

struct RunConfig {
  std::string problem;
  /// Read from the file's first line when absent.
  std::optional<ProblemKind> kind;
  Algorithm algorithm = Algorithm::jls;
  std::uint64_t seed = 1;
  std::uint64_t repetitions = 1;
  std::string out_dir = "out";
  /// Workers for repetitions; 0 picks the hardware concurrency.
  unsigned threads = 1;
  SummaryFormat format = SummaryFormat::csv;
  bool round_distances = false;
  /// Absent: StopCondition::defaults(), or only the evaluation cap for ea/sa
  /// (which stop on generations and temperature respectively).
  std::optional<StopCondition> stop;
  AlgorithmParams params;

  [[nodiscard]] StopCondition effective_stop() const;
  /// Throws InvalidConfig.
  void validate() const;
};

/// Problem kind named by the first meaningful line of an instance file.
ProblemKind detect_kind(const std::string& path);

/// Strict reader for the JSON config layout; unknown keys are errors.
/// Throws InvalidConfig.
RunConfig parse_config(std::string_view json_text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Row of the summary for one repetition.
struct RunSummary {
  std::uint64_t run = 0;
  std::uint64_t seed = 0;
  double best_value = 0.0;
  std::uint64_t evaluations = 0;
  std::uint64_t iterations = 0;
  StopReason stop_reason = StopReason::stale;
  double wall_ms = 0.0;
};

struct Aggregate {
  std::size_t runs = 0;
  double mean = 0.0;
  /// Sample standard deviation; 0 for a single run.
  double stddev = 0.0;
  double best_overall = 0.0;
};

Aggregate aggregate(const std::vector<RunSummary>& runs, Orientation orientation);

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);

struct VerifyRequest {
  std::string kind = "all";
  int scale_cap = 4;
  std::uint64_t seed = 1;
  std::vector<std::string> faults;
};

int cmd_verify(const VerifyRequest& request, std::ostream& out, std::ostream& err);

struct GenRequest {
  ProblemKind kind = ProblemKind::ttp;
  std::uint64_t seed = 1;
  std::string output;  // empty or "-" writes to `out`
  std::size_t cities = 10;
  std::size_t items = 9;
  double capacity_fraction = 0.5;
  double renting_rate = -1.0;
  int box_size = 2;
  int max_cage_size = 3;
};

int cmd_gen(const GenRequest& request, std::ostream& out, std::ostream& err);

struct DepsRequest {
  std::string problem;
  std::optional<ProblemKind> kind;
  std::string dependee;
  std::string dependent;
  std::size_t samples = 8;
  std::uint64_t seed = 1;
  bool optimal_value_reading = false;
  double enumeration_cap = 1e6;
  bool round_distances = false;
};

int cmd_deps(const DepsRequest& request, std::ostream& out, std::ostream& err);

/// Entry point of the `mco` executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mcopt::cli
