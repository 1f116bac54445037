#include "mcopt/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "mcopt/cosolver.hpp"
#include "mcopt/killer_sudoku.hpp"
#include "mcopt/text.hpp"
#include "mcopt/ttp.hpp"
#include "mcopt/verify.hpp"

namespace mcopt::cli {

using nlohmann::json;
using text::format_number;

std::string_view to_string(ProblemKind kind) {
  return kind == ProblemKind::ttp ? "ttp" : "killersudoku";
}

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::jls: return "jls";
    case Algorithm::ils: return "ils";
    case Algorithm::sa: return "sa";
    case Algorithm::cosolver: return "cosolver";
    case Algorithm::ea: return "ea";
  }
  return "?";
}

namespace {

std::optional<ProblemKind> parse_kind(std::string_view s) {
  if (s == "ttp") return ProblemKind::ttp;
  if (s == "killersudoku") return ProblemKind::killersudoku;
  return std::nullopt;
}

std::optional<Algorithm> parse_algorithm(std::string_view s) {
  for (auto a : {Algorithm::jls, Algorithm::ils, Algorithm::sa, Algorithm::cosolver, Algorithm::ea}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

// Strict JSON field readers -------------------------------------------------

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& where, const std::string& message) const {
    throw InvalidConfig(source_ + ": " + where + ": " + message);
  }

  void keys(const json& object, const std::string& where,
            std::initializer_list<std::string_view> allowed) const {
    if (!object.is_object()) fail(where, "expected an object");
    for (const auto& [key, value] : object.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(where, "unknown key '" + key + "'");
      }
    }
  }

  std::uint64_t count(const json& v, const std::string& where) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    fail(where, "expected a non-negative integer");
  }

  double number(const json& v, const std::string& where) const {
    if (!v.is_number()) fail(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(where, "expected a finite number");
    return d;
  }

  bool boolean(const json& v, const std::string& where) const {
    if (!v.is_boolean()) fail(where, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const json& v, const std::string& where) const {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
  }

 private:
  std::string source_;
};

void read_params(const Reader& r, const json& p, Algorithm algorithm, AlgorithmParams& out) {
  auto subsolver = [&](const json& v) {
    const auto s = r.string(v, "params.subsolver");
    if (s == "local") return SubSolverChoice::local;
    if (s == "exact") return SubSolverChoice::exact;
    r.fail("params.subsolver", "expected 'local' or 'exact'");
  };
  auto policy = [&](const json& v) {
    const auto parsed = parse_local_search_policy(r.string(v, "params.policy"));
    if (!parsed) r.fail("params.policy", "unknown local search policy");
    return *parsed;
  };

  switch (algorithm) {
    case Algorithm::jls:
      r.keys(p, "params", {"policy"});
      if (p.contains("policy")) out.policy = policy(p["policy"]);
      break;
    case Algorithm::ils:
      r.keys(p, "params", {"policy", "perturbation_strength", "max_restarts"});
      if (p.contains("policy")) out.policy = policy(p["policy"]);
      if (p.contains("perturbation_strength")) {
        const auto& v = p["perturbation_strength"];
        out.perturbation_strength.clear();
        if (v.is_array()) {
          for (const auto& e : v) out.perturbation_strength.push_back(r.count(e, "params.perturbation_strength"));
        } else {
          out.perturbation_strength.push_back(r.count(v, "params.perturbation_strength"));
        }
      }
      if (p.contains("max_restarts")) out.max_restarts = r.count(p["max_restarts"], "params.max_restarts");
      break;
    case Algorithm::sa:
      r.keys(p, "params", {"initial_temperature", "cooling", "step_length"});
      if (p.contains("initial_temperature")) {
        out.initial_temperature = r.number(p["initial_temperature"], "params.initial_temperature");
      }
      if (p.contains("cooling")) out.cooling = r.number(p["cooling"], "params.cooling");
      if (p.contains("step_length")) out.step_length = r.count(p["step_length"], "params.step_length");
      break;
    case Algorithm::cosolver:
      r.keys(p, "params",
             {"subsolver", "perturb_with_genetic_operators", "perturbation_rate", "budget_per_call"});
      if (p.contains("subsolver")) out.subsolver = subsolver(p["subsolver"]);
      if (p.contains("perturb_with_genetic_operators")) {
        out.perturb_with_genetic_operators =
            r.boolean(p["perturb_with_genetic_operators"], "params.perturb_with_genetic_operators");
      }
      if (p.contains("perturbation_rate")) {
        out.perturbation_rate = r.number(p["perturbation_rate"], "params.perturbation_rate");
      }
      if (p.contains("budget_per_call")) {
        out.budget_per_call = r.count(p["budget_per_call"], "params.budget_per_call");
      }
      break;
    case Algorithm::ea:
      r.keys(p, "params",
             {"population_size", "tournament_size", "crossover_rate", "mutation_rate",
              "elitism_count", "memetic_hook", "memetic_budget", "memetic_probability",
              "generations", "subsolver"});
      if (p.contains("population_size")) out.population_size = r.count(p["population_size"], "params.population_size");
      if (p.contains("tournament_size")) out.tournament_size = r.count(p["tournament_size"], "params.tournament_size");
      if (p.contains("crossover_rate")) out.crossover_rate = r.number(p["crossover_rate"], "params.crossover_rate");
      if (p.contains("mutation_rate")) out.mutation_rate = r.number(p["mutation_rate"], "params.mutation_rate");
      if (p.contains("elitism_count")) out.elitism_count = r.count(p["elitism_count"], "params.elitism_count");
      if (p.contains("memetic_hook")) {
        const auto hook = parse_memetic_hook(r.string(p["memetic_hook"], "params.memetic_hook"));
        if (!hook) r.fail("params.memetic_hook", "expected 'none', 'jls' or 'cosolver'");
        out.memetic_hook = *hook;
      }
      if (p.contains("memetic_budget")) out.memetic_budget = r.count(p["memetic_budget"], "params.memetic_budget");
      if (p.contains("memetic_probability")) {
        out.memetic_probability = r.number(p["memetic_probability"], "params.memetic_probability");
      }
      if (p.contains("generations")) out.generations = r.count(p["generations"], "params.generations");
      if (p.contains("subsolver")) out.subsolver = subsolver(p["subsolver"]);
      break;
  }
}

RunConfig config_from_json(const json& doc, const std::string& source) {
  const Reader r(source);
  r.keys(doc, "config",
         {"problem", "kind", "algorithm", "seed", "repetitions", "out_dir", "threads", "format",
          "round_distances", "stop", "params"});
  RunConfig c;
  if (doc.contains("problem")) c.problem = r.string(doc["problem"], "problem");
  if (doc.contains("kind")) {
    c.kind = parse_kind(r.string(doc["kind"], "kind"));
    if (!c.kind) r.fail("kind", "expected 'ttp' or 'killersudoku'");
  }
  if (doc.contains("algorithm")) {
    const auto a = parse_algorithm(r.string(doc["algorithm"], "algorithm"));
    if (!a) r.fail("algorithm", "expected one of jls, ils, sa, cosolver, ea");
    c.algorithm = *a;
  }
  if (doc.contains("seed")) c.seed = r.count(doc["seed"], "seed");
  if (doc.contains("repetitions")) c.repetitions = r.count(doc["repetitions"], "repetitions");
  if (doc.contains("out_dir")) c.out_dir = r.string(doc["out_dir"], "out_dir");
  if (doc.contains("threads")) {
    const auto t = r.count(doc["threads"], "threads");
    if (t > 1024) r.fail("threads", "at most 1024 workers");
    c.threads = static_cast<unsigned>(t);
  }
  if (doc.contains("format")) {
    const auto f = r.string(doc["format"], "format");
    if (f == "csv") c.format = SummaryFormat::csv;
    else if (f == "jsonl") c.format = SummaryFormat::jsonl;
    else r.fail("format", "expected 'csv' or 'jsonl'");
  }
  if (doc.contains("round_distances")) c.round_distances = r.boolean(doc["round_distances"], "round_distances");
  if (doc.contains("stop")) {
    const auto& s = doc["stop"];
    r.keys(s, "stop", {"max_evaluations", "max_wall_ms", "max_stale_passes", "target"});
    StopCondition stop;
    if (s.contains("max_evaluations")) stop.max_evaluations = r.count(s["max_evaluations"], "stop.max_evaluations");
    if (s.contains("max_wall_ms")) {
      stop.max_wall_time = std::chrono::milliseconds(r.count(s["max_wall_ms"], "stop.max_wall_ms"));
    }
    if (s.contains("max_stale_passes")) {
      stop.max_stale_passes = r.count(s["max_stale_passes"], "stop.max_stale_passes");
    }
    if (s.contains("target")) stop.target_value = r.number(s["target"], "stop.target");
    c.stop = stop;
  }
  if (doc.contains("params")) read_params(r, doc["params"], c.algorithm, c.params);
  c.validate();
  return c;
}

// Exit-code mapping -----------------------------------------------------------

int report_exception(std::exception_ptr failure, std::ostream& err) {
  try {
    std::rethrow_exception(failure);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const InvalidConfig& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidStopCondition& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidSchedule& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const TooFewSamples& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (...) {
    return report_exception(std::current_exception(), err);
  }
}

struct LoadedProblem {
  std::shared_ptr<const CompositeProblem> problem;
  ProblemKind kind;
};

LoadedProblem load_problem(const std::string& path, std::optional<ProblemKind> kind,
                           bool round_distances) {
  if (path.empty()) throw InvalidConfig("no problem file given");
  const auto k = kind ? *kind : detect_kind(path);
  if (k == ProblemKind::ttp) {
    ttp::ParseOptions options;
    options.round_distances = round_distances;
    auto inst = std::make_shared<const ttp::Instance>(ttp::parse_file(path, options));
    return {std::make_shared<const CompositeProblem>(ttp::as_composite(inst)), k};
  }
  auto inst = std::make_shared<const killer_sudoku::Instance>(killer_sudoku::parse_file(path));
  return {std::make_shared<const CompositeProblem>(killer_sudoku::as_composite(inst)), k};
}

std::vector<SubSolver> make_subsolvers(const std::shared_ptr<const CompositeProblem>& problem,
                                       SubSolverChoice choice) {
  std::vector<SubSolver> subs;
  for (std::size_t i = 0; i < problem->size(); ++i) {
    subs.push_back(choice == SubSolverChoice::exact ? exhaustive_subsolver(problem, i)
                                                    : local_search_subsolver(problem, i));
  }
  return ordered_subsolvers(problem->dependencies(), std::move(subs));
}

RunResult run_once(const RunConfig& c, const std::shared_ptr<const CompositeProblem>& problem,
                   std::uint64_t seed) {
  const auto init = initial_solution(*problem, seed);
  const auto stop = c.effective_stop();
  const auto& p = c.params;
  switch (c.algorithm) {
    case Algorithm::jls:
      return joint_local_search(*problem, init, stop, p.policy, seed);
    case Algorithm::ils: {
      IlsParams params;
      params.perturbation_strength = p.perturbation_strength;
      if (params.perturbation_strength.size() == 1 && problem->size() > 1) {
        params.perturbation_strength.assign(problem->size(), p.perturbation_strength.front());
      }
      if (!params.perturbation_strength.empty() &&
          params.perturbation_strength.size() != problem->size()) {
        throw InvalidConfig("perturbation_strength needs one entry per component");
      }
      params.inner_policy = p.policy;
      params.max_restarts = p.max_restarts;
      return iterated_local_search(*problem, init, stop, params, seed);
    }
    case Algorithm::sa: {
      AnnealingSchedule schedule;
      schedule.initial_temperature = p.initial_temperature;
      schedule.cooling = p.cooling;
      schedule.step_length = p.step_length;
      return simulated_annealing(*problem, init, stop, schedule, seed);
    }
    case Algorithm::cosolver: {
      const auto subs = make_subsolvers(problem, p.subsolver);
      CosolverOptions options;
      options.budget_per_call = p.budget_per_call;
      options.perturb_with_genetic_operators = p.perturb_with_genetic_operators;
      options.perturbation_rate = p.perturbation_rate;
      return cosolver(*problem, init, subs, stop, options, seed);
    }
    case Algorithm::ea: {
      EaConfig config;
      config.population_size = p.population_size;
      config.tournament_size = p.tournament_size;
      config.crossover_rate = p.crossover_rate;
      config.mutation_rate = p.mutation_rate;
      config.elitism_count = p.elitism_count;
      config.memetic_hook = p.memetic_hook;
      config.memetic_budget = p.memetic_budget;
      config.memetic_probability = p.memetic_probability;
      config.generations = p.generations;
      config.stop = stop;
      if (p.memetic_hook == MemeticHook::cosolver) config.subsolvers = make_subsolvers(problem, p.subsolver);
      return evolve(*problem, config, seed);
    }
  }
  throw InvalidConfig("unknown algorithm");
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_trajectory(const std::filesystem::path& dir, const RunResult& r) {
  std::ostringstream body;
  std::ostringstream meta;
  for (const auto& point : r.trajectory) {
    body << "{\"evaluation\":" << point.evaluation << ",\"value\":" << format_number(point.value)
         << "}\n";
    meta << "{\"evaluation\":" << point.evaluation << ",\"wall_ms\":" << format_number(point.wall_ms)
         << "}\n";
  }
  const auto stem = "trajectory_seed" + std::to_string(r.seed);
  write_file(dir / (stem + ".jsonl"), body.str());
  write_file(dir / (stem + ".meta.jsonl"), meta.str());
}

std::string summary_body(const std::vector<RunSummary>& runs, const Aggregate& agg,
                         SummaryFormat format) {
  std::ostringstream out;
  if (format == SummaryFormat::csv) {
    out << "record,run,seed,value,evaluations,iterations,stop_reason\n";
    for (const auto& r : runs) {
      out << "run," << r.run << ',' << r.seed << ',' << format_number(r.best_value) << ','
          << r.evaluations << ',' << r.iterations << ',' << to_string(r.stop_reason) << '\n';
    }
    out << "runs,,," << agg.runs << ",,,\n"
        << "mean,,," << format_number(agg.mean) << ",,,\n"
        << "stddev,,," << format_number(agg.stddev) << ",,,\n"
        << "best_overall,,," << format_number(agg.best_overall) << ",,,\n";
  } else {
    for (const auto& r : runs) {
      out << "{\"record\":\"run\",\"run\":" << r.run << ",\"seed\":" << r.seed
          << ",\"best_value\":" << format_number(r.best_value) << ",\"evaluations\":" << r.evaluations
          << ",\"iterations\":" << r.iterations << ",\"stop_reason\":\"" << to_string(r.stop_reason)
          << "\"}\n";
    }
    out << "{\"record\":\"aggregate\",\"runs\":" << agg.runs << ",\"mean\":" << format_number(agg.mean)
        << ",\"stddev\":" << format_number(agg.stddev)
        << ",\"best_overall\":" << format_number(agg.best_overall) << "}\n";
  }
  return out.str();
}

void print_table(std::ostream& out, const std::vector<RunSummary>& runs, const Aggregate& agg) {
  out << std::left << std::setw(5) << "run" << std::setw(12) << "seed" << std::setw(22)
      << "best_value" << std::setw(13) << "evaluations" << "stop\n";
  for (const auto& r : runs) {
    out << std::setw(5) << r.run << std::setw(12) << r.seed << std::setw(22)
        << format_number(r.best_value) << std::setw(13) << r.evaluations << to_string(r.stop_reason)
        << '\n';
  }
  out << "runs " << agg.runs << "  mean " << format_number(agg.mean) << "  stddev "
      << format_number(agg.stddev) << "  best_overall " << format_number(agg.best_overall) << '\n';
}

}  // namespace

// RunConfig -------------------------------------------------------------------

StopCondition RunConfig::effective_stop() const {
  if (stop) return *stop;
  if (algorithm == Algorithm::ea || algorithm == Algorithm::sa) {
    StopCondition s;
    s.max_evaluations = algorithm == Algorithm::sa ? 100'000 : 1'000'000;
    return s;
  }
  return StopCondition::defaults();
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw InvalidConfig(m); };
  auto unit = [&](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) fail(std::string(name) + " must be in [0, 1]");
  };
  if (repetitions < 1) fail("repetitions must be >= 1");
  if (stop && stop->max_evaluations && *stop->max_evaluations == 0) fail("max_evaluations must be >= 1");
  try {
    effective_stop().validate();
  } catch (const InvalidStopCondition& e) {
    fail(e.what());
  }
  const auto& p = params;
  switch (algorithm) {
    case Algorithm::sa: {
      AnnealingSchedule s;
      s.initial_temperature = p.initial_temperature;
      s.cooling = p.cooling;
      s.step_length = p.step_length;
      try {
        s.validate();
      } catch (const InvalidSchedule& e) {
        fail(e.what());
      }
      break;
    }
    case Algorithm::cosolver:
      unit(p.perturbation_rate, "perturbation_rate");
      if (p.budget_per_call && *p.budget_per_call == 0) fail("budget_per_call must be >= 1");
      break;
    case Algorithm::ea:
      if (p.population_size < 2) fail("population_size must be >= 2");
      if (p.tournament_size < 1) fail("tournament_size must be >= 1");
      if (p.elitism_count >= p.population_size) fail("elitism_count must be < population_size");
      unit(p.crossover_rate, "crossover_rate");
      unit(p.mutation_rate, "mutation_rate");
      unit(p.memetic_probability, "memetic_probability");
      break;
    default:
      break;
  }
}

ProblemKind detect_kind(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::string line;
  while (std::getline(in, line)) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    return t.rfind("killersudoku", 0) == 0 ? ProblemKind::killersudoku : ProblemKind::ttp;
  }
  throw ParseError(path, 0, "empty instance file");
}

RunConfig parse_config(std::string_view json_text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidConfig(source + ": " + e.what());
  }
  return config_from_json(doc, source);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

Aggregate aggregate(const std::vector<RunSummary>& runs, Orientation orientation) {
  Aggregate a;
  a.runs = runs.size();
  if (runs.empty()) return a;
  double sum = 0.0;
  a.best_overall = runs.front().best_value;
  for (const auto& r : runs) {
    sum += r.best_value;
    const bool better = orientation == Orientation::maximize ? r.best_value > a.best_overall
                                                             : r.best_value < a.best_overall;
    if (better) a.best_overall = r.best_value;
  }
  a.mean = sum / static_cast<double>(runs.size());
  if (runs.size() > 1) {
    double squares = 0.0;
    for (const auto& r : runs) squares += (r.best_value - a.mean) * (r.best_value - a.mean);
    a.stddev = std::sqrt(squares / static_cast<double>(runs.size() - 1));
  }
  return a;
}

// Commands --------------------------------------------------------------------

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    const auto loaded = load_problem(config.problem, config.kind, config.round_distances);
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);

    const auto n = config.repetitions;
    std::vector<RunSummary> runs(n);
    std::vector<std::exception_ptr> failures(n);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
      for (auto i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          const auto r = run_once(config, loaded.problem, config.seed + i);
          write_trajectory(dir, r);
          runs[i] = RunSummary{i,
                               r.seed,
                               r.best_value,
                               r.evaluations,
                               r.iterations,
                               r.stop_reason,
                               std::chrono::duration<double, std::milli>(r.wall_time).count()};
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    };
    unsigned workers = config.threads == 0 ? std::max(1U, std::thread::hardware_concurrency())
                                           : config.threads;
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, n));
    if (workers <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    for (std::uint64_t i = 0; i < n; ++i) {
      if (failures[i]) {
        err << "run " << i << " (seed " << config.seed + i << ") failed\n";
        return report_exception(failures[i], err);
      }
    }

    const auto agg = aggregate(runs, loaded.problem->orientation());
    const auto ext = config.format == SummaryFormat::csv ? ".csv" : ".jsonl";
    write_file(dir / (std::string("summary") + ext), summary_body(runs, agg, config.format));
    std::ostringstream meta;
    for (const auto& r : runs) {
      meta << "{\"run\":" << r.run << ",\"seed\":" << r.seed
           << ",\"wall_ms\":" << format_number(r.wall_ms) << "}\n";
    }
    write_file(dir / "summary.meta.jsonl", meta.str());
    out << "problem " << config.problem << " (" << to_string(loaded.kind) << "), algorithm "
        << to_string(config.algorithm) << '\n';
    print_table(out, runs, agg);
    return kExitOk;
  });
}

int cmd_verify(const VerifyRequest& request, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    verify::Options options;
    options.kind = request.kind;
    options.scale_cap = request.scale_cap;
    options.seed = request.seed;
    options.faults.insert(request.faults.begin(), request.faults.end());
    std::size_t counts[3] = {0, 0, 0};
    options.report = [&](const verify::PropertyResult& r) {
      ++counts[static_cast<int>(r.outcome)];
      out << std::left << std::setw(8) << verify::to_string(r.outcome) << r.name;
      if (r.outcome == verify::Outcome::fail) {
        out << ": " << r.detail << " (replay: mco verify --kind " << request.kind << " --seed "
            << r.seed << " --scale-cap " << request.scale_cap;
        for (const auto& f : request.faults) out << " --inject-fault " << f;
        out << ")";
      } else if (r.outcome == verify::Outcome::skipped) {
        out << " (" << r.detail << ")";
      }
      out << '\n' << std::flush;
    };
    verify::run(options);
    out << counts[0] << " passed, " << counts[1] << " failed, " << counts[2] << " skipped\n";
    return counts[1] == 0 ? kExitOk : kExitPropertyFailed;
  });
}

int cmd_gen(const GenRequest& request, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::string body;
    std::string reparsed;
    if (request.kind == ProblemKind::ttp) {
      if (request.cities < 2) throw InvalidConfig("ttp needs at least 2 cities");
      if (request.cities > 100000 || request.items > 1000000) throw InvalidConfig("instance too large");
      if (request.items > 0 && request.cities < 2) throw InvalidConfig("items need a second city");
      ttp::GenerateParams params;
      params.cities = request.cities;
      params.items = request.items;
      params.seed = request.seed;
      params.capacity_fraction = request.capacity_fraction;
      params.renting_rate = request.renting_rate;
      body = ttp::serialize(ttp::generate(params));
      std::istringstream in(body);
      reparsed = ttp::serialize(ttp::parse(in, "<generated>"));
    } else {
      if (request.box_size != 2 && request.box_size != 3) throw InvalidConfig("box size must be 2 or 3");
      const int n = request.box_size * request.box_size;
      if (request.max_cage_size < 1 || request.max_cage_size > n) {
        throw InvalidConfig("max cage size must be in 1.." + std::to_string(n));
      }
      body = killer_sudoku::serialize(
          killer_sudoku::generate(request.box_size, request.seed, request.max_cage_size).instance);
      std::istringstream in(body);
      reparsed = killer_sudoku::serialize(killer_sudoku::parse(in, "<generated>"));
    }
    if (reparsed != body) throw std::runtime_error("generated instance does not round-trip");
    if (request.output.empty() || request.output == "-") {
      out << body;
    } else {
      write_file(request.output, body);
    }
    return kExitOk;
  });
}

int cmd_deps(const DepsRequest& request, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto loaded = load_problem(request.problem, request.kind, request.round_distances);
    const auto& problem = *loaded.problem;
    auto lookup = [&](const std::string& name) {
      try {
        return problem.find(name);
      } catch (const std::out_of_range&) {
        std::string names;
        for (const auto& c : problem.components()) names += " " + c.name;
        throw InvalidConfig("unknown component '" + name + "'; components:" + names);
      }
    };
    const auto dependee = lookup(request.dependee);
    const auto dependent = lookup(request.dependent);
    DependencyOptions options;
    options.enumeration_cap = request.enumeration_cap;
    if (request.optimal_value_reading) options.reading = DependencyReading::optimal_value;
    const auto verdict =
        detect_dependency(problem, dependee, dependent, request.samples, request.seed, options);

    auto show = [](const Part& p) {
      std::string s;
      for (auto v : p) s += (s.empty() ? "" : " ") + std::to_string(v);
      return s;
    };
    out << dependent.name << " <- " << dependee.name << ": "
        << (verdict.dependent ? "dependent" : "independent") << " (samples used "
        << verdict.samples_used << ", seed " << request.seed << ")\n";
    if (verdict.witness) {
      const auto& w = *verdict.witness;
      auto optimum = [&](const char* tag, const Part& part, const ConditionalOptimum& o) {
        out << "  " << tag << ' ' << dependee.name << " = [" << show(part) << "]: best "
            << dependent.name << " value " << format_number(o.value) << ", " << o.optima.size()
            << " optimal part(s):";
        std::size_t shown = 0;
        for (const auto& p : o.optima) {
          if (shown++ == 4) {
            out << " ...";
            break;
          }
          out << " [" << show(p) << "]";
        }
        out << '\n';
      };
      out << "witness:\n";
      optimum("a", w.first, w.first_optimum);
      optimum("b", w.second, w.second_optimum);
    }
    return kExitOk;
  });
}

// Command line ----------------------------------------------------------------

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-component combinatorial optimization toolkit", "mco"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
  std::optional<std::string> format;
  std::string config_path;
  app.add_option("--seed", seed, "Base seed (repetition i uses seed + i)");
  app.add_option("--out-dir", out_dir, "Directory for trajectories and summaries");
  app.add_option("--threads", threads, "Workers for repetitions (0 = auto)");
  app.add_option("--format", format, "Summary format")->check(CLI::IsMember({"csv", "jsonl"}));
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);

  auto* solve = app.add_subcommand("solve", "Run an algorithm on an instance");
  solve->fallthrough();
  std::optional<std::string> problem_path, kind, algorithm;
  std::optional<std::uint64_t> repetitions, max_evaluations, max_wall_ms, max_stale;
  std::optional<double> target;
  std::vector<std::string> param_overrides;
  bool round_distances = false;
  solve->add_option("--problem", problem_path, "Instance file");
  solve->add_option("--kind", kind, "ttp or killersudoku")->check(CLI::IsMember({"ttp", "killersudoku"}));
  solve->add_option("--algorithm", algorithm, "jls, ils, sa, cosolver or ea");
  solve->add_option("--repetitions", repetitions, "Number of seeded runs");
  solve->add_option("--max-evaluations", max_evaluations);
  solve->add_option("--max-wall-ms", max_wall_ms);
  solve->add_option("--max-stale-passes", max_stale);
  solve->add_option("--target", target, "Stop once this objective value is reached");
  solve->add_option("--param", param_overrides, "Algorithm parameter as key=value (JSON value)");
  solve->add_flag("--round-distances", round_distances, "Round Euclidean distances");

  auto* verify_cmd = app.add_subcommand("verify", "Run the desk-scale oracle suite");
  verify_cmd->fallthrough();
  VerifyRequest verify_request;
  verify_cmd->add_option("--kind", verify_request.kind, "all, core, ttp or killersudoku")
      ->check(CLI::IsMember({"all", "core", "ttp", "killersudoku"}));
  verify_cmd->add_option("--scale-cap", verify_request.scale_cap, "Largest instance dimension");
  verify_cmd->add_option("--inject-fault", verify_request.faults, "Deliberate defect to inject")
      ->check(CLI::IsMember(verify::fault_names()));

  auto* gen = app.add_subcommand("gen", "Generate an instance file");
  gen->fallthrough();
  GenRequest gen_request;
  std::string gen_kind;
  gen->add_option("kind", gen_kind, "ttp or killersudoku")
      ->required()
      ->check(CLI::IsMember({"ttp", "killersudoku"}));
  gen->add_option("-o,--output", gen_request.output, "Output path (default stdout)");
  gen->add_option("--cities", gen_request.cities);
  gen->add_option("--items", gen_request.items);
  gen->add_option("--capacity-fraction", gen_request.capacity_fraction);
  gen->add_option("--renting-rate", gen_request.renting_rate, "Negative picks a balanced rate");
  gen->add_option("--box", gen_request.box_size);
  gen->add_option("--max-cage", gen_request.max_cage_size);

  auto* deps = app.add_subcommand("deps", "Test whether one component depends on another");
  deps->fallthrough();
  DepsRequest deps_request;
  std::optional<std::string> deps_kind;
  deps->add_option("--problem", deps_request.problem, "Instance file")->required();
  deps->add_option("--kind", deps_kind)->check(CLI::IsMember({"ttp", "killersudoku"}));
  deps->add_option("--dependee", deps_request.dependee, "Component whose part is varied")->required();
  deps->add_option("--dependent", deps_request.dependent, "Component optimized exhaustively")->required();
  deps->add_option("--samples", deps_request.samples);
  deps->add_option("--cap", deps_request.enumeration_cap, "Enumeration cap");
  deps->add_flag("--optimal-value", deps_request.optimal_value_reading,
                 "Compare optimal values instead of optimizer sets");
  deps->add_flag("--round-distances", deps_request.round_distances);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*solve) {
    return guarded(err, [&] {
      json doc = json::object();
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        try {
          doc = json::parse(in);
        } catch (const json::parse_error& e) {
          throw InvalidConfig(config_path + ": " + e.what());
        }
        if (!doc.is_object()) throw InvalidConfig(config_path + ": expected an object");
      }
      if (problem_path) doc["problem"] = *problem_path;
      if (kind) doc["kind"] = *kind;
      if (algorithm) doc["algorithm"] = *algorithm;
      if (seed) doc["seed"] = *seed;
      if (repetitions) doc["repetitions"] = *repetitions;
      if (out_dir) doc["out_dir"] = *out_dir;
      if (threads) doc["threads"] = *threads;
      if (format) doc["format"] = *format;
      if (round_distances) doc["round_distances"] = true;
      if (max_evaluations || max_wall_ms || max_stale || target) {
        if (!doc.contains("stop")) doc["stop"] = json::object();
        if (max_evaluations) doc["stop"]["max_evaluations"] = *max_evaluations;
        if (max_wall_ms) doc["stop"]["max_wall_ms"] = *max_wall_ms;
        if (max_stale) doc["stop"]["max_stale_passes"] = *max_stale;
        if (target) doc["stop"]["target"] = *target;
      }
      for (const auto& entry : param_overrides) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos || eq == 0) throw InvalidConfig("--param expects key=value");
        const auto key = entry.substr(0, eq);
        const auto raw = entry.substr(eq + 1);
        json value;
        try {
          value = json::parse(raw);
        } catch (const json::parse_error&) {
          value = raw;
        }
        if (!doc.contains("params")) doc["params"] = json::object();
        doc["params"][key] = value;
      }
      const auto config = config_from_json(doc, config_path.empty() ? "<flags>" : config_path);
      return cmd_solve(config, out, err);
    });
  }
  if (*verify_cmd) {
    if (seed) verify_request.seed = *seed;
    return cmd_verify(verify_request, out, err);
  }
  if (*gen) {
    gen_request.kind = *parse_kind(gen_kind);
    if (seed) gen_request.seed = *seed;
    return cmd_gen(gen_request, out, err);
  }
  if (*deps) {
    if (deps_kind) deps_request.kind = parse_kind(*deps_kind);
    if (seed) deps_request.seed = *seed;
    return cmd_deps(deps_request, out, err);
  }
  return kExitConfig;
}

}  // namespace mcopt::cli
