#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "fixtures.hpp"
#include "mcopt/cli.hpp"

using namespace mcopt;
namespace fs = std::filesystem;

namespace {

struct Captured {
  int code;
  std::string out, err;
};

Captured run(std::vector<std::string> args) {
  args.insert(args.begin(), "mco");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("mcopt-cli-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> csv_rows(const std::string& text) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  return rows;
}

double csv_value(const std::string& row) {
  // record,run,seed,value,...
  std::istringstream in(row);
  std::string field;
  for (int i = 0; i < 4; ++i) std::getline(in, field, ',');
  return std::stod(field);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config parsing is strict") {
    const std::string ok = R"({"problem": "a.ttp", "algorithm": "ils", "seed": 4,
                               "stop": {"max_evaluations": 100},
                               "params": {"perturbation_strength": 2}})";
    const auto c = cli::parse_config(ok, "cfg");
    CHECK(c.algorithm == cli::Algorithm::ils);
    CHECK(c.seed == 4);
    CHECK(c.effective_stop().max_evaluations == 100u);

    CHECK_THROWS_AS(cli::parse_config(R"({"problem": "a.ttp", "colour": 1})", "cfg"), InvalidConfig);
    CHECK_THROWS_AS(cli::parse_config(R"({"problem": "a.ttp", "algorithm": "sa", "params": {"generations": 3}})", "cfg"),
                    InvalidConfig);
    CHECK_THROWS_AS(cli::parse_config(R"({"problem": "a.ttp", "algorithm": "tabu"})", "cfg"), InvalidConfig);
    CHECK_THROWS_AS(cli::parse_config(R"({"problem": "a.ttp", "seed": "x"})", "cfg"), InvalidConfig);
    CHECK_THROWS_AS(cli::parse_config(R"({"problem": "a.ttp", "stop": {"max_evaluations": 0}})", "cfg"),
                    InvalidConfig);
    CHECK_THROWS(cli::parse_config("{not json", "cfg"));
  }

  TEST_CASE("default stop bounds per algorithm") {
    cli::RunConfig c;
    c.problem = "a.ttp";
    c.algorithm = cli::Algorithm::jls;
    CHECK(c.effective_stop().max_stale_passes == 1u);
    c.algorithm = cli::Algorithm::sa;
    CHECK(c.effective_stop().max_evaluations == 100'000u);
  }

  TEST_CASE("instance kind is detected from the first line") {
    const auto dir = scratch("kind");
    std::ofstream(dir / "p.txt") << "killersudoku 2\n";
    CHECK(cli::detect_kind((dir / "p.txt").string()) == cli::ProblemKind::killersudoku);
    CHECK(cli::detect_kind(fixtures::data("ttp_4_3.ttp")) == cli::ProblemKind::ttp);
    fs::remove_all(dir);
  }

  TEST_CASE("aggregate uses the sample deviation and the orientation") {
    std::vector<cli::RunSummary> runs(3);
    runs[0].best_value = 1;
    runs[1].best_value = 2;
    runs[2].best_value = 6;
    const auto up = cli::aggregate(runs, Orientation::maximize);
    CHECK(up.runs == 3);
    CHECK(up.mean == doctest::Approx(3.0));
    CHECK(up.stddev == doctest::Approx(std::sqrt(7.0)));
    CHECK(up.best_overall == 6);
    CHECK(cli::aggregate(runs, Orientation::minimize).best_overall == 1);
    CHECK(cli::aggregate({runs[0]}, Orientation::maximize).stddev == 0.0);
  }

  TEST_CASE("repetitions write one trajectory per derived seed and an aggregate") {
    const auto dir = scratch("reps");
    const auto r = run({"--out-dir", dir.string(), "--seed", "7", "solve", "--problem",
                        fixtures::data("ttp_4_3.ttp"), "--algorithm", "ils", "--repetitions", "3",
                        "--max-evaluations", "500"});
    REQUIRE(r.code == cli::kExitOk);
    for (int s : {7, 8, 9}) CHECK(fs::exists(dir / ("trajectory_seed" + std::to_string(s) + ".jsonl")));
    CHECK_FALSE(fs::exists(dir / "trajectory_seed10.jsonl"));
    const auto rows = csv_rows(slurp(dir / "summary.csv"));
    REQUIRE(rows.size() == 1 + 3 + 4);
    CHECK(rows[0] == "record,run,seed,value,evaluations,iterations,stop_reason");
    double best = -1e300;
    for (int i = 1; i <= 3; ++i) best = std::max(best, csv_value(rows[i]));
    CHECK(rows[4] == "runs,,,3,,,");
    CHECK(rows[7].rfind("best_overall", 0) == 0);
    CHECK(csv_value(rows[7]) == best);
    CHECK(r.out.find("best_overall") != std::string::npos);
    fs::remove_all(dir);
  }

  TEST_CASE("minimization summaries keep the smallest value") {
    const auto dir = scratch("min");
    const auto ks = dir / "k.txt";
    REQUIRE(run({"gen", "killersudoku", "--seed", "2", "-o", ks.string()}).code == 0);
    REQUIRE(run({"--out-dir", dir.string(), "solve", "--problem", ks.string(), "--algorithm", "sa",
                 "--repetitions", "4", "--max-evaluations", "300"})
                .code == 0);
    const auto rows = csv_rows(slurp(dir / "summary.csv"));
    double best = 1e300;
    for (int i = 1; i <= 4; ++i) best = std::min(best, csv_value(rows[i]));
    CHECK(csv_value(rows.back()) == best);
    fs::remove_all(dir);
  }

  TEST_CASE("identical reruns produce identical files, also in parallel") {
    const auto a = scratch("det-a");
    const auto b = scratch("det-b");
    const auto args = [&](const fs::path& dir, const char* threads) {
      return std::vector<std::string>{"--out-dir", dir.string(), "--threads", threads, "--format", "jsonl",
                                      "solve", "--problem", fixtures::data("ttp_4_3.ttp"), "--algorithm",
                                      "ea", "--repetitions", "3", "--max-evaluations", "2000"};
    };
    REQUIRE(run(args(a, "1")).code == 0);
    REQUIRE(run(args(b, "3")).code == 0);
    for (const char* name : {"summary.jsonl", "trajectory_seed1.jsonl", "trajectory_seed2.jsonl",
                             "trajectory_seed3.jsonl"}) {
      CHECK(slurp(a / name) == slurp(b / name));
      CHECK_FALSE(slurp(a / name).empty());
    }
    CHECK(slurp(a / "summary.jsonl").find("wall_ms") == std::string::npos);
    fs::remove_all(a);
    fs::remove_all(b);
  }

  TEST_CASE("config file and flags combine") {
    const auto dir = scratch("cfg");
    std::ofstream(dir / "c.json") << R"({"problem": ")" << fixtures::data("ttp_4_3.ttp")
                                  << R"(", "algorithm": "cosolver", "seed": 5,
                                        "params": {"subsolver": "exact"}})";
    const auto r = run({"--config", (dir / "c.json").string(), "--out-dir", dir.string(), "solve",
                        "--repetitions", "2"});
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "trajectory_seed5.jsonl"));
    CHECK(fs::exists(dir / "trajectory_seed6.jsonl"));
    fs::remove_all(dir);
  }

  TEST_CASE("exit codes") {
    const auto dir = scratch("codes");
    const auto ttp = fixtures::data("ttp_4_3.ttp");
    CHECK(run({}).code == cli::kExitConfig);
    CHECK(run({"solve", "--problem", ttp, "--algorithm", "nope"}).code == cli::kExitConfig);
    CHECK(run({"--out-dir", dir.string(), "solve", "--problem", ttp, "--param", "colour=3"}).code ==
          cli::kExitConfig);
    CHECK(run({"solve", "--problem", (dir / "missing.ttp").string()}).code == cli::kExitParse);
    std::ofstream(dir / "bad.txt") << "killersudoku 2\ncage x 0,0\n";
    const auto bad = run({"solve", "--problem", (dir / "bad.txt").string()});
    CHECK(bad.code == cli::kExitParse);
    CHECK(bad.err.find(":2:") != std::string::npos);
    CHECK(run({"verify", "--kind", "core", "--inject-fault", "sa-t0-accept"}).code == cli::kExitPropertyFailed);
    CHECK(run({"verify", "--kind", "nothing"}).code == cli::kExitConfig);
    fs::remove_all(dir);
  }

  TEST_CASE("gen output parses back to the same text") {
    const auto dir = scratch("gen");
    const auto t = dir / "t.ttp";
    const auto k = dir / "k.txt";
    REQUIRE(run({"gen", "ttp", "--seed", "4", "--cities", "6", "--items", "5", "-o", t.string()}).code == 0);
    REQUIRE(run({"gen", "killersudoku", "--seed", "4", "--box", "3", "-o", k.string()}).code == 0);
    CHECK(ttp::serialize(ttp::parse_file(t.string())) == slurp(t));
    CHECK(killer_sudoku::serialize(killer_sudoku::parse_file(k.string())) == slurp(k));
    CHECK(ttp::parse_file(t.string()).city_count == 6);
    CHECK(killer_sudoku::parse_file(k.string()).box_size == 3);
    const auto to_stdout = run({"gen", "ttp", "--seed", "4", "--cities", "6", "--items", "5"});
    CHECK(to_stdout.out == slurp(t));
    fs::remove_all(dir);
  }

  TEST_CASE("deps reports the verdict") {
    const auto dep = run({"deps", "--problem", fixtures::data("ttp_4_3.ttp"), "--dependee", "TOUR",
                          "--dependent", "PLAN"});
    CHECK(dep.code == 0);
    CHECK(dep.out.find("PLAN <- TOUR: dependent") != std::string::npos);
    CHECK(dep.out.find("witness") != std::string::npos);
    CHECK(run({"deps", "--problem", fixtures::data("ttp_4_3.ttp"), "--dependee", "TOUR", "--dependent",
               "CARGO"})
              .code == cli::kExitConfig);
  }
}
