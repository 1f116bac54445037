#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

// Desk-scale oracle suite behind `mco verify`.
namespace mcopt::verify {

enum class Outcome { pass, fail, skipped };

std::string_view to_string(Outcome outcome);

struct PropertyResult {
  std::string name;
  Outcome outcome = Outcome::pass;
  std::string detail;
  std::uint64_t seed = 0;
};

struct Options {
  /// "all", "ttp", "killersudoku" or "core".
  std::string kind = "all";
  /// Largest instance dimension (cities, grid side) a section may use.
  int scale_cap = 4;
  std::uint64_t seed = 1;
  /// Deliberate defects, for checking that the suite notices them.
  std::set<std::string> faults;
  std::function<void(const PropertyResult&)> report;
};

/// Known fault names.
const std::vector<std::string>& fault_names();

/// Runs every property selected by `options.kind`. Throws InvalidConfig on an
/// unknown kind or fault.
std::vector<PropertyResult> run(const Options& options);

}  // namespace mcopt::verify
