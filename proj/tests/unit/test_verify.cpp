#include <doctest.h>

#include "mcopt/errors.hpp"
#include "mcopt/verify.hpp"

using namespace mcopt;

namespace {

std::vector<verify::PropertyResult> collect(verify::Options options) {
  return verify::run(options);
}

}  // namespace

TEST_SUITE("verify") {
  TEST_CASE("every property holds for the shipped library") {
    const auto results = collect({});
    CHECK(results.size() >= 15);
    for (const auto& r : results) {
      INFO(r.name, ": ", r.detail);
      CHECK(r.outcome == verify::Outcome::pass);
    }
  }

  TEST_CASE("an injected fault fails the property that guards it") {
    verify::Options o;
    o.kind = "core";
    o.faults = {"sa-t0-accept"};
    bool caught = false;
    for (const auto& r : collect(o)) {
      if (r.name == "search/sa-zero-temperature") caught = r.outcome == verify::Outcome::fail;
      else CHECK(r.outcome == verify::Outcome::pass);
    }
    CHECK(caught);
  }

  TEST_CASE("a zero scale cap skips everything") {
    verify::Options o;
    o.scale_cap = 0;
    for (const auto& r : collect(o)) CHECK(r.outcome == verify::Outcome::skipped);
  }

  TEST_CASE("kinds select their sections") {
    verify::Options o;
    o.kind = "ttp";
    for (const auto& r : collect(o)) CHECK(r.name.rfind("ttp/", 0) == 0);
    o.kind = "shapes";
    CHECK_THROWS_AS(collect(o), InvalidConfig);
    o.kind = "all";
    o.faults = {"no-such-fault"};
    CHECK_THROWS_AS(collect(o), InvalidConfig);
  }
}
