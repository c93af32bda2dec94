#include <sstream>

#include "doctest.h"
#include "oi/constructions.hpp"
#include "oi/harness.hpp"
#include "oi/io.hpp"

using namespace oi;
using namespace oi::harness;

namespace {

ExperimentConfig cfg(const std::string& id, std::size_t trials, json params = json::object()) {
  ExperimentConfig c;
  c.id = id;
  c.seed = 11;
  c.trials = trials;
  c.params = std::move(params);
  return c;
}

}  // namespace

TEST_CASE("wilson interval matches a reference implementation") {
  struct Case {
    std::size_t k, n;
    double lo, hi;
  };
  // Reference values from statsmodels proportion_confint(method="wilson").
  const Case cases[] = {{190, 200, 0.910421851861224, 0.972617354399236},
                        {0, 10, 0.0, 0.277532799862889},
                        {10, 10, 0.722467200137111, 1.0},
                        {1382, 2000, 0.670398723789636, 0.710868964148926},
                        {7, 20, 0.181191824101082, 0.567145723314764}};
  for (const auto& c : cases) {
    const auto iv = wilson(c.k, c.n);
    CHECK(iv.lo == doctest::Approx(c.lo).epsilon(1e-9));
    CHECK(iv.hi == doctest::Approx(c.hi).epsilon(1e-9));
  }
  CHECK_THROWS_AS(wilson(3, 2), Error);
}

TEST_CASE("trial results do not depend on the worker count") {
  auto fn = [](std::size_t t, CounterRng& rng) { return ordered_json{{"t", t}, {"u", rng.uniform()}}; };
  const auto one = run_trials(37, 1, 5, fn);
  const auto four = run_trials(37, 4, 5, fn);
  CHECK(one == four);
  CHECK(one[3]["t"] == 3);
  CHECK_THROWS_AS(run_trials(8, 3, 5, [](std::size_t t, CounterRng&) -> ordered_json {
                    if (t == 6) fail(ErrorKind::Invariant, "boom");
                    return {};
                  }),
                  Error);
}

TEST_CASE("sample size search") {
  auto always = [](std::size_t, std::size_t, CounterRng&) { return true; };
  auto r = sample_size_search(0.9, always, 50, 1, 1, 1024);
  CHECK(r.found);
  CHECK(r.n == 1);
  CHECK(r.probes.size() == 1);

  auto threshold = [](std::size_t n, std::size_t, CounterRng&) { return n >= 40; };
  r = sample_size_search(0.9, threshold, 100, 1, 1, 1024);
  CHECK(r.found);
  CHECK(r.n == 64);
  REQUIRE(r.probes.size() == 7);
  for (std::size_t i = 0; i + 1 < r.probes.size(); ++i) CHECK(r.probes[i].successes == 0);

  auto never = [](std::size_t, std::size_t, CounterRng&) { return false; };
  r = sample_size_search(0.9, never, 10, 1, 4, 40);
  CHECK_FALSE(r.found);
  CHECK(r.probes.back().n == 32);

  // A noisy monotone learner: success probability 1 - 8/n.
  auto noisy = [](std::size_t n, std::size_t, CounterRng& rng) { return rng.uniform() >= 8.0 / n; };
  r = sample_size_search(0.9, noisy, 200, 3, 8, 1 << 16);
  CHECK(r.found);
  CHECK(r.n >= 64);
  CHECK(r.n <= 512);
}

TEST_CASE("config parsing and validation") {
  json j = {{"experiment", "adv-vs-l1"},
            {"seed", 4},
            {"trials", 3},
            {"constants", {{"dualityC", 50}, {"boostTBase", 16}, {"coveringCaps", {{"exact", 12}}}}},
            {"acceptance", {{{"metric", "max_abs_diff"}, {"op", "<="}, {"value", 1e-12}}}}};
  auto c = config_from_json(j);
  CHECK(c.seed == 4);
  CHECK(c.constants.duality_c == 50);
  CHECK(c.constants.boost_t_base == 16);
  CHECK(c.constants.caps.exact_cover == 12);
  CHECK(c.constants.caps.fat_points == 8);
  REQUIRE(c.acceptance);
  CHECK(c.acceptance->size() == 1);
  CHECK(config_from_json(json(to_json(c))).seed == 4);

  auto bad = j;
  bad["experiment"] = "nope";
  CHECK_THROWS_AS(config_from_json(bad), Error);
  bad = j;
  bad["trials"] = 0;
  CHECK_THROWS_AS(config_from_json(bad), Error);
  bad = j;
  bad["constants"]["boostTBase"] = 20;
  CHECK_THROWS_AS(config_from_json(bad), Error);
  bad = j;
  bad["acceptance"][0]["op"] = "~";
  CHECK_THROWS_AS(config_from_json(bad), Error);
  CHECK_THROWS_AS(config_from_json(json::array()), Error);
}

TEST_CASE("assertion evaluation") {
  ordered_json agg{{"a", 0.5}, {"flag", true}, {"s", "text"}};
  auto r = evaluate({{"a", ">=", 0.5}, {"a", ">", 0.5}, {"a", "<", 1}, {"a", "==", 0.5}, {"flag", "==", 1},
                     {"missing", "<=", 1}, {"s", "<=", 1}},
                    agg);
  CHECK(r[0].pass);
  CHECK_FALSE(r[1].pass);
  CHECK(r[2].pass);
  CHECK(r[3].pass);
  CHECK(r[4].pass);
  CHECK_FALSE(r[5].pass);
  CHECK_FALSE(r[6].pass);
}

TEST_CASE("every catalog experiment runs at small size and its aggregates come from its rows") {
  const std::map<std::string, json> small{
      {"transform-mc", {{"pairs", 2000}}},
      {"duality-sweep", {{"sweepEpsilons", {0.45, 0.3}}}},
      {"erm-fail-parity", {{"n", 20}, {"m", 1000}}},
      {"dcover-realizable", {{"n", 500}}},
      {"dcover-agnostic", {{"n", 500}}},
      {"boost-endtoend", {{"m", 4}, {"epsilon", 0.3}, {"probeTrials", 20}}},
      {"separation-components", {{"m", 4}, {"listCases", 6}, {"posteriorM", 4}, {"posteriorN", 2}}},
      {"cube-packing", {{"sizes", {2}}}},
  };
  for (const auto& id : experiment_ids()) {
    CAPTURE(id);
    auto c = cfg(id, 3, small.count(id) ? small.at(id) : json::object());
    const auto rep = run_experiment(c);
    CHECK_FALSE(rep.rows.empty());
    CHECK(summarize(rep.config, rep.rows) == rep.aggregates);
    CHECK(rep.columns == experiment_columns(id));
    for (const auto& row : rep.rows) {
      for (auto it = row.begin(); it != row.end(); ++it) {
        CHECK(std::find(rep.columns.begin(), rep.columns.end(), it.key()) != rep.columns.end());
      }
    }
    const auto csv = rows_csv(rep);
    CHECK(csv.substr(0, csv.find('\n')) == [&] {
      std::string h;
      for (std::size_t i = 0; i < rep.columns.size(); ++i) h += (i ? "," : "") + rep.columns[i];
      return h;
    }());
    CHECK(report_json(rep)["provenance"]["config"]["experiment"] == id);
  }
  CHECK_THROWS_AS(run_experiment(cfg("unknown", 1)), Error);
}

TEST_CASE("single-trial run is one deterministic row") {
  auto c = cfg("adv-vs-l1", 1);
  const auto a = run_experiment(c);
  const auto b = run_experiment(c);
  CHECK(a.rows.size() == 1);
  CHECK(report_json(a).dump() == report_json(b).dump());
  CHECK(rows_csv(a) == rows_csv(b));
  c.workers = 3;
  c.trials = 9;
  auto par = run_experiment(c);
  c.workers = 1;
  CHECK(rows_csv(par) == rows_csv(run_experiment(c)));
}

TEST_CASE("duality sweep rows match direct geometry calls") {
  auto c = cfg("duality-sweep", 2, {{"sweepEpsilons", {0.45, 0.3}}});
  const auto rep = run_experiment(c);
  const auto direct = hadamard_sweep({0.45, 0.3});
  std::size_t k = 0;
  for (const auto& row : rep.rows) {
    if (row["kind"] != "hadamard") continue;
    REQUIRE(k < direct.rows.size());
    CHECK(row["epsilon"].get<double>() == direct.rows[k].epsilon);
    CHECK(row["lhs"].get<double>() == direct.rows[k].lhs);
    CHECK(row["rhs"].get<double>() == direct.rows[k].rhs);
    ++k;
  }
  CHECK(k == 2);
  CHECK(rep.aggregates["sweep_exponent"].get<double>() == direct.exponent);
}

TEST_CASE("three-constant ERM failure rate") {
  const auto rep = run_experiment(cfg("erm-fail-3const", 2000, {{"n", 10}}));
  CHECK(rep.passed);
  // Balanced samples occur with probability C(10,5)/2^10.
  const double balanced = 252.0 / 1024.0;
  const double rate = rep.aggregates["unbalanced_rate"].get<double>();
  CHECK(std::fabs(rate - (1.0 - balanced)) < 4.0 * std::sqrt(balanced * (1 - balanced) / 2000.0));
  CHECK(rep.aggregates["failure_rate"].get<double>() >= rate);
}
