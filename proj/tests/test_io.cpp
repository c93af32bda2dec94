#include <sstream>

#include "doctest.h"
#include "oi/io.hpp"

using namespace oi;
using namespace oi::io;

TEST_CASE("core types round-trip through JSON") {
  const Domain d({"a", "b", "c"});
  CHECK(domain_from_json(json(to_json(d))) == d);
  CHECK(to_json(d).dump() == R"({"individuals":["a","b","c"]})");
  CHECK(domain_from_json(json{{"size", 2}}).label(1) == "1");

  const Distribution mu({0.25, 0.25, 0.5});
  const auto mu2 = distribution_from_json(json(to_json(mu)));
  CHECK(mu2.size() == 3);
  CHECK(mu2[2] == 0.5);
  CHECK(distribution_from_json(json{{"uniform", 4}})[3] == 0.25);

  const Fn f({0.0, 0.5, 1.0}, FnKind::Predictor);
  const auto f2 = fn_from_json(json(to_json(f)));
  CHECK(f2.same_values(f));
  CHECK(f2.kind() == FnKind::Predictor);
  CHECK_THROWS_AS(fn_from_json(json{{"values", {2.0}}, {"kind", "predictor"}}), Error);
  CHECK_THROWS_AS(fn_from_json(json{{"kind", "predictor"}}), Error);
}

TEST_CASE("every class representation round-trips") {
  const std::vector<FnClass> classes{
      FnClass::explicit_members({Fn({1.0, -1.0}, FnKind::Distinguisher), Fn({0.5, 0.0}, FnKind::Distinguisher)}),
      FnClass::full_cube(3, -1.0, 1.0),
      FnClass::support_bounded(5, {0, 1}, {2, 3, 4}, 2),
      FnClass::parity(3, true),
      FnClass::hadamard(4),
      FnClass::grid(2, 0.0, 1.0, 0.25),
  };
  for (const auto& c : classes) {
    const auto j = to_json(c);
    CAPTURE(j.dump());
    const auto back = class_from_json(json(j));
    CHECK(to_json(back) == j);
    CHECK(back.domain_size() == c.domain_size());
    CHECK(back.cardinality() == c.cardinality());
  }
  CHECK_THROWS_AS(class_from_json(json{{"repr", "mystery"}}), Error);
}

TEST_CASE("result objects use the documented field names") {
  CoveringResult cr;
  cr.centers = {0, 2};
  cr.size = 2;
  cr.mode = CoverMode::Exact;
  cr.epsilon = 0.1;
  const auto j = to_json(cr);
  CHECK(j.dump() == R"({"centers":[0,2],"size":2,"mode":"exact","epsilon":0.1})");

  FatResult fr;
  fr.dimension = 1;
  fr.witness_points = {3};
  fr.witness_shifts = {0.5};
  CHECK(to_json(fr).dump() == R"({"dimension":1,"witnessPoints":[3],"witnessShifts":[0.5]})");
}

TEST_CASE("boost trace is one JSON object per round plus a summary line") {
  BoostTrace t;
  t.budget = 3;
  t.batch = 10;
  t.rounds.resize(2);
  t.rounds[0].round = 0;
  t.rounds[0].chosen = 4;
  t.rounds[0].cell = 0;
  t.rounds[1].round = 1;
  t.exit = BoostExit::EarlyReturn;
  std::istringstream in(trace_jsonl(t));
  std::string line;
  std::vector<json> lines;
  while (std::getline(in, line)) lines.push_back(json::parse(line));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0]["chosen"] == 4);
  CHECK(lines[1]["chosen"].is_null());
  CHECK(lines[2]["budget"] == 3);
}

TEST_CASE("sample CSV") {
  const Sample s({{0, 1}, {2, 0}, {1, 1}}, 3);
  std::ostringstream out;
  write_sample_csv(out, s);
  CHECK(out.str() == "x_index,outcome\n0,1\n2,0\n1,1\n");
  std::istringstream in(out.str());
  CHECK(read_sample_csv(in, 3) == s);

  std::istringstream crlf("x_index,outcome\r\n1,0\r\n\r\n");
  CHECK(read_sample_csv(crlf, 2).size() == 1);
  std::istringstream no_header("0,1\n");
  CHECK_THROWS_AS(read_sample_csv(no_header, 3), Error);
  std::istringstream bad_outcome("x_index,outcome\n0,2\n");
  CHECK_THROWS_AS(read_sample_csv(bad_outcome, 3), Error);
  std::istringstream bad_index("x_index,outcome\nx,1\n");
  CHECK_THROWS_AS(read_sample_csv(bad_index, 3), Error);
  std::istringstream out_of_range("x_index,outcome\n7,1\n");
  CHECK_THROWS_AS(read_sample_csv(out_of_range, 3), Error);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_sample_csv(empty, 3), Error);
}

TEST_CASE("instances round-trip and are checked for consistent domains") {
  Instance inst;
  inst.name = "tiny";
  inst.mu = Distribution::uniform(2);
  inst.predictors = FnClass::explicit_members({Fn({0.0, 1.0}, FnKind::Predictor)});
  inst.distinguishers = FnClass::full_cube(2, -1.0, 1.0);
  inst.cover = {0};
  const auto j = to_json(inst);
  const auto back = instance_from_json(json(j));
  CHECK(back.name == "tiny");
  CHECK(back.cover == std::vector<std::size_t>{0});
  CHECK(to_json(back) == j);
  auto bad = json(j);
  bad["distinguishers"]["domainSize"] = 3;
  CHECK_THROWS_AS(instance_from_json(bad), Error);
  CHECK_THROWS_AS(read_json_file("/nonexistent/file.json"), Error);
}
