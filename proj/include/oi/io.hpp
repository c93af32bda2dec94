#pragma once

// JSON schema for the core types and results, plus the sample CSV format
// (header `x_index,outcome`).

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "oi/constructions.hpp"
#include "oi/core.hpp"
#include "oi/geometry.hpp"
#include "oi/learners.hpp"

namespace oi::io {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const Domain& d);
Domain domain_from_json(const json& j);

ordered_json to_json(const Distribution& mu);
Distribution distribution_from_json(const json& j);

ordered_json to_json(const Fn& f);
Fn fn_from_json(const json& j);

ordered_json to_json(const FnClass& cls);
FnClass class_from_json(const json& j);

ordered_json to_json(const CoveringResult& r);
ordered_json to_json(const FatResult& r);
ordered_json to_json(const DualityReport& r);
ordered_json to_json(const BoostRound& r);
/// One JSON object per line, one line per round.
std::string trace_jsonl(const BoostTrace& trace);

void write_sample_csv(std::ostream& out, const Sample& s);
Sample read_sample_csv(std::istream& in, std::size_t domain_size);

/// A serialized problem instance; absent parts stay empty.
struct Instance {
  std::string name;
  std::optional<Domain> domain;
  std::optional<Distribution> mu;
  std::optional<FnClass> predictors;
  std::optional<FnClass> distinguishers;
  std::vector<std::size_t> cover;
  ordered_json meta = ordered_json::object();
};

ordered_json to_json(const Instance& inst);
Instance instance_from_json(const json& j);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace oi::io
