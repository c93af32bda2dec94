#include "oi/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace oi::io {

namespace {

template <typename T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::Io, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

ordered_json to_json(const Domain& d) { return {{"individuals", d.labels()}}; }

Domain domain_from_json(const json& j) {
  if (j.is_object() && j.contains("size") && !j.contains("individuals")) {
    return Domain::indexed(field<std::size_t>(j, "size"));
  }
  return Domain(field<std::vector<std::string>>(j, "individuals"));
}

ordered_json to_json(const Distribution& mu) {
  return {{"weights", std::vector<double>(mu.weights().begin(), mu.weights().end())}};
}

Distribution distribution_from_json(const json& j) {
  if (j.is_object() && j.contains("uniform")) return Distribution::uniform(field<std::size_t>(j, "uniform"));
  return Distribution(field<std::vector<double>>(j, "weights"));
}

ordered_json to_json(const Fn& f) {
  return {{"values", std::vector<double>(f.values().begin(), f.values().end())},
          {"kind", to_string(f.kind())},
          {"bound", f.bound()}};
}

Fn fn_from_json(const json& j) {
  const FnKind kind = j.contains("kind") ? fn_kind_from_string(field<std::string>(j, "kind")) : FnKind::Generic;
  const double bound = j.contains("bound") ? field<double>(j, "bound") : 1.0;
  return Fn(field<std::vector<double>>(j, "values"), kind, bound);
}

ordered_json to_json(const FnClass& cls) {
  return std::visit(
      [&](const auto& r) -> ordered_json {
        using R = std::decay_t<decltype(r)>;
        ordered_json j;
        if constexpr (std::is_same_v<R, ExplicitRepr>) {
          j["repr"] = "explicit";
          j["kind"] = to_string(cls.kind());
          j["bound"] = cls.bound();
          j["members"] = ordered_json::array();
          for (const auto& f : r.members) j["members"].push_back(to_json(f));
        } else if constexpr (std::is_same_v<R, FullCubeRepr>) {
          j = {{"repr", "full_cube"}, {"domainSize", cls.domain_size()}, {"lo", r.lo}, {"hi", r.hi}};
        } else if constexpr (std::is_same_v<R, SupportBoundedRepr>) {
          j = {{"repr", "support_bounded"}, {"domainSize", cls.domain_size()}, {"special", r.special},
               {"free", r.free},            {"budget", r.budget}};
        } else if constexpr (std::is_same_v<R, ParityRepr>) {
          j = {{"repr", "parity"}, {"m", r.m}, {"withBottom", r.with_bottom}};
        } else if constexpr (std::is_same_v<R, HadamardRepr>) {
          j = {{"repr", "hadamard"}, {"m", r.m}};
        } else if constexpr (std::is_same_v<R, GridRepr>) {
          j = {{"repr", "grid"}, {"domainSize", cls.domain_size()}, {"lo", r.lo}, {"hi", r.hi}, {"step", r.step}};
        }
        return j;
      },
      cls.repr());
}

FnClass class_from_json(const json& j) {
  const auto repr = field<std::string>(j, "repr");
  if (repr == "explicit") {
    std::vector<Fn> members;
    for (const auto& m : field<json>(j, "members")) members.push_back(fn_from_json(m));
    if (j.contains("kind")) {
      return FnClass::explicit_members(std::move(members), fn_kind_from_string(field<std::string>(j, "kind")),
                                       j.contains("bound") ? field<double>(j, "bound") : 1.0);
    }
    return FnClass::explicit_members(std::move(members));
  }
  if (repr == "full_cube") {
    return FnClass::full_cube(field<std::size_t>(j, "domainSize"), field<double>(j, "lo"), field<double>(j, "hi"));
  }
  if (repr == "support_bounded") {
    return FnClass::support_bounded(field<std::size_t>(j, "domainSize"), field<std::vector<std::size_t>>(j, "special"),
                                    field<std::vector<std::size_t>>(j, "free"), field<std::size_t>(j, "budget"));
  }
  if (repr == "parity") return FnClass::parity(field<unsigned>(j, "m"), field<bool>(j, "withBottom"));
  if (repr == "hadamard") return FnClass::hadamard(field<std::size_t>(j, "m"));
  if (repr == "grid") {
    return FnClass::grid(field<std::size_t>(j, "domainSize"), field<double>(j, "lo"), field<double>(j, "hi"),
                         field<double>(j, "step"));
  }
  fail(ErrorKind::Io, "unknown class representation '" + repr + "'");
}

ordered_json to_json(const CoveringResult& r) {
  return {{"centers", r.centers}, {"size", r.size}, {"mode", to_string(r.mode)}, {"epsilon", r.epsilon}};
}

ordered_json to_json(const FatResult& r) {
  return {{"dimension", r.dimension}, {"witnessPoints", r.witness_points}, {"witnessShifts", r.witness_shifts}};
}

ordered_json to_json(const DualityReport& r) {
  return {{"epsilon", r.epsilon}, {"C", r.constant}, {"M1", r.m1},         {"M2", r.m2},
          {"lhs", r.lhs},         {"rhs", r.rhs},     {"bound", r.bound},  {"holds", r.holds}};
}

ordered_json to_json(const BoostRound& r) {
  ordered_json j;
  j["round"] = r.round;
  j["chosen"] = r.chosen ? ordered_json(*r.chosen) : ordered_json(nullptr);
  j["cell"] = r.cell ? ordered_json(*r.cell) : ordered_json(nullptr);
  j["empiricalGap"] = r.empirical_gap;
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  j["trueGap"] = opt(r.true_gap);
  j["potentialBefore"] = opt(r.potential_before);
  j["potentialUnclamped"] = opt(r.potential_unclamped);
  j["potentialAfter"] = opt(r.potential_after);
  return j;
}

std::string trace_jsonl(const BoostTrace& trace) {
  std::ostringstream out;
  for (const auto& r : trace.rounds) out << to_json(r).dump() << '\n';
  ordered_json tail{{"exitLine", to_string(trace.exit)},
                    {"budget", trace.budget},
                    {"batch", trace.batch},
                    {"tBase", trace.t_base}};
  out << tail.dump() << '\n';
  return out.str();
}

void write_sample_csv(std::ostream& out, const Sample& s) {
  out << "x_index,outcome\n";
  for (const auto& e : s) out << e.x << ',' << static_cast<int>(e.outcome) << '\n';
}

Sample read_sample_csv(std::istream& in, std::size_t domain_size) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::Io, "empty sample file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "x_index,outcome", ErrorKind::Io, "sample CSV must start with header x_index,outcome");
  std::vector<Example> ex;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    require(comma != std::string::npos, ErrorKind::Io, "sample CSV line " + std::to_string(lineno) + " lacks a comma");
    try {
      std::size_t used = 0;
      const unsigned long long x = std::stoull(line.substr(0, comma), &used);
      require(used == comma, ErrorKind::Io, "bad index");
      const int o = std::stoi(line.substr(comma + 1));
      require(o == 0 || o == 1, ErrorKind::Io, "outcome must be 0 or 1");
      ex.push_back({static_cast<std::size_t>(x), static_cast<std::uint8_t>(o)});
    } catch (const std::logic_error&) {
      fail(ErrorKind::Io, "sample CSV line " + std::to_string(lineno) + " is malformed");
    }
  }
  return Sample(std::move(ex), domain_size);
}

ordered_json to_json(const Instance& inst) {
  ordered_json j;
  if (!inst.name.empty()) j["name"] = inst.name;
  if (inst.domain) j["domain"] = to_json(*inst.domain);
  if (inst.mu) j["distribution"] = to_json(*inst.mu);
  if (inst.predictors) j["predictors"] = to_json(*inst.predictors);
  if (inst.distinguishers) j["distinguishers"] = to_json(*inst.distinguishers);
  if (!inst.cover.empty()) j["cover"] = inst.cover;
  if (!inst.meta.empty()) j["meta"] = inst.meta;
  return j;
}

Instance instance_from_json(const json& j) {
  Instance inst;
  if (j.contains("name")) inst.name = field<std::string>(j, "name");
  if (j.contains("domain")) inst.domain = domain_from_json(j.at("domain"));
  if (j.contains("distribution")) inst.mu = distribution_from_json(j.at("distribution"));
  if (j.contains("predictors")) inst.predictors = class_from_json(j.at("predictors"));
  if (j.contains("distinguishers")) inst.distinguishers = class_from_json(j.at("distinguishers"));
  if (j.contains("cover")) inst.cover = field<std::vector<std::size_t>>(j, "cover");
  if (j.contains("meta")) inst.meta = j.at("meta");
  const std::size_t n = inst.mu ? inst.mu->size() : inst.domain ? inst.domain->size() : 0;
  if (n > 0) {
    if (inst.domain) check_same_domain(inst.domain->size(), n, "instance domain");
    if (inst.predictors) check_same_domain(inst.predictors->domain_size(), n, "instance predictors");
    if (inst.distinguishers) check_same_domain(inst.distinguishers->domain_size(), n, "instance distinguishers");
  }
  return inst;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Io, path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot write " + path);
  out << text;
  require(out.good(), ErrorKind::Io, "write failed for " + path);
}

}  // namespace oi::io
