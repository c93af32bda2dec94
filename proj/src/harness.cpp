#include "oi/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

#include "oi/error.hpp"
#include "oi/io.hpp"

namespace oi::harness {

void Constants::validate() const {
  require(duality_c > 0.0 && std::isfinite(duality_c), ErrorKind::Argument, "dualityC must be positive");
  require(boost_t_base == 16 || boost_t_base == 25, ErrorKind::Argument, "boostTBase must be 16 or 25");
  require(grid_step > 0.0 && grid_step <= 2.0, ErrorKind::Argument, "gridStep must lie in (0, 2]");
  require(caps.exact_cover >= 1 && caps.exact_cover <= 32, ErrorKind::Argument, "coveringCaps.exact must lie in [1, 32]");
  require(caps.fat_domain >= 1 && caps.fat_domain <= 24, ErrorKind::Argument, "coveringCaps.fatDomain must lie in [1, 24]");
  require(caps.fat_points >= 1 && caps.fat_points <= 16, ErrorKind::Argument, "coveringCaps.fatPoints must lie in [1, 16]");
  require(caps.grid_points >= 1 && caps.grid_points <= (std::size_t{1} << 26), ErrorKind::Argument,
          "coveringCaps.gridPoints must lie in [1, 2^26]");
}

void ExperimentConfig::validate() const {
  require(trials >= 1, ErrorKind::Argument, "trials must be at least 1");
  require(workers >= 1 && workers <= 256, ErrorKind::Argument, "workers must lie in [1, 256]");
  require(params.is_object(), ErrorKind::Argument, "params must be an object");
  constants.validate();
  const auto& ids = experiment_ids();
  require(std::find(ids.begin(), ids.end(), id) != ids.end(), ErrorKind::Argument,
          "unknown experiment id '" + id + "'");
  if (acceptance) {
    for (const auto& a : *acceptance) {
      require(a.op == "<=" || a.op == "<" || a.op == ">=" || a.op == ">" || a.op == "==", ErrorKind::Argument,
              "unknown assertion operator '" + a.op + "'");
    }
  }
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Argument, std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  require(j.is_object(), ErrorKind::Argument, "config must be a JSON object");
  ExperimentConfig c;
  c.id = get_or<std::string>(j, "experiment", "");
  require(!c.id.empty(), ErrorKind::Argument, "config lacks 'experiment'");
  c.seed = get_or<std::uint64_t>(j, "seed", 0);
  c.trials = get_or<std::size_t>(j, "trials", 200);
  c.workers = get_or<std::size_t>(j, "workers", 1);
  if (j.contains("params")) c.params = j.at("params");
  if (j.contains("instance")) c.instance = j.at("instance");
  if (j.contains("constants")) {
    const auto& k = j.at("constants");
    c.constants.duality_c = get_or<double>(k, "dualityC", c.constants.duality_c);
    c.constants.boost_t_base = get_or<std::size_t>(k, "boostTBase", c.constants.boost_t_base);
    c.constants.grid_step = get_or<double>(k, "gridStep", c.constants.grid_step);
    if (k.contains("coveringCaps")) {
      const auto& cc = k.at("coveringCaps");
      auto& caps = c.constants.caps;
      caps.exact_cover = get_or<std::size_t>(cc, "exact", caps.exact_cover);
      caps.fat_domain = get_or<std::size_t>(cc, "fatDomain", caps.fat_domain);
      caps.fat_points = get_or<std::size_t>(cc, "fatPoints", caps.fat_points);
      caps.grid_points = get_or<std::size_t>(cc, "gridPoints", caps.grid_points);
    }
  }
  if (j.contains("acceptance")) {
    std::vector<Assertion> block;
    for (const auto& a : j.at("acceptance")) {
      block.push_back({get_or<std::string>(a, "metric", ""), get_or<std::string>(a, "op", ">="),
                       get_or<double>(a, "value", 0.0)});
      require(!block.back().metric.empty(), ErrorKind::Argument, "acceptance entry lacks 'metric'");
    }
    c.acceptance = std::move(block);
  }
  c.validate();
  return c;
}

ordered_json to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["experiment"] = c.id;
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["workers"] = c.workers;
  j["params"] = c.params;
  if (!c.instance.is_null()) j["instance"] = c.instance;
  j["constants"] = {{"dualityC", c.constants.duality_c},
                    {"boostTBase", c.constants.boost_t_base},
                    {"gridStep", c.constants.grid_step},
                    {"coveringCaps",
                     {{"exact", c.constants.caps.exact_cover},
                      {"fatDomain", c.constants.caps.fat_domain},
                      {"fatPoints", c.constants.caps.fat_points},
                      {"gridPoints", c.constants.caps.grid_points}}}};
  if (c.acceptance) {
    j["acceptance"] = ordered_json::array();
    for (const auto& a : *c.acceptance) j["acceptance"].push_back({{"metric", a.metric}, {"op", a.op}, {"value", a.value}});
  }
  return j;
}

Interval wilson(std::size_t successes, std::size_t trials, double z) {
  require(successes <= trials, ErrorKind::Argument, "more successes than trials");
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (ph + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

CounterRng trial_rng(std::uint64_t seed, std::size_t t) { return CounterRng(seed).split(t); }

std::vector<ordered_json> run_trials(std::size_t trials, std::size_t workers, std::uint64_t seed,
                                     const std::function<ordered_json(std::size_t, CounterRng&)>& fn) {
  std::vector<ordered_json> out(trials);
  workers = std::max<std::size_t>(1, std::min(workers, trials));
  auto one = [&](std::size_t t) {
    CounterRng rng = trial_rng(seed, t);
    out[t] = fn(t, rng);
  };
  if (workers == 1) {
    for (std::size_t t = 0; t < trials; ++t) one(t);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < trials; t = next++) {
        try {
          one(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

SearchResult sample_size_search(double goal, const std::function<bool(std::size_t, std::size_t, CounterRng&)>& trial,
                                std::size_t probe_trials, std::uint64_t seed, std::size_t n_start, std::size_t n_max,
                                std::size_t workers) {
  require(goal > 0.0 && goal <= 1.0, ErrorKind::Argument, "search goal must lie in (0, 1]");
  require(probe_trials >= 1 && n_start >= 1 && n_start <= n_max, ErrorKind::Argument, "bad search range");
  SearchResult res;
  for (std::size_t n = n_start;; n *= 2) {
    // Each probe gets its own streams so probes are independent of each other.
    const std::uint64_t probe_seed = CounterRng(seed).split(0x5EA4C4ULL + n).next_u64();
    const auto flags = run_trials(probe_trials, workers, probe_seed, [&](std::size_t t, CounterRng& rng) {
      return ordered_json(trial(n, t, rng));
    });
    Probe p;
    p.n = n;
    p.trials = probe_trials;
    for (const auto& f : flags) p.successes += f.get<bool>() ? 1 : 0;
    p.interval = wilson(p.successes, p.trials);
    res.probes.push_back(p);
    if (p.interval.lo >= goal - 0.02) {
      res.n = n;
      res.found = true;
      return res;
    }
    if (n > n_max / 2) break;
  }
  res.n = res.probes.back().n;
  return res;
}

std::vector<AssertionResult> evaluate(const std::vector<Assertion>& block, const ordered_json& aggregates) {
  std::vector<AssertionResult> out;
  for (const auto& a : block) {
    AssertionResult r{a, std::nan(""), false};
    const auto it = aggregates.find(a.metric);
    if (it != aggregates.end() && (it->is_number() || it->is_boolean())) {
      const double v = it->is_boolean() ? (it->get<bool>() ? 1.0 : 0.0) : it->get<double>();
      r.actual = v;
      if (a.op == "<=") r.pass = v <= a.value;
      else if (a.op == "<") r.pass = v < a.value;
      else if (a.op == ">=") r.pass = v >= a.value;
      else if (a.op == ">") r.pass = v > a.value;
      else if (a.op == "==") r.pass = v == a.value;
    }
    out.push_back(r);
  }
  return out;
}

ordered_json report_json(const ExperimentReport& r) {
  ordered_json j;
  j["experiment"] = r.config.id;
  j["passed"] = r.passed;
  j["aggregates"] = r.aggregates;
  j["assertions"] = ordered_json::array();
  for (const auto& a : r.assertions) {
    j["assertions"].push_back({{"metric", a.assertion.metric},
                               {"op", a.assertion.op},
                               {"value", a.assertion.value},
                               {"actual", std::isnan(a.actual) ? ordered_json(nullptr) : ordered_json(a.actual)},
                               {"pass", a.pass}});
  }
  j["notes"] = r.notes;
  j["provenance"] = {{"codeVersion", kCodeVersion}, {"config", to_json(r.config)}};
  j["rowCount"] = r.rows.size();
  return j;
}

namespace {

std::string csv_cell(const ordered_json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  return v.dump();
}

}  // namespace

std::string rows_csv(const ExperimentReport& r) {
  std::ostringstream out;
  for (std::size_t i = 0; i < r.columns.size(); ++i) out << (i ? "," : "") << r.columns[i];
  out << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
      if (i) out << ',';
      if (row.contains(r.columns[i])) out << csv_cell(row.at(r.columns[i]));
    }
    out << '\n';
  }
  return out.str();
}

void write_report(const ExperimentReport& r, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorKind::Io, "cannot create output directory " + dir + ": " + ec.message());
  io::write_text_file((std::filesystem::path(dir) / "report.json").string(), report_json(r).dump(2) + "\n");
  io::write_text_file((std::filesystem::path(dir) / "rows.csv").string(), rows_csv(r));
}

}  // namespace oi::harness
