// oi-lab: command-line front end for constructions, geometry queries,
// learners, and the experiment harness.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "oi/constructions.hpp"
#include "oi/harness.hpp"
#include "oi/io.hpp"
#include "oi/learners.hpp"

namespace {

using oi::ErrorKind;
using oi::io::ordered_json;

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    oi::io::write_text_file(out, text);
  }
}

oi::io::Instance load_instance(const std::string& path) {
  return oi::io::instance_from_json(oi::io::read_json_file(path));
}

const oi::FnClass& need(const std::optional<oi::FnClass>& c, const char* what) {
  oi::require(c.has_value(), ErrorKind::Argument, std::string("instance lacks ") + what);
  return *c;
}

const oi::Distribution& need_mu(const oi::io::Instance& inst) {
  oi::require(inst.mu.has_value(), ErrorKind::Argument, "instance lacks a distribution");
  return *inst.mu;
}

oi::io::Instance from_erm(const oi::ErmInstance& e, const std::string& name) {
  oi::io::Instance inst;
  inst.name = name;
  inst.domain = e.domain;
  inst.mu = e.mu;
  inst.predictors = e.predictors;
  inst.distinguishers = e.distinguishers;
  inst.cover = e.cover;
  return inst;
}

oi::FnClass pick_class(const oi::io::Instance& inst, const std::string& which) {
  if (which == "predictors") return need(inst.predictors, "predictors");
  oi::require(which == "distinguishers", ErrorKind::Argument, "class must be predictors or distinguishers");
  return need(inst.distinguishers, "distinguishers");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oi-lab: outcome indistinguishability laboratory"};
  app.require_subcommand(1);
  std::string out;

  // construct
  auto* construct = app.add_subcommand("construct", "Emit a named instance as JSON");
  std::string cname;
  double c_eps = 0.2, c_step = 0.125;
  std::size_t c_size = 5, c_n = 200, c_m = 10000;
  construct->add_option("name", cname, "hadamard | erm-3const | erm-parity | separation")->required();
  construct->add_option("--epsilon", c_eps, "Hadamard epsilon");
  construct->add_option("--grid-step", c_step, "Hadamard cube grid step");
  construct->add_option("--size", c_size, "3-constant instance domain size");
  construct->add_option("--n", c_n, "parity-sets n");
  construct->add_option("--m", c_m, "parity-sets m, or separation m");
  construct->add_option("--out", out, "output file (default stdout)");

  // covering
  auto* covering = app.add_subcommand("covering", "Covering number of a class under another's norm");
  std::string inst_path, of = "predictors", under = "distinguishers", mode = "exact";
  double eps = 0.1;
  covering->add_option("--instance", inst_path, "instance JSON")->required();
  covering->add_option("--epsilon", eps, "covering radius")->required();
  covering->add_option("--of", of, "class to cover (predictors | distinguishers)");
  covering->add_option("--under", under, "class inducing the norm");
  covering->add_option("--mode", mode, "exact | greedy");
  covering->add_option("--out", out, "output file");

  // fat
  auto* fat = app.add_subcommand("fat", "Fat-shattering dimension");
  std::string fat_class = "distinguishers";
  double gamma = 0.1;
  std::size_t max_points = 8, lower_trials = 0;
  std::uint64_t seed = 0;
  fat->add_option("--instance", inst_path, "instance JSON")->required();
  fat->add_option("--gamma", gamma, "margin")->required();
  fat->add_option("--max-points", max_points, "largest shattered set searched");
  fat->add_option("--class", fat_class, "predictors | distinguishers");
  fat->add_option("--lower", lower_trials, "randomized lower bound with this many trials instead of exact search");
  fat->add_option("--seed", seed, "seed for --lower");
  fat->add_option("--out", out, "output file");

  // duality
  auto* duality = app.add_subcommand("duality", "Check the metric-entropy duality inequality");
  double constant = 1000.0;
  duality->add_option("--instance", inst_path, "instance JSON (F1 = distinguishers, F2 = predictors)")->required();
  duality->add_option("--epsilon", eps, "scale")->required();
  duality->add_option("--C", constant, "absolute constant");
  duality->add_option("--out", out, "output file");

  // learn
  auto* learn = app.add_subcommand("learn", "Run a learner on a sample");
  std::string learner, sample_path, trace_path;
  double delta = 0.1;
  std::size_t t_base = 25, levels = 1;
  learn->add_option("--learner", learner, "erm | dcover | boost | mcboost | zerofat | easy")->required();
  learn->add_option("--instance", inst_path, "instance JSON")->required();
  learn->add_option("--sample", sample_path, "sample CSV (x_index,outcome)")->required();
  learn->add_option("--epsilon", eps, "accuracy")->required();
  learn->add_option("--delta", delta, "failure probability");
  learn->add_option("--seed", seed, "seed for synthetic outcomes")->required();
  learn->add_option("--t-base", t_base, "boost round constant (16 or 25)");
  learn->add_option("--levels", levels, "mcboost level cells");
  learn->add_option("--trace", trace_path, "boost trace output (JSON lines)");
  learn->add_option("--out", out, "output file");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run a catalog experiment from a config");
  std::string config_path, out_dir = "out";
  std::optional<std::size_t> trials, workers;
  experiment->add_option("--config", config_path, "config JSON")->required();
  experiment->add_option("--out", out_dir, "output directory for report.json and rows.csv");
  experiment->add_option("--seed", seed, "root seed (overrides the config)")->required();
  experiment->add_option("--trials", trials, "override trials");
  experiment->add_option("--workers", workers, "override worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*construct) {
      oi::io::Instance inst;
      if (cname == "hadamard") {
        const auto h = oi::make_hadamard_instance(c_eps, c_step);
        inst.name = "hadamard";
        inst.mu = h.mu;
        inst.predictors = h.cube;
        inst.distinguishers = h.columns;
        inst.meta = {{"epsilon", h.epsilon}, {"m", h.m}, {"gridStep", c_step}};
      } else if (cname == "erm-3const") {
        inst = from_erm(oi::make_erm_failure_3const(c_size), cname);
      } else if (cname == "erm-parity") {
        inst = from_erm(oi::make_erm_failure_parity_sets(c_n, c_m), cname);
      } else if (cname == "separation") {
        const auto s = oi::make_separation_instance(static_cast<unsigned>(c_m));
        inst.name = cname;
        inst.mu = s.mu;
        inst.predictors = s.predictors;
        inst.distinguishers = s.distinguishers;
        inst.meta = {{"m", s.m}};
      } else {
        oi::fail(ErrorKind::Argument, "unknown construction '" + cname + "'");
      }
      emit(out, oi::io::to_json(inst).dump(2) + "\n");
      return 0;
    }
    if (*covering) {
      const auto inst = load_instance(inst_path);
      const auto f2 = pick_class(inst, of);
      const auto f1 = pick_class(inst, under);
      oi::CoveringResult r;
      if (mode == "exact") {
        r = oi::covering_exact(f2, f1, need_mu(inst), eps);
      } else {
        oi::require(mode == "greedy", ErrorKind::Argument, "mode must be exact or greedy");
        r = oi::covering_greedy(f2, f1, need_mu(inst), eps);
      }
      emit(out, oi::io::to_json(r).dump(2) + "\n");
      return 0;
    }
    if (*fat) {
      const auto inst = load_instance(inst_path);
      const auto cls = pick_class(inst, fat_class);
      const auto r = lower_trials > 0 ? oi::fat_lower(cls, gamma, max_points, lower_trials, seed)
                                      : oi::fat_exact(cls, gamma, max_points);
      emit(out, oi::io::to_json(r).dump(2) + "\n");
      return 0;
    }
    if (*duality) {
      const auto inst = load_instance(inst_path);
      const auto r = oi::duality_check(need(inst.distinguishers, "distinguishers"), need(inst.predictors, "predictors"),
                                       need_mu(inst), eps, constant);
      emit(out, oi::io::to_json(r).dump(2) + "\n");
      return r.holds ? 0 : 1;
    }
    if (*learn) {
      const auto inst = load_instance(inst_path);
      const auto& mu = need_mu(inst);
      std::ifstream sin(sample_path);
      oi::require(sin.good(), ErrorKind::Io, "cannot open " + sample_path);
      const auto s = oi::io::read_sample_csv(sin, mu.size());
      oi::LearnParams lp;
      lp.epsilon = eps;
      lp.delta = delta;
      lp.n = s.size();
      lp.seed = seed;
      lp.validate();
      ordered_json result;
      if (learner == "erm") {
        std::optional<std::vector<std::size_t>> cover;
        if (!inst.cover.empty()) cover = inst.cover;
        const auto r = oi::erm_learn(need(inst.predictors, "predictors"), need(inst.distinguishers, "distinguishers"),
                                     mu, lp, s, cover);
        result = {{"index", r.index}, {"cover", r.cover}, {"losses", r.losses},
                  {"predictor", oi::io::to_json(inst.predictors->members()[r.index])}};
      } else if (learner == "dcover") {
        const auto r = oi::dcover_learn(need(inst.predictors, "predictors"),
                                        need(inst.distinguishers, "distinguishers"), mu, lp, s);
        result = {{"index", r.index}, {"distinguisherCover", r.distinguisher_cover}, {"losses", r.losses},
                  {"predictor", oi::io::to_json(inst.predictors->members()[r.index])}};
      } else if (learner == "boost" || learner == "mcboost") {
        oi::SampleSource src(s);
        oi::BoostOptions opt;
        opt.t_base = t_base;
        const auto& d = need(inst.distinguishers, "distinguishers");
        const auto r = learner == "boost"
                           ? oi::boost_learn(d, lp, src, opt)
                           : oi::mc_boost_learn(d, lp, oi::LevelPartition::uniform(levels), src, opt);
        if (!trace_path.empty()) oi::io::write_text_file(trace_path, oi::io::trace_jsonl(r.trace));
        result = {{"predictor", oi::io::to_json(r.predictor)},
                  {"rounds", r.trace.rounds.size()},
                  {"exit", oi::to_string(r.trace.exit)}};
      } else if (learner == "zerofat") {
        const auto r = oi::zero_fat_learn(need(inst.distinguishers, "distinguishers"), lp, s);
        result = {{"predictor", oi::io::to_json(r.predictor)}, {"rPlus", r.r_plus}, {"rMinus", r.r_minus}};
      } else if (learner == "easy") {
        result = {{"predictor", oi::io::to_json(oi::easy_agnostic_learn(s, mu.size(), 0))}};
      } else {
        oi::fail(ErrorKind::Argument, "unknown learner '" + learner + "'");
      }
      emit(out, result.dump(2) + "\n");
      return 0;
    }
    if (*experiment) {
      auto j = oi::io::read_json_file(config_path);
      j["seed"] = seed;
      if (trials) j["trials"] = *trials;
      if (workers) j["workers"] = *workers;
      if (j.contains("instance") && j["instance"].is_string()) {
        // Instance paths are relative to the config file.
        auto p = std::filesystem::path(j["instance"].get<std::string>());
        if (p.is_relative()) p = std::filesystem::path(config_path).parent_path() / p;
        j["instance"] = oi::io::read_json_file(p.string());
      }
      const auto cfg = oi::harness::config_from_json(j);
      const auto report = oi::harness::run_experiment(cfg);
      oi::harness::write_report(report, out_dir);
      for (const auto& a : report.assertions) {
        std::cout << (a.pass ? "PASS " : "FAIL ") << a.assertion.metric << ' ' << a.assertion.op << ' '
                  << a.assertion.value << " (actual " << a.actual << ")\n";
      }
      std::cout << cfg.id << (report.passed ? ": all assertions passed\n" : ": assertions failed\n");
      return report.passed ? 0 : 1;
    }
  } catch (const oi::Error& e) {
    std::cerr << "oi-lab: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "oi-lab: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
