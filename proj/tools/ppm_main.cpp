// ppm: risk-weighted pseudo-posterior synthetic data with range-restricted
// privacy accounting.
//
//   ppm simulate   --config run.conf [--n ... --seed ... --out ...]
//   ppm fit        --config run.conf            posterior draws -> CSV
//   ppm account    --config run.conf            accounts + weights/lambdas
//   ppm synthesize --config run.conf            ... + synthetic datasets
//   ppm utility    --config run.conf            full pipeline + utility
//   ppm experiment {ordering|equal-budget|tail|ngrid} --config exp.conf

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ppm/config.hpp"
#include "ppm/experiments.hpp"
#include "ppm/kernels.hpp"
#include "ppm/pipeline.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> standards;
  std::vector<std::string> ranges;
  std::string out;
  std::string scale, target_epsilon, top_fraction;
  std::string m_draws, s_draws, seed, replicates, n;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "flat key = value config file");
  cmd->add_option("--standard", o.standards,
                  "synthesizer variant, e.g. weighted or avg(0.4,1.8); "
                  "repeatable");
  cmd->add_option("--range", o.ranges, "range pair a,b; repeatable");
  cmd->add_option("--m-draws", o.m_draws, "posterior draw count");
  cmd->add_option("--s-draws", o.s_draws, "predictive draw count for lambda");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--scale", o.scale, "weight scale constant in (0,1]");
  cmd->add_option("--target-epsilon", o.target_epsilon,
                  "calibrate weights to this budget");
  cmd->add_option("--top-fraction", o.top_fraction,
                  "widen the top outcome fraction's sensitive range");
  cmd->add_option("--replicates", o.replicates, "replicate count");
  cmd->add_option("--n", o.n, "simulated sample size");
  cmd->add_option("--out", o.out, "output directory");
}

ppm::pipeline::PipelineConfig load_config(const CommonOpts& o) {
  ppm::config::KeyValues kv;
  if (!o.config_path.empty()) {
    kv = ppm::config::parse_file(o.config_path);
  }
  auto override_kv = [&](const char* key, const std::string& v) {
    if (!v.empty()) kv[key] = v;
  };
  if (!o.standards.empty()) {
    std::string joined;
    for (const auto& s : o.standards) {
      if (!joined.empty()) joined += ", ";
      joined += s;
    }
    kv["standards"] = joined;
  }
  if (!o.ranges.empty()) {
    std::string joined;
    for (const auto& r : o.ranges) {
      if (!joined.empty()) joined += ", ";
      joined += "(" + r + ")";
    }
    kv["ranges"] = joined;
  }
  override_kv("m_draws", o.m_draws);
  override_kv("s_draws", o.s_draws);
  override_kv("seed", o.seed);
  override_kv("scale", o.scale);
  override_kv("target_epsilon", o.target_epsilon);
  override_kv("top_fraction", o.top_fraction);
  override_kv("replicates", o.replicates);
  override_kv("n", o.n);
  override_kv("out", o.out);
  return ppm::config::build_pipeline_config(kv);
}

int run_simulate(const CommonOpts& o) {
  auto cfg = load_config(o);
  auto data = ppm::data::simulate(cfg.sim);
  std::filesystem::create_directories(cfg.out_dir);
  const auto path =
      (std::filesystem::path(cfg.out_dir) / "simulated.csv").string();
  ppm::data::write_csv(data, "y", path);
  std::cout << "wrote " << path << " (n = " << data.n() << ")\n";
  return 0;
}

int run_fit(const CommonOpts& o) {
  auto cfg = load_config(o);
  if (cfg.variants.empty()) {
    cfg.variants = {{ppm::accounting::StandardKind::Weighted, {}, {}}};
  }
  auto rep = ppm::pipeline::run_replicate(cfg, cfg.seed, {},
                                          ppm::pipeline::RunDepth::Account);
  std::filesystem::create_directories(cfg.out_dir);
  for (const auto& vr : rep.variants) {
    const auto path = (std::filesystem::path(cfg.out_dir) /
                       ("posterior_" + vr.label + ".csv"))
                          .string();
    std::ofstream out(path);
    out << "draw";
    for (std::size_t j = 0; j < rep.dataset->p(); ++j) {
      out << ",beta" << j;
    }
    out << ",sigma2\n";
    char buf[40];
    for (std::size_t m = 0; m < vr.posterior->m_draws(); ++m) {
      out << m;
      for (double b : vr.posterior->draws[m].beta) {
        std::snprintf(buf, sizeof(buf), "%.17g", b);
        out << ',' << buf;
      }
      std::snprintf(buf, sizeof(buf), "%.17g",
                    vr.posterior->draws[m].sigma2);
      out << ',' << buf << '\n';
    }
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

int run_pipeline_cmd(const CommonOpts& o, ppm::pipeline::RunDepth depth) {
  auto cfg = load_config(o);
  if (cfg.variants.empty()) cfg.variants = cfg.default_variants();
  auto report = ppm::pipeline::run_pipeline(cfg, depth);
  for (const auto& v : report.document["variants"]) {
    std::cout << v["label"].get<std::string>()
              << ": epsilon = " << v["account"]["epsilon"].get<double>()
              << "\n";
  }
  std::cout << "report: " << report.out_dir << "/run_report.json\n";
  return 0;
}

int run_experiment(const std::string& which, const CommonOpts& o) {
  auto cfg = load_config(o);
  if (which == "ordering") {
    auto r = ppm::experiments::run_experiment_budget_ordering(cfg);
    std::cout << "chain " << r.chain_description << " held in "
              << r.chain_fraction * 100.0 << "% of replicates\n";
  } else if (which == "equal-budget") {
    auto r = ppm::experiments::run_experiment_equal_budget(cfg);
    std::cout << "target epsilon " << r.target_epsilon << "\n";
    for (const auto& arm : r.arms) {
      std::cout << arm.label << ": scale " << arm.scale << ", achieved "
                << arm.achieved_epsilon << "\n";
    }
  } else if (which == "tail") {
    auto r = ppm::experiments::run_experiment_tail_widening(cfg);
    std::cout << "epsilon chain fraction " << r.epsilon_chain_fraction
              << ", max-ECDF chain fraction " << r.ecdf_chain_fraction << "\n";
  } else if (which == "ngrid") {
    auto r = ppm::experiments::run_experiment_n_grid(cfg);
    for (const auto& [label, iqrs] : r.iqr) {
      std::cout << label << ": IQR(delta) over grid =";
      for (double v : iqrs) std::cout << ' ' << v;
      std::cout << "\n";
    }
  } else {
    std::cerr << "unknown experiment '" << which << "'\n";
    return 2;
  }
  std::cout << "reports in " << cfg.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"risk-weighted pseudo-posterior synthesizer with "
               "range-restricted privacy accounting"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto* c_sim = app.add_subcommand("simulate", "generate a simulated dataset");
  auto* c_fit = app.add_subcommand("fit", "fit and export posterior draws");
  auto* c_acc = app.add_subcommand("account", "run pipeline through accounting");
  auto* c_syn =
      app.add_subcommand("synthesize", "run pipeline through synthesis");
  auto* c_uti = app.add_subcommand("utility", "run the full pipeline");
  auto* c_exp = app.add_subcommand("experiment", "run a replicate experiment");
  std::string experiment_name;
  c_exp->add_option("name", experiment_name,
                    "ordering | equal-budget | tail | ngrid")
      ->required();
  for (auto* c : {c_sim, c_fit, c_acc, c_syn, c_uti, c_exp}) {
    add_common(c, opts);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_sim->parsed()) return run_simulate(opts);
    if (c_fit->parsed()) return run_fit(opts);
    if (c_acc->parsed()) {
      return run_pipeline_cmd(opts, ppm::pipeline::RunDepth::Account);
    }
    if (c_syn->parsed()) {
      return run_pipeline_cmd(opts, ppm::pipeline::RunDepth::Synthesize);
    }
    if (c_uti->parsed()) {
      return run_pipeline_cmd(opts, ppm::pipeline::RunDepth::Utility);
    }
    if (c_exp->parsed()) return run_experiment(experiment_name, opts);
  } catch (const ppm::pipeline::PipelineError& e) {
    std::cerr << "error " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
