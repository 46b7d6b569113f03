#include "ppm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ppm/rng.hpp"

namespace ppm::experiments {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

nlohmann::json series_json(const VariantSeries& s) {
  nlohmann::json j;
  j["epsilon"] = s.epsilon;
  j["delta"] = s.delta;
  j["max_ecdf"] = s.max_ecdf;
  j["avg_ecdf"] = s.avg_ecdf;
  j["mean"] = s.mean;
  j["median"] = s.median;
  j["q90"] = s.q90;
  j["epsilon_quartiles"] = {synthesis::quantile(s.epsilon, 0.25),
                            synthesis::quantile(s.epsilon, 0.5),
                            synthesis::quantile(s.epsilon, 0.75)};
  return j;
}

void write_json(const std::string& dir, const std::string& name,
                const nlohmann::json& j) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + name + " in " + dir);
  }
  out << j.dump(2) << '\n';
}

void write_text_file(const std::string& dir, const std::string& name,
                     const std::string& text) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + name + " in " + dir);
  }
  out << text;
}

// Wide pair first (containing), narrow second.
std::pair<std::pair<double, double>, std::pair<double, double>>
ordered_range_pairs(const pipeline::PipelineConfig& config) {
  if (config.range_pairs.size() != 2) {
    throw std::invalid_argument(
        "experiment: needs exactly two range pairs (wide and narrow)");
  }
  auto a = config.range_pairs[0];
  auto b = config.range_pairs[1];
  const bool a_contains_b = a.first <= b.first && a.second >= b.second;
  if (!a_contains_b) std::swap(a, b);
  return {a, b};
}

}  // namespace

// ---------------------------------------------------------------------------
// Budget ordering across the six synthesizers
// ---------------------------------------------------------------------------

nlohmann::json OrderingExperiment::to_json() const {
  nlohmann::json j;
  j["labels"] = labels;
  nlohmann::json js;
  for (const auto& [label, s] : series) js[label] = series_json(s);
  j["series"] = js;
  nlohmann::json fr;
  for (const auto& [name, f] : ordering_fractions) fr[name] = f;
  j["ordering_fractions"] = fr;
  j["chain"] = chain_description;
  j["chain_fraction"] = chain_fraction;
  j["paired_avg_ecdf_diff_mean"] =
      paired_avg_ecdf_diff.empty() ? 0.0 : mean_of(paired_avg_ecdf_diff);
  return j;
}

OrderingExperiment run_experiment_budget_ordering(
    const pipeline::PipelineConfig& config, bool write_artifacts) {
  if (config.replicates < 2) {
    throw std::invalid_argument("ordering experiment: needs >= 2 replicates");
  }
  pipeline::PipelineConfig cfg = config;
  if (cfg.variants.empty()) cfg.variants = cfg.default_variants();
  cfg.synth_replicates = 1;

  const auto [wide, narrow] = ordered_range_pairs(cfg);
  const auto seeds = rng::replicate_seeds(cfg.seed, cfg.replicates);

  OrderingExperiment out;
  for (const auto& v : cfg.variants) out.labels.push_back(v.label());

  std::ostringstream csv;
  csv << "replicate,variant,epsilon,delta,max_ecdf,avg_ecdf,mean,median,"
         "q90\n";

  std::vector<std::map<std::string, double>> eps_by_rep(cfg.replicates);
  for (std::size_t r = 0; r < cfg.replicates; ++r) {
    auto rep = pipeline::run_replicate(cfg, seeds[r], {},
                                       pipeline::RunDepth::Utility);
    for (const auto& vr : rep.variants) {
      VariantSeries& s = out.series[vr.label];
      s.epsilon.push_back(vr.account.epsilon);
      s.delta.push_back(vr.account.delta);
      const auto& u = vr.utility.front();
      s.max_ecdf.push_back(u.ecdf.max_abs);
      s.avg_ecdf.push_back(u.ecdf.avg_sq);
      s.mean.push_back(u.synthetic.mean);
      s.median.push_back(u.synthetic.median);
      s.q90.push_back(u.synthetic.q90);
      eps_by_rep[r][vr.label] = vr.account.epsilon;
      csv << r << ',' << vr.label << ',' << vr.account.epsilon << ','
          << vr.account.delta << ',' << u.ecdf.max_abs << ',' << u.ecdf.avg_sq
          << ',' << u.synthetic.mean << ',' << u.synthetic.median << ','
          << u.synthetic.q90 << '\n';
    }
  }

  // The chain the paper reports, from wide to narrow ranges.
  const pipeline::VariantSpec tw{accounting::StandardKind::RangeTruncated,
                                 wide, {}};
  const pipeline::VariantSpec tn{accounting::StandardKind::RangeTruncated,
                                 narrow, {}};
  const pipeline::VariantSpec aw{accounting::StandardKind::RangeAveraged,
                                 wide, {}};
  const pipeline::VariantSpec an{accounting::StandardKind::RangeAveraged,
                                 narrow, {}};
  const std::vector<std::string> chain = {"weighted", tw.label(), tn.label(),
                                          aw.label(), an.label()};
  bool have_chain = true;
  for (const auto& c : chain) {
    if (!out.series.count(c)) have_chain = false;
  }
  if (have_chain) {
    std::size_t chain_ok = 0;
    std::map<std::string, std::size_t> pair_ok;
    for (std::size_t r = 0; r < cfg.replicates; ++r) {
      bool all = true;
      for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
        const bool gt =
            eps_by_rep[r][chain[k]] > eps_by_rep[r][chain[k + 1]];
        pair_ok[chain[k] + ">" + chain[k + 1]] += gt ? 1 : 0;
        all = all && gt;
      }
      chain_ok += all ? 1 : 0;
    }
    for (const auto& [name, cnt] : pair_ok) {
      out.ordering_fractions.emplace_back(
          name, static_cast<double>(cnt) / cfg.replicates);
    }
    out.chain_fraction = static_cast<double>(chain_ok) / cfg.replicates;
    std::string desc;
    for (std::size_t k = 0; k < chain.size(); ++k) {
      if (k) desc += " > ";
      desc += chain[k];
    }
    out.chain_description = desc;

    for (std::size_t r = 0; r < cfg.replicates; ++r) {
      out.paired_avg_ecdf_diff.push_back(
          out.series["weighted"].avg_ecdf[r] -
          out.series[tw.label()].avg_ecdf[r]);
    }
  }

  if (write_artifacts) {
    write_json(cfg.out_dir, "ordering_report.json", out.to_json());
    write_text_file(cfg.out_dir, "ordering_replicates.csv", csv.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Equal-budget calibration
// ---------------------------------------------------------------------------

nlohmann::json EqualBudgetExperiment::to_json() const {
  nlohmann::json j;
  j["target_epsilon"] = target_epsilon;
  j["confidential"] = {{"mean", confidential.mean},
                       {"median", confidential.median},
                       {"q90", confidential.q90}};
  nlohmann::json ja = nlohmann::json::array();
  for (const auto& a : arms) {
    ja.push_back({{"label", a.label},
                  {"scale", a.scale},
                  {"achieved_epsilon", a.achieved_epsilon},
                  {"converged", a.converged},
                  {"synthetic",
                   {{"mean", a.synthetic.mean},
                    {"median", a.synthetic.median},
                    {"q90", a.synthetic.q90}}},
                  {"closeness",
                   {{"mean", a.closeness_mean},
                    {"median", a.closeness_median},
                    {"q90", a.closeness_q90}}},
                  {"max_ecdf", a.max_ecdf},
                  {"avg_ecdf", a.avg_ecdf}});
  }
  j["arms"] = ja;
  j["best"] = {{"mean", best_mean}, {"median", best_median}, {"q90", best_q90}};
  return j;
}

EqualBudgetExperiment run_experiment_equal_budget(
    const pipeline::PipelineConfig& config, bool write_artifacts) {
  pipeline::PipelineConfig cfg = config;
  const auto [wide, narrow] = ordered_range_pairs(cfg);

  const pipeline::VariantSpec v_weighted{accounting::StandardKind::Weighted,
                                         {}, {}};
  const pipeline::VariantSpec v_wide{accounting::StandardKind::RangeTruncated,
                                     wide, {}};
  const pipeline::VariantSpec v_narrow{
      accounting::StandardKind::RangeTruncated, narrow, {}};

  // The narrow truncated synthesizer sets the target budget.
  cfg.variants = {v_narrow};
  cfg.target_epsilon.reset();
  auto narrow_rep = pipeline::run_replicate(cfg, cfg.seed, {},
                                            pipeline::RunDepth::Utility);
  const double target = narrow_rep.variants.front().account.epsilon;

  // Calibrate the other two onto it.
  cfg.variants = {v_weighted, v_wide};
  cfg.target_epsilon = target;
  auto cal_rep = pipeline::run_replicate(cfg, cfg.seed, {},
                                         pipeline::RunDepth::Utility);

  EqualBudgetExperiment out;
  out.target_epsilon = target;
  out.confidential = synthesis::quantile_stats(
      narrow_rep.dataset->outcomes());

  auto summarize = [&](const pipeline::VariantResult& vr) {
    EqualBudgetExperiment::Arm arm;
    arm.label = vr.label;
    arm.scale = vr.scale_used;
    arm.achieved_epsilon = vr.account.epsilon;
    if (vr.calibration) arm.converged = vr.calibration->converged;
    std::vector<double> means, medians, q90s, maxe, avge;
    for (const auto& u : vr.utility) {
      means.push_back(u.synthetic.mean);
      medians.push_back(u.synthetic.median);
      q90s.push_back(u.synthetic.q90);
      maxe.push_back(u.ecdf.max_abs);
      avge.push_back(u.ecdf.avg_sq);
    }
    arm.synthetic.mean = mean_of(means);
    arm.synthetic.median = mean_of(medians);
    arm.synthetic.q90 = mean_of(q90s);
    arm.max_ecdf = mean_of(maxe);
    arm.avg_ecdf = mean_of(avge);
    arm.closeness_mean = std::fabs(arm.synthetic.mean - out.confidential.mean);
    arm.closeness_median =
        std::fabs(arm.synthetic.median - out.confidential.median);
    arm.closeness_q90 = std::fabs(arm.synthetic.q90 - out.confidential.q90);
    return arm;
  };

  for (const auto& vr : cal_rep.variants) out.arms.push_back(summarize(vr));
  out.arms.push_back(summarize(narrow_rep.variants.front()));

  auto best_by = [&](auto proj) {
    const auto it =
        std::min_element(out.arms.begin(), out.arms.end(),
                         [&](const auto& a, const auto& b) {
                           return proj(a) < proj(b);
                         });
    return it->label;
  };
  out.best_mean = best_by([](const auto& a) { return a.closeness_mean; });
  out.best_median = best_by([](const auto& a) { return a.closeness_median; });
  out.best_q90 = best_by([](const auto& a) { return a.closeness_q90; });

  if (write_artifacts) {
    write_json(cfg.out_dir, "equal_budget_report.json", out.to_json());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tail widening
// ---------------------------------------------------------------------------

nlohmann::json TailWideningExperiment::to_json() const {
  nlohmann::json j;
  j["fractions"] = fractions;
  j["epsilon"] = epsilon;
  j["max_ecdf"] = max_ecdf;
  j["weighted_epsilon"] = weighted_epsilon;
  j["epsilon_chain_fraction"] = epsilon_chain_fraction;
  j["ecdf_chain_fraction"] = ecdf_chain_fraction;
  return j;
}

TailWideningExperiment run_experiment_tail_widening(
    const pipeline::PipelineConfig& config, bool write_artifacts) {
  pipeline::PipelineConfig cfg = config;
  cfg.synth_replicates = 1;
  const auto [wide, narrow] = ordered_range_pairs(cfg);
  (void)narrow;
  const auto base = wide;  // the paper widens the (0.4, 1.8) averaged range

  std::vector<double> fractions = cfg.top_fractions;
  std::sort(fractions.begin(), fractions.end());
  if (fractions.empty() || fractions.front() != 0.0) {
    fractions.insert(fractions.begin(), 0.0);
  }

  cfg.variants.clear();
  cfg.variants.push_back({accounting::StandardKind::Weighted, {}, {}});
  for (double f : fractions) {
    pipeline::VariantSpec v{accounting::StandardKind::RangeAveraged, base, {}};
    v.widen = pipeline::TailWidening{cfg.wide_range, f};
    cfg.variants.push_back(v);
  }

  const auto seeds = rng::replicate_seeds(cfg.seed, cfg.replicates);
  TailWideningExperiment out;
  out.fractions = fractions;
  out.epsilon.assign(fractions.size(), {});
  out.max_ecdf.assign(fractions.size(), {});

  std::size_t eps_chain_ok = 0, ecdf_chain_ok = 0;
  for (std::size_t r = 0; r < cfg.replicates; ++r) {
    auto rep = pipeline::run_replicate(cfg, seeds[r], {},
                                       pipeline::RunDepth::Utility);
    out.weighted_epsilon.push_back(rep.variants[0].account.epsilon);
    for (std::size_t k = 0; k < fractions.size(); ++k) {
      const auto& vr = rep.variants[k + 1];
      out.epsilon[k].push_back(vr.account.epsilon);
      out.max_ecdf[k].push_back(vr.utility.front().ecdf.max_abs);
    }
    bool eps_ok = true, ecdf_ok = true;
    for (std::size_t k = 0; k + 1 < fractions.size(); ++k) {
      eps_ok = eps_ok && out.epsilon[k][r] < out.epsilon[k + 1][r];
      ecdf_ok = ecdf_ok && out.max_ecdf[k][r] <= out.max_ecdf[k + 1][r];
    }
    eps_ok = eps_ok && out.epsilon.back()[r] < out.weighted_epsilon[r];
    eps_chain_ok += eps_ok ? 1 : 0;
    ecdf_chain_ok += ecdf_ok ? 1 : 0;
  }
  out.epsilon_chain_fraction =
      static_cast<double>(eps_chain_ok) / cfg.replicates;
  out.ecdf_chain_fraction =
      static_cast<double>(ecdf_chain_ok) / cfg.replicates;

  if (write_artifacts) {
    write_json(cfg.out_dir, "tail_report.json", out.to_json());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sample-size grid
// ---------------------------------------------------------------------------

nlohmann::json NGridExperiment::to_json() const {
  nlohmann::json j;
  j["grid"] = grid;
  j["labels"] = labels;
  nlohmann::json jd, ji;
  for (const auto& [label, per_n] : delta) jd[label] = per_n;
  for (const auto& [label, per_n] : iqr) ji[label] = per_n;
  j["delta"] = jd;
  j["iqr"] = ji;
  return j;
}

NGridExperiment run_experiment_n_grid(const pipeline::PipelineConfig& config,
                                      bool write_artifacts) {
  pipeline::PipelineConfig cfg = config;
  if (cfg.variants.empty()) cfg.variants = cfg.default_variants();
  if (cfg.n_grid.empty()) {
    throw std::invalid_argument("n-grid experiment: empty grid");
  }

  NGridExperiment out;
  out.grid = cfg.n_grid;
  for (const auto& v : cfg.variants) out.labels.push_back(v.label());
  for (const auto& l : out.labels) {
    out.delta[l].assign(cfg.n_grid.size(), {});
  }

  const auto seeds = rng::replicate_seeds(cfg.seed, cfg.replicates);
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    for (std::size_t r = 0; r < cfg.replicates; ++r) {
      auto rep = pipeline::run_replicate(cfg, seeds[r], cfg.n_grid[ni],
                                         pipeline::RunDepth::Account);
      for (const auto& vr : rep.variants) {
        out.delta[vr.label][ni].push_back(vr.account.delta);
      }
    }
  }
  for (const auto& l : out.labels) {
    for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
      const auto& v = out.delta[l][ni];
      out.iqr[l].push_back(synthesis::quantile(v, 0.75) -
                           synthesis::quantile(v, 0.25));
    }
  }

  if (write_artifacts) {
    write_json(cfg.out_dir, "ngrid_report.json", out.to_json());
  }
  return out;
}

}  // namespace ppm::experiments
