#include "ppm/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ppm::pipeline {

namespace {

std::string fmt_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// 0.4 -> "0p4", for filenames.
std::string fmt_mult(double v) {
  std::string s = fmt_number(v);
  for (char& c : s) {
    if (c == '.') c = 'p';
  }
  return s;
}

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <class F>
auto with_stage(const char* stage, F&& f) {
  try {
    return f();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(stage, e.what());
  }
}

}  // namespace

std::string VariantSpec::label() const {
  switch (kind) {
    case accounting::StandardKind::Unweighted:
      return "unweighted";
    case accounting::StandardKind::Weighted:
      return "weighted";
    default:
      break;
  }
  std::string base =
      kind == accounting::StandardKind::RangeAveraged ? "avg" : "trunc";
  std::string s = base;
  if (range) {
    s += "_" + fmt_mult(range->first) + "_" + fmt_mult(range->second);
  } else {
    s += "_unbounded";
  }
  if (widen && widen->top_fraction > 0.0) {
    s += "_top" + fmt_mult(widen->top_fraction * 100.0) + "pct";
  }
  return s;
}

VariantSpec parse_variant(const std::string& text) {
  auto strip = [](std::string s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(0, 1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
    return s;
  };
  const std::string t = strip(text);
  VariantSpec v;
  if (t == "unweighted") {
    v.kind = accounting::StandardKind::Unweighted;
    return v;
  }
  if (t == "weighted") {
    v.kind = accounting::StandardKind::Weighted;
    return v;
  }
  const auto open = t.find('(');
  const auto comma = t.find(',', open);
  const auto close = t.find(')', open);
  if (open == std::string::npos || comma == std::string::npos ||
      close == std::string::npos || close < comma) {
    throw std::invalid_argument("cannot parse synthesizer variant '" + t +
                                "' (expected e.g. avg(0.4,1.8))");
  }
  const std::string name = strip(t.substr(0, open));
  if (name == "avg") {
    v.kind = accounting::StandardKind::RangeAveraged;
  } else if (name == "trunc") {
    v.kind = accounting::StandardKind::RangeTruncated;
  } else {
    throw std::invalid_argument("unknown synthesizer variant '" + name + "'");
  }
  try {
    const double a = std::stod(t.substr(open + 1, comma - open - 1));
    const double b = std::stod(t.substr(comma + 1, close - comma - 1));
    v.range = std::make_pair(a, b);
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse range in variant '" + t + "'");
  }
  return v;
}

std::vector<VariantSpec> PipelineConfig::default_variants() const {
  std::vector<VariantSpec> v;
  v.push_back({accounting::StandardKind::Unweighted, {}, {}});
  v.push_back({accounting::StandardKind::Weighted, {}, {}});
  for (const auto& pr : range_pairs) {
    v.push_back({accounting::StandardKind::RangeAveraged, pr, {}});
    v.push_back({accounting::StandardKind::RangeTruncated, pr, {}});
  }
  return v;
}

nlohmann::json config_json(const PipelineConfig& config) {
  nlohmann::json j;
  if (config.input_csv) {
    j["data"] = *config.input_csv;
    j["outcome"] = config.schema.outcome;
    nlohmann::json preds = nlohmann::json::array();
    for (const auto& p : config.schema.predictors) preds.push_back(p.label());
    j["predictors"] = preds;
    j["intercept"] = config.schema.intercept;
  } else {
    j["simulation"] = {{"n", config.sim.n},
                       {"latent_mean", config.sim.latent_mean},
                       {"latent_sd", config.sim.latent_sd},
                       {"shift", config.sim.shift},
                       {"noise_sd", config.sim.noise_sd}};
  }
  nlohmann::json variants = nlohmann::json::array();
  for (const auto& v : config.variants) variants.push_back(v.label());
  j["variants"] = variants;
  j["m_draws"] = config.m_draws;
  j["s_draws"] = config.s_draws;
  j["seed"] = config.seed;
  j["weight_scale"] = config.weight_scale;
  if (config.target_epsilon) j["target_epsilon"] = *config.target_epsilon;
  j["synth_replicates"] = config.synth_replicates;
  j["replicates"] = config.replicates;
  j["prior"] = {{"coef_precision", config.prior.coef_precision},
                {"shape", config.prior.shape},
                {"rate", config.prior.rate}};
  j["density_scale"] =
      config.density_scale == model::DensityScale::Normal ? "normal"
                                                          : "lognormal";
  j["theta_mode"] = config.theta_mode == synthesis::ThetaMode::PerRecord
                        ? "per_record"
                        : "per_dataset";
  return j;
}

namespace {

ranges::RangeSpec build_range_spec(const VariantSpec& spec,
                                   const data::Dataset& data) {
  if (!spec.range) {
    throw std::invalid_argument("variant " + spec.label() +
                                " needs a range pair");
  }
  if (spec.widen && spec.widen->top_fraction > 0.0) {
    return ranges::RangeSpec::tail_widened(data, *spec.range, spec.widen->wide,
                                           spec.widen->top_fraction);
  }
  return ranges::RangeSpec::multiplicative(data, spec.range->first,
                                           spec.range->second);
}

risk::RiskWeights ones_weights(std::size_t n) {
  risk::RiskWeights w;
  w.alpha.assign(n, 1.0);
  w.raw.assign(n, 1.0);
  return w;
}

}  // namespace

ReplicateResult run_replicate(const PipelineConfig& config, std::uint64_t seed,
                              std::optional<std::size_t> n_override,
                              RunDepth depth) {
  ReplicateResult rep;

  rep.dataset = with_stage("data", [&] {
    if (config.input_csv) {
      return std::make_shared<const data::Dataset>(
          data::load_csv(*config.input_csv, config.schema));
    }
    data::SimulationConfig sim = config.sim;
    sim.seed = seed;
    if (n_override) sim.n = *n_override;
    return std::make_shared<const data::Dataset>(data::simulate(sim));
  });
  const data::Dataset& data = *rep.dataset;
  const std::size_t n = data.n();

  rep.stage1 = with_stage("fit-stage1", [&] {
    std::vector<double> ones(n, 1.0);
    return std::make_shared<const model::PosteriorDraws>(
        model::fit_pseudo_posterior(data, ones, config.prior, config.m_draws,
                                    seed));
  });

  rep.alpha = with_stage("weights", [&] {
    auto ll = risk::loglik_matrix(*rep.stage1, data, config.density_scale);
    auto alpha = risk::compute_alpha(ll);
    if (config.weight_scale != 1.0) {
      alpha = risk::scale_weights(alpha, config.weight_scale);
    }
    return alpha;
  });

  // The alpha-weighted fit is shared by the weighted and truncated variants
  // (the paper's mechanisms coincide; only the accounting differs).
  std::shared_ptr<const model::PosteriorDraws> base_alpha_fit;
  auto alpha_fit = [&]() {
    if (!base_alpha_fit) {
      base_alpha_fit = with_stage("fit-stage2", [&] {
        return std::make_shared<const model::PosteriorDraws>(
            model::fit_pseudo_posterior(data, rep.alpha.alpha, config.prior,
                                        config.m_draws, seed));
      });
    }
    return base_alpha_fit;
  };

  for (const VariantSpec& spec : config.variants) {
    VariantResult vr;
    vr.spec = spec;
    vr.label = spec.label();

    const bool needs_range =
        spec.kind == accounting::StandardKind::RangeAveraged ||
        spec.kind == accounting::StandardKind::RangeTruncated;
    std::optional<ranges::RangeSpec> rspec;
    if (needs_range) {
      rspec = with_stage("ranges", [&] { return build_range_spec(spec, data); });
    }
    if (spec.kind == accounting::StandardKind::RangeAveraged) {
      vr.lambda = with_stage("lambda", [&] {
        return ranges::estimate_lambda(*rep.stage1, data, *rspec,
                                       config.s_draws, seed);
      });
    }

    // Account for one candidate scale of the base weights.
    auto account_at = [&](double scale, bool reuse_shared_fit)
        -> std::pair<accounting::PrivacyAccount,
                     std::shared_ptr<const model::PosteriorDraws>> {
      risk::RiskWeights w =
          scale == 1.0 ? rep.alpha : risk::scale_weights(rep.alpha, scale);
      std::shared_ptr<const model::PosteriorDraws> post;
      const ranges::KnowledgeProbs* lam = nullptr;
      accounting::Standard standard = accounting::Standard::weighted();
      switch (spec.kind) {
        case accounting::StandardKind::Unweighted:
          post = rep.stage1;
          standard = accounting::Standard::unweighted();
          w = ones_weights(n);
          break;
        case accounting::StandardKind::Weighted:
          standard = accounting::Standard::weighted();
          post = reuse_shared_fit && scale == 1.0
                     ? alpha_fit()
                     : with_stage("fit-stage2", [&] {
                         return std::make_shared<const model::PosteriorDraws>(
                             model::fit_pseudo_posterior(data, w.alpha,
                                                         config.prior,
                                                         config.m_draws, seed));
                       });
          break;
        case accounting::StandardKind::RangeTruncated:
          standard = accounting::Standard::range_truncated(*rspec);
          post = reuse_shared_fit && scale == 1.0
                     ? alpha_fit()
                     : with_stage("fit-stage2", [&] {
                         return std::make_shared<const model::PosteriorDraws>(
                             model::fit_pseudo_posterior(data, w.alpha,
                                                         config.prior,
                                                         config.m_draws, seed));
                       });
          break;
        case accounting::StandardKind::RangeAveraged: {
          standard = accounting::Standard::range_averaged(*rspec);
          lam = &*vr.lambda;
          auto astar = ranges::compose_alpha_star(w, *vr.lambda);
          post = with_stage("fit-stage2", [&] {
            return std::make_shared<const model::PosteriorDraws>(
                model::fit_pseudo_posterior(data, astar.alpha_star,
                                            config.prior, config.m_draws,
                                            seed));
          });
          break;
        }
      }
      auto acc = with_stage("account", [&] {
        return accounting::account(standard, *post, data, w, lam,
                                   config.density_scale, vr.label);
      });
      return {std::move(acc), std::move(post)};
    };

    double scale = 1.0;
    if (config.target_epsilon &&
        spec.kind != accounting::StandardKind::Unweighted) {
      auto cal = with_stage("calibrate", [&] {
        return risk::calibrate_scale(
            [&](double c) { return account_at(c, false).first.epsilon; },
            *config.target_epsilon);
      });
      scale = cal.scale;
      vr.calibration = std::move(cal);
    }
    auto [acc, post] = account_at(scale, true);
    vr.scale_used = scale;
    vr.account = std::move(acc);
    vr.posterior = std::move(post);
    vr.weights = spec.kind == accounting::StandardKind::Unweighted
                     ? ones_weights(n)
                     : (scale == 1.0 ? rep.alpha
                                     : risk::scale_weights(rep.alpha, scale));
    if (spec.kind == accounting::StandardKind::RangeAveraged) {
      vr.alpha_star =
          ranges::compose_alpha_star(vr.weights, *vr.lambda).alpha_star;
    }

    if (depth != RunDepth::Account) {
      with_stage("synthesize", [&] {
        for (std::size_t r = 0; r < config.synth_replicates; ++r) {
          vr.synthetic.push_back(synthesis::synthesize(
              *vr.posterior, data, seed, r, config.theta_mode, vr.label));
        }
        return 0;
      });
    }
    if (depth == RunDepth::Utility) {
      with_stage("utility", [&] {
        for (const auto& syn : vr.synthetic) {
          vr.utility.push_back(synthesis::utility_report(data, syn));
        }
        return 0;
      });
    }
    rep.variants.push_back(std::move(vr));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

std::string file_checksum_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("checksum: cannot open " + path);
  }
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx",
                static_cast<unsigned long long>(h));
  return out;
}

namespace {

nlohmann::json account_json(const accounting::PrivacyAccount& acc) {
  nlohmann::json j;
  j["standard"] = acc.label;
  j["kind"] = accounting::kind_name(acc.kind);
  j["epsilon"] = acc.epsilon;
  j["delta"] = acc.delta;
  j["M"] = acc.m_draws;
  j["sign_flip_count"] = acc.sign_flip_count;
  if (acc.range_multipliers) {
    j["range"] = {acc.range_multipliers->first, acc.range_multipliers->second};
  }
  return j;
}

nlohmann::json stats_json(const synthesis::SummaryStats& s) {
  return {{"mean", s.mean}, {"median", s.median}, {"q90", s.q90}};
}

nlohmann::json utility_json(const synthesis::UtilityReport& u) {
  nlohmann::json j;
  j["max_ecdf"] = u.ecdf.max_abs;
  j["avg_ecdf"] = u.ecdf.avg_sq;
  j["synthetic"] = stats_json(u.synthetic);
  j["confidential"] = stats_json(u.confidential);
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path + " for writing");
  }
  out << text;
  if (!out) {
    throw std::runtime_error("write failed for " + path);
  }
}

}  // namespace

RunReport run_pipeline(const PipelineConfig& config, RunDepth depth) {
  namespace fs = std::filesystem;
  RunReport report;
  report.out_dir = config.out_dir;
  with_stage("write", [&] {
    fs::create_directories(config.out_dir);
    return 0;
  });

  ReplicateResult rep = run_replicate(config, config.seed, {}, depth);
  const data::Dataset& data = *rep.dataset;

  auto rel = [&](const std::string& name) { return name; };
  auto full = [&](const std::string& name) {
    return (fs::path(config.out_dir) / name).string();
  };
  auto add_file = [&](const std::string& name, const std::string& text) {
    with_stage("write", [&] {
      write_text(full(name), text);
      return 0;
    });
    report.files.push_back(rel(name));
  };

  // weights.csv: the base risk weights all variants start from.
  {
    std::ostringstream os;
    os << "record,alpha,raw,scale_constant\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
      os << i << ',' << fmt_g17(rep.alpha.alpha[i]) << ','
         << fmt_g17(rep.alpha.raw[i]) << ','
         << fmt_g17(rep.alpha.scale_constant) << '\n';
    }
    add_file("weights.csv", os.str());
  }

  // lambdas.csv: one block per range-averaged variant.
  {
    std::ostringstream os;
    os << "variant,record,lambda,se,alpha,alpha_star\n";
    bool any = false;
    for (const auto& vr : rep.variants) {
      if (!vr.lambda) continue;
      any = true;
      for (std::size_t i = 0; i < data.n(); ++i) {
        os << vr.label << ',' << i << ',' << fmt_g17(vr.lambda->lambda[i])
           << ',' << fmt_g17(vr.lambda->se(i)) << ','
           << fmt_g17(vr.weights.alpha[i]) << ','
           << fmt_g17((*vr.alpha_star)[i]) << '\n';
      }
    }
    if (any) add_file("lambdas.csv", os.str());
  }

  nlohmann::json jvariants = nlohmann::json::array();
  const std::string outcome_label =
      config.input_csv ? config.schema.outcome : std::string("y");
  for (const auto& vr : rep.variants) {
    nlohmann::json jv;
    jv["label"] = vr.label;
    jv["kind"] = accounting::kind_name(vr.spec.kind);
    jv["scale"] = vr.scale_used;
    jv["account"] = account_json(vr.account);
    nlohmann::json files;

    {
      std::ostringstream os;
      os << "record,lipschitz\n";
      for (std::size_t i = 0; i < data.n(); ++i) {
        os << i << ',' << fmt_g17(vr.account.per_record_lipschitz[i]) << '\n';
      }
      const std::string name = "accounts_" + vr.label + ".csv";
      add_file(name, os.str());
      files["account_csv"] = name;
    }
    {
      const std::string name = "account_" + vr.label + ".json";
      add_file(name, account_json(vr.account).dump(2) + "\n");
      files["account_json"] = name;
    }

    if (!vr.synthetic.empty()) {
      for (std::size_t r = 0; r < vr.synthetic.size(); ++r) {
        std::ostringstream os;
        os << outcome_label;
        for (const auto& l : data.labels()) os << ',' << l;
        os << '\n';
        for (std::size_t i = 0; i < data.n(); ++i) {
          os << fmt_g17(vr.synthetic[r].outcomes[i]);
          for (std::size_t j = 0; j < data.p(); ++j) {
            os << ',' << fmt_g17(data.col(j)[i]);
          }
          os << '\n';
        }
        const std::string name =
            r == 0 ? "synthetic_" + vr.label + ".csv"
                   : "synthetic_" + vr.label + "_r" + std::to_string(r + 1) +
                         ".csv";
        add_file(name, os.str());
        if (r == 0) files["synthetic_csv"] = name;
      }
    }
    if (!vr.utility.empty()) {
      nlohmann::json ju;
      ju["standard"] = vr.label;
      nlohmann::json reps = nlohmann::json::array();
      for (const auto& u : vr.utility) reps.push_back(utility_json(u));
      ju["replicates"] = reps;
      const std::string name = "utility_" + vr.label + ".json";
      add_file(name, ju.dump(2) + "\n");
      files["utility_json"] = name;
      jv["utility"] = reps;
    }
    jv["files"] = files;
    jvariants.push_back(jv);
  }

  nlohmann::json doc;
  doc["version"] = "0.1.0";
  doc["config"] = config_json(config);
  doc["confidential_stats"] =
      stats_json(synthesis::quantile_stats(data.outcomes()));
  doc["n"] = data.n();
  doc["variants"] = jvariants;

  nlohmann::json manifest = nlohmann::json::array();
  for (const auto& name : report.files) {
    nlohmann::json entry;
    entry["path"] = name;
    entry["bytes"] = fs::file_size(full(name));
    entry["fnv1a64"] = file_checksum_hex(full(name));
    manifest.push_back(entry);
  }
  doc["manifest"] = manifest;

  report.document = doc;
  add_file("run_report.json", doc.dump(2) + "\n");
  report.files.pop_back();  // run_report.json is not its own artifact
  return report;
}

}  // namespace ppm::pipeline
