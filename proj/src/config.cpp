#include "ppm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ppm::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  // Comma-separated, but commas inside parentheses belong to the item
  // (variant syntax like avg(0.4,1.8)).
  std::vector<std::string> items;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  const std::string last = trim(cur);
  if (!last.empty()) items.push_back(last);
  return items;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key +
                                "' expects a number, got '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    unsigned long long u = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key +
                                "' expects a non-negative integer, got '" + v +
                                "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: key '" + key +
                              "' expects true/false, got '" + v + "'");
}

std::pair<double, double> to_pair(const std::string& key,
                                  const std::string& v) {
  const auto items = split_list(v);
  if (items.size() != 2) {
    throw std::invalid_argument("config: key '" + key +
                                "' expects two comma-separated numbers");
  }
  return {to_double(key, items[0]), to_double(key, items[1])};
}

data::PredictorSpec parse_predictor(const std::string& item) {
  data::PredictorSpec spec;
  if (item.size() > 5 && item.substr(0, 4) == "log(" && item.back() == ')') {
    spec.column = trim(item.substr(4, item.size() - 5));
    spec.log_transform = true;
  } else {
    spec.column = item;
  }
  if (spec.column.empty()) {
    throw std::invalid_argument("config: empty predictor name");
  }
  return spec;
}

}  // namespace

KeyValues parse_text(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not of the form key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " has an empty key");
    }
    kv[key] = value;
  }
  return kv;
}

KeyValues parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("config: cannot open " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

pipeline::PipelineConfig build_pipeline_config(const KeyValues& kv) {
  static const std::set<std::string> known = {
      "data",         "outcome",       "predictors",   "intercept",
      "n",            "z_mean",        "z_sd",         "shift",
      "noise_sd",     "standards",     "m_draws",      "s_draws",
      "seed",         "scale",         "target_epsilon",
      "prior_precision", "prior_shape", "prior_rate",
      "synth_replicates", "replicates", "n_grid",      "ranges",
      "wide_range",   "top_fractions", "top_fraction", "out",
      "density_scale", "theta_mode"};
  for (const auto& [key, value] : kv) {
    (void)value;
    if (!known.count(key)) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }

  pipeline::PipelineConfig cfg;
  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() || it->second.empty() ? nullptr : &it->second;
  };

  if (const auto* v = get("data")) cfg.input_csv = *v;
  if (const auto* v = get("outcome")) cfg.schema.outcome = *v;
  if (const auto* v = get("predictors")) {
    for (const auto& item : split_list(*v)) {
      cfg.schema.predictors.push_back(parse_predictor(item));
    }
  }
  if (const auto* v = get("intercept")) {
    cfg.schema.intercept = to_bool("intercept", *v);
  }

  if (const auto* v = get("n")) {
    cfg.sim.n = static_cast<std::size_t>(to_u64("n", *v));
  }
  if (const auto* v = get("z_mean")) cfg.sim.latent_mean = to_double("z_mean", *v);
  if (const auto* v = get("z_sd")) cfg.sim.latent_sd = to_double("z_sd", *v);
  if (const auto* v = get("shift")) cfg.sim.shift = to_double("shift", *v);
  if (const auto* v = get("noise_sd")) {
    cfg.sim.noise_sd = to_double("noise_sd", *v);
  }

  if (const auto* v = get("ranges")) {
    cfg.range_pairs.clear();
    // "0.4 1.8; 0.6 1.2" or "(0.4,1.8), (0.6,1.2)"
    for (const auto& item : split_list(*v)) {
      std::string t = item;
      if (!t.empty() && t.front() == '(' && t.back() == ')') {
        t = t.substr(1, t.size() - 2);
      }
      for (char& c : t) {
        if (c == ' ' || c == ';') c = ',';
      }
      cfg.range_pairs.push_back(to_pair("ranges", t));
    }
  }
  if (const auto* v = get("standards")) {
    for (const auto& item : split_list(*v)) {
      cfg.variants.push_back(pipeline::parse_variant(item));
    }
  }
  if (const auto* v = get("m_draws")) {
    cfg.m_draws = static_cast<std::size_t>(to_u64("m_draws", *v));
  }
  if (const auto* v = get("s_draws")) {
    cfg.s_draws = static_cast<std::size_t>(to_u64("s_draws", *v));
  }
  if (const auto* v = get("seed")) cfg.seed = to_u64("seed", *v);
  if (const auto* v = get("scale")) cfg.weight_scale = to_double("scale", *v);
  if (const auto* v = get("target_epsilon")) {
    cfg.target_epsilon = to_double("target_epsilon", *v);
  }
  if (const auto* v = get("prior_precision")) {
    cfg.prior.coef_precision = to_double("prior_precision", *v);
  }
  if (const auto* v = get("prior_shape")) {
    cfg.prior.shape = to_double("prior_shape", *v);
  }
  if (const auto* v = get("prior_rate")) {
    cfg.prior.rate = to_double("prior_rate", *v);
  }
  if (const auto* v = get("synth_replicates")) {
    cfg.synth_replicates =
        static_cast<std::size_t>(to_u64("synth_replicates", *v));
  }
  if (const auto* v = get("replicates")) {
    cfg.replicates = static_cast<std::size_t>(to_u64("replicates", *v));
  }
  if (const auto* v = get("n_grid")) {
    cfg.n_grid.clear();
    for (const auto& item : split_list(*v)) {
      cfg.n_grid.push_back(static_cast<std::size_t>(to_u64("n_grid", item)));
    }
  }
  if (const auto* v = get("wide_range")) {
    cfg.wide_range = to_pair("wide_range", *v);
  }
  if (const auto* v = get("top_fractions")) {
    cfg.top_fractions.clear();
    for (const auto& item : split_list(*v)) {
      cfg.top_fractions.push_back(to_double("top_fractions", item));
    }
  }
  if (const auto* v = get("top_fraction")) {
    // Applies the widened tail to every range-averaged variant of a plain run.
    const double f = to_double("top_fraction", *v);
    for (auto& variant : cfg.variants) {
      if (variant.kind == accounting::StandardKind::RangeAveraged) {
        variant.widen = pipeline::TailWidening{cfg.wide_range, f};
      }
    }
  }
  if (const auto* v = get("out")) cfg.out_dir = *v;
  if (const auto* v = get("density_scale")) {
    if (*v == "normal") {
      cfg.density_scale = model::DensityScale::Normal;
    } else if (*v == "lognormal") {
      cfg.density_scale = model::DensityScale::Lognormal;
    } else {
      throw std::invalid_argument(
          "config: density_scale must be normal or lognormal");
    }
  }
  if (const auto* v = get("theta_mode")) {
    if (*v == "per_record") {
      cfg.theta_mode = synthesis::ThetaMode::PerRecord;
    } else if (*v == "per_dataset") {
      cfg.theta_mode = synthesis::ThetaMode::PerDataset;
    } else {
      throw std::invalid_argument(
          "config: theta_mode must be per_record or per_dataset");
    }
  }
  return cfg;
}

}  // namespace ppm::config
