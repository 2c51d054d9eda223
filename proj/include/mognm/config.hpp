#pragma once

// JSON configuration: strict parsing (unknown keys are errors), defaults
// equal to the reference parameter set, and a lossless dump for echoing the
// effective configuration into reports.

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"
#include "mognm/experiments.hpp"

namespace mognm {

struct OutputOptions {
  std::string path;              // empty: standard output
  std::string verbosity = "info";

  friend bool operator==(const OutputOptions&, const OutputOptions&) = default;
};

struct CliConfig {
  ExperimentConfig experiment;
  OutputOptions output;

  friend bool operator==(const CliConfig&, const CliConfig&) = default;
};

namespace detail {

using Json = nlohmann::json;

inline void reject_unknown(const Json& obj, const std::string& where, std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

template <class T>
void read_if(const Json& obj, const char* key, const std::string& where, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
  }
}

inline void read_number(const Json& obj, const char* key, const std::string& where, double& out) {
  if (!obj.contains(key)) return;
  if (!obj.at(key).is_number()) throw ConfigError("config key '" + where + "." + key + "' must be a number");
  out = obj.at(key).get<double>();
}

inline void read_int(const Json& obj, const char* key, const std::string& where, int& out) {
  if (!obj.contains(key)) return;
  if (!obj.at(key).is_number_integer()) throw ConfigError("config key '" + where + "." + key + "' must be an integer");
  out = obj.at(key).get<int>();
}

}  // namespace detail

/// Builds a configuration from a JSON document. Missing keys keep defaults.
[[nodiscard]] inline CliConfig config_from_json(const nlohmann::json& j) {
  using detail::read_if;
  using detail::read_int;
  using detail::read_number;
  CliConfig c;
  detail::reject_unknown(j, "", {"scheme", "detector", "experiment", "analysis", "output"});

  if (j.contains("scheme")) {
    const auto& s = j.at("scheme");
    detail::reject_unknown(s, "scheme",
                           {"mu", "sigma2_00", "sigma2_10", "sigma2_01", "sigma2_11", "p_low", "p_high", "sigma_w",
                            "n_samples"});
    auto& p = c.experiment.scheme;
    read_number(s, "mu", "scheme", p.mu);
    read_number(s, "sigma2_00", "scheme", p.sigma2_00);
    read_number(s, "sigma2_10", "scheme", p.sigma2_10);
    read_number(s, "sigma2_01", "scheme", p.sigma2_01);
    read_number(s, "sigma2_11", "scheme", p.sigma2_11);
    read_number(s, "p_low", "scheme", p.p_low);
    read_number(s, "p_high", "scheme", p.p_high);
    double sw = p.sigma_w();
    read_number(s, "sigma_w", "scheme", sw);
    if (sw < 0.0) throw ConfigError("scheme.sigma_w must be >= 0");
    p.sigma2_w = sw * sw;
    read_int(s, "n_samples", "scheme", p.n_samples);
  }
  if (j.contains("detector")) {
    const auto& d = j.at("detector");
    detail::reject_unknown(d, "detector",
                           {"th_kurtosis", "th_jb", "b2_method", "ml_uses_noise_inflation", "centering"});
    auto& det = c.experiment.detector;
    read_number(d, "th_kurtosis", "detector", det.th_kurtosis);
    read_number(d, "th_jb", "detector", det.th_jb);
    std::string method(to_string(det.b2_method));
    read_if(d, "b2_method", "detector", method);
    det.b2_method = parse_b2_method(method);
    read_if(d, "ml_uses_noise_inflation", "detector", det.ml_uses_noise_inflation);
    std::string centering(to_string(det.centering));
    read_if(d, "centering", "detector", centering);
    det.centering = parse_centering(centering);
  }
  if (j.contains("experiment")) {
    const auto& e = j.at("experiment");
    detail::reject_unknown(e, "experiment",
                           {"id", "n_symbols", "n_runs", "master_seed", "sweep_axis", "sweep_grid", "workers"});
    auto& x = c.experiment;
    read_if(e, "id", "experiment", x.experiment_id);
    read_int(e, "n_symbols", "experiment", x.n_symbols);
    read_int(e, "n_runs", "experiment", x.n_runs);
    if (e.contains("master_seed")) {
      const auto& v = e.at("master_seed");
      if (!v.is_number_unsigned()) {
        throw ConfigError("config key 'experiment.master_seed' must be a nonnegative integer");
      }
      x.master_seed = v.get<std::uint64_t>();
    }
    std::string axis(to_string(x.sweep_axis));
    read_if(e, "sweep_axis", "experiment", axis);
    x.sweep_axis = parse_sweep_axis(axis);
    read_if(e, "sweep_grid", "experiment", x.sweep_grid);
    read_int(e, "workers", "experiment", x.workers);
  }
  if (j.contains("analysis")) {
    const auto& a = j.at("analysis");
    detail::reject_unknown(a, "analysis", {"overlay_b0", "overlay_kurtosis", "overlay_bht", "bht_fit_samples",
                                           "kurtosis_model"});
    auto& o = c.experiment.overlays;
    read_if(a, "overlay_b0", "analysis", o.b0);
    read_if(a, "overlay_kurtosis", "analysis", o.kurtosis);
    read_if(a, "overlay_bht", "analysis", o.bht);
    read_if(a, "bht_fit_samples", "analysis", o.bht_fit_samples);
    std::string model(to_string(o.kurtosis_model));
    read_if(a, "kurtosis_model", "analysis", model);
    o.kurtosis_model = parse_kurtosis_model(model);
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    detail::reject_unknown(o, "output", {"path", "verbosity"});
    read_if(o, "path", "output", c.output.path);
    read_if(o, "verbosity", "output", c.output.verbosity);
    if (c.output.verbosity != "quiet" && c.output.verbosity != "info" && c.output.verbosity != "debug") {
      throw ConfigError("output.verbosity must be quiet|info|debug");
    }
  }
  return c;
}

[[nodiscard]] inline nlohmann::json config_to_json(const CliConfig& c) {
  const auto& x = c.experiment;
  const auto& p = x.scheme;
  nlohmann::json j;
  j["scheme"] = {{"mu", p.mu},
                 {"sigma2_00", p.sigma2_00},
                 {"sigma2_10", p.sigma2_10},
                 {"sigma2_01", p.sigma2_01},
                 {"sigma2_11", p.sigma2_11},
                 {"p_low", p.p_low},
                 {"p_high", p.p_high},
                 {"sigma_w", p.sigma_w()},
                 {"n_samples", p.n_samples}};
  j["detector"] = {{"th_kurtosis", x.detector.th_kurtosis},
                   {"th_jb", x.detector.th_jb},
                   {"b2_method", std::string(to_string(x.detector.b2_method))},
                   {"ml_uses_noise_inflation", x.detector.ml_uses_noise_inflation},
                   {"centering", std::string(to_string(x.detector.centering))}};
  j["experiment"] = {{"id", x.experiment_id},
                     {"n_symbols", x.n_symbols},
                     {"n_runs", x.n_runs},
                     {"master_seed", x.master_seed},
                     {"sweep_axis", std::string(to_string(x.sweep_axis))},
                     {"sweep_grid", x.sweep_grid},
                     {"workers", x.workers}};
  j["analysis"] = {{"overlay_b0", x.overlays.b0},
                   {"overlay_kurtosis", x.overlays.kurtosis},
                   {"overlay_bht", x.overlays.bht},
                   {"bht_fit_samples", x.overlays.bht_fit_samples},
                   {"kurtosis_model", std::string(to_string(x.overlays.kurtosis_model))}};
  j["output"] = {{"path", c.output.path}, {"verbosity", c.output.verbosity}};
  return j;
}

[[nodiscard]] inline CliConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

[[nodiscard]] inline CliConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Single-line JSON of the effective configuration.
[[nodiscard]] inline std::string dump_config(const CliConfig& c) { return config_to_json(c).dump(); }

/// Applies a dotted override such as "scheme.mu=0.02". The value is read as
/// JSON when it parses, otherwise as a string.
inline void apply_override(nlohmann::json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  nlohmann::json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty key");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key)) (*node)[key] = nlohmann::json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace mognm
