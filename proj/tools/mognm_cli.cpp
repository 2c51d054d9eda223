// Command-line front end: simulate, sweep, analyze, optimize-threshold.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mognm/mognm.hpp"

namespace {

using mognm::CliConfig;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int workers = 0;
  std::string out;
  bool quick = false;
  std::string b2_method;
  std::string axis;
  std::string grid;
  std::string emit_plot;
};

std::vector<double> parse_grid(const std::string& text) {
  auto num = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw mognm::ConfigError("bad grid value '" + s + "' in '" + text + "'");
    }
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw mognm::ConfigError("grid '" + text + "' must be lo:hi:step");
    try {
      return mognm::arithmetic_grid(num(parts[0]), num(parts[1]), num(parts[2]));
    } catch (const mognm::InvalidParams& e) {
      throw mognm::ConfigError(e.what());
    }
  }
  std::vector<double> g;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) g.push_back(num(p));
  if (g.empty()) throw mognm::ConfigError("empty grid");
  return g;
}

/// File or default config, then --set overrides, then dedicated flags.
CliConfig build_config(const CommonOptions& o, bool sweep) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config_path.empty()) j = mognm::config_to_json(mognm::load_config_file(o.config_path));
  for (const auto& s : o.overrides) mognm::apply_override(j, s);
  CliConfig c = mognm::config_from_json(j);
  auto& x = c.experiment;

  if (const char* env = std::getenv("MOGNM_WORKERS"); env != nullptr && *env != '\0') {
    try {
      x.workers = std::stoi(env);
    } catch (const std::exception&) {
      throw mognm::ConfigError(std::string("MOGNM_WORKERS='") + env + "' is not an integer");
    }
  }
  if (o.workers > 0) x.workers = o.workers;
  if (o.has_seed) x.master_seed = o.seed;
  if (!o.b2_method.empty()) x.detector.b2_method = mognm::parse_b2_method(o.b2_method);
  if (o.quick) {
    x.n_symbols = 2000;
    x.n_runs = 2;
  }
  if (!o.out.empty()) c.output.path = o.out;
  if (sweep) {
    if (!o.axis.empty()) x.sweep_axis = mognm::parse_sweep_axis(o.axis);
    if (x.sweep_axis == mognm::SweepAxis::none) throw mognm::ConfigError("sweep needs --axis (th_k|th_jb|n_samples|sigma_w)");
    if (!o.grid.empty()) {
      x.sweep_grid = parse_grid(o.grid);
    } else if (x.sweep_grid.empty()) {
      x.sweep_grid = mognm::default_grid(x.sweep_axis);
    }
  } else {
    x.sweep_axis = mognm::SweepAxis::none;
    x.sweep_grid.clear();
  }
  try {
    x.validate();
  } catch (const mognm::InvalidParams& e) {
    throw mognm::ConfigError(e.what());
  }
  return c;
}

void warn(const CliConfig& c) {
  if (c.output.verbosity == "quiet") return;
  for (const auto& w : c.experiment.warnings()) std::cerr << "warning: " << w << '\n';
}

std::string sci(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

void write_plot_script(const std::string& path, const std::string& csv_path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write plot script '" + path + "'");
  os << R"(#!/usr/bin/env python3
import csv
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

src = sys.argv[1] if len(sys.argv) > 1 else ")" << csv_path << R"("
with open(src) as f:
    rows = list(csv.DictReader(line for line in f if not line.startswith("#")))
if not rows:
    sys.exit("no data rows in " + src)

axis = rows[0]["axis_name"]
x = [float(r["axis_value"]) for r in rows]
fig, ax = plt.subplots(figsize=(6, 4))
for bit, color in (("b0", "tab:blue"), ("b1", "tab:orange"), ("b2", "tab:green")):
    y = [float(r["p_" + bit + "_sim"]) for r in rows]
    e = [float(r["se_" + bit]) for r in rows]
    ax.errorbar(x, y, yerr=e, marker="o", ms=3, color=color, label=bit + " simulated")
for col, color, label in (("p_b0_analytic", "tab:blue", "b0 analytic"),
                          ("p_b2_kur_analytic", "tab:green", "b2 kurtosis analytic"),
                          ("p_b2_bht_analytic", "tab:red", "b2 BHT analytic")):
    pts = [(xi, float(r[col])) for xi, r in zip(x, rows) if r[col]]
    if pts:
        ax.plot(*zip(*pts), "--", color=color, label=label)
ax.set_yscale("log")
if axis == "sigma_w":
    ax.set_xscale("log")
ax.set_xlabel(axis)
ax.set_ylabel("bit error probability")
ax.grid(True, which="both", alpha=0.3)
ax.legend(fontsize=8)
fig.tight_layout()
out = src.rsplit(".", 1)[0] + ".png"
fig.savefig(out, dpi=150)
print(out)
)";
}

void emit_report(const CliConfig& c, const mognm::BepReport& report) {
  std::ostringstream csv;
  mognm::write_csv(csv, report, {"effective config: " + mognm::dump_config(c)});
  const bool to_file = !c.output.path.empty();
  if (to_file) {
    std::ofstream os(c.output.path);
    if (!os) throw std::runtime_error("cannot write '" + c.output.path + "'");
    os << csv.str();
  } else {
    std::cout << csv.str();
  }
  if (c.output.verbosity == "quiet") return;
  std::ostream& log = to_file ? std::cout : std::cerr;
  for (const auto& row : report.rows) {
    log << row.axis_name << '=' << mognm::detail::fmt_g(row.axis_value, 6) << "  p_b0 " << sci(row.bep[0].p)
        << "  p_b1 " << sci(row.bep[1].p) << "  p_b2 " << sci(row.bep[2].p) << " (" << to_string(row.point.detector.b2_method)
        << ")  trials " << row.counts.trials << "  degenerate " << row.counts.degenerate << '\n';
  }
  if (to_file) log << "wrote " << c.output.path << '\n';
}

int cmd_simulate(const CommonOptions& o) {
  const CliConfig c = build_config(o, false);
  warn(c);
  mognm::BepReport report;
  report.experiment_id = c.experiment.experiment_id;
  report.master_seed = c.experiment.master_seed;
  report.config_hash = mognm::config_hash(c.experiment);
  report.rows.push_back(mognm::run_point(c.experiment));
  emit_report(c, report);
  return 0;
}

int cmd_sweep(const CommonOptions& o) {
  const CliConfig c = build_config(o, true);
  if (!o.emit_plot.empty() && c.output.path.empty()) throw mognm::ConfigError("--emit-plot needs --out");
  warn(c);
  emit_report(c, mognm::run_sweep(c.experiment));
  if (!o.emit_plot.empty()) {
    write_plot_script(o.emit_plot, c.output.path);
    if (c.output.verbosity != "quiet") std::cout << "wrote " << o.emit_plot << '\n';
  }
  return 0;
}

int cmd_analyze(const CommonOptions& o) {
  const CliConfig c = build_config(o, false);
  warn(c);
  const auto& x = c.experiment;
  const auto& p = x.scheme;
  std::cout << "N " << p.n_samples << "  sigma_w " << mognm::detail::fmt_g(p.sigma_w(), 6) << "  th_k "
            << mognm::detail::fmt_g(x.detector.th_kurtosis, 6) << '\n';
  std::cout << "p_b0 analytic            " << sci(mognm::bep_b0_closed_form(p)) << '\n';
  std::cout << "p_b2 kurtosis analytic   " << sci(mognm::bep_kurtosis(p, x.detector.th_kurtosis, x.overlays.kurtosis_model))
            << "  (" << to_string(x.overlays.kurtosis_model) << ")\n";

  const auto fits = mognm::fit_bht_contexts(p, x.overlays.bht_fit_samples, mognm::RngHandle{x.master_seed, 0xB47ULL},
                                            x.detector.ml_uses_noise_inflation);
  try {
    std::cout << "p_b2 BHT analytic        " << sci(mognm::bep_bht(p, fits)) << '\n';
  } catch (const mognm::InsufficientSamples& e) {
    std::cout << "p_b2 BHT analytic        unavailable: " << e.what() << '\n';
  }
  std::cout << "BHT fits (n_mc " << x.overlays.bht_fit_samples << " per hypothesis)\n";
  std::cout << "  b0 b1 h   m_F            var_F          m_G            var_G          se(F-G)        adequate\n";
  for (const auto& f : fits) {
    for (int h = 0; h < 2; ++h) {
      const auto& t = f.under[static_cast<std::size_t>(h)];
      char line[256];
      std::snprintf(line, sizeof line, "  %d  %d  %d  %+.6e  %.6e  %+.6e  %.6e  %.6e  %s\n", f.b0 ? 1 : 0, f.b1 ? 1 : 0,
                    h, t.mean_f, t.var_f, t.mean_g, t.var_g, t.se_delta, t.adequate() ? "yes" : "no");
      std::cout << line;
    }
  }
  return 0;
}

int cmd_optimize(const CommonOptions& o) {
  const CliConfig c = build_config(o, false);
  warn(c);
  const auto& x = c.experiment;
  const double th = mognm::optimal_kurtosis_threshold(x.scheme, x.overlays.kurtosis_model);
  char line[128];
  std::snprintf(line, sizeof line, "%.4f\n", th);
  std::cout << line;
  if (c.output.verbosity != "quiet") {
    std::cerr << "N " << x.scheme.n_samples << "  p_b2 at optimum " << sci(mognm::bep_kurtosis(x.scheme, th, x.overlays.kurtosis_model))
              << '\n';
  }
  return 0;
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", o.overrides, "override a config key, e.g. scheme.mu=0.02 (repeatable)");
  cmd->add_option("--seed", o.seed, "master seed")->each([&o](const std::string&) { o.has_seed = true; });
  cmd->add_option("--workers", o.workers, "worker threads (env MOGNM_WORKERS)")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "CSV output path (default: standard output)");
  cmd->add_flag("--quick", o.quick, "reduced run: K=2000, 2 runs");
  cmd->add_option("--b2-method", o.b2_method, "b2 detector")->check(CLI::IsMember({"kurtosis", "jb", "bht"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixture-of-Gaussians noise modulation: simulation and analysis"};
  app.require_subcommand(1);
  CommonOptions o;

  auto* sim = app.add_subcommand("simulate", "simulate one operating point");
  add_common(sim, o);
  auto* sweep = app.add_subcommand("sweep", "simulate a parameter sweep");
  add_common(sweep, o);
  sweep->add_option("--axis", o.axis, "th_k|th_jb|n_samples|sigma_w");
  sweep->add_option("--grid", o.grid, "lo:hi:step (inclusive) or a comma list");
  sweep->add_option("--emit-plot", o.emit_plot, "write a matplotlib script for the CSV");
  auto* analyze = app.add_subcommand("analyze", "print analytic bit error probabilities");
  add_common(analyze, o);
  auto* opt = app.add_subcommand("optimize-threshold", "print the BEP-minimising kurtosis threshold");
  add_common(opt, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*sweep) return cmd_sweep(o);
    if (*analyze) return cmd_analyze(o);
    if (*opt) return cmd_optimize(o);
  } catch (const mognm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
