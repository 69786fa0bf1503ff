// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library only through the C API.

#include "hemoflow/hemoflow.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

struct ConfigDeleter {
  void operator()(hf_config* c) const { hf_config_free(c); }
};
using ConfigPtr = std::unique_ptr<hf_config, ConfigDeleter>;

int report_failure(hf_status s) {
  std::fprintf(stderr, "hemoflow: %s\n", hf_last_error());
  return static_cast<int>(s);
}

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "INI run configuration (defaults apply when omitted)");
  cmd->add_option("--seed", o.seed, "noise seed, overrides the config");
  cmd->add_option("--out", o.out, "output directory, overrides the config");
}

// Loads the config and applies command-line overrides.
hf_status open_config(const CommonOptions& o, ConfigPtr& cfg) {
  hf_config* raw = nullptr;
  const hf_status s = o.config.empty() ? hf_config_default(&raw) : hf_config_load(o.config.c_str(), &raw);
  cfg.reset(raw);
  if (s != HF_OK)
    return s;
  if (o.seed) {
    if (const auto r = hf_config_set_seed(cfg.get(), *o.seed); r != HF_OK)
      return r;
  }
  if (!o.out.empty())
    return hf_config_set_output(cfg.get(), o.out.c_str());
  return HF_OK;
}

int run_stages(const CommonOptions& o, const std::vector<const char*>& stages) {
  ConfigPtr cfg;
  if (const auto s = open_config(o, cfg); s != HF_OK)
    return report_failure(s);
  for (const char* stage : stages)
    if (const auto s = hf_run_stage(cfg.get(), stage, nullptr); s != HF_OK)
      return report_failure(s);
  return 0;
}

int fit_rheology(double hct, const std::string& base, const std::string& measurements, const std::string& out) {
  hf_power_law pl{};
  const hf_status s = measurements.empty() ? hf_fit_for_hct(hct, base.empty() ? nullptr : base.c_str(), &pl)
                                           : hf_fit_measurements(measurements.c_str(), &pl);
  if (s != HF_OK)
    return report_failure(s);
  double nf1 = 0.0, nf2 = 0.0;
  if (const auto r = hf_newtonian_equivalent(&pl, 12.0, 123.0, &nf1); r != HF_OK)
    return report_failure(r);
  if (const auto r = hf_newtonian_equivalent(&pl, 0.0, 2800.0, &nf2); r != HF_OK)
    return report_failure(r);
  std::printf("hct  %.4g %%\n", pl.hct);
  std::printf("m    %.6g Pa s^n\n", pl.m);
  std::printf("n    %.6g\n", pl.n);
  std::printf("NF1  %.6g Pa s  (12-123 1/s)\n", nf1);
  std::printf("NF2  %.6g Pa s  (0-2800 1/s)\n", nf2);
  std::printf("r2   %.6g\n", pl.r2);
  if (!out.empty())
    if (const auto r = hf_write_params(out.c_str(), &pl, 1); r != HF_OK)
      return report_failure(r);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"hemoflow: synthetic 4D flow MRI and non-Newtonian hemodynamics"};
  app.set_version_flag("--version", std::string(hf_version()));
  app.require_subcommand(1);

  int code = 0;

  double hct = 45.0;
  std::string base, measurements, params_out;
  auto* fit = app.add_subcommand("fit-rheology", "fit power-law rheology for a hematocrit");
  fit->add_option("--hct", hct, "hematocrit, percent")->capture_default_str();
  fit->add_option("--base", base, "base curves CSV `hct,m,n,r2,rmse` (built-in table when omitted)");
  fit->add_option("--measurements", measurements, "fit raw `shear_rate,viscosity,hct` samples instead");
  fit->add_option("--out", params_out, "write the fitted parameters as CSV");
  fit->callback([&] { code = fit_rheology(hct, base, measurements, params_out); });

  struct Stage {
    const char* name;
    const char* help;
    std::vector<const char*> stages;
  };
  const std::vector<Stage> stage_commands{
      {"synth-mri", "build the phantom and velocity fields, then synthesize noisy k-space", {"phantom", "synth-mri"}},
      {"reconstruct", "reconstruct complex images from k-space", {"reconstruct"}},
      {"estimate", "decode velocities and compute WSS, OSI and energy loss per model", {"estimate"}},
      {"windkessel", "simulate the outlet Windkessel", {"windkessel"}},
  };
  std::vector<CommonOptions> stage_opts(stage_commands.size());
  for (size_t i = 0; i < stage_commands.size(); ++i) {
    auto* cmd = app.add_subcommand(stage_commands[i].name, stage_commands[i].help);
    add_common(cmd, stage_opts[i]);
    cmd->callback([&, i] { code = run_stages(stage_opts[i], stage_commands[i].stages); });
  }

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "run every stage and render the report");
  add_common(run, run_opts);
  run->callback([&] {
    ConfigPtr cfg;
    if (const auto s = open_config(run_opts, cfg); s != HF_OK) {
      code = report_failure(s);
      return;
    }
    if (const auto s = hf_run_pipeline(cfg.get(), nullptr); s != HF_OK)
      code = report_failure(s);
  });

  std::string cmp_a, cmp_b, cmp_out;
  auto* cmp = app.add_subcommand("compare", "relative difference table of two stats CSVs");
  cmp->add_option("--a", cmp_a, "reference stats CSV")->required();
  cmp->add_option("--b", cmp_b, "other stats CSV")->required();
  cmp->add_option("--out", cmp_out, "output comparison CSV")->required();
  cmp->callback([&] {
    double max_abs = 0.0;
    if (const auto s = hf_compare_stats_files(cmp_a.c_str(), cmp_b.c_str(), cmp_out.c_str(), &max_abs); s != HF_OK)
      code = report_failure(s);
    else
      std::printf("max |b - a| = %.6g\n", max_abs);
  });

  std::string report_dir, reference = "PL";
  auto* rep = app.add_subcommand("report", "render tables and SVG charts from a run directory");
  rep->add_option("--out", report_dir, "run directory containing stats/")->required();
  rep->add_option("--reference", reference, "reference model")->capture_default_str();
  rep->callback([&] {
    if (const auto s = hf_render_report(report_dir.c_str(), reference.c_str()); s != HF_OK)
      code = report_failure(s);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return HF_ERROR;
  }
  return code;
}
