// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hemoflow/hemoflow.h"

#include "hemoflow/error.hpp"
#include "hemoflow/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

struct hf_config {
  hemoflow::RunConfig cfg;
};

struct hf_mesh {
  hemoflow::TetMesh mesh;
};

namespace {

namespace fs = std::filesystem;
using namespace hemoflow;

thread_local std::string last_error;

template <class Fn>
hf_status guarded(Fn&& fn) {
  last_error.clear();
  try {
    fn();
    return HF_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return e.is_numerical() ? HF_ERROR_NUMERICAL : HF_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return HF_ERROR;
  } catch (...) {
    last_error = "unknown error";
    return HF_ERROR;
  }
}

void need(const void* p, const char* what) {
  require(p != nullptr, ErrorKind::InvalidArgument, std::string(what) + " must not be null");
}

hf_power_law to_c(const PowerLawParams& p) { return {p.m, p.n, p.hct, p.fit_r2, p.fit_rmse}; }

PowerLawParams from_c(const hf_power_law& p) {
  PowerLawParams out;
  out.m = p.m;
  out.n = p.n;
  out.hct = p.hct;
  out.fit_r2 = p.r2;
  out.fit_rmse = p.rmse;
  return out;
}

fs::path output_dir(const hf_config* config, const char* out) {
  return out != nullptr ? fs::path(out) : config->cfg.output;
}

} // namespace

extern "C" {

const char* hf_version(void) { return hemoflow::version(); }

const char* hf_last_error(void) { return last_error.c_str(); }

hf_status hf_fit_for_hct(double hct, const char* base_curves_csv, hf_power_law* out) {
  return guarded([&] {
    need(out, "out");
    const auto curves = base_curves_csv != nullptr ? read_params_csv(base_curves_csv) : reference_base_curves();
    *out = to_c(fit_for_hct(curves, hct, reference_shear_rates()));
  });
}

hf_status hf_fit_measurements(const char* measurements_csv, hf_power_law* out) {
  return guarded([&] {
    need(measurements_csv, "measurements_csv");
    need(out, "out");
    *out = to_c(fit_power_law(read_measurements_csv(measurements_csv)));
  });
}

hf_status hf_newtonian_equivalent(const hf_power_law* pl, double gamma0, double gamma1, double* mu) {
  return guarded([&] {
    need(pl, "pl");
    need(mu, "mu");
    *mu = newtonian_equivalent(from_c(*pl), gamma0, gamma1).mu;
  });
}

hf_status hf_write_params(const char* path, const hf_power_law* params, size_t count) {
  return guarded([&] {
    need(path, "path");
    need(params, "params");
    std::vector<PowerLawParams> rows;
    for (size_t i = 0; i < count; ++i)
      rows.push_back(from_c(params[i]));
    write_params_csv(path, rows);
  });
}

hf_status hf_config_default(hf_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new hf_config{};
  });
}

hf_status hf_config_load(const char* ini_path, hf_config** out) {
  return guarded([&] {
    need(ini_path, "ini_path");
    need(out, "out");
    *out = nullptr;
    auto cfg = load_config(ini_path);
    *out = new hf_config{std::move(cfg)};
  });
}

void hf_config_free(hf_config* config) { delete config; }

hf_status hf_config_set_seed(hf_config* config, uint64_t seed) {
  return guarded([&] {
    need(config, "config");
    config->cfg.noise.seed = seed;
  });
}

hf_status hf_config_set_output(hf_config* config, const char* dir) {
  return guarded([&] {
    need(config, "config");
    need(dir, "dir");
    config->cfg.output = dir;
  });
}

hf_status hf_config_output(const hf_config* config, char* buf, size_t size) {
  return guarded([&] {
    need(config, "config");
    need(buf, "buf");
    const std::string s = config->cfg.output.string();
    require(size > s.size(), ErrorKind::InvalidArgument, "buffer too small for output path");
    std::memcpy(buf, s.c_str(), s.size() + 1);
  });
}

hf_status hf_config_validate(const hf_config* config) {
  return guarded([&] {
    need(config, "config");
    validate(config->cfg);
  });
}

hf_status hf_run_pipeline(const hf_config* config, const char* out) {
  return guarded([&] {
    need(config, "config");
    run_pipeline(config->cfg, output_dir(config, out));
  });
}

hf_status hf_run_stage(const hf_config* config, const char* stage, const char* out) {
  return guarded([&] {
    need(config, "config");
    need(stage, "stage");
    const auto& cfg = config->cfg;
    const auto dir = output_dir(config, out);
    const std::string s = stage;
    validate(cfg);
    if (s == "phantom")
      stage_phantom(cfg, dir);
    else if (s == "synth-mri")
      stage_synthesize(cfg, dir);
    else if (s == "reconstruct")
      stage_reconstruct(cfg, dir);
    else if (s == "estimate")
      stage_estimate(cfg, dir);
    else if (s == "windkessel")
      stage_windkessel(cfg, dir);
    else
      fail(ErrorKind::InvalidArgument, "unknown stage '" + s + "'");
    write_manifest(cfg, dir);
  });
}

hf_status hf_write_manifest(const hf_config* config, const char* out) {
  return guarded([&] {
    need(config, "config");
    write_manifest(config->cfg, output_dir(config, out));
  });
}

hf_status hf_render_report(const char* out, const char* reference_model) {
  return guarded([&] {
    need(out, "out");
    render_report(out, reference_model != nullptr ? reference_model : "PL");
  });
}

hf_status hf_compare_stats_files(const char* reference_csv, const char* other_csv, const char* out_csv,
                                 double* max_abs) {
  return guarded([&] {
    need(reference_csv, "reference_csv");
    need(other_csv, "other_csv");
    need(out_csv, "out_csv");
    const auto rows = compare_models(read_stats_csv(reference_csv), read_stats_csv(other_csv));
    write_comparison_csv(out_csv, rows);
    if (max_abs != nullptr) {
      double m = 0.0;
      for (const auto& r : rows)
        if (r.absolute)
          m = std::max(m, std::abs(*r.absolute));
      *max_abs = m;
    }
  });
}

hf_status hf_windkessel_run(const hf_windkessel_params* params, const char* flow_csv, double dt, int cycles,
                            const char* scaling, const char* out_csv, double* drift) {
  return guarded([&] {
    need(params, "params");
    need(flow_csv, "flow_csv");
    need(out_csv, "out_csv");
    const WindkesselParams p{params->rp, params->rd, params->c, params->p_d0};
    p.validate();
    auto q = read_waveform_csv(flow_csv, WaveformKind::Volumetric);
    const std::string mode = scaling != nullptr ? scaling : "none";
    if (mode == "periodic")
      q = scale_flow_to_periodic_start(q, p, dt);
    else if (mode == "mean")
      q = scale_flow_to_distal_pressure(q, p);
    else
      require(mode == "none", ErrorKind::InvalidArgument, "unknown flow scaling '" + mode + "'");
    write_pressure_csv(out_csv, simulate_windkessel(p, q, dt, cycles));
    if (drift != nullptr)
      *drift = cycles >= 2 ? cycle_to_cycle_change(simulate_windkessel_full(p, q, dt, cycles), cycles) : 0.0;
  });
}

hf_status hf_mesh_generate_pipe(double radius, double length, int resolution, hf_mesh** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    auto m = generate_pipe_mesh(radius, length, resolution);
    *out = new hf_mesh{std::move(m)};
  });
}

hf_status hf_mesh_load(const char* path, hf_mesh** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto m = load_mesh(path);
    *out = new hf_mesh{std::move(m)};
  });
}

hf_status hf_mesh_save(const hf_mesh* mesh, const char* path) {
  return guarded([&] {
    need(mesh, "mesh");
    need(path, "path");
    save_mesh(mesh->mesh, path);
  });
}

size_t hf_mesh_vertex_count(const hf_mesh* mesh) { return mesh != nullptr ? mesh->mesh.vertices.size() : 0; }

size_t hf_mesh_tet_count(const hf_mesh* mesh) { return mesh != nullptr ? mesh->mesh.tets.size() : 0; }

double hf_mesh_volume(const hf_mesh* mesh) { return mesh != nullptr ? total_volume(mesh->mesh) : 0.0; }

void hf_mesh_free(hf_mesh* mesh) { delete mesh; }

} // extern "C"
