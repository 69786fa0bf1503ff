// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hemoflow/pipeline.hpp"

#include "hemoflow/error.hpp"
#include "text_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>

namespace hemoflow {

namespace fs = std::filesystem;

const char* version() { return "0.3.0"; }

PowerLawParams fitted_rheology(const RunConfig& config) {
  const auto base = config.rheology.base_curves.empty() ? reference_base_curves()
                                                        : read_params_csv(config.rheology.base_curves);
  return fit_for_hct(base, config.rheology.hct, reference_shear_rates());
}

ViscosityModel resolve_model(const std::string& name, const PowerLawParams& pl, const RheologyConfig& rheology) {
  if (name == "PL")
    return ViscosityModel::power_law(name, pl, rheology.shear_rate_floor);
  if (name == "NF")
    return ViscosityModel::newtonian(name, newtonian_equivalent(pl, rheology.gamma0, rheology.gamma1).mu);
  if (name == "NF1")
    return ViscosityModel::newtonian(name, newtonian_equivalent(pl, 12.0, 123.0).mu);
  if (name == "NF2")
    return ViscosityModel::newtonian(name, newtonian_equivalent(pl, 0.0, 2800.0).mu);
  if (name.size() > 1 && name[0] == 'N') {
    const double mpas = detail::parse_double(name.substr(1), "model '" + name + "'");
    require(mpas > 0.0, ErrorKind::InvalidArgument, "model '" + name + "': viscosity must be positive");
    return ViscosityModel::newtonian(name, mpas * 1e-3);
  }
  fail(ErrorKind::InvalidArgument, "unknown viscosity model '" + name + "'");
}

FlowWaveform approximate_aortic_inflow(int samples) {
  require(samples >= 2, ErrorKind::InvalidArgument, "need at least two samples");
  // Systolic peak plus a small dicrotic notch, summed over neighboring
  // periods so the curve is smooth across the cycle boundary.
  constexpr double period = 0.937;
  auto u = [&](double t) {
    double v = 0.03;
    for (int k = -1; k <= 1; ++k) {
      const double s = t + k * period;
      v += std::exp(-std::pow((s - 0.12) / 0.055, 2)) - 0.08 * std::exp(-std::pow((s - 0.33) / 0.03, 2));
    }
    return v;
  };
  FlowWaveform w;
  w.period = period;
  w.kind = WaveformKind::PeakVelocity;
  for (int i = 0; i < samples; ++i) {
    const double t = period * i / samples;
    w.times.push_back(t);
    w.values.push_back(u(t));
  }
  return w;
}

FlowWaveform inlet_waveform(const RunConfig& config) {
  if (!config.inlet_waveform.empty())
    return read_waveform_csv(config.inlet_waveform, WaveformKind::PeakVelocity);
  return approximate_aortic_inflow();
}

namespace {

std::string numbered(const char* prefix, int i, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%03d%s", prefix, i, suffix);
  return buf;
}

fs::path kspace_file(const fs::path& out, int phase, Encode e) {
  return out / "kspace" / numbered("phase_", phase, (std::string("_") + to_string(e) + ".bin").c_str());
}

fs::path image_file(const fs::path& out, int phase, Encode e) {
  return out / "images" / numbered("phase_", phase, (std::string("_") + to_string(e) + ".bin").c_str());
}

std::vector<fs::path> frame_files(const fs::path& dir) {
  std::vector<fs::path> files;
  require(fs::is_directory(dir), ErrorKind::Io, "missing directory '" + dir.string() + "'");
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".bin")
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  require(!files.empty(), ErrorKind::Io, "no frames in '" + dir.string() + "'");
  return files;
}

double phase_time(const RunConfig& config, int p, double period) {
  return std::fmod(p * config.sequence.time_spacing * 1e-3, period);
}

Vec3 bbox_center(const TetMesh& mesh) {
  Vec3 lo = mesh.vertices.front(), hi = lo;
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return 0.5 * (lo + hi);
}

double stored_period(const fs::path& out) {
  const auto files = frame_files(out / "fields");
  const auto meta = nlohmann::json::parse(detail::read_file(files.front().string() + ".json"), nullptr, false);
  require(!meta.is_discarded() && meta.contains("period"), ErrorKind::Parse, "field metadata lacks a period");
  return meta["period"].get<double>();
}

std::vector<Plane> default_cuts(const RunConfig& c) {
  if (!c.cuts.empty() || !c.mesh.empty())
    return c.cuts;
  const auto& p = c.phantom;
  if (p.geometry == "pipe")
    return {Plane{Vec3(0, 0, 0.25 * p.length), Vec3::UnitZ()}, Plane{Vec3(0, 0, 0.5 * p.length), Vec3::UnitZ()},
            Plane{Vec3(0, 0, 0.75 * p.length), Vec3::UnitZ()}};
  // U-bend: ascending limb | arch | upper and lower halves of the descending limb.
  const double a = p.bend_radius;
  const double down = p.length - p.limb_length - std::numbers::pi * a;
  return {Plane{Vec3(-a, 0, p.limb_length), Vec3::UnitZ()}, Plane{Vec3(a, 0, p.limb_length - 1e-9), -Vec3::UnitZ()},
          Plane{Vec3(a, 0, p.limb_length - 0.5 * down), -Vec3::UnitZ()}};
}

template <typename Fn>
void run_stage(const char* name, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorKind::Io, std::string(name) + ": " + e.what());
  }
}

} // namespace

void stage_phantom(const RunConfig& config, const fs::path& out) {
  run_stage("phantom", [&] {
    const auto pl = fitted_rheology(config);
    {
      auto f = detail::open_output(out / "rheology.csv");
      f << "model,kind,mu,m,n,hct\n";
      for (const auto& name : config.models) {
        const auto m = resolve_model(name, pl, config.rheology);
        f << name << ',' << (m.is_newtonian() ? "newtonian" : "power_law") << ','
          << (m.is_newtonian() ? detail::format_double(m.newtonian_mu()) : "NA") << ',' << detail::format_double(pl.m)
          << ',' << detail::format_double(pl.n) << ',' << detail::format_double(pl.hct) << '\n';
      }
    }

    TetMesh mesh, straight;
    const bool generated = config.mesh.empty();
    if (generated) {
      straight = generate_pipe_mesh(config.phantom.radius, config.phantom.length, config.phantom.resolution,
                                    config.phantom.wall_grading);
      mesh = config.phantom.geometry == "ubend"
                 ? bend_pipe_mesh(straight, config.phantom.limb_length, config.phantom.bend_radius)
                 : straight;
    } else {
      mesh = load_mesh(config.mesh);
      straight = mesh;
    }

    VelocityField field;
    const auto inflow = inlet_waveform(config);
    const double period = config.period > 0.0 ? config.period : inflow.period;
    if (!config.velocity_frames.empty()) {
      field = load_velocity_series(config.velocity_frames, mesh.vertices.size(), period);
    } else {
      const int phases = config.sequence.cardiac_phases;
      require((phases - 1) * config.sequence.time_spacing * 1e-3 < period, ErrorKind::Validation,
              "cardiac phases times time spacing exceed one period");
      FlowWaveform sampled;
      sampled.period = period;
      for (int p = 0; p < phases; ++p) {
        const double t = phase_time(config, p, period);
        sampled.times.push_back(t);
        sampled.values.push_back(inflow.value_at(t * inflow.period / period));
      }
      field = pulsatile_scale(pipe_profile(straight), sampled, Vec3::UnitZ());
      if (generated && config.phantom.geometry == "ubend")
        field = bend_field(straight, field, config.phantom.limb_length, config.phantom.bend_radius);
    }
    save_mesh(mesh, out / "mesh.vtk");
    fs::remove_all(out / "fields");
    for (size_t f = 0; f < field.frame_count(); ++f)
      save_velocity_frame(out / "fields" / numbered("frame_", static_cast<int>(f), ".bin"), field, f);
  });
}

void stage_synthesize(const RunConfig& config, const fs::path& out) {
  run_stage("synth-mri", [&] {
    const auto mesh = load_mesh(out / "mesh.vtk");
    const auto files = frame_files(out / "fields");
    const auto field = load_velocity_series(files, mesh.vertices.size(), stored_period(out));
    const std::vector<double> m0(mesh.vertices.size(), config.phantom.m0);
    SynthesisOptions opt;
    opt.fov_center = bbox_center(mesh);
    opt.quadrature_subdivisions = config.quadrature_subdivisions;
    fs::remove_all(out / "kspace");
    for (int p = 0; p < config.sequence.cardiac_phases; ++p) {
      const double t = phase_time(config, p, field.period);
      const auto& velocity = field.frames[field.nearest_frame(t)];
      std::vector<KSpaceData> ks;
      for (auto e : kAllEncodes) {
        ks.push_back(synthesize_signal(mesh, m0, velocity, config.sequence, e, opt));
        ks.back().cardiac_phase = p;
        ks.back().phase_time = t;
      }
      const double sigma = config.noise.sigma_fraction * max_abs_signal(ks);
      for (auto& k : ks) {
        add_noise_sigma(k, sigma, config.noise.seed);
        write_kspace(kspace_file(out, p, k.encode), k);
      }
    }
  });
}

void stage_reconstruct(const RunConfig& config, const fs::path& out) {
  run_stage("reconstruct", [&] {
    fs::remove_all(out / "images");
    for (int p = 0; p < config.sequence.cardiac_phases; ++p)
      for (auto e : kAllEncodes) {
        const auto k = read_kspace(kspace_file(out, p, e));
        write_image(image_file(out, p, e), reconstruct(k, config.sequence.matrix[0]));
      }
  });
}

void stage_estimate(const RunConfig& config, const fs::path& out) {
  run_stage("estimate", [&] {
    const auto mesh = load_mesh(out / "mesh.vtk");
    std::vector<ReconstructedVelocity> decoded;
    for (int p = 0; p < config.sequence.cardiac_phases; ++p) {
      std::array<ImageVolume, 4> img;
      for (auto e : kAllEncodes)
        img[static_cast<size_t>(e)] = read_image(image_file(out, p, e));
      decoded.push_back(phase_to_velocity(img[0], img[1], img[2], img[3], config.sequence.venc));
      mask_background(decoded.back(), config.background_threshold);
    }
    const auto measured = interpolate_to_mesh(decoded, mesh, stored_period(out));
    fs::remove_all(out / "measured");
    for (size_t f = 0; f < measured.frame_count(); ++f)
      save_velocity_frame(out / "measured" / numbered("frame_", static_cast<int>(f), ".bin"), measured, f);

    const auto labels = segment_labels(mesh, default_cuts(config), config.exclusions);
    const GradientRecovery rec(mesh);
    GradientField grads;
    for (const auto& frame : measured.frames)
      grads.push_back(rec.recover(frame));
    const auto pl = fitted_rheology(config);

    fs::remove_all(out / "stats");
    fs::remove_all(out / "compare");
    fs::remove_all(out / "hemo");
    std::map<std::string, SegmentStats> stats;
    for (const auto& name : config.models) {
      const auto model = resolve_model(name, pl, config.rheology);
      const auto result = compute_hemodynamics(mesh, measured, grads, rec.volumes(), model, config.hemo);
      stats[name] = segment_stats(result, labels);
      write_stats_csv(out / "stats" / (name + ".csv"), stats[name]);
      // Export the frame of largest mean WSS (peak systole for inflow-driven fields).
      size_t peak = 0;
      double best = -1.0;
      for (size_t f = 0; f < result.wss_mag.size(); ++f) {
        const double m = result.wss_mag[f].empty() ? 0.0 : compensated_sum(result.wss_mag[f]) / static_cast<double>(result.wss_mag[f].size());
        if (m > best) {
          best = m;
          peak = f;
        }
      }
      write_hemo_vtk(out / "hemo" / (name + ".vtk"), mesh, result, peak);
    }
    for (const auto& name : config.models) {
      if (name == config.reference_model)
        continue;
      write_comparison_csv(out / "compare" / (name + "_vs_" + config.reference_model + ".csv"),
                           compare_models(stats.at(config.reference_model), stats.at(name)));
    }
  });
}

void stage_windkessel(const RunConfig& config, const fs::path& out) {
  run_stage("windkessel", [&] {
    const auto& wk = config.windkessel;
    FlowWaveform q = inlet_waveform(config);
    if (config.period > 0.0) {
      for (auto& t : q.times)
        t *= config.period / q.period;
      q.period = config.period;
    }
    for (auto& v : q.values)
      v *= wk.flow_scale;
    q.kind = WaveformKind::Volumetric;
    if (wk.flow_scaling == "periodic")
      q = scale_flow_to_periodic_start(q, wk.params, wk.dt);
    else if (wk.flow_scaling == "mean")
      q = scale_flow_to_distal_pressure(q, wk.params);
    const auto full = simulate_windkessel_full(wk.params, q, wk.dt, wk.cycles);
    const auto last = simulate_windkessel(wk.params, q, wk.dt, wk.cycles);
    write_pressure_csv(out / "windkessel.csv", last);
    nlohmann::json j{{"rp", wk.params.rp},
                     {"rd", wk.params.rd},
                     {"c", wk.params.c},
                     {"p_d0", wk.params.p_d0},
                     {"dt", wk.dt},
                     {"cycles", wk.cycles},
                     {"flow_scaling", wk.flow_scaling},
                     {"mean_flow", waveform_mean(q)},
                     {"cycle_to_cycle_change", wk.cycles >= 2 ? cycle_to_cycle_change(full, wk.cycles) : 0.0}};
    auto f = detail::open_output(out / "windkessel.json");
    f << j.dump(2) << '\n';
  });
}

void write_manifest(const RunConfig& config, const fs::path& out) {
  nlohmann::json files = nlohmann::json::array();
  std::vector<fs::path> paths;
  if (fs::is_directory(out))
    for (const auto& e : fs::recursive_directory_iterator(out))
      if (e.is_regular_file() && e.path().filename() != "manifest.json")
        paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    const auto bytes = detail::read_file(p);
    files.push_back({{"path", fs::relative(p, out).generic_string()},
                     {"bytes", bytes.size()},
                     {"fnv1a", detail::hex64(detail::fnv1a(bytes))}});
  }
  nlohmann::json inputs = nlohmann::json::array();
  auto add_input = [&](const fs::path& p) {
    if (p.empty() || !fs::is_regular_file(p))
      return;
    inputs.push_back({{"path", p.generic_string()}, {"fnv1a", detail::hex64(detail::fnv1a(detail::read_file(p)))}});
  };
  add_input(config.mesh);
  add_input(config.inlet_waveform);
  add_input(config.rheology.base_curves);
  for (const auto& p : config.velocity_frames)
    add_input(p);
  nlohmann::json j{{"version", version()},
                   {"config_hash", config_hash(config)},
                   {"config_source_hash", config.source_hash},
                   {"inputs", inputs},
                   {"seed", config.noise.seed},
                   {"sequence_hash", params_hash(config.sequence)},
                   {"files", files}};
  auto f = detail::open_output(out / "manifest.json");
  f << j.dump(2) << '\n';
}

void run_pipeline(const RunConfig& config, const fs::path& out) {
  validate(config);
  fs::create_directories(out);
  auto step = [&](auto&& fn) {
    fn(config, out);
    write_manifest(config, out);
  };
  step(stage_phantom);
  step(stage_synthesize);
  step(stage_reconstruct);
  step(stage_estimate);
  step(stage_windkessel);
  run_stage("report", [&] { render_report(out, config.reference_model); });
  write_manifest(config, out);
}

} // namespace hemoflow
