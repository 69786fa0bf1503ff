// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HEMOFLOW_PIPELINE_HPP
#define HEMOFLOW_PIPELINE_HPP

#include "hemoflow/hemodynamics.hpp"
#include "hemoflow/mri.hpp"
#include "hemoflow/windkessel.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hemoflow {

struct PhantomConfig {
  std::string geometry = "pipe"; // "pipe" or "ubend"
  double radius = 0.01;          // m
  double length = 0.07;          // m, centerline length
  int resolution = kDefaultPipeResolution;
  double wall_grading = kDefaultWallGrading;
  double limb_length = 0.02; // ubend only, m
  double bend_radius = 0.02; // ubend only, m
  double m0 = 1.0;
};

struct RheologyConfig {
  double hct = 45.0;
  std::filesystem::path base_curves; // params CSV; empty selects the built-in table
  double gamma0 = 12.0;              // Newtonian-equivalent range, 1/s
  double gamma1 = 123.0;
  double shear_rate_floor = kDefaultShearRateFloor;
};

struct NoiseConfig {
  double sigma_fraction = 0.052;
  std::uint64_t seed = 1;
};

struct WindkesselConfig {
  WindkesselParams params{274.0, 5675.0, 5.08e-4, 107325.0};
  double dt = 1e-3; // s
  int cycles = 5;
  // "periodic": flow amplitude puts p_d0 on the periodic orbit; "mean": mean
  // distal pressure equals p_d0; "none": Q = flow_scale * inlet value.
  std::string flow_scaling = "periodic";
  double flow_scale = 1.0;
};

struct RunConfig {
  std::filesystem::path output = "hemoflow_out";
  std::filesystem::path mesh;                         // optional external mesh
  std::vector<std::filesystem::path> velocity_frames; // optional external frames
  std::filesystem::path inlet_waveform;               // optional `t,value` CSV
  double period = 0.0;                                // s; 0 takes the waveform period
  PhantomConfig phantom;
  RheologyConfig rheology;
  SequenceParams sequence;
  int quadrature_subdivisions = 0;
  NoiseConfig noise;
  std::vector<Plane> cuts;
  std::vector<ExclusionSphere> exclusions;
  std::vector<std::string> models{"PL", "NF", "N3.0", "N3.5", "N4.0", "N4.5"};
  std::string reference_model = "PL";
  double background_threshold = 0.0; // magnitude fraction below which decoded velocity is zeroed
  HemoOptions hemo;
  WindkesselConfig windkessel;
  std::string source_hash; // hash of the config text, set by load_config
};

/// Reads an INI file. Relative paths resolve against the file's directory.
/// Unknown sections or keys are validation errors naming the key.
RunConfig load_config(const std::filesystem::path& path);
void validate(const RunConfig& config);
// Hash of the config text plus command-line overrides.
std::string config_hash(const RunConfig& config);

/// Resolves a comparison model name: PL (fitted power law), NF (Newtonian
/// equivalent over the configured range), NF1 / NF2 (12-123 and 0-2800 1/s),
/// or N<mPa s> such as N3.5.
ViscosityModel resolve_model(const std::string& name, const PowerLawParams& pl, const RheologyConfig& rheology);
PowerLawParams fitted_rheology(const RunConfig& config);

/// Inflow peak-velocity curve: the configured CSV, else a smooth built-in
/// approximation of aortic inflow (period 0.937 s).
FlowWaveform inlet_waveform(const RunConfig& config);
FlowWaveform approximate_aortic_inflow(int samples = 100);

// Stages. Each reads its inputs from and writes its outputs to `out`.
void stage_phantom(const RunConfig& config, const std::filesystem::path& out);
void stage_synthesize(const RunConfig& config, const std::filesystem::path& out);
void stage_reconstruct(const RunConfig& config, const std::filesystem::path& out);
void stage_estimate(const RunConfig& config, const std::filesystem::path& out);
void stage_windkessel(const RunConfig& config, const std::filesystem::path& out);
void render_report(const std::filesystem::path& out, const std::string& reference_model = "PL");

/// All stages in order, then the report. Errors carry the failing stage name;
/// outputs of earlier stages are kept.
void run_pipeline(const RunConfig& config, const std::filesystem::path& out);

/// Rewrites out/manifest.json: config hash, version, seed and a hash of every
/// file in the directory.
void write_manifest(const RunConfig& config, const std::filesystem::path& out);

const char* version();

} // namespace hemoflow

#endif
