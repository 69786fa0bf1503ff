// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HEMOFLOW_FLOWFIELDS_HPP
#define HEMOFLOW_FLOWFIELDS_HPP

#include "hemoflow/mesh.hpp"
#include "hemoflow/rheology.hpp"

#include <filesystem>
#include <limits>
#include <span>
#include <vector>

namespace hemoflow {

/// Time-resolved nodal velocity, m/s.
struct VelocityField {
  std::vector<std::vector<Vec3>> frames; // [frame][vertex]
  std::vector<double> frame_times;       // s, strictly increasing in [0, period)
  double period = 1.0;                   // s

  size_t frame_count() const { return frames.size(); }
  size_t vertex_count() const { return frames.empty() ? 0 : frames.front().size(); }
  // Frame whose time is closest to t on the periodic time axis.
  size_t nearest_frame(double t) const;
};

enum class WaveformKind { PeakVelocity, Volumetric };

/// One period of a sampled periodic signal. The closing sample at t = period
/// is implied by the first one and not stored.
struct FlowWaveform {
  std::vector<double> times; // s, strictly increasing in [0, period)
  std::vector<double> values;
  double period = 1.0;
  WaveformKind kind = WaveformKind::PeakVelocity;

  // Periodic piecewise-linear interpolation.
  double value_at(double t) const;
  void validate() const;
};

/// Reads `t,value` rows. The last row must close the period: its value equals
/// the first within 1e-9 and it is dropped after setting period = t_last - t_0.
FlowWaveform read_waveform_csv(const std::filesystem::path& path, WaveformKind kind);
void write_waveform_csv(const std::filesystem::path& path, const FlowWaveform& w);

struct PipeGeometry {
  double radius = 0.0;
  double z0 = 0.0;
  double z1 = 0.0;
};

/// Recognizes a straight circular pipe along z: every wall vertex lies on one
/// cylinder about the z axis and the caps are planes z = const.
PipeGeometry detect_pipe(const TetMesh& mesh);

/// Steady fully developed power-law flow in a pipe, +z direction.
VelocityField poiseuille_power_law(const TetMesh& mesh, double pressure_drop, const PowerLawParams& pl);

/// Parabolic shape 1 - (r/R)^2 on a pipe mesh, zero on the wall.
std::vector<double> pipe_profile(const TetMesh& mesh);

/// One frame per waveform sample: value(t_f) * profile(x) * direction.
VelocityField pulsatile_scale(std::span<const double> profile, const FlowWaveform& waveform, const Vec3& direction);

/// Rotates the vectors of a field defined on a straight pipe along z into the
/// local frame of bend_pipe_mesh(straight, limb_length, bend_radius).
VelocityField bend_field(const TetMesh& straight, const VelocityField& field, double limb_length,
                         double bend_radius);

/// Per-frame flux of u . n through the plane, restricted to the part of the
/// cut within `max_radius` of plane.point (useful when a plane crosses a
/// curved vessel twice). Throws EmptySection if nothing is cut.
FlowWaveform flow_rate(const VelocityField& field, const TetMesh& mesh, const Plane& plane,
                       double max_radius = std::numeric_limits<double>::infinity());

/// Single-frame flux; the primitive behind flow_rate.
double flux_through_plane(std::span<const Vec3> velocity, const TetMesh& mesh, const Plane& plane,
                          double max_radius = std::numeric_limits<double>::infinity());

/// Area of the planar cut, same restriction as flow_rate.
double section_area(const TetMesh& mesh, const Plane& plane,
                    double max_radius = std::numeric_limits<double>::infinity());

/// Writes frame `f` as VTK legacy (`.vtk`, point vectors `velocity` and
/// TIME/PERIOD field data) or flat little-endian float64 (`.bin`) with a JSON
/// sidecar `<path>.json` holding time, period and vertex_count.
void save_velocity_frame(const std::filesystem::path& path, const VelocityField& field, size_t f,
                         const TetMesh* mesh = nullptr);

/// Loads frames in any order and sorts them by their embedded time. A single
/// frame without a stored period uses `default_period`.
VelocityField load_velocity_series(std::span<const std::filesystem::path> paths, size_t vertex_count,
                                   double default_period);

} // namespace hemoflow

#endif
