// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HEMOFLOW_HEMODYNAMICS_HPP
#define HEMOFLOW_HEMODYNAMICS_HPP

#include "hemoflow/flowfields.hpp"
#include "hemoflow/mesh.hpp"
#include "hemoflow/mri.hpp"
#include "hemoflow/rheology.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hemoflow {

/// Trilinear interpolation of decoded voxel velocities at the mesh vertices,
/// one frame per cardiac phase. Throws OutOfBounds if a vertex falls outside
/// the grid of voxel centers.
VelocityField interpolate_to_mesh(std::span<const ReconstructedVelocity> phases, const TetMesh& mesh, double period);

/// Nodal velocity gradients G_ij = du_i/dx_j by lumped L2 projection of the
/// piecewise-constant element gradients. Shape-function gradients are cached,
/// so one instance serves every frame of a mesh.
class GradientRecovery {
public:
  explicit GradientRecovery(const TetMesh& mesh);

  std::vector<Mat3> recover(std::span<const Vec3> velocity) const;
  // Gradient of the linear interpolant inside tet t.
  Mat3 element_gradient(size_t t, std::span<const Vec3> velocity) const;

  const NodalVolumes& volumes() const { return volumes_; }

private:
  const TetMesh* mesh_;
  std::vector<std::array<Vec3, 4>> shape_grad_;
  std::vector<double> tet_volume_;
  NodalVolumes volumes_;
};

using GradientField = std::vector<std::vector<Mat3>>; // [frame][vertex]

GradientField recover_gradients(const TetMesh& mesh, const VelocityField& field);

inline Mat3 strain_rate(const Mat3& g) { return 0.5 * (g + g.transpose()); }
// sqrt(2 e:e) with e the strain-rate tensor.
double shear_rate(const Mat3& g);

struct WssFrame {
  std::vector<Vec3> vector;    // Pa, per wall vertex
  std::vector<double> magnitude;
  std::vector<double> viscosity; // Pa s used at each wall vertex
};

/// Traction 2 mu e n at each wall vertex with the inward unit normal n.
WssFrame wall_shear_stress(std::span<const Mat3> gradients, const WallNormals& normals, const ViscosityModel& model);

/// 0.5 (1 - |int t dt| / int |t| dt) with the periodic trapezoid rule.
/// `series` is [frame][wall vertex]; zero denominators give 0.
std::vector<double> oscillatory_shear_index(const std::vector<std::vector<Vec3>>& series,
                                            std::span<const double> frame_times, double period);

inline constexpr double kDefaultDeviatoricCoefficient = 2.0 / 3.0;

/// 2 mu (e - c div(u) I) : (e - c div(u) I) V per vertex, in microwatts.
std::vector<double> energy_loss_rate(std::span<const Mat3> gradients, const ViscosityModel& model,
                                     const NodalVolumes& volumes,
                                     double deviatoric_coefficient = kDefaultDeviatoricCoefficient);

struct HemoOptions {
  double deviatoric_coefficient = kDefaultDeviatoricCoefficient;
};

struct HemoResult {
  std::string model;
  std::string model_description;
  std::vector<double> frame_times;
  double period = 1.0;
  std::vector<int> wall_vertices;
  std::vector<std::vector<Vec3>> wss;          // [frame][wall vertex]
  std::vector<std::vector<double>> wss_mag;    // [frame][wall vertex]
  std::vector<double> osi;                     // [wall vertex]
  std::vector<std::vector<double>> el_rate;    // [frame][vertex], microwatts
  std::vector<std::vector<double>> viscosity;  // [frame][vertex], Pa s
};

HemoResult compute_hemodynamics(const TetMesh& mesh, const VelocityField& field, const ViscosityModel& model,
                                const HemoOptions& options = {});

/// Same, reusing gradients already recovered for another viscosity model.
HemoResult compute_hemodynamics(const TetMesh& mesh, const VelocityField& field, const GradientField& gradients,
                                const NodalVolumes& volumes, const ViscosityModel& model,
                                const HemoOptions& options = {});

inline constexpr int kAllFrames = -1;
inline constexpr const char* kCrossSegment = "segments";

struct StatRow {
  std::string segment; // segment name, or kCrossSegment for the mean of segment means
  int frame = kAllFrames;
  std::string param;   // "wss", "osi", "el_rate"
  std::optional<double> mean;
  std::optional<double> std;
};

struct SegmentStats {
  std::vector<StatRow> rows;
  const StatRow* find(const std::string& segment, int frame, const std::string& param) const;
};

/// Per-segment mean and population standard deviation: WSS and OSI over wall
/// vertices, energy loss over all vertices of the segment. Rows for empty
/// segments carry no value. Cross-segment rows hold the mean and standard
/// deviation of the segment means.
SegmentStats segment_stats(const HemoResult& result, const SegmentLabels& labels);

struct ComparisonRow {
  std::string segment;
  int frame = kAllFrames;
  std::string param;
  std::optional<double> reference; // a
  std::optional<double> other;     // b
  std::optional<double> relative_percent; // (b - a) / a * 100, absent if undefined
  std::optional<double> absolute;         // b - a
};

/// Row-by-row comparison of `b` against the reference `a`; both must list the
/// same segments, frames and parameters.
std::vector<ComparisonRow> compare_models(const SegmentStats& a, const SegmentStats& b);

// CSV `segment,frame,param,mean,std`; frame "all" for time-independent rows,
// missing values as "NA".
void write_stats_csv(const std::filesystem::path& path, const SegmentStats& stats);
SegmentStats read_stats_csv(const std::filesystem::path& path);
// CSV `segment,frame,param,reference,other,relative_percent,absolute`
void write_comparison_csv(const std::filesystem::path& path, std::span<const ComparisonRow> rows);

/// VTK export of one frame: point data wss_vector, wss_mag, osi, el_rate and
/// mu_apparent (zero away from the wall for wall quantities).
void write_hemo_vtk(const std::filesystem::path& path, const TetMesh& mesh, const HemoResult& result, size_t frame);

} // namespace hemoflow

#endif
