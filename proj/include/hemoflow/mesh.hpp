// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HEMOFLOW_MESH_HPP
#define HEMOFLOW_MESH_HPP

#include "hemoflow/geometry.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hemoflow {

inline constexpr int kWallLabel = 0;
inline constexpr int kInletLabel = 1;
inline constexpr int kFirstOutletLabel = 2;

struct BoundaryTri {
  std::array<int, 3> v{};
  int label = kWallLabel; // 0 wall, 1 inlet, 2+ outlets
};

/// Linear tetrahedral mesh with a labeled, inward-oriented boundary surface.
///
/// Boundary triangle winding is such that (v1 - v0) x (v2 - v0) points into
/// the fluid. load_mesh and the generators establish this; code that edits a
/// mesh by hand should call validate_and_repair afterwards.
struct TetMesh {
  std::vector<Vec3> vertices; // m
  std::vector<std::array<int, 4>> tets;
  std::vector<BoundaryTri> boundary;

  size_t vertex_count() const { return vertices.size(); }
  double tet_volume(size_t t) const;
  double signed_tet_volume(size_t t) const;
  Vec3 tet_centroid(size_t t) const;
};

struct MeshReport {
  size_t repaired_tets = 0;
  size_t reoriented_triangles = 0;
  std::vector<std::string> warnings;
};

/// Checks index ranges, flips inverted tets, orients boundary triangles inward
/// and verifies the boundary is closed and consistently oriented.
MeshReport validate_and_repair(TetMesh& mesh);

TetMesh load_mesh(const std::filesystem::path& path, MeshReport* report = nullptr);
void save_mesh(const TetMesh& mesh, const std::filesystem::path& path);

struct NodalVolumes {
  std::vector<double> volume; // m^3 per vertex
  double total() const { return compensated_sum(volume); }
};

/// Lumped nodal volumes: each tet hands a quarter of its volume to each vertex.
NodalVolumes nodal_volumes(const TetMesh& mesh);

double total_volume(const TetMesh& mesh);

struct WallNormals {
  std::vector<int> vertices; // ascending vertex ids on wall triangles
  std::vector<Vec3> normals; // unit, pointing into the fluid
};

WallNormals wall_normals(const TetMesh& mesh);

/// Boundary faces of a tet set (faces used by exactly one tet), oriented
/// inward and labeled as wall.
std::vector<BoundaryTri> extract_boundary(const TetMesh& mesh);

/// V - E + F of the boundary surface (2 for a closed topological sphere).
int boundary_euler_characteristic(const TetMesh& mesh);

/// Sorted vertex adjacency through tet edges (CSR).
struct VertexAdjacency {
  std::vector<size_t> offsets;
  std::vector<int> neighbors;
  std::span<const int> of(size_t v) const {
    return {neighbors.data() + offsets[v], neighbors.data() + offsets[v + 1]};
  }
};
VertexAdjacency vertex_adjacency(const TetMesh& mesh);

enum class Segment : std::uint8_t { AAo = 0, AArch = 1, pDAo = 2, dDAo = 3, Excluded = 255 };

const char* to_string(Segment s);
Segment segment_from_index(size_t i);

struct SegmentLabels {
  std::vector<Segment> label; // per vertex
  size_t segment_count = 1;   // cuts + 1
};

struct ExclusionSphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

/// Splits the mesh into consecutive segments separated by ordered cut planes.
///
/// Each plane's normal points downstream. Segment 0 grows from the inlet
/// vertices through mesh edges while staying on the negative side of cut 0;
/// vertices it touches on the positive side seed segment 1, and so on. The
/// flood makes the labels follow the vessel even where a plane's half-space
/// also contains unrelated parts of a curved vessel. Vertices inside an
/// exclusion sphere, or unreachable from the inlet, are Excluded.
SegmentLabels segment_labels(const TetMesh& mesh, std::span<const Plane> cuts,
                             std::span<const ExclusionSphere> exclusions = {});

inline constexpr double kDefaultWallGrading = 0.6;
// Level at which the pipe mesh resolves volume to 1% and wall shear to 5%.
inline constexpr int kDefaultPipeResolution = 1;

/// Structured tetrahedral cylinder along +z, inlet disc at z = 0 (label 1),
/// outlet disc at z = length (label 2), lateral wall label 0.
///
/// Resolution level L uses 4 * 2^L radial rings. `wall_grading` in [0, 1)
/// shrinks the ring spacing toward the wall to (1 - wall_grading) of uniform.
TetMesh generate_pipe_mesh(double radius, double length, int resolution,
                           double wall_grading = kDefaultWallGrading);

/// Axis-aligned box split into 6 tets per cell. Faces at z = lo.z and z = hi.z
/// are labeled inlet and outlet when `label_caps` is set, otherwise wall.
TetMesh generate_box_mesh(const Vec3& lo, const Vec3& hi, std::array<int, 3> cells, bool label_caps = false);

/// Bends a straight pipe (axis +z starting at z = 0) into a U: a straight
/// ascending limb of `limb_length`, a half-turn of centerline radius
/// `bend_radius` and a descending limb of the remaining length.
TetMesh bend_pipe_mesh(const TetMesh& straight, double limb_length, double bend_radius);

} // namespace hemoflow

#endif
