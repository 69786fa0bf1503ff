// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hemoflow/error.hpp"
#include "hemoflow/mesh.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>
#include <string>

using namespace hemoflow;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

const char* kTetFile = R"(# vtk DataFile Version 3.0
one tet
ASCII
DATASET UNSTRUCTURED_GRID
POINTS 4 double
0 0 0
1 0 0
0 1 0
0 0 1
CELLS 5 20
4 0 1 2 3
3 0 1 2
3 0 1 3
3 0 2 3
3 1 2 3
CELL_TYPES 5
10
5
5
5
5
CELL_DATA 5
SCALARS boundary_label int 1
LOOKUP_TABLE default
-1
0
0
0
0
)";

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream(p) << s;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Validation;
}

// Unit ball: a cube mesh pushed radially onto the sphere.
TetMesh ball_mesh(int cells) {
  auto m = generate_box_mesh(Vec3(-1, -1, -1), Vec3(1, 1, 1), {cells, cells, cells});
  for (auto& v : m.vertices) {
    const double inf = v.cwiseAbs().maxCoeff();
    if (inf > 0.0)
      v *= inf / v.norm();
  }
  validate_and_repair(m);
  return m;
}

} // namespace

TEST_CASE("single tetrahedron file") {
  const auto dir = oracle::scratch_dir("mesh_tet");
  write_text(dir / "tet.vtk", kTetFile);
  const auto m = load_mesh(dir / "tet.vtk");
  CHECK(m.vertices.size() == 4);
  CHECK(m.tets.size() == 1);
  CHECK(m.boundary.size() == 4);
  CHECK(total_volume(m) == doctest::Approx(1.0 / 6.0));
  const auto nv = nodal_volumes(m);
  for (double v : nv.volume)
    CHECK(v == doctest::Approx(1.0 / 24.0).epsilon(1e-15));
  // boundary triangles come back oriented toward the fluid
  for (const auto& b : m.boundary) {
    const Vec3 a = m.vertices[b.v[0]], p = m.vertices[b.v[1]], q = m.vertices[b.v[2]];
    const Vec3 n = (p - a).cross(q - a);
    const Vec3 centroid = m.tet_centroid(0);
    CHECK(n.dot(centroid - a) > 0.0);
  }
}

TEST_CASE("inverted tet is repaired with a warning") {
  auto m = generate_box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), {2, 2, 2});
  std::swap(m.tets[3][0], m.tets[3][1]);
  CHECK(m.signed_tet_volume(3) < 0.0);
  const auto report = validate_and_repair(m);
  CHECK(report.repaired_tets == 1);
  CHECK(!report.warnings.empty());
  for (size_t t = 0; t < m.tets.size(); ++t)
    CHECK(m.signed_tet_volume(t) > 0.0);
}

TEST_CASE("load errors") {
  const auto dir = oracle::scratch_dir("mesh_err");
  SUBCASE("parse") {
    write_text(dir / "bad.vtk", "# vtk DataFile Version 3.0\nx\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS two double\n");
    CHECK(kind_of([&] { load_mesh(dir / "bad.vtk"); }) == ErrorKind::Parse);
  }
  SUBCASE("non-tet volume cell") {
    std::string s = kTetFile;
    s.replace(s.find("CELL_TYPES 5\n10"), 15, "CELL_TYPES 5\n12");
    write_text(dir / "hex.vtk", s);
    CHECK(kind_of([&] { load_mesh(dir / "hex.vtk"); }) == ErrorKind::Parse);
  }
  SUBCASE("open boundary") {
    auto m = generate_pipe_mesh(0.01, 0.05, 0);
    m.boundary.pop_back();
    save_mesh(m, dir / "open.vtk");
    CHECK(kind_of([&] { load_mesh(dir / "open.vtk"); }) == ErrorKind::Geometry);
  }
  SUBCASE("index out of range") {
    auto m = generate_box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), {1, 1, 1});
    m.tets[0][2] = 99;
    CHECK_THROWS_AS(validate_and_repair(m), Error);
  }
}

TEST_CASE("save/load round trip is lossless") {
  const auto dir = oracle::scratch_dir("mesh_rt");
  const auto m = generate_pipe_mesh(0.01, 0.1, 0);
  save_mesh(m, dir / "a.vtk");
  const auto b = load_mesh(dir / "a.vtk");
  REQUIRE(b.vertices.size() == m.vertices.size());
  CHECK(b.tets == m.tets);
  REQUIRE(b.boundary.size() == m.boundary.size());
  for (size_t i = 0; i < m.vertices.size(); ++i)
    CHECK(b.vertices[i] == m.vertices[i]);
  for (size_t i = 0; i < m.boundary.size(); ++i) {
    CHECK(b.boundary[i].v == m.boundary[i].v);
    CHECK(b.boundary[i].label == m.boundary[i].label);
  }
  save_mesh(b, dir / "b.vtk");
  CHECK(read_text(dir / "a.vtk") == read_text(dir / "b.vtk"));
}

TEST_CASE("pipe mesh topology and labels") {
  for (int level : {0, 1}) {
    const auto m = generate_pipe_mesh(0.01, 0.1, level);
    CHECK(boundary_euler_characteristic(m) == 2);
    std::set<int> labels;
    for (const auto& b : m.boundary)
      labels.insert(b.label);
    CHECK(labels == std::set<int>{kWallLabel, kInletLabel, kFirstOutletLabel});
    for (const auto& b : m.boundary) {
      const double z = (m.vertices[b.v[0]].z() + m.vertices[b.v[1]].z() + m.vertices[b.v[2]].z()) / 3.0;
      if (b.label == kInletLabel)
        CHECK(z == doctest::Approx(0.0));
      if (b.label == kFirstOutletLabel)
        CHECK(z == doctest::Approx(0.1));
    }
  }
}

TEST_CASE("nodal volumes conserve the mesh volume") {
  oracle::Gen gen(21);
  for (int t = 0; t < 5; ++t) {
    auto m = generate_box_mesh(Vec3(0, 0, 0), Vec3(1, 2, 3), {gen.integer(1, 5), gen.integer(1, 5), gen.integer(1, 5)});
    for (auto& v : m.vertices)
      v += 0.05 * Vec3(gen.uniform(-1, 1), gen.uniform(-1, 1), gen.uniform(-1, 1)).cwiseProduct(
                      Vec3(v.x() > 0 && v.x() < 1, v.y() > 0 && v.y() < 2, v.z() > 0 && v.z() < 3));
    const auto nv = nodal_volumes(m);
    double direct = 0.0;
    for (size_t k = 0; k < m.tets.size(); ++k)
      direct += m.tet_volume(k);
    CHECK(std::abs(nv.total() - direct) <= 1e-12 * direct);
    for (double v : nv.volume)
      CHECK(v > 0.0);
  }
}

TEST_CASE("pipe volume converges to pi R^2 L") {
  const double exact = kPi * 1e-4 * 0.1;
  double err[3];
  for (int level = 0; level < 3; ++level)
    err[level] = std::abs(nodal_volumes(generate_pipe_mesh(0.01, 0.1, level)).total() - exact) / exact;
  CHECK(err[1] <= 0.01); // default resolution of the phantom configs
  const double order1 = std::log2(err[0] / err[1]);
  const double order2 = std::log2(err[1] / err[2]);
  CHECK(order1 >= 1.9);
  CHECK(order2 >= 1.9);
}

TEST_CASE("cylinder wall normals point to the axis") {
  const auto m = generate_pipe_mesh(0.01, 0.1, 1);
  const auto wn = wall_normals(m);
  REQUIRE(!wn.vertices.empty());
  size_t checked = 0;
  for (size_t i = 0; i < wn.vertices.size(); ++i) {
    const Vec3 x = m.vertices[wn.vertices[i]];
    const Vec3 n = wn.normals[i];
    CHECK(std::abs(n.norm() - 1.0) < 1e-12);
    const double rxy = std::hypot(x.x(), x.y());
    if (rxy < 0.0099 || x.z() < 0.005 || x.z() > 0.095)
      continue; // cap vertices and end rings
    ++checked;
    CHECK(std::abs(n.z()) < 0.05);
    const Vec3 inward(-x.x() / rxy, -x.y() / rxy, 0.0);
    CHECK(n.dot(inward) > 0.99);
  }
  CHECK(checked > 100);
}

TEST_CASE("planar wall normals are exact") {
  const auto m = generate_box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), {3, 3, 3});
  const auto wn = wall_normals(m);
  for (size_t i = 0; i < wn.vertices.size(); ++i) {
    const Vec3 x = m.vertices[wn.vertices[i]];
    // face-interior vertices touch exactly one face of the cube
    int on = 0;
    Vec3 expected = Vec3::Zero();
    for (int a = 0; a < 3; ++a) {
      if (x[a] == 0.0) {
        ++on;
        expected[a] = 1.0;
      } else if (x[a] == 1.0) {
        ++on;
        expected[a] = -1.0;
      }
    }
    if (on == 1)
      CHECK((wn.normals[i] - expected).norm() < 1e-14);
  }
}

TEST_CASE("sphere normals are radial within 2 degrees") {
  const auto m = ball_mesh(12);
  const auto wn = wall_normals(m);
  double worst = 0.0;
  for (size_t i = 0; i < wn.vertices.size(); ++i) {
    const Vec3 inward = -m.vertices[wn.vertices[i]].normalized();
    worst = std::max(worst, std::acos(std::clamp(wn.normals[i].dot(inward), -1.0, 1.0)) * 180.0 / kPi);
  }
  CHECK(worst < 2.0);
}

TEST_CASE("boundary extraction of a box") {
  const auto m = generate_box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), {2, 3, 4});
  const auto b = extract_boundary(m);
  CHECK(b.size() == 2 * 2 * (2 * 3 + 3 * 4 + 2 * 4));
  CHECK(boundary_euler_characteristic(m) == 2);
}

TEST_CASE("vertex adjacency is symmetric") {
  const auto m = generate_box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), {2, 2, 2});
  const auto adj = vertex_adjacency(m);
  for (size_t v = 0; v < m.vertices.size(); ++v)
    for (int w : adj.of(v)) {
      const auto back = adj.of(static_cast<size_t>(w));
      CHECK(std::find(back.begin(), back.end(), static_cast<int>(v)) != back.end());
    }
}

TEST_CASE("segment labels on a straight pipe") {
  const auto m = generate_pipe_mesh(0.01, 0.1, 1);
  std::vector<Plane> cuts;
  for (double z : {0.025, 0.05, 0.075})
    cuts.push_back({Vec3(0, 0, z + 1e-4), Vec3::UnitZ()}); // between vertex layers
  const auto lab = segment_labels(m, cuts);
  CHECK(lab.segment_count == 4);
  size_t count[4] = {0, 0, 0, 0};
  for (auto s : lab.label) {
    REQUIRE(s != Segment::Excluded);
    ++count[static_cast<int>(s)];
  }
  // count of one vertex layer (a cross-section disc)
  size_t layer = 0;
  for (const auto& v : m.vertices)
    if (v.z() == 0.0)
      ++layer;
  for (int s = 1; s < 4; ++s)
    CHECK(std::abs(static_cast<long>(count[s]) - static_cast<long>(count[0])) <= static_cast<long>(layer));
  // bands are ordered along z
  for (size_t v = 0; v < m.vertices.size(); ++v) {
    const double z = m.vertices[v].z();
    const int expected = z < 0.0251 ? 0 : z < 0.0501 ? 1 : z < 0.0751 ? 2 : 3;
    CHECK(static_cast<int>(lab.label[v]) == expected);
  }
}

TEST_CASE("segment labels without cuts") {
  const auto m = generate_pipe_mesh(0.01, 0.05, 0);
  const auto lab = segment_labels(m, {});
  CHECK(lab.segment_count == 1);
  for (auto s : lab.label)
    CHECK(s == Segment::AAo);
}

TEST_CASE("segment labels on a U-bend") {
  const double limb = 0.02, bend = 0.02;
  const auto straight = generate_pipe_mesh(0.008, 0.1, 1);
  const auto m = bend_pipe_mesh(straight, limb, bend);
  CHECK(boundary_euler_characteristic(m) == 2);
  CHECK(total_volume(m) == doctest::Approx(total_volume(straight)).epsilon(0.01));
  // ascending limb rises along +z at x = -bend; the descending limb at x = +bend
  // falls from z = limb to z = limb - (0.1 - limb - pi bend)
  const std::vector<Plane> cuts{{Vec3(-bend, 0, 0.015), Vec3::UnitZ()},
                                {Vec3(bend, 0, 0.015), -Vec3::UnitZ()},
                                {Vec3(bend, 0, 0.008), -Vec3::UnitZ()}};
  const auto lab = segment_labels(m, cuts);
  size_t count[4] = {0, 0, 0, 0};
  for (auto s : lab.label) {
    REQUIRE(s != Segment::Excluded);
    ++count[static_cast<int>(s)];
  }
  for (auto c : count)
    CHECK(c > 0);
  // contiguity: every segment is connected through mesh edges
  const auto adj = vertex_adjacency(m);
  for (int s = 0; s < 4; ++s) {
    std::vector<char> seen(m.vertices.size(), 0);
    std::vector<size_t> stack;
    for (size_t v = 0; v < m.vertices.size() && stack.empty(); ++v)
      if (static_cast<int>(lab.label[v]) == s) {
        stack.push_back(v);
        seen[v] = 1;
      }
    size_t reached = 0;
    while (!stack.empty()) {
      const size_t v = stack.back();
      stack.pop_back();
      ++reached;
      for (int w : adj.of(v))
        if (!seen[w] && static_cast<int>(lab.label[w]) == s) {
          seen[w] = 1;
          stack.push_back(static_cast<size_t>(w));
        }
    }
    CHECK(reached == count[s]);
  }
}

TEST_CASE("segment labels errors and exclusions") {
  const auto m = generate_pipe_mesh(0.01, 0.1, 0);
  SUBCASE("empty segment") {
    const std::vector<Plane> cuts{{Vec3(0, 0, 0.05), Vec3::UnitZ()}, {Vec3(0, 0, 0.05), Vec3::UnitZ()}};
    CHECK(kind_of([&] { segment_labels(m, cuts); }) == ErrorKind::Labeling);
  }
  SUBCASE("exclusion sphere") {
    const std::vector<Plane> cuts{{Vec3(0, 0, 0.05), Vec3::UnitZ()}};
    const std::vector<ExclusionSphere> ex{{Vec3(0, 0, 0.08), 0.005}};
    const auto lab = segment_labels(m, cuts, ex);
    for (size_t v = 0; v < m.vertices.size(); ++v) {
      const bool inside = (m.vertices[v] - Vec3(0, 0, 0.08)).norm() < 0.005;
      if (inside)
        CHECK(lab.label[v] == Segment::Excluded);
      else
        CHECK(lab.label[v] != Segment::Excluded);
    }
  }
}
