// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hemoflow/error.hpp"
#include "hemoflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hemoflow {

namespace {

// Splits the prism over bottom triangle (a, b, c) and its copy one layer up
// into three tets. Sorting by global index makes the diagonal chosen on each
// quad face depend only on that face's vertices, so neighbors agree.
void split_prism(std::array<int, 3> bottom, int layer_stride, std::vector<std::array<int, 4>>& tets) {
  std::sort(bottom.begin(), bottom.end());
  const auto [a, b, c] = bottom;
  const int a1 = a + layer_stride, b1 = b + layer_stride, c1 = c + layer_stride;
  tets.push_back({a, b, c, a1});
  tets.push_back({b, c, a1, b1});
  tets.push_back({c, a1, b1, c1});
}

void orient_tets(TetMesh& mesh) {
  for (size_t t = 0; t < mesh.tets.size(); ++t)
    if (mesh.signed_tet_volume(t) < 0)
      std::swap(mesh.tets[t][2], mesh.tets[t][3]);
}

// Boundary from the tet faces, caps labeled by their axial coordinate.
void label_boundary(TetMesh& mesh, double z0, double z1, bool label_caps) {
  mesh.boundary = extract_boundary(mesh);
  if (!label_caps)
    return;
  const double tol = 1e-9 * std::max(1.0, std::abs(z1 - z0));
  for (auto& tri : mesh.boundary) {
    bool at0 = true, at1 = true;
    for (int v : tri.v) {
      const double z = mesh.vertices[static_cast<size_t>(v)].z();
      at0 = at0 && std::abs(z - z0) <= tol;
      at1 = at1 && std::abs(z - z1) <= tol;
    }
    if (at0)
      tri.label = kInletLabel;
    else if (at1)
      tri.label = kFirstOutletLabel;
  }
}

} // namespace

TetMesh generate_pipe_mesh(double radius, double length, int resolution, double wall_grading) {
  require(radius > 0.0 && length > 0.0, ErrorKind::InvalidArgument, "pipe radius and length must be positive");
  require(resolution >= 0 && resolution <= 6, ErrorKind::InvalidArgument, "pipe resolution level must be in [0, 6]");
  require(wall_grading >= 0.0 && wall_grading < 1.0, ErrorKind::InvalidArgument, "wall grading must be in [0, 1)");

  const int rings = 4 << resolution;
  const int layers = std::max(2, static_cast<int>(std::ceil(length * rings / (2.0 * radius) - 1e-9)));

  // Cross-section: center point plus ring i with 6 i points.
  std::vector<Eigen::Vector2d> section{Eigen::Vector2d::Zero()};
  std::vector<int> ring_start{0};
  for (int i = 1; i <= rings; ++i) {
    const double s = static_cast<double>(i) / rings;
    const double r = radius * ((1.0 - wall_grading) * s + wall_grading * (2.0 * s - s * s));
    ring_start.push_back(static_cast<int>(section.size()));
    const int count = 6 * i;
    for (int j = 0; j < count; ++j) {
      const double th = 2.0 * std::numbers::pi * j / count;
      section.emplace_back(r * std::cos(th), r * std::sin(th));
    }
  }
  ring_start.push_back(static_cast<int>(section.size()));

  std::vector<std::array<int, 3>> tris;
  for (int i = 1; i <= rings; ++i) {
    const int na = i == 1 ? 1 : 6 * (i - 1), nb = 6 * i;
    const int sa = ring_start[static_cast<size_t>(i - 1)], sb = ring_start[static_cast<size_t>(i)];
    if (na == 1) {
      for (int j = 0; j < nb; ++j)
        tris.push_back({sa, sb + j, sb + (j + 1) % nb});
      continue;
    }
    // Advance along both rings by angle, always closing the triangle whose
    // next vertex comes first.
    int ia = 0, ib = 0;
    while (ia < na || ib < nb) {
      const double next_a = static_cast<double>(ia + 1) / na, next_b = static_cast<double>(ib + 1) / nb;
      if (ib < nb && (ia == na || next_b <= next_a)) {
        tris.push_back({sa + ia % na, sb + ib, sb + (ib + 1) % nb});
        ++ib;
      } else {
        tris.push_back({sa + ia, sb + ib % nb, sa + (ia + 1) % na});
        ++ia;
      }
    }
  }

  TetMesh mesh;
  const int stride = static_cast<int>(section.size());
  mesh.vertices.reserve(static_cast<size_t>(stride) * static_cast<size_t>(layers + 1));
  for (int k = 0; k <= layers; ++k) {
    const double z = length * k / layers;
    for (const auto& p : section)
      mesh.vertices.emplace_back(p.x(), p.y(), z);
  }
  mesh.tets.reserve(tris.size() * 3 * static_cast<size_t>(layers));
  for (int k = 0; k < layers; ++k)
    for (const auto& t : tris)
      split_prism({t[0] + k * stride, t[1] + k * stride, t[2] + k * stride}, stride, mesh.tets);
  orient_tets(mesh);
  label_boundary(mesh, 0.0, length, true);
  return mesh;
}

TetMesh generate_box_mesh(const Vec3& lo, const Vec3& hi, std::array<int, 3> cells, bool label_caps) {
  require((hi - lo).minCoeff() > 0.0, ErrorKind::InvalidArgument, "box must have positive extent");
  require(cells[0] > 0 && cells[1] > 0 && cells[2] > 0, ErrorKind::InvalidArgument, "box cell counts must be positive");
  const int nx = cells[0] + 1, ny = cells[1] + 1, nz = cells[2] + 1;
  TetMesh mesh;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        mesh.vertices.emplace_back(lo.x() + (hi.x() - lo.x()) * i / cells[0], lo.y() + (hi.y() - lo.y()) * j / cells[1],
                                   lo.z() + (hi.z() - lo.z()) * k / cells[2]);
  auto id = [&](int i, int j, int k) { return i + nx * (j + ny * k); };
  constexpr int perms[6][3] = {{1, 2, 4}, {1, 4, 2}, {2, 1, 4}, {2, 4, 1}, {4, 1, 2}, {4, 2, 1}};
  for (int k = 0; k < cells[2]; ++k)
    for (int j = 0; j < cells[1]; ++j)
      for (int i = 0; i < cells[0]; ++i) {
        auto corner = [&](int bits) { return id(i + (bits & 1), j + ((bits >> 1) & 1), k + ((bits >> 2) & 1)); };
        for (const auto& p : perms)
          mesh.tets.push_back({corner(0), corner(p[0]), corner(p[0] | p[1]), corner(7)});
      }
  orient_tets(mesh);
  label_boundary(mesh, lo.z(), hi.z(), label_caps);
  return mesh;
}

TetMesh bend_pipe_mesh(const TetMesh& straight, double limb_length, double bend_radius) {
  require(limb_length >= 0.0 && bend_radius > 0.0, ErrorKind::InvalidArgument, "invalid bend geometry");
  double zmax = 0.0, rmax = 0.0;
  for (const auto& p : straight.vertices) {
    zmax = std::max(zmax, p.z());
    rmax = std::max(rmax, std::hypot(p.x(), p.y()));
  }
  require(rmax < bend_radius, ErrorKind::InvalidArgument, "bend radius must exceed the pipe radius");
  const double arc = std::numbers::pi * bend_radius;
  require(zmax >= limb_length + arc, ErrorKind::InvalidArgument, "straight pipe is too short for the bend");

  TetMesh out = straight;
  const double a = bend_radius;
  for (auto& p : out.vertices) {
    const double x = p.x(), y = p.y(), s = p.z();
    if (s <= limb_length) {
      p = Vec3(-a + x, y, s);
    } else if (s <= limb_length + arc) {
      const double th = (s - limb_length) / a;
      const Vec3 center(-a * std::cos(th), 0.0, limb_length + a * std::sin(th));
      const Vec3 normal(std::cos(th), 0.0, -std::sin(th));
      p = center + x * normal + Vec3(0.0, y, 0.0);
    } else {
      const double d = s - limb_length - arc;
      p = Vec3(a - x, y, limb_length - d);
    }
  }
  validate_and_repair(out);
  return out;
}

} // namespace hemoflow
