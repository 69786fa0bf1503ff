// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hemoflow/mesh.hpp"

#include "hemoflow/error.hpp"
#include "hemoflow/vtk_io.hpp"
#include "mesh_internal.hpp"


#include <algorithm>
#include <deque>
#include <map>
#include <unordered_map>

namespace hemoflow {

namespace {

constexpr int kFaceOpposite[4][4] = {{1, 2, 3, 0}, {0, 3, 2, 1}, {0, 1, 3, 2}, {0, 2, 1, 3}};

} // namespace

namespace detail {

FaceMap build_face_map(const TetMesh& mesh) {
  FaceMap faces;
  faces.reserve(mesh.tets.size() * 3);
  for (size_t t = 0; t < mesh.tets.size(); ++t) {
    const auto& tet = mesh.tets[t];
    for (const auto& f : kFaceOpposite) {
      auto key = sorted_face(tet[f[0]], tet[f[1]], tet[f[2]]);
      auto [it, inserted] = faces.try_emplace(key, FaceInfo{static_cast<int>(t), tet[f[3]], 0});
      it->second.count += 1;
    }
  }
  return faces;
}

} // namespace detail

double TetMesh::signed_tet_volume(size_t t) const {
  const auto& k = tets[t];
  const Vec3& a = vertices[static_cast<size_t>(k[0])];
  return (vertices[static_cast<size_t>(k[1])] - a)
             .cross(vertices[static_cast<size_t>(k[2])] - a)
             .dot(vertices[static_cast<size_t>(k[3])] - a) /
         6.0;
}

double TetMesh::tet_volume(size_t t) const { return std::abs(signed_tet_volume(t)); }

Vec3 TetMesh::tet_centroid(size_t t) const {
  Vec3 c = Vec3::Zero();
  for (int v : tets[t])
    c += vertices[static_cast<size_t>(v)];
  return c / 4.0;
}

MeshReport validate_and_repair(TetMesh& mesh) {
  MeshReport report;
  const auto nv = static_cast<int>(mesh.vertices.size());
  require(!mesh.tets.empty(), ErrorKind::Geometry, "mesh has no tetrahedra");
  std::vector<char> used(mesh.vertices.size(), 0);
  for (const auto& tet : mesh.tets)
    for (int v : tet) {
      require(v >= 0 && v < nv, ErrorKind::Geometry, "tet vertex index out of range");
      used[static_cast<size_t>(v)] = 1;
    }
  for (const auto& tri : mesh.boundary)
    for (int v : tri.v)
      require(v >= 0 && v < nv, ErrorKind::Geometry, "boundary vertex index out of range");
  for (size_t v = 0; v < used.size(); ++v)
    require(used[v] != 0, ErrorKind::Geometry, "vertex " + std::to_string(v) + " belongs to no tetrahedron");

  Vec3 lo = mesh.vertices.front(), hi = lo;
  for (const auto& p : mesh.vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diag = (hi - lo).norm();
  const double tiny = 1e-14 * diag * diag * diag;

  for (size_t t = 0; t < mesh.tets.size(); ++t) {
    const double sv = mesh.signed_tet_volume(t);
    if (std::abs(sv) <= tiny)
      fail(ErrorKind::DegenerateGeometry, "tet " + std::to_string(t) + " has zero volume");
    if (sv < 0) {
      std::swap(mesh.tets[t][2], mesh.tets[t][3]);
      ++report.repaired_tets;
    }
  }
  if (report.repaired_tets > 0)
    report.warnings.push_back("repaired " + std::to_string(report.repaired_tets) +
                              " inverted tetrahedra by swapping two vertices");

  const auto faces = detail::build_face_map(mesh);
  size_t exterior = 0;
  for (const auto& [key, info] : faces) {
    require(info.count <= 2, ErrorKind::Geometry, "non-manifold face shared by more than two tetrahedra");
    if (info.count == 1)
      ++exterior;
  }
  require(mesh.boundary.size() == exterior, ErrorKind::Geometry,
          "open boundary surface: " + std::to_string(exterior) + " exterior tet faces but " +
              std::to_string(mesh.boundary.size()) + " boundary triangles");

  for (auto& tri : mesh.boundary) {
    const auto it = faces.find(detail::sorted_face(tri.v[0], tri.v[1], tri.v[2]));
    require(it != faces.end() && it->second.count == 1, ErrorKind::Geometry,
            "boundary triangle is not an exterior face of the tet mesh");
    const Vec3& a = mesh.vertices[static_cast<size_t>(tri.v[0])];
    const Vec3 n = (mesh.vertices[static_cast<size_t>(tri.v[1])] - a).cross(mesh.vertices[static_cast<size_t>(tri.v[2])] - a);
    if (n.dot(mesh.vertices[static_cast<size_t>(it->second.opposite)] - a) < 0) {
      std::swap(tri.v[1], tri.v[2]);
      ++report.reoriented_triangles;
    }
  }

  // Closed and consistently oriented: each undirected edge is used twice,
  // once in each direction.
  std::map<std::pair<int, int>, int> directed;
  for (const auto& tri : mesh.boundary)
    for (int e = 0; e < 3; ++e)
      directed[{tri.v[static_cast<size_t>(e)], tri.v[static_cast<size_t>((e + 1) % 3)]}] += 1;
  for (const auto& [edge, count] : directed) {
    require(count == 1, ErrorKind::Geometry, "boundary surface is not orientable");
    require(directed.count({edge.second, edge.first}) == 1, ErrorKind::Geometry, "open boundary surface");
  }
  return report;
}

TetMesh load_mesh(const std::filesystem::path& path, MeshReport* report) {
  const auto data = vtk::read(path);
  TetMesh mesh;
  mesh.vertices = data.points;
  const auto label_it = data.cell_data.find("boundary_label");
  for (size_t c = 0; c < data.cells.size(); ++c) {
    const auto& cell = data.cells[c];
    if (data.cell_types[c] == vtk::kTetra) {
      require(cell.size() == 4, ErrorKind::Parse, path.string() + ": tetra cell without 4 points");
      mesh.tets.push_back({cell[0], cell[1], cell[2], cell[3]});
    } else if (data.cell_types[c] == vtk::kTriangle) {
      require(cell.size() == 3, ErrorKind::Parse, path.string() + ": triangle cell without 3 points");
      require(label_it != data.cell_data.end(), ErrorKind::Parse,
              path.string() + ": triangle cells need a boundary_label cell array");
      mesh.boundary.push_back({{cell[0], cell[1], cell[2]}, static_cast<int>(label_it->second.values[c])});
    } else {
      fail(ErrorKind::Parse, path.string() + ": unsupported cell type " + std::to_string(data.cell_types[c]) +
                                 " (only tetra and triangle cells)");
    }
  }
  auto r = validate_and_repair(mesh);
  if (report)
    *report = std::move(r);
  return mesh;
}

void save_mesh(const TetMesh& mesh, const std::filesystem::path& path) {
  vtk::Dataset d;
  d.title = "hemoflow tetrahedral mesh";
  d.points = mesh.vertices;
  vtk::DataArray labels;
  labels.type = "int";
  for (const auto& t : mesh.tets) {
    d.cells.push_back({t[0], t[1], t[2], t[3]});
    d.cell_types.push_back(vtk::kTetra);
    labels.values.push_back(-1);
  }
  for (const auto& b : mesh.boundary) {
    d.cells.push_back({b.v[0], b.v[1], b.v[2]});
    d.cell_types.push_back(vtk::kTriangle);
    labels.values.push_back(b.label);
  }
  d.cell_data["boundary_label"] = std::move(labels);
  vtk::write(path, d);
}

NodalVolumes nodal_volumes(const TetMesh& mesh) {
  NodalVolumes nv;
  nv.volume.assign(mesh.vertices.size(), 0.0);
  for (size_t t = 0; t < mesh.tets.size(); ++t) {
    const double q = mesh.tet_volume(t) / 4.0;
    for (int v : mesh.tets[t])
      nv.volume[static_cast<size_t>(v)] += q;
  }
  return nv;
}

double total_volume(const TetMesh& mesh) {
  CompensatedSum s;
  for (size_t t = 0; t < mesh.tets.size(); ++t)
    s.add(mesh.tet_volume(t));
  return s.value();
}

WallNormals wall_normals(const TetMesh& mesh) {
  std::vector<Vec3> acc(mesh.vertices.size(), Vec3::Zero());
  std::vector<char> on_wall(mesh.vertices.size(), 0);
  for (const auto& tri : mesh.boundary) {
    if (tri.label != kWallLabel)
      continue;
    const Vec3& a = mesh.vertices[static_cast<size_t>(tri.v[0])];
    // |cross| is twice the area, so the sum is area weighted.
    const Vec3 n = (mesh.vertices[static_cast<size_t>(tri.v[1])] - a).cross(mesh.vertices[static_cast<size_t>(tri.v[2])] - a);
    for (int v : tri.v) {
      acc[static_cast<size_t>(v)] += n;
      on_wall[static_cast<size_t>(v)] = 1;
    }
  }
  WallNormals out;
  for (size_t v = 0; v < acc.size(); ++v) {
    if (!on_wall[v])
      continue;
    const double len = acc[v].norm();
    if (!(len > 0.0))
      fail(ErrorKind::DegenerateGeometry, "wall vertex " + std::to_string(v) + " has a zero accumulated normal");
    out.vertices.push_back(static_cast<int>(v));
    out.normals.push_back(acc[v] / len);
  }
  return out;
}

std::vector<BoundaryTri> extract_boundary(const TetMesh& mesh) {
  const auto faces = detail::build_face_map(mesh);
  std::vector<BoundaryTri> out;
  for (const auto& tet : mesh.tets) {
    for (const auto& f : kFaceOpposite) {
      const auto& info = faces.at(detail::sorted_face(tet[f[0]], tet[f[1]], tet[f[2]]));
      if (info.count != 1)
        continue;
      BoundaryTri tri{{tet[f[0]], tet[f[1]], tet[f[2]]}, kWallLabel};
      const Vec3& a = mesh.vertices[static_cast<size_t>(tri.v[0])];
      const Vec3 n = (mesh.vertices[static_cast<size_t>(tri.v[1])] - a).cross(mesh.vertices[static_cast<size_t>(tri.v[2])] - a);
      if (n.dot(mesh.vertices[static_cast<size_t>(tet[f[3]])] - a) < 0)
        std::swap(tri.v[1], tri.v[2]);
      out.push_back(tri);
    }
  }
  return out;
}

int boundary_euler_characteristic(const TetMesh& mesh) {
  std::vector<char> seen(mesh.vertices.size(), 0);
  std::map<std::pair<int, int>, int> edges;
  long vcount = 0;
  for (const auto& tri : mesh.boundary) {
    for (int e = 0; e < 3; ++e) {
      const int a = tri.v[static_cast<size_t>(e)], b = tri.v[static_cast<size_t>((e + 1) % 3)];
      edges[{std::min(a, b), std::max(a, b)}] = 1;
      if (!seen[static_cast<size_t>(a)]) {
        seen[static_cast<size_t>(a)] = 1;
        ++vcount;
      }
    }
  }
  return static_cast<int>(vcount - static_cast<long>(edges.size()) + static_cast<long>(mesh.boundary.size()));
}

VertexAdjacency vertex_adjacency(const TetMesh& mesh) {
  std::vector<std::vector<int>> nb(mesh.vertices.size());
  for (const auto& tet : mesh.tets)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j)
          nb[static_cast<size_t>(tet[static_cast<size_t>(i)])].push_back(tet[static_cast<size_t>(j)]);
  VertexAdjacency adj;
  adj.offsets.reserve(nb.size() + 1);
  adj.offsets.push_back(0);
  for (auto& list : nb) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    adj.neighbors.insert(adj.neighbors.end(), list.begin(), list.end());
    adj.offsets.push_back(adj.neighbors.size());
  }
  return adj;
}

const char* to_string(Segment s) {
  switch (s) {
  case Segment::AAo: return "AAo";
  case Segment::AArch: return "AArch";
  case Segment::pDAo: return "pDAo";
  case Segment::dDAo: return "dDAo";
  case Segment::Excluded: return "excluded";
  }
  return "?";
}

Segment segment_from_index(size_t i) {
  require(i < 4, ErrorKind::InvalidArgument, "segment index out of range");
  return static_cast<Segment>(i);
}

SegmentLabels segment_labels(const TetMesh& mesh, std::span<const Plane> cuts,
                             std::span<const ExclusionSphere> exclusions) {
  require(cuts.size() <= 3, ErrorKind::InvalidArgument, "at most 3 cut planes (4 segments) are supported");
  for (const auto& p : cuts)
    require(p.normal.norm() > 0.0, ErrorKind::InvalidArgument, "cut plane normal must be nonzero");
  const size_t n = mesh.vertices.size();
  const size_t k = cuts.size();
  SegmentLabels out;
  out.segment_count = k + 1;
  std::vector<int> label(n, -1);

  if (k == 0) {
    std::fill(label.begin(), label.end(), 0);
  } else {
    const auto adj = vertex_adjacency(mesh);
    std::vector<int> seeds;
    for (const auto& tri : mesh.boundary)
      if (tri.label == kInletLabel)
        seeds.insert(seeds.end(), tri.v.begin(), tri.v.end());
    if (seeds.empty()) {
      size_t best = 0;
      for (size_t v = 1; v < n; ++v)
        if (cuts[0].signed_distance(mesh.vertices[v]) < cuts[0].signed_distance(mesh.vertices[best]))
          best = v;
      seeds.push_back(static_cast<int>(best));
    }
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

    for (size_t s = 0; s <= k; ++s) {
      std::vector<int> next;
      std::deque<int> queue(seeds.begin(), seeds.end());
      while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        const auto vi = static_cast<size_t>(v);
        if (label[vi] != -1)
          continue;
        if (s < k && cuts[s].signed_distance(mesh.vertices[vi]) >= 0.0) {
          next.push_back(v);
          continue;
        }
        label[vi] = static_cast<int>(s);
        for (int w : adj.of(vi))
          if (label[static_cast<size_t>(w)] == -1)
            queue.push_back(w);
      }
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      seeds = std::move(next);
    }
  }

  out.label.resize(n);
  std::vector<size_t> counts(k + 1, 0);
  for (size_t v = 0; v < n; ++v) {
    bool excluded = label[v] < 0;
    for (const auto& e : exclusions)
      if ((mesh.vertices[v] - e.center).norm() <= e.radius)
        excluded = true;
    if (excluded) {
      out.label[v] = Segment::Excluded;
    } else {
      out.label[v] = segment_from_index(static_cast<size_t>(label[v]));
      ++counts[static_cast<size_t>(label[v])];
    }
  }
  for (size_t s = 0; s <= k; ++s)
    require(counts[s] > 0, ErrorKind::Labeling,
            std::string("cut planes leave segment ") + to_string(segment_from_index(s)) + " empty");
  return out;
}

} // namespace hemoflow
