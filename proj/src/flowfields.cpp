// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hemoflow/flowfields.hpp"

#include "hemoflow/error.hpp"
#include "hemoflow/vtk_io.hpp"
#include "text_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <numeric>

namespace hemoflow {

static_assert(std::endian::native == std::endian::little, "binary frame IO assumes a little-endian host");

size_t VelocityField::nearest_frame(double t) const {
  require(!frames.empty(), ErrorKind::InvalidArgument, "velocity field has no frames");
  t = std::fmod(t, period);
  if (t < 0)
    t += period;
  size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t f = 0; f < frame_times.size(); ++f) {
    double d = std::abs(frame_times[f] - t);
    d = std::min(d, period - d);
    if (d < best_d) {
      best_d = d;
      best = f;
    }
  }
  return best;
}

void FlowWaveform::validate() const {
  require(!times.empty() && times.size() == values.size(), ErrorKind::InvalidArgument,
          "waveform needs matching, non-empty time and value arrays");
  require(period > 0.0, ErrorKind::InvalidArgument, "waveform period must be positive");
  require(times.front() >= 0.0 && times.back() < period, ErrorKind::InvalidArgument,
          "waveform times must lie in [0, period)");
  for (size_t i = 1; i < times.size(); ++i)
    require(times[i] > times[i - 1], ErrorKind::NonMonotone, "waveform times must be strictly increasing");
}

double FlowWaveform::value_at(double t) const {
  const size_t n = times.size();
  if (n == 1)
    return values.front();
  t = std::fmod(t - times.front(), period);
  if (t < 0)
    t += period;
  t += times.front();
  // Interval [times[i], times[i+1]), with the wrap interval closing at t0 + period.
  auto it = std::upper_bound(times.begin(), times.end(), t);
  const size_t i = static_cast<size_t>(it - times.begin()) - 1;
  const double ta = times[i];
  const double tb = i + 1 < n ? times[i + 1] : times.front() + period;
  const double vb = i + 1 < n ? values[i + 1] : values.front();
  const double w = (t - ta) / (tb - ta);
  return values[i] + w * (vb - values[i]);
}

FlowWaveform read_waveform_csv(const std::filesystem::path& path, WaveformKind kind) {
  const auto table = detail::read_csv(path);
  const std::string ctx = path.string();
  require(table.header.size() >= 2, ErrorKind::Parse, ctx + ": expected columns t,value");
  require(table.rows.size() >= 2, ErrorKind::InsufficientData, ctx + ": a periodic waveform needs at least 2 rows");
  std::vector<double> t, v;
  for (const auto& row : table.rows) {
    t.push_back(detail::parse_double(row[0], ctx));
    v.push_back(detail::parse_double(row[1], ctx));
  }
  require(std::abs(v.back() - v.front()) <= 1e-9, ErrorKind::InvalidArgument,
          ctx + ": waveform is not periodic (last value differs from first)");
  FlowWaveform w;
  w.kind = kind;
  w.period = t.back() - t.front();
  for (size_t i = 0; i + 1 < t.size(); ++i) {
    w.times.push_back(t[i] - t.front());
    w.values.push_back(v[i]);
  }
  w.validate();
  return w;
}

void write_waveform_csv(const std::filesystem::path& path, const FlowWaveform& w) {
  auto out = detail::open_output(path);
  out << "t,value\n";
  for (size_t i = 0; i < w.times.size(); ++i)
    out << detail::format_double(w.times[i]) << ',' << detail::format_double(w.values[i]) << '\n';
  out << detail::format_double(w.times.front() + w.period) << ',' << detail::format_double(w.values.front()) << '\n';
}

PipeGeometry detect_pipe(const TetMesh& mesh) {
  std::vector<int> wall;
  for (const auto& tri : mesh.boundary)
    if (tri.label == kWallLabel)
      wall.insert(wall.end(), tri.v.begin(), tri.v.end());
  require(!wall.empty(), ErrorKind::Geometry, "mesh has no wall surface");
  PipeGeometry g;
  g.z0 = std::numeric_limits<double>::infinity();
  g.z1 = -g.z0;
  for (const auto& p : mesh.vertices) {
    g.z0 = std::min(g.z0, p.z());
    g.z1 = std::max(g.z1, p.z());
  }
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (const auto& tri : mesh.boundary) {
    if (tri.label != kWallLabel) {
      // Caps must be flat at the ends of the pipe.
      for (int v : tri.v) {
        const double z = mesh.vertices[static_cast<size_t>(v)].z();
        require(std::abs(z - g.z0) < 1e-9 * (g.z1 - g.z0) || std::abs(z - g.z1) < 1e-9 * (g.z1 - g.z0),
                ErrorKind::Geometry, "inlet/outlet faces are not perpendicular caps of a z-aligned pipe");
      }
      continue;
    }
    const Vec3& a = mesh.vertices[static_cast<size_t>(tri.v[0])];
    const Vec3 n = (mesh.vertices[static_cast<size_t>(tri.v[1])] - a).cross(mesh.vertices[static_cast<size_t>(tri.v[2])] - a);
    // A cap face mislabeled as wall would have an axial normal.
    require(std::abs(n.normalized().z()) < 0.5, ErrorKind::Geometry, "wall face is not part of a z-aligned cylinder");
  }
  for (int v : wall) {
    const Vec3& p = mesh.vertices[static_cast<size_t>(v)];
    const double r = std::hypot(p.x(), p.y());
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  require(rmax > 0.0 && (rmax - rmin) <= 1e-6 * rmax, ErrorKind::Geometry,
          "mesh is not a straight circular pipe along z (wall radius varies)");
  g.radius = 0.5 * (rmin + rmax);
  return g;
}

namespace {

std::vector<char> wall_mask(const TetMesh& mesh) {
  std::vector<char> m(mesh.vertices.size(), 0);
  for (const auto& tri : mesh.boundary)
    if (tri.label == kWallLabel)
      for (int v : tri.v)
        m[static_cast<size_t>(v)] = 1;
  return m;
}

} // namespace

VelocityField poiseuille_power_law(const TetMesh& mesh, double pressure_drop, const PowerLawParams& pl) {
  require(pressure_drop > 0.0, ErrorKind::InvalidArgument, "pressure drop must be positive");
  require(pl.n > 0.0 && pl.n <= 1.0 && pl.m > 0.0, ErrorKind::InvalidArgument, "need m > 0 and 0 < n <= 1");
  const auto g = detect_pipe(mesh);
  const double length = g.z1 - g.z0;
  const double e = (pl.n + 1.0) / pl.n;
  const double coef = pl.n / (pl.n + 1.0) * std::pow(pressure_drop / (2.0 * pl.m * length), 1.0 / pl.n);
  const double r_wall = std::pow(g.radius, e);
  const auto wall = wall_mask(mesh);
  VelocityField f;
  f.frame_times = {0.0};
  f.frames.emplace_back(mesh.vertices.size(), Vec3::Zero());
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (wall[v])
      continue;
    const double r = std::min(std::hypot(mesh.vertices[v].x(), mesh.vertices[v].y()), g.radius);
    f.frames[0][v].z() = coef * (r_wall - std::pow(r, e));
  }
  return f;
}

std::vector<double> pipe_profile(const TetMesh& mesh) {
  const auto g = detect_pipe(mesh);
  const auto wall = wall_mask(mesh);
  std::vector<double> s(mesh.vertices.size(), 0.0);
  for (size_t v = 0; v < s.size(); ++v) {
    if (wall[v])
      continue;
    const double r = std::hypot(mesh.vertices[v].x(), mesh.vertices[v].y()) / g.radius;
    s[v] = std::max(0.0, 1.0 - r * r);
  }
  return s;
}

VelocityField pulsatile_scale(std::span<const double> profile, const FlowWaveform& waveform, const Vec3& direction) {
  waveform.validate();
  require(direction.norm() > 0.0, ErrorKind::InvalidArgument, "direction must be nonzero");
  const Vec3 d = direction.normalized();
  VelocityField f;
  f.period = waveform.period;
  f.frame_times = waveform.times;
  for (double amp : waveform.values) {
    std::vector<Vec3> frame(profile.size());
    for (size_t v = 0; v < profile.size(); ++v)
      frame[v] = amp * profile[v] * d;
    f.frames.push_back(std::move(frame));
  }
  return f;
}

VelocityField bend_field(const TetMesh& straight, const VelocityField& field, double limb_length,
                         double bend_radius) {
  require(field.vertex_count() == straight.vertices.size(), ErrorKind::CountMismatch,
          "field and mesh vertex counts differ");
  const double arc = std::numbers::pi * bend_radius;
  std::vector<Mat3> rot(straight.vertices.size());
  for (size_t v = 0; v < rot.size(); ++v) {
    const double s = straight.vertices[v].z();
    Vec3 n, t;
    if (s <= limb_length) {
      n = Vec3::UnitX();
      t = Vec3::UnitZ();
    } else if (s <= limb_length + arc) {
      const double th = (s - limb_length) / bend_radius;
      n = Vec3(std::cos(th), 0.0, -std::sin(th));
      t = Vec3(std::sin(th), 0.0, std::cos(th));
    } else {
      n = -Vec3::UnitX();
      t = -Vec3::UnitZ();
    }
    rot[v].col(0) = n;
    rot[v].col(1) = Vec3::UnitY();
    rot[v].col(2) = t;
  }
  VelocityField out = field;
  for (auto& frame : out.frames)
    for (size_t v = 0; v < frame.size(); ++v)
      frame[v] = rot[v] * frame[v];
  return out;
}

namespace {

struct CutPolygon {
  std::vector<Vec3> points;
  std::vector<std::array<int, 2>> edges; // mesh vertex pair per point
  std::vector<double> weight;            // interpolation weight of edges[i][1]
};

// Intersections of a tet with the plane. Vertices with d >= 0 count as the
// positive side, so a face lying in the plane is cut exactly once.
bool cut_tet(const TetMesh& mesh, const std::array<int, 4>& tet, const Vec3& n, const Vec3& p0, CutPolygon& poly) {
  double d[4];
  int pos = 0;
  for (int i = 0; i < 4; ++i) {
    d[i] = n.dot(mesh.vertices[static_cast<size_t>(tet[static_cast<size_t>(i)])] - p0);
    pos += d[i] >= 0.0;
  }
  if (pos == 0 || pos == 4)
    return false;
  poly.points.clear();
  poly.edges.clear();
  poly.weight.clear();
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      if ((d[i] >= 0.0) == (d[j] >= 0.0))
        continue;
      const double w = d[i] / (d[i] - d[j]);
      const Vec3& a = mesh.vertices[static_cast<size_t>(tet[static_cast<size_t>(i)])];
      const Vec3& b = mesh.vertices[static_cast<size_t>(tet[static_cast<size_t>(j)])];
      poly.points.push_back(a + w * (b - a));
      poly.edges.push_back({tet[static_cast<size_t>(i)], tet[static_cast<size_t>(j)]});
      poly.weight.push_back(w);
    }
  if (poly.points.size() == 4) {
    // Quad: order the points by angle about their centroid.
    const Vec3 c = (poly.points[0] + poly.points[1] + poly.points[2] + poly.points[3]) / 4.0;
    const Vec3 e1 = (poly.points[0] - c).normalized();
    const Vec3 e2 = n.cross(e1);
    std::array<int, 4> order{0, 1, 2, 3};
    std::array<double, 4> ang{};
    for (int i = 0; i < 4; ++i) {
      const Vec3 r = poly.points[static_cast<size_t>(i)] - c;
      ang[static_cast<size_t>(i)] = std::atan2(r.dot(e2), r.dot(e1));
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) { return ang[static_cast<size_t>(a)] < ang[static_cast<size_t>(b)]; });
    CutPolygon sorted;
    for (int i : order) {
      sorted.points.push_back(poly.points[static_cast<size_t>(i)]);
      sorted.edges.push_back(poly.edges[static_cast<size_t>(i)]);
      sorted.weight.push_back(poly.weight[static_cast<size_t>(i)]);
    }
    poly = std::move(sorted);
  }
  return true;
}

template <typename Visit>
size_t for_each_cut_triangle(const TetMesh& mesh, const Plane& plane, double max_radius, Visit&& visit) {
  require(plane.normal.norm() > 0.0, ErrorKind::InvalidArgument, "cut plane normal must be nonzero");
  const Vec3 n = plane.normal.normalized();
  CutPolygon poly;
  size_t cut = 0;
  for (const auto& tet : mesh.tets) {
    if (!cut_tet(mesh, tet, n, plane.point, poly))
      continue;
    Vec3 c = Vec3::Zero();
    for (const auto& p : poly.points)
      c += p;
    c /= static_cast<double>(poly.points.size());
    if ((c - plane.point).norm() > max_radius)
      continue;
    ++cut;
    for (size_t k = 1; k + 1 < poly.points.size(); ++k) {
      const double area = 0.5 * (poly.points[k] - poly.points[0]).cross(poly.points[k + 1] - poly.points[0]).norm();
      visit(poly, std::array<size_t, 3>{0, k, k + 1}, area);
    }
  }
  if (cut == 0)
    fail(ErrorKind::EmptySection, "cut plane does not intersect the mesh");
  return cut;
}

} // namespace

double flux_through_plane(std::span<const Vec3> velocity, const TetMesh& mesh, const Plane& plane, double max_radius) {
  require(velocity.size() == mesh.vertices.size(), ErrorKind::CountMismatch, "velocity and mesh vertex counts differ");
  const Vec3 n = plane.normal.normalized();
  CompensatedSum q;
  for_each_cut_triangle(mesh, plane, max_radius, [&](const CutPolygon& poly, std::array<size_t, 3> tri, double area) {
    // Velocity is linear inside the tet, so the centroid value is the mean
    // of the corner values and midpoint quadrature is exact.
    Vec3 u = Vec3::Zero();
    for (size_t k : tri) {
      const auto& e = poly.edges[k];
      const double w = poly.weight[k];
      u += (1.0 - w) * velocity[static_cast<size_t>(e[0])] + w * velocity[static_cast<size_t>(e[1])];
    }
    q.add(area * u.dot(n) / 3.0);
  });
  return q.value();
}

double section_area(const TetMesh& mesh, const Plane& plane, double max_radius) {
  CompensatedSum a;
  for_each_cut_triangle(mesh, plane, max_radius, [&](const CutPolygon&, std::array<size_t, 3>, double area) { a.add(area); });
  return a.value();
}

FlowWaveform flow_rate(const VelocityField& field, const TetMesh& mesh, const Plane& plane, double max_radius) {
  require(field.frame_count() > 0, ErrorKind::InvalidArgument, "velocity field has no frames");
  FlowWaveform w;
  w.kind = WaveformKind::Volumetric;
  w.period = field.period;
  w.times = field.frame_times;
  for (const auto& frame : field.frames)
    w.values.push_back(flux_through_plane(frame, mesh, plane, max_radius));
  return w;
}

void save_velocity_frame(const std::filesystem::path& path, const VelocityField& field, size_t f, const TetMesh* mesh) {
  require(f < field.frame_count(), ErrorKind::OutOfBounds, "frame index out of range");
  const auto& frame = field.frames[f];
  if (path.extension() == ".vtk") {
    require(mesh != nullptr && mesh->vertices.size() == frame.size(), ErrorKind::CountMismatch,
            "VTK velocity frames need the matching mesh");
    vtk::Dataset d;
    d.title = "hemoflow velocity frame";
    d.points = mesh->vertices;
    for (const auto& t : mesh->tets) {
      d.cells.push_back({t[0], t[1], t[2], t[3]});
      d.cell_types.push_back(vtk::kTetra);
    }
    vtk::DataArray u;
    u.components = 3;
    for (const auto& v : frame)
      u.values.insert(u.values.end(), {v.x(), v.y(), v.z()});
    d.point_data["velocity"] = std::move(u);
    d.field_data["TIME"] = vtk::DataArray{"double", 1, {field.frame_times[f]}};
    d.field_data["PERIOD"] = vtk::DataArray{"double", 1, {field.period}};
    vtk::write(path, d);
    return;
  }
  auto out = detail::open_output(path);
  for (const auto& v : frame)
    out.write(reinterpret_cast<const char*>(v.data()), 3 * sizeof(double));
  nlohmann::json meta{{"time", field.frame_times[f]}, {"period", field.period}, {"vertex_count", frame.size()}};
  auto side = detail::open_output(path.string() + ".json");
  side << meta.dump(2) << '\n';
}

namespace {

struct LoadedFrame {
  double time = 0.0;
  double period = std::numeric_limits<double>::quiet_NaN();
  std::vector<Vec3> velocity;
};

LoadedFrame load_frame(const std::filesystem::path& path, size_t vertex_count) {
  LoadedFrame fr;
  const std::string ctx = path.string();
  if (path.extension() == ".vtk") {
    const auto d = vtk::read(path);
    const auto it = d.point_data.find("velocity");
    require(it != d.point_data.end() && it->second.components == 3, ErrorKind::Parse,
            ctx + ": missing 3-component point data 'velocity'");
    const auto t = d.field_data.find("TIME");
    require(t != d.field_data.end() && !t->second.values.empty(), ErrorKind::Parse, ctx + ": missing TIME field");
    fr.time = t->second.values[0];
    if (auto p = d.field_data.find("PERIOD"); p != d.field_data.end() && !p->second.values.empty())
      fr.period = p->second.values[0];
    const auto& vals = it->second.values;
    for (size_t i = 0; i + 2 < vals.size(); i += 3)
      fr.velocity.emplace_back(vals[i], vals[i + 1], vals[i + 2]);
  } else {
    const auto meta = nlohmann::json::parse(detail::read_file(path.string() + ".json"), nullptr, false);
    require(!meta.is_discarded() && meta.contains("time"), ErrorKind::Parse, ctx + ".json: invalid frame metadata");
    fr.time = meta["time"].get<double>();
    if (meta.contains("period"))
      fr.period = meta["period"].get<double>();
    if (meta.contains("vertex_count"))
      require(meta["vertex_count"].get<size_t>() == vertex_count, ErrorKind::CountMismatch,
              ctx + ": sidecar vertex_count does not match the mesh");
    const std::string bytes = detail::read_file(path);
    require(bytes.size() % (3 * sizeof(double)) == 0, ErrorKind::Parse, ctx + ": size is not a multiple of 24 bytes");
    fr.velocity.resize(bytes.size() / (3 * sizeof(double)));
    std::memcpy(fr.velocity.data()->data(), bytes.data(), bytes.size());
  }
  require(fr.velocity.size() == vertex_count, ErrorKind::CountMismatch,
          ctx + ": " + std::to_string(fr.velocity.size()) + " vectors for " + std::to_string(vertex_count) + " vertices");
  return fr;
}

} // namespace

VelocityField load_velocity_series(std::span<const std::filesystem::path> paths, size_t vertex_count,
                                   double default_period) {
  require(!paths.empty(), ErrorKind::InvalidArgument, "no velocity frames given");
  std::vector<LoadedFrame> frames;
  for (const auto& p : paths)
    frames.push_back(load_frame(p, vertex_count));
  std::sort(frames.begin(), frames.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  VelocityField f;
  f.period = default_period;
  for (const auto& fr : frames)
    if (!std::isnan(fr.period))
      f.period = fr.period;
  for (size_t i = 0; i < frames.size(); ++i) {
    if (i > 0)
      require(frames[i].time > frames[i - 1].time, ErrorKind::NonMonotone, "velocity frames have duplicate times");
    require(std::isnan(frames[i].period) || frames[i].period == f.period, ErrorKind::InvalidArgument,
            "velocity frames disagree on the period");
    require(frames[i].time >= 0.0 && frames[i].time < f.period, ErrorKind::InvalidArgument,
            "frame time outside [0, period)");
    f.frame_times.push_back(frames[i].time);
    f.frames.push_back(std::move(frames[i].velocity));
  }
  return f;
}

} // namespace hemoflow
