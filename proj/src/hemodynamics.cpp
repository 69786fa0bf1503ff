// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hemoflow/hemodynamics.hpp"

#include "hemoflow/error.hpp"
#include "hemoflow/vtk_io.hpp"
#include "text_util.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <map>

namespace hemoflow {

VelocityField interpolate_to_mesh(std::span<const ReconstructedVelocity> phases, const TetMesh& mesh, double period) {
  require(!phases.empty(), ErrorKind::InvalidArgument, "no decoded velocity phases");
  require(period > 0.0, ErrorKind::InvalidArgument, "period must be positive");
  VelocityField f;
  f.period = period;
  for (const auto& ph : phases) {
    const auto& g = ph.geometry;
    require(ph.velocity.size() == g.voxel_count(), ErrorKind::CountMismatch, "velocity volume does not match its grid");
    std::vector<Vec3> frame(mesh.vertices.size());
    for (size_t v = 0; v < mesh.vertices.size(); ++v) {
      std::array<int, 3> i0{};
      std::array<double, 3> w{};
      for (int a = 0; a < 3; ++a) {
        const auto au = static_cast<size_t>(a);
        const double s = (mesh.vertices[v][a] - g.center[a]) / g.spacing[au] + g.dims[au] / 2;
        const double tol = 1e-9;
        if (s < -tol || s > g.dims[au] - 1 + tol)
          fail(ErrorKind::OutOfBounds, "vertex " + std::to_string(v) + " lies outside the voxel grid");
        if (g.dims[au] == 1) {
          i0[au] = 0;
          w[au] = 0.0;
          continue;
        }
        i0[au] = std::clamp(static_cast<int>(std::floor(s)), 0, g.dims[au] - 2);
        w[au] = std::clamp(s - i0[au], 0.0, 1.0);
      }
      Vec3 u = Vec3::Zero();
      for (int c = 0; c < 8; ++c) {
        double wt = 1.0;
        std::array<int, 3> idx{};
        for (int a = 0; a < 3; ++a) {
          const auto au = static_cast<size_t>(a);
          const int bit = (c >> a) & 1;
          wt *= bit ? w[au] : 1.0 - w[au];
          idx[au] = std::min(i0[au] + bit, g.dims[au] - 1);
        }
        if (wt != 0.0)
          u += wt * ph.velocity[g.index(idx[0], idx[1], idx[2])];
      }
      frame[v] = u;
    }
    f.frame_times.push_back(ph.phase_time);
    f.frames.push_back(std::move(frame));
  }
  for (size_t i = 1; i < f.frame_times.size(); ++i)
    require(f.frame_times[i] > f.frame_times[i - 1], ErrorKind::NonMonotone, "cardiac phase times must increase");
  return f;
}

GradientRecovery::GradientRecovery(const TetMesh& mesh)
    : mesh_(&mesh), volumes_(nodal_volumes(mesh)) {
  shape_grad_.resize(mesh.tets.size());
  tet_volume_.resize(mesh.tets.size());
  for (size_t t = 0; t < mesh.tets.size(); ++t) {
    const auto& k = mesh.tets[t];
    const Vec3& x0 = mesh.vertices[static_cast<size_t>(k[0])];
    Mat3 j;
    for (int c = 0; c < 3; ++c)
      j.col(c) = mesh.vertices[static_cast<size_t>(k[static_cast<size_t>(c + 1)])] - x0;
    const double det = j.determinant();
    if (!(std::abs(det) > 0.0))
      fail(ErrorKind::DegenerateGeometry, "tet " + std::to_string(t) + " is degenerate");
    const Mat3 inv = j.inverse();
    auto& g = shape_grad_[t];
    g[1] = inv.row(0).transpose();
    g[2] = inv.row(1).transpose();
    g[3] = inv.row(2).transpose();
    g[0] = -(g[1] + g[2] + g[3]);
    tet_volume_[t] = std::abs(det) / 6.0;
  }
}

Mat3 GradientRecovery::element_gradient(size_t t, std::span<const Vec3> velocity) const {
  Mat3 g = Mat3::Zero();
  const auto& k = mesh_->tets[t];
  for (int a = 0; a < 4; ++a)
    g.noalias() += velocity[static_cast<size_t>(k[static_cast<size_t>(a)])] * shape_grad_[t][static_cast<size_t>(a)].transpose();
  return g;
}

std::vector<Mat3> GradientRecovery::recover(std::span<const Vec3> velocity) const {
  require(velocity.size() == mesh_->vertices.size(), ErrorKind::CountMismatch, "velocity and mesh vertex counts differ");
  std::vector<Mat3> acc(velocity.size(), Mat3::Zero());
  for (size_t t = 0; t < mesh_->tets.size(); ++t) {
    const Mat3 g = element_gradient(t, velocity) * (tet_volume_[t] / 4.0);
    for (int v : mesh_->tets[t])
      acc[static_cast<size_t>(v)] += g;
  }
  for (size_t v = 0; v < acc.size(); ++v)
    acc[v] /= volumes_.volume[v];
  return acc;
}

GradientField recover_gradients(const TetMesh& mesh, const VelocityField& field) {
  const GradientRecovery rec(mesh);
  GradientField out;
  for (const auto& frame : field.frames)
    out.push_back(rec.recover(frame));
  return out;
}

double shear_rate(const Mat3& g) {
  const Mat3 e = strain_rate(g);
  return std::sqrt(2.0 * e.cwiseProduct(e).sum());
}

WssFrame wall_shear_stress(std::span<const Mat3> gradients, const WallNormals& normals, const ViscosityModel& model) {
  WssFrame out;
  out.vector.reserve(normals.vertices.size());
  for (size_t i = 0; i < normals.vertices.size(); ++i) {
    const Mat3& g = gradients[static_cast<size_t>(normals.vertices[i])];
    const double mu = model(shear_rate(g));
    const Vec3 t = 2.0 * mu * (strain_rate(g) * normals.normals[i]);
    out.vector.push_back(t);
    out.magnitude.push_back(t.norm());
    out.viscosity.push_back(mu);
  }
  return out;
}

std::vector<double> oscillatory_shear_index(const std::vector<std::vector<Vec3>>& series,
                                            std::span<const double> frame_times, double period) {
  require(!series.empty() && series.size() == frame_times.size(), ErrorKind::InvalidArgument,
          "one frame time per WSS frame required");
  require(period > frame_times.back() && frame_times.front() >= 0.0, ErrorKind::InvalidArgument,
          "frame times must lie in [0, period)");
  const size_t nf = series.size();
  const size_t nv = series.front().size();
  std::vector<double> osi(nv, 0.0);
  for (size_t v = 0; v < nv; ++v) {
    Vec3 integral = Vec3::Zero();
    double magnitude = 0.0;
    for (size_t f = 0; f < nf; ++f) {
      // Periodic closure: the last interval runs back to frame 0 at t0 + period.
      const size_t g = (f + 1) % nf;
      const double h = (f + 1 < nf ? frame_times[f + 1] : frame_times.front() + period) - frame_times[f];
      integral += 0.5 * h * (series[f][v] + series[g][v]);
      magnitude += 0.5 * h * (series[f][v].norm() + series[g][v].norm());
    }
    if (magnitude > 0.0)
      osi[v] = std::clamp(0.5 * (1.0 - integral.norm() / magnitude), 0.0, 0.5);
  }
  return osi;
}

std::vector<double> energy_loss_rate(std::span<const Mat3> gradients, const ViscosityModel& model,
                                     const NodalVolumes& volumes, double deviatoric_coefficient) {
  require(gradients.size() == volumes.volume.size(), ErrorKind::CountMismatch, "gradient and volume counts differ");
  std::vector<double> out(gradients.size());
  for (size_t v = 0; v < gradients.size(); ++v) {
    const Mat3& g = gradients[v];
    const double mu = model(shear_rate(g));
    const Mat3 d = strain_rate(g) - deviatoric_coefficient * g.trace() * Mat3::Identity();
    out[v] = 2.0 * mu * d.cwiseProduct(d).sum() * volumes.volume[v] * 1e6;
  }
  return out;
}

HemoResult compute_hemodynamics(const TetMesh& mesh, const VelocityField& field, const GradientField& gradients,
                                const NodalVolumes& volumes, const ViscosityModel& model, const HemoOptions& options) {
  require(gradients.size() == field.frame_count(), ErrorKind::CountMismatch, "one gradient frame per velocity frame");
  const auto normals = wall_normals(mesh);
  HemoResult r;
  r.model = model.name();
  r.model_description = model.describe();
  r.frame_times = field.frame_times;
  r.period = field.period;
  r.wall_vertices = normals.vertices;
  for (const auto& g : gradients) {
    auto w = wall_shear_stress(g, normals, model);
    r.wss.push_back(std::move(w.vector));
    r.wss_mag.push_back(std::move(w.magnitude));
    r.el_rate.push_back(energy_loss_rate(g, model, volumes, options.deviatoric_coefficient));
    std::vector<double> mu(g.size());
    for (size_t v = 0; v < g.size(); ++v)
      mu[v] = model(shear_rate(g[v]));
    r.viscosity.push_back(std::move(mu));
  }
  r.osi = oscillatory_shear_index(r.wss, r.frame_times, r.period);
  return r;
}

HemoResult compute_hemodynamics(const TetMesh& mesh, const VelocityField& field, const ViscosityModel& model,
                                const HemoOptions& options) {
  const GradientRecovery rec(mesh);
  GradientField g;
  for (const auto& frame : field.frames)
    g.push_back(rec.recover(frame));
  return compute_hemodynamics(mesh, field, g, rec.volumes(), model, options);
}

const StatRow* SegmentStats::find(const std::string& segment, int frame, const std::string& param) const {
  for (const auto& r : rows)
    if (r.segment == segment && r.frame == frame && r.param == param)
      return &r;
  return nullptr;
}

namespace {

struct MeanStd {
  std::optional<double> mean, std;
};

MeanStd mean_std(std::span<const double> values) {
  if (values.empty())
    return {};
  const double mean = compensated_sum(values) / static_cast<double>(values.size());
  CompensatedSum sq;
  for (double v : values)
    sq.add((v - mean) * (v - mean));
  return {mean, std::sqrt(sq.value() / static_cast<double>(values.size()))};
}

} // namespace

SegmentStats segment_stats(const HemoResult& result, const SegmentLabels& labels) {
  const size_t nseg = labels.segment_count;
  std::vector<std::vector<size_t>> wall_idx(nseg); // indices into wall arrays
  std::vector<std::vector<size_t>> lumen(nseg);
  for (size_t i = 0; i < result.wall_vertices.size(); ++i) {
    const auto s = labels.label[static_cast<size_t>(result.wall_vertices[i])];
    if (s != Segment::Excluded)
      wall_idx[static_cast<size_t>(s)].push_back(i);
  }
  for (size_t v = 0; v < labels.label.size(); ++v)
    if (labels.label[v] != Segment::Excluded)
      lumen[static_cast<size_t>(labels.label[v])].push_back(v);

  SegmentStats out;
  auto emit = [&](const std::string& param, int frame, auto&& values_of) {
    std::vector<double> means;
    for (size_t s = 0; s < nseg; ++s) {
      const std::vector<double> vals = values_of(s);
      const auto ms = mean_std(vals);
      out.rows.push_back({to_string(segment_from_index(s)), frame, param, ms.mean, ms.std});
      if (ms.mean)
        means.push_back(*ms.mean);
    }
    const auto cross = mean_std(means);
    out.rows.push_back({kCrossSegment, frame, param, cross.mean, cross.std});
  };
  for (size_t f = 0; f < result.wss_mag.size(); ++f)
    emit("wss", static_cast<int>(f), [&](size_t s) {
      std::vector<double> v;
      for (size_t i : wall_idx[s])
        v.push_back(result.wss_mag[f][i]);
      return v;
    });
  emit("osi", kAllFrames, [&](size_t s) {
    std::vector<double> v;
    for (size_t i : wall_idx[s])
      v.push_back(result.osi[i]);
    return v;
  });
  for (size_t f = 0; f < result.el_rate.size(); ++f)
    emit("el_rate", static_cast<int>(f), [&](size_t s) {
      std::vector<double> v;
      for (size_t i : lumen[s])
        v.push_back(result.el_rate[f][i]);
      return v;
    });
  return out;
}

std::vector<ComparisonRow> compare_models(const SegmentStats& a, const SegmentStats& b) {
  require(a.rows.size() == b.rows.size(), ErrorKind::CountMismatch, "statistics tables have different row counts");
  std::vector<ComparisonRow> out;
  for (size_t i = 0; i < a.rows.size(); ++i) {
    const auto& ra = a.rows[i];
    const auto& rb = b.rows[i];
    require(ra.segment == rb.segment && ra.frame == rb.frame && ra.param == rb.param, ErrorKind::CountMismatch,
            "statistics tables list different segments, frames or parameters");
    ComparisonRow c{ra.segment, ra.frame, ra.param, ra.mean, rb.mean, std::nullopt, std::nullopt};
    if (ra.mean && rb.mean) {
      c.absolute = *rb.mean - *ra.mean;
      if (*ra.mean != 0.0)
        c.relative_percent = (*rb.mean - *ra.mean) / *ra.mean * 100.0;
    }
    out.push_back(c);
  }
  return out;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? detail::format_double(*v) : "NA"; }

std::optional<double> parse_opt(std::string_view s, const std::string& ctx) {
  if (detail::trim(s) == "NA")
    return std::nullopt;
  return detail::parse_double(s, ctx);
}

std::string frame_str(int f) { return f == kAllFrames ? "all" : std::to_string(f); }

} // namespace

void write_stats_csv(const std::filesystem::path& path, const SegmentStats& stats) {
  auto out = detail::open_output(path);
  out << "segment,frame,param,mean,std\n";
  for (const auto& r : stats.rows)
    out << r.segment << ',' << frame_str(r.frame) << ',' << r.param << ',' << opt(r.mean) << ',' << opt(r.std) << '\n';
}

SegmentStats read_stats_csv(const std::filesystem::path& path) {
  const auto table = detail::read_csv(path);
  const std::string ctx = path.string();
  const size_t cs = table.column("segment", ctx), cf = table.column("frame", ctx), cp = table.column("param", ctx),
               cm = table.column("mean", ctx), cd = table.column("std", ctx);
  SegmentStats s;
  for (const auto& row : table.rows) {
    StatRow r;
    r.segment = row[cs];
    r.frame = row[cf] == "all" ? kAllFrames : static_cast<int>(detail::parse_int(row[cf], ctx));
    r.param = row[cp];
    r.mean = parse_opt(row[cm], ctx);
    r.std = parse_opt(row[cd], ctx);
    s.rows.push_back(std::move(r));
  }
  return s;
}

void write_comparison_csv(const std::filesystem::path& path, std::span<const ComparisonRow> rows) {
  auto out = detail::open_output(path);
  out << "segment,frame,param,reference,other,relative_percent,absolute\n";
  for (const auto& r : rows)
    out << r.segment << ',' << frame_str(r.frame) << ',' << r.param << ',' << opt(r.reference) << ','
        << opt(r.other) << ',' << opt(r.relative_percent) << ',' << opt(r.absolute) << '\n';
}

void write_hemo_vtk(const std::filesystem::path& path, const TetMesh& mesh, const HemoResult& result, size_t frame) {
  require(frame < result.wss.size(), ErrorKind::OutOfBounds, "frame index out of range");
  const size_t n = mesh.vertices.size();
  vtk::Dataset d;
  d.title = "hemoflow hemodynamics " + result.model;
  d.points = mesh.vertices;
  for (const auto& t : mesh.tets) {
    d.cells.push_back({t[0], t[1], t[2], t[3]});
    d.cell_types.push_back(vtk::kTetra);
  }
  vtk::DataArray wv{"double", 3, std::vector<double>(3 * n, 0.0)};
  vtk::DataArray wm{"double", 1, std::vector<double>(n, 0.0)};
  vtk::DataArray os{"double", 1, std::vector<double>(n, 0.0)};
  for (size_t i = 0; i < result.wall_vertices.size(); ++i) {
    const auto v = static_cast<size_t>(result.wall_vertices[i]);
    for (int a = 0; a < 3; ++a)
      wv.values[3 * v + static_cast<size_t>(a)] = result.wss[frame][i][a];
    wm.values[v] = result.wss_mag[frame][i];
    os.values[v] = result.osi[i];
  }
  d.point_data["wss_vector"] = std::move(wv);
  d.point_data["wss_mag"] = std::move(wm);
  d.point_data["osi"] = std::move(os);
  d.point_data["el_rate"] = vtk::DataArray{"double", 1, result.el_rate[frame]};
  d.point_data["mu_apparent"] = vtk::DataArray{"double", 1, result.viscosity[frame]};
  d.field_data["TIME"] = vtk::DataArray{"double", 1, {result.frame_times[frame]}};
  d.field_data["PERIOD"] = vtk::DataArray{"double", 1, {result.period}};
  vtk::write(path, d);
}

} // namespace hemoflow
