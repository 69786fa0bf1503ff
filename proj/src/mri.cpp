// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hemoflow/mri.hpp"

#include "hemoflow/error.hpp"
#include "text_util.hpp"

#include <Eigen/Core>
#include <fftw3.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <random>

namespace hemoflow {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

double ceil_to_raster(double t, double raster) {
  if (raster <= 0.0)
    return t;
  return std::ceil(t / raster - 1e-9) * raster;
}

} // namespace

const char* to_string(Encode e) {
  switch (e) {
  case Encode::Reference: return "ref";
  case Encode::X: return "x";
  case Encode::Y: return "y";
  case Encode::Z: return "z";
  }
  return "?";
}

namespace {

Encode encode_from_string(const std::string& s) {
  for (auto e : kAllEncodes)
    if (s == to_string(e))
      return e;
  fail(ErrorKind::Parse, "unknown encode '" + s + "'");
}

} // namespace

void SequenceParams::validate() const {
  require(venc > 0.0, ErrorKind::InvalidArgument, "VENC must be positive");
  for (int i = 0; i < 3; ++i) {
    require(matrix[static_cast<size_t>(i)] >= 1, ErrorKind::InvalidArgument, "matrix sizes must be positive");
    require(voxel[static_cast<size_t>(i)] > 0.0, ErrorKind::InvalidArgument, "voxel sizes must be positive");
  }
  require(oversampling >= 1, ErrorKind::InvalidArgument, "oversampling must be at least 1");
  require(cardiac_phases >= 1, ErrorKind::InvalidArgument, "need at least one cardiac phase");
  require(time_spacing > 0.0 && t2_star > 0.0 && adc_bandwidth > 0.0, ErrorKind::InvalidArgument,
          "time spacing, T2* and ADC bandwidth must be positive");
  require(slew_rate > 0.0 && max_gradient > 0.0, ErrorKind::InvalidArgument, "gradient limits must be positive");
  require(raster_time >= 0.0, ErrorKind::InvalidArgument, "gradient raster must be non-negative");
}

std::array<double, 3> SequenceParams::fov() const {
  return {matrix[0] * voxel[0] * oversampling * 1e-3, matrix[1] * voxel[1] * 1e-3, matrix[2] * voxel[2] * 1e-3};
}

Trapezoid shortest_trapezoid(double area, double max_gradient, double slew, double raster) {
  require(area >= 0.0 && max_gradient > 0.0 && slew > 0.0, ErrorKind::InvalidArgument, "invalid trapezoid request");
  Trapezoid t;
  if (area == 0.0)
    return t;
  t.ramp = ceil_to_raster(std::min(max_gradient / slew, std::sqrt(area / slew)), raster);
  const double g = std::min(max_gradient, slew * t.ramp);
  t.flat = ceil_to_raster(std::max(0.0, area / g - t.ramp), raster);
  t.amplitude = area / (t.ramp + t.flat);
  return t;
}

Trapezoid shortest_bipolar_lobe(double moment, double max_gradient, double slew, double raster) {
  require(moment > 0.0 && max_gradient > 0.0 && slew > 0.0, ErrorKind::InvalidArgument, "invalid bipolar request");
  // Lobe pair (+A, -A) with centers one lobe duration apart has first moment
  // G (f + r) (f + 2 r).
  Trapezoid t;
  t.ramp = ceil_to_raster(std::min(max_gradient / slew, std::cbrt(moment / (2.0 * slew))), raster);
  const double g = std::min(max_gradient, slew * t.ramp);
  const double r = t.ramp;
  const double f = 0.5 * (-3.0 * r + std::sqrt(r * r + 4.0 * moment / g));
  t.flat = ceil_to_raster(std::max(0.0, f), raster);
  t.amplitude = moment / ((t.flat + r) * (t.flat + 2.0 * r));
  return t;
}

SequenceTimings sequence_timings(const SequenceParams& p) {
  p.validate();
  const double slew = p.slew_rate;            // mT/m/ms == T/m/s
  const double gmax = p.max_gradient * 1e-3;  // T/m
  const double raster = p.raster_time * 1e-3; // s
  const auto fov = p.fov();
  const int n = p.readout_samples();
  const int center = n / 2;

  SequenceTimings st;
  const double f_adc = p.adc_bandwidth * 1e3;
  st.dwell = 1.0 / f_adc;
  const double g_ro = f_adc / (kGyromagneticRatio * fov[0]);
  if (g_ro > gmax)
    fail(ErrorKind::InfeasibleSequence, "readout gradient " + detail::format_double(g_ro * 1e3) +
                                            " mT/m exceeds the gradient limit");
  st.readout.ramp = ceil_to_raster(g_ro / slew, raster);
  st.readout.flat = ceil_to_raster(n * st.dwell, raster);
  st.readout.amplitude = g_ro;

  // Balanced four-point encoding: each encode plays half the first-moment
  // step 1 / (2 gamma VENC) between the velocity-encoded pair.
  const double moment = 1.0 / (4.0 * kGyromagneticRatio * p.venc);
  st.bipolar_lobe = shortest_bipolar_lobe(moment, gmax, slew, raster);

  const double area_phase = 1.0 / (2.0 * p.voxel[1] * 1e-3) / kGyromagneticRatio;
  const double area_partition = 1.0 / (2.0 * p.voxel[2] * 1e-3) / kGyromagneticRatio;
  const double area_readout = g_ro * (0.5 * st.readout.ramp + center * st.dwell);
  st.prewinder = shortest_trapezoid(std::max({area_phase, area_partition, area_readout}), gmax, slew, raster);

  st.te = 2.0 * st.bipolar_lobe.duration() + st.prewinder.duration() + st.readout.ramp + center * st.dwell;
  st.repetition = st.te + (st.readout.flat - center * st.dwell) + st.readout.ramp + st.prewinder.duration();
  const double budget = p.time_spacing * 1e-3 / static_cast<double>(kAllEncodes.size());
  if (st.repetition > budget)
    fail(ErrorKind::InfeasibleSequence, "line repetition time " + detail::format_double(st.repetition * 1e3) +
                                            " ms does not fit four encodes into one cardiac frame");
  st.sample_times.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    st.sample_times[static_cast<size_t>(i)] = st.te + (i - center) * st.dwell;
  return st;
}

Vec3 ImageGeometry::position(int i, int j, int k) const {
  return center + Vec3((i - dims[0] / 2) * spacing[0], (j - dims[1] / 2) * spacing[1], (k - dims[2] / 2) * spacing[2]);
}

size_t KSpaceData::line_index(int j, int k) const {
  if (line_order == LineOrder::PhaseOuter)
    return static_cast<size_t>(k) + static_cast<size_t>(dims[2]) * static_cast<size_t>(j);
  return static_cast<size_t>(j) + static_cast<size_t>(dims[1]) * static_cast<size_t>(k);
}

namespace {

// Barycentric quadrature on the reference tet: the 4-point degree-2 rule,
// optionally applied on each sub-tet of a uniform midpoint refinement.
struct QuadRule {
  std::vector<Eigen::Vector4d> bary;
  std::vector<double> weight; // fractions of the tet volume, sum 1
};

void subdivide(const std::array<Eigen::Vector4d, 4>& c, int level, double w, QuadRule& rule) {
  if (level == 0) {
    constexpr double a = 0.5854101966249685, b = 0.1381966011250105;
    for (int q = 0; q < 4; ++q) {
      Eigen::Vector4d x = Eigen::Vector4d::Zero();
      for (int v = 0; v < 4; ++v)
        x += (v == q ? a : b) * c[static_cast<size_t>(v)];
      rule.bary.push_back(x);
      rule.weight.push_back(w / 4.0);
    }
    return;
  }
  auto m = [&](int i, int j) { return 0.5 * (c[static_cast<size_t>(i)] + c[static_cast<size_t>(j)]); };
  const auto m01 = m(0, 1), m02 = m(0, 2), m03 = m(0, 3), m12 = m(1, 2), m13 = m(1, 3), m23 = m(2, 3);
  const double w8 = w / 8.0;
  subdivide({c[0], m01, m02, m03}, level - 1, w8, rule);
  subdivide({m01, c[1], m12, m13}, level - 1, w8, rule);
  subdivide({m02, m12, c[2], m23}, level - 1, w8, rule);
  subdivide({m03, m13, m23, c[3]}, level - 1, w8, rule);
  subdivide({m01, m02, m03, m13}, level - 1, w8, rule);
  subdivide({m01, m02, m12, m13}, level - 1, w8, rule);
  subdivide({m02, m03, m13, m23}, level - 1, w8, rule);
  subdivide({m02, m12, m13, m23}, level - 1, w8, rule);
}

QuadRule make_rule(int level) {
  QuadRule rule;
  subdivide({Eigen::Vector4d::Unit(0), Eigen::Vector4d::Unit(1), Eigen::Vector4d::Unit(2), Eigen::Vector4d::Unit(3)},
            level, 1.0, rule);
  return rule;
}

struct QuadPoints {
  std::vector<Vec3> pos;
  std::vector<Vec3> vel;
  std::vector<double> amp; // weight * M0
};

QuadPoints quadrature_points(const TetMesh& mesh, std::span<const double> m0, std::span<const Vec3> velocity, int level) {
  const auto rule = make_rule(level);
  QuadPoints qp;
  for (size_t t = 0; t < mesh.tets.size(); ++t) {
    const auto& tet = mesh.tets[t];
    const double vol = mesh.tet_volume(t);
    for (size_t q = 0; q < rule.bary.size(); ++q) {
      Vec3 x = Vec3::Zero(), u = Vec3::Zero();
      double m = 0.0;
      for (int v = 0; v < 4; ++v) {
        const auto id = static_cast<size_t>(tet[static_cast<size_t>(v)]);
        const double b = rule.bary[q][v];
        x += b * mesh.vertices[id];
        u += b * velocity[id];
        m += b * m0[id];
      }
      const double amp = vol * rule.weight[q] * m;
      if (amp == 0.0)
        continue;
      qp.pos.push_back(x);
      qp.vel.push_back(u);
      qp.amp.push_back(amp);
    }
  }
  return qp;
}

// Fills row r of `out` with exp(-i 2 pi k_r x) for k_r = (r - floor(n/2)) / fov
// by recurrence in r.
template <typename Col>
void fill_phase_column(Col&& col, int n, double fov, double x, cd scale) {
  const double base = -2.0 * kPi * x / fov;
  cd v = scale * std::polar(1.0, base * static_cast<double>(-(n / 2)));
  const cd step = std::polar(1.0, base);
  for (int r = 0; r < n; ++r) {
    col(r) = v;
    v *= step;
  }
}

} // namespace

KSpaceData synthesize_signal(const TetMesh& mesh, std::span<const double> m0, std::span<const Vec3> velocity,
                             const SequenceParams& params, Encode encode, const SynthesisOptions& options) {
  require(m0.size() == mesh.vertices.size() && velocity.size() == mesh.vertices.size(), ErrorKind::CountMismatch,
          "M0 and velocity must have one value per mesh vertex");
  for (double m : m0)
    require(m >= 0.0 && std::isfinite(m), ErrorKind::InvalidArgument, "M0 must be finite and non-negative");
  require(options.quadrature_subdivisions >= 0 && options.quadrature_subdivisions <= 3, ErrorKind::InvalidArgument,
          "quadrature subdivisions must be in [0, 3]");
  const auto timing = sequence_timings(params);

  KSpaceData k;
  k.dims = params.kspace_dims();
  k.fov = params.fov();
  k.center = options.fov_center;
  k.encode = encode;
  k.venc = params.venc;
  k.sample_times = timing.sample_times;
  k.line_order = params.line_order;
  k.params_hash = params_hash(params);
  const int nx = k.dims[0], ny = k.dims[1], nz = k.dims[2];
  k.samples.assign(static_cast<size_t>(nx) * ny * nz, cd{});

  auto qp = quadrature_points(mesh, m0, velocity, options.quadrature_subdivisions);
  for (auto& p : qp.pos)
    p -= options.fov_center;
  const auto nq = qp.amp.size();
  std::vector<cd> enc_phase(nq, cd{1.0, 0.0});
  if (encode != Encode::Reference) {
    const int a = static_cast<int>(encode) - 1;
    for (size_t q = 0; q < nq; ++q)
      enc_phase[q] = std::polar(1.0, -kPi * qp.vel[q][a] / params.venc);
  }

  const double t2 = params.t2_star * 1e-3;
  constexpr size_t kBlock = 2048;
  using CMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic>;
  CMat ey, ez, slice(ny, nz);
  for (size_t q0 = 0; q0 < nq; q0 += kBlock) {
    const auto nb = static_cast<Eigen::Index>(std::min(kBlock, nq - q0));
    ey.resize(ny, nb);
    ez.resize(nz, nb);
    for (int i = 0; i < nx; ++i) {
      const double t = k.sample_times[static_cast<size_t>(i)];
      const double dt = options.motion ? t : 0.0;
      const double kx = static_cast<double>(i - nx / 2) / k.fov[0];
      for (Eigen::Index b = 0; b < nb; ++b) {
        const size_t q = q0 + static_cast<size_t>(b);
        const Vec3 r = qp.pos[q] + dt * qp.vel[q];
        const cd a = qp.amp[q] * enc_phase[q] * std::polar(1.0, -2.0 * kPi * kx * r.x());
        fill_phase_column(ey.col(b), ny, k.fov[1], r.y(), a);
        fill_phase_column(ez.col(b), nz, k.fov[2], r.z(), cd{1.0, 0.0});
      }
      slice.noalias() = ey * ez.transpose();
      const double decay = std::exp(-t / t2);
      for (int kk = 0; kk < nz; ++kk)
        for (int j = 0; j < ny; ++j)
          k.samples[k.index(i, j, kk)] += decay * slice(j, kk);
    }
  }
  return k;
}

double max_abs_signal(std::span<const KSpaceData> data) {
  double m = 0.0;
  for (const auto& k : data)
    for (const auto& s : k.samples)
      m = std::max(m, std::abs(s));
  return m;
}

void add_noise_sigma(KSpaceData& k, double sigma, std::uint64_t seed) {
  require(sigma >= 0.0 && std::isfinite(sigma), ErrorKind::InvalidArgument, "noise sigma must be non-negative");
  k.seed = seed;
  k.noise_sigma = sigma;
  if (sigma == 0.0)
    return;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k.encode), static_cast<std::uint32_t>(k.cardiac_phase)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, sigma);
  for (auto& s : k.samples) {
    const double re = normal(rng);
    const double im = normal(rng);
    s += cd{re, im};
  }
}

void add_noise(KSpaceData& k, double sigma_fraction, std::uint64_t seed) {
  require(sigma_fraction >= 0.0, ErrorKind::InvalidArgument, "sigma fraction must be non-negative");
  add_noise_sigma(k, sigma_fraction * max_abs_signal(std::span<const KSpaceData>(&k, 1)), seed);
}

ImageVolume reconstruct(const KSpaceData& k, int readout_matrix) {
  const int nx = k.dims[0], ny = k.dims[1], nz = k.dims[2];
  const size_t n = static_cast<size_t>(nx) * ny * nz;
  require(k.samples.size() == n, ErrorKind::CountMismatch, "k-space sample count does not match its dimensions");
  std::vector<cd> buf(n);
  auto wrap = [](int i, int len) { return ((i - len / 2) % len + len) % len; };
  for (int kk = 0; kk < nz; ++kk)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const size_t dst = static_cast<size_t>(wrap(i, nx)) +
                           static_cast<size_t>(nx) * (static_cast<size_t>(wrap(j, ny)) + static_cast<size_t>(ny) * static_cast<size_t>(wrap(kk, nz)));
        buf[dst] = k.samples[k.index(i, j, kk)];
      }
  {
    // The FFTW planner is not reentrant.
    static std::mutex planner;
    fftw_plan plan;
    {
      std::lock_guard lock(planner);
      plan = fftw_plan_dft_3d(nz, ny, nx, reinterpret_cast<fftw_complex*>(buf.data()),
                              reinterpret_cast<fftw_complex*>(buf.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    require(plan != nullptr, ErrorKind::InvalidArgument, "FFTW could not plan the transform");
    fftw_execute(plan);
    std::lock_guard lock(planner);
    fftw_destroy_plan(plan);
  }

  const int out_nx = readout_matrix > 0 ? readout_matrix : nx;
  require(out_nx <= nx, ErrorKind::InvalidArgument, "readout matrix larger than the acquired grid");
  const int start = nx / 2 - out_nx / 2;
  ImageVolume img;
  img.geometry.dims = {out_nx, ny, nz};
  img.geometry.spacing = {k.fov[0] / nx, k.fov[1] / ny, k.fov[2] / nz};
  img.geometry.center = k.center;
  img.encode = k.encode;
  img.cardiac_phase = k.cardiac_phase;
  img.phase_time = k.phase_time;
  img.venc = k.venc;
  img.voxels.resize(img.geometry.voxel_count());
  const double scale = 1.0 / static_cast<double>(n);
  for (int kk = 0; kk < nz; ++kk)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < out_nx; ++i) {
        const int m = i + start;
        const size_t src = static_cast<size_t>(wrap(m, nx)) +
                           static_cast<size_t>(nx) * (static_cast<size_t>(wrap(j, ny)) + static_cast<size_t>(ny) * static_cast<size_t>(wrap(kk, nz)));
        img.voxels[img.geometry.index(i, j, kk)] = buf[src] * scale;
      }
  return img;
}

ReconstructedVelocity phase_to_velocity(const ImageVolume& ref, const ImageVolume& x, const ImageVolume& y,
                                        const ImageVolume& z, double venc) {
  require(venc > 0.0, ErrorKind::InvalidArgument, "VENC must be positive");
  for (const auto* img : {&x, &y, &z})
    require(img->geometry.dims == ref.geometry.dims && img->voxels.size() == ref.voxels.size(),
            ErrorKind::CountMismatch, "encoded images do not match the reference grid");
  ReconstructedVelocity out;
  out.geometry = ref.geometry;
  out.cardiac_phase = ref.cardiac_phase;
  out.phase_time = ref.phase_time;
  const size_t n = ref.voxels.size();
  out.velocity.resize(n);
  out.magnitude.resize(n);
  out.wrapped.assign(n, 0);
  const std::array<const ImageVolume*, 3> enc{&x, &y, &z};
  for (size_t v = 0; v < n; ++v) {
    out.magnitude[v] = std::abs(ref.voxels[v]);
    for (int a = 0; a < 3; ++a) {
      // arg is in (-pi, pi], so u is in [-VENC, VENC).
      const double dphi = std::arg(enc[static_cast<size_t>(a)]->voxels[v] * std::conj(ref.voxels[v]));
      out.velocity[v][a] = -venc * dphi / kPi;
      if (std::abs(dphi) >= kPi * (1.0 - 1e-9))
        out.wrapped[v] |= static_cast<std::uint8_t>(1u << a);
    }
  }
  return out;
}

void mask_background(ReconstructedVelocity& v, double fraction) {
  require(fraction >= 0.0 && fraction < 1.0, ErrorKind::InvalidArgument, "background threshold must be in [0, 1)");
  if (fraction == 0.0 || v.magnitude.empty())
    return;
  const double cut = fraction * *std::max_element(v.magnitude.begin(), v.magnitude.end());
  for (size_t i = 0; i < v.magnitude.size(); ++i)
    if (v.magnitude[i] < cut)
      v.velocity[i] = Vec3::Zero();
}

VoxelAverage voxel_average(const TetMesh& mesh, std::span<const Vec3> values, const ImageGeometry& grid,
                           int subdivisions) {
  require(values.size() == mesh.vertices.size(), ErrorKind::CountMismatch, "one value per mesh vertex required");
  const auto rule = make_rule(subdivisions);
  const size_t n = grid.voxel_count();
  std::vector<Vec3> sum(n, Vec3::Zero());
  std::vector<double> weight(n, 0.0);
  for (size_t t = 0; t < mesh.tets.size(); ++t) {
    const auto& tet = mesh.tets[t];
    const double vol = mesh.tet_volume(t);
    for (size_t q = 0; q < rule.bary.size(); ++q) {
      Vec3 x = Vec3::Zero(), u = Vec3::Zero();
      for (int v = 0; v < 4; ++v) {
        const auto id = static_cast<size_t>(tet[static_cast<size_t>(v)]);
        x += rule.bary[q][v] * mesh.vertices[id];
        u += rule.bary[q][v] * values[id];
      }
      std::array<int, 3> idx{};
      bool inside = true;
      for (int a = 0; a < 3; ++a) {
        idx[static_cast<size_t>(a)] = static_cast<int>(std::floor((x[a] - grid.center[a]) / grid.spacing[static_cast<size_t>(a)] + 0.5)) +
                                      grid.dims[static_cast<size_t>(a)] / 2;
        inside = inside && idx[static_cast<size_t>(a)] >= 0 && idx[static_cast<size_t>(a)] < grid.dims[static_cast<size_t>(a)];
      }
      if (!inside)
        continue;
      const size_t id = grid.index(idx[0], idx[1], idx[2]);
      const double w = vol * rule.weight[q];
      sum[id] += w * u;
      weight[id] += w;
    }
  }
  const double vvox = grid.spacing[0] * grid.spacing[1] * grid.spacing[2];
  VoxelAverage out;
  out.mean.resize(n, Vec3::Zero());
  out.coverage.resize(n, 0.0);
  for (size_t v = 0; v < n; ++v) {
    if (weight[v] > 0.0)
      out.mean[v] = sum[v] / weight[v];
    out.coverage[v] = std::min(1.0, weight[v] / vvox);
  }
  return out;
}

double measure_snr(const ImageVolume& clean, const ImageVolume& noisy, std::span<const char> mask) {
  require(clean.voxels.size() == noisy.voxels.size() && mask.size() == clean.voxels.size(), ErrorKind::CountMismatch,
          "SNR inputs must share one grid");
  CompensatedSum sig, mean, sq;
  size_t count = 0;
  for (size_t v = 0; v < mask.size(); ++v)
    if (mask[v]) {
      sig.add(std::abs(clean.voxels[v]));
      ++count;
    }
  require(count > 0, ErrorKind::InvalidArgument, "SNR mask is empty");
  const size_t n = clean.voxels.size();
  for (size_t v = 0; v < n; ++v) {
    const cd d = noisy.voxels[v] - clean.voxels[v];
    mean.add(d.real());
    mean.add(d.imag());
  }
  const double mu = mean.value() / (2.0 * static_cast<double>(n));
  for (size_t v = 0; v < n; ++v) {
    const cd d = noisy.voxels[v] - clean.voxels[v];
    sq.add((d.real() - mu) * (d.real() - mu));
    sq.add((d.imag() - mu) * (d.imag() - mu));
  }
  const double sd = std::sqrt(sq.value() / (2.0 * static_cast<double>(n)));
  require(sd > 0.0, ErrorKind::InvalidArgument, "images carry no noise");
  return sig.value() / static_cast<double>(count) / sd;
}

namespace {

void write_complex64(const std::filesystem::path& path, std::span<const cd> values) {
  static_assert(std::endian::native == std::endian::little, "complex64 IO assumes a little-endian host");
  std::vector<float> buf;
  buf.reserve(values.size() * 2);
  for (const auto& v : values) {
    buf.push_back(static_cast<float>(v.real()));
    buf.push_back(static_cast<float>(v.imag()));
  }
  auto out = detail::open_output(path);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

std::vector<cd> read_complex64(const std::filesystem::path& path, size_t count) {
  const std::string bytes = detail::read_file(path);
  require(bytes.size() == count * 2 * sizeof(float), ErrorKind::CountMismatch,
          path.string() + ": size does not match the dimensions in its metadata");
  std::vector<float> buf(count * 2);
  std::memcpy(buf.data(), bytes.data(), bytes.size());
  std::vector<cd> out(count);
  for (size_t i = 0; i < count; ++i)
    out[i] = cd{buf[2 * i], buf[2 * i + 1]};
  return out;
}

nlohmann::json read_sidecar(const std::filesystem::path& path) {
  auto j = nlohmann::json::parse(detail::read_file(path.string() + ".json"), nullptr, false);
  require(!j.is_discarded(), ErrorKind::Parse, path.string() + ".json: invalid JSON");
  return j;
}

void write_sidecar(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = detail::open_output(path.string() + ".json");
  out << j.dump(2) << '\n';
}

template <typename T, size_t N>
std::array<T, N> json_array(const nlohmann::json& j, const char* key, const std::string& ctx) {
  require(j.contains(key) && j[key].is_array() && j[key].size() == N, ErrorKind::Parse, ctx + ": bad '" + key + "'");
  std::array<T, N> a{};
  for (size_t i = 0; i < N; ++i)
    a[i] = j[key][i].get<T>();
  return a;
}

} // namespace

void write_kspace(const std::filesystem::path& path, const KSpaceData& k) {
  write_complex64(path, k.samples);
  nlohmann::json j;
  j["kind"] = "kspace";
  j["dims"] = k.dims;
  j["fov"] = k.fov;
  j["center"] = {k.center.x(), k.center.y(), k.center.z()};
  j["encode"] = to_string(k.encode);
  j["cardiac_phase"] = k.cardiac_phase;
  j["phase_time"] = k.phase_time;
  j["venc"] = k.venc;
  j["sample_times"] = k.sample_times;
  j["line_order"] = k.line_order == LineOrder::PhaseOuter ? "phase_outer" : "partition_outer";
  j["seed"] = k.seed;
  j["noise_sigma"] = k.noise_sigma;
  j["params_hash"] = k.params_hash;
  write_sidecar(path, j);
}

KSpaceData read_kspace(const std::filesystem::path& path) {
  const auto j = read_sidecar(path);
  const std::string ctx = path.string();
  require(j.value("kind", "") == "kspace", ErrorKind::Parse, ctx + ": not a k-space container");
  KSpaceData k;
  try {
    k.dims = json_array<int, 3>(j, "dims", ctx);
    k.fov = json_array<double, 3>(j, "fov", ctx);
    const auto c = json_array<double, 3>(j, "center", ctx);
    k.center = Vec3(c[0], c[1], c[2]);
    k.encode = encode_from_string(j.at("encode").get<std::string>());
    k.cardiac_phase = j.at("cardiac_phase").get<int>();
    k.phase_time = j.at("phase_time").get<double>();
    k.venc = j.at("venc").get<double>();
    k.sample_times = j.at("sample_times").get<std::vector<double>>();
    k.line_order = j.value("line_order", "partition_outer") == "phase_outer" ? LineOrder::PhaseOuter : LineOrder::PartitionOuter;
    k.seed = j.value("seed", std::uint64_t{0});
    k.noise_sigma = j.value("noise_sigma", 0.0);
    k.params_hash = j.value("params_hash", "");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, ctx + ".json: " + e.what());
  }
  for (int d : k.dims)
    require(d >= 1, ErrorKind::Parse, ctx + ": dimensions must be positive");
  require(k.sample_times.size() == static_cast<size_t>(k.dims[0]), ErrorKind::CountMismatch,
          ctx + ": one sample time per readout index required");
  k.samples = read_complex64(path, static_cast<size_t>(k.dims[0]) * k.dims[1] * k.dims[2]);
  return k;
}

void write_image(const std::filesystem::path& path, const ImageVolume& img) {
  write_complex64(path, img.voxels);
  nlohmann::json j;
  j["kind"] = "image";
  j["dims"] = img.geometry.dims;
  j["spacing"] = img.geometry.spacing;
  j["center"] = {img.geometry.center.x(), img.geometry.center.y(), img.geometry.center.z()};
  j["encode"] = to_string(img.encode);
  j["cardiac_phase"] = img.cardiac_phase;
  j["phase_time"] = img.phase_time;
  j["venc"] = img.venc;
  write_sidecar(path, j);
}

ImageVolume read_image(const std::filesystem::path& path) {
  const auto j = read_sidecar(path);
  const std::string ctx = path.string();
  require(j.value("kind", "") == "image", ErrorKind::Parse, ctx + ": not an image container");
  ImageVolume img;
  try {
    img.geometry.dims = json_array<int, 3>(j, "dims", ctx);
    img.geometry.spacing = json_array<double, 3>(j, "spacing", ctx);
    const auto c = json_array<double, 3>(j, "center", ctx);
    img.geometry.center = Vec3(c[0], c[1], c[2]);
    img.encode = encode_from_string(j.at("encode").get<std::string>());
    img.cardiac_phase = j.at("cardiac_phase").get<int>();
    img.phase_time = j.at("phase_time").get<double>();
    img.venc = j.at("venc").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, ctx + ".json: " + e.what());
  }
  for (int d : img.geometry.dims)
    require(d >= 1, ErrorKind::Parse, ctx + ": dimensions must be positive");
  img.voxels = read_complex64(path, img.geometry.voxel_count());
  return img;
}

std::string params_hash(const SequenceParams& p) {
  std::string s;
  auto add = [&](double v) { s += detail::format_double(v) + ';'; };
  add(p.venc);
  for (int m : p.matrix)
    add(m);
  for (double v : p.voxel)
    add(v);
  add(p.oversampling);
  add(p.cardiac_phases);
  add(p.time_spacing);
  add(p.t2_star);
  add(p.adc_bandwidth);
  add(p.slew_rate);
  add(p.max_gradient);
  add(p.raster_time);
  add(p.line_order == LineOrder::PhaseOuter ? 1 : 0);
  return detail::hex64(detail::fnv1a(s));
}

} // namespace hemoflow
