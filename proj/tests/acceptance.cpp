// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include "hemoflow/error.hpp"
#include "hemoflow/pipeline.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace hemoflow;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok)
      pass = false;
    if (!detail.empty())
      detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

PowerLawParams law(double m, double n, double hct = 0.0) {
  PowerLawParams p;
  p.m = m;
  p.n = n;
  p.hct = hct;
  return p;
}

// Published rows: Hct, m (Pa s^n), n, Newtonian fit over 12-123 1/s and over 0-2800 1/s (Pa s).
struct TableRow {
  double hct, m, n, nf1, nf2;
};
const std::vector<TableRow> kTable{{20.0, 0.0069, 0.71, 2.15e-3, 0.97e-3},
                                   {32.5, 0.0173, 0.63, 4.00e-3, 1.49e-3},
                                   {45.0, 0.0242, 0.72, 7.71e-3, 3.52e-3},
                                   {57.5, 0.0419, 0.64, 9.75e-3, 3.64e-3},
                                   {70.0, 0.0540, 0.63, 12.38e-3, 4.58e-3}};

Outcome newtonian_equivalents() {
  Outcome o;
  for (const auto& r : kTable) {
    const double nf1 = newtonian_equivalent(law(r.m, r.n, r.hct), 12.0, 123.0).mu;
    const double nf2 = newtonian_equivalent(law(r.m, r.n, r.hct), 0.0, 2800.0).mu;
    const double e1 = (nf1 - r.nf1) / r.nf1, e2 = (nf2 - r.nf2) / r.nf2;
    o.require(std::abs(e1) <= 0.02, fmt("Hct %.1f fit1 %+.2f%%", r.hct, 100 * e1));
    o.require(std::abs(e2) <= 0.05, fmt("fit2 %+.2f%%", 100 * e2));
  }
  return o;
}

Outcome fit_round_trip() {
  Outcome o;
  const auto curves = reference_base_curves();
  double worst = 0.0;
  for (const auto& r : kTable) {
    const auto fit = fit_for_hct(curves, r.hct, reference_shear_rates());
    worst = std::max({worst, oracle::rel(fit.m, r.m), oracle::rel(fit.n, r.n)});
  }
  o.require(worst <= 0.05, fmt("knot recovery worst %.2e", worst));
  oracle::Gen gen(101);
  double exact = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double m = gen.uniform(1e-3, 0.1), n = gen.uniform(0.4, 1.0);
    std::vector<ViscositySample> s;
    for (double g : reference_shear_rates())
      s.push_back({g, m * std::pow(g, n - 1.0), 45.0});
    const auto fit = fit_power_law(s);
    exact = std::max({exact, oracle::rel(fit.m, m), oracle::rel(fit.n, n)});
  }
  o.require(exact <= 1e-8, fmt("exact-model recovery worst %.1e", exact));
  return o;
}

Outcome pipe_oracle() {
  Outcome o;
  const double radius = 0.01, length = 0.05, dp = 40.0;
  const double tau = dp * radius / (2 * length);
  const auto pl = fit_for_hct(reference_base_curves(), 45.0, reference_shear_rates());
  auto wall_mean = [&](int level) {
    const auto mesh = generate_pipe_mesh(radius, length, level);
    const auto res = compute_hemodynamics(mesh, poiseuille_power_law(mesh, dp, pl), ViscosityModel::power_law("PL", pl));
    double sum = 0.0;
    size_t n = 0;
    for (size_t i = 0; i < res.wall_vertices.size(); ++i) {
      const double z = mesh.vertices[static_cast<size_t>(res.wall_vertices[i])].z();
      if (z > 0.2 * length && z < 0.8 * length) {
        sum += res.wss_mag[0][i];
        ++n;
      }
    }
    return sum / static_cast<double>(n);
  };
  const double e1 = (wall_mean(kDefaultPipeResolution) - tau) / tau;
  const double e2 = (wall_mean(kDefaultPipeResolution + 1) - tau) / tau;
  o.require(std::abs(e1) <= 0.05, fmt("WSS %+.2f%% at level %.0f", 100 * e1, kDefaultPipeResolution));
  const double order = std::log2(std::abs(e1) / std::abs(e2));
  o.require(order >= 1.0, fmt("refined %+.2f%%, order %.2f", 100 * e2, order));

  const auto mesh = generate_pipe_mesh(radius, length, kDefaultPipeResolution);
  const auto f = poiseuille_power_law(mesh, dp, law(3.5e-3, 1.0));
  const double q = flux_through_plane(f.frames[0], mesh, Plane{Vec3(0, 0, length / 2), Vec3::UnitZ()});
  const auto res = compute_hemodynamics(mesh, f, ViscosityModel::newtonian("N3.5", 3.5e-3));
  const double el = compensated_sum(res.el_rate[0]) * 1e-6;
  const double e3 = (el - q * dp) / (q * dp);
  o.require(std::abs(e3) <= 0.10, fmt("Newtonian E_L vs Q dP %+.2f%%", 100 * e3));
  return o;
}

Outcome osi_properties() {
  Outcome o;
  const std::vector<double> t4{0.0, 0.25, 0.5, 0.75};
  const Vec3 v(0.4, -0.3, 1.2);
  const double steady = oscillatory_shear_index({{v}, {v}, {v}, {v}}, t4, 1.0)[0];
  const double rev = oscillatory_shear_index({{v}, {v}, {-v}, {-v}}, t4, 1.0)[0];
  o.require(std::abs(steady) < 1e-12, fmt("steady %.1e", steady));
  o.require(std::abs(rev - 0.5) < 1e-12, fmt("reversing %.15f", rev));
  oracle::Gen gen(55);
  bool bounded = true;
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto r = [&] {
      const auto a = gen.vec(-1, 1);
      return Vec3(a[0], a[1], a[2]);
    };
    const Vec3 a0 = r(), a1 = r(), a2 = r();
    const double p1 = gen.uniform(0, 2 * kPi), p2 = gen.uniform(0, 2 * kPi);
    const auto wss = [&](double tt) {
      return Vec3(a0 + a1 * std::cos(2 * kPi * tt + p1) + a2 * std::cos(4 * kPi * tt + p2));
    };
    const int frames = gen.integer(2, 30);
    std::vector<std::vector<Vec3>> s;
    std::vector<double> ft;
    for (int f = 0; f < frames; ++f) {
      ft.push_back(static_cast<double>(f) / frames);
      s.push_back({wss(ft.back())});
    }
    const double osi = oscillatory_shear_index(s, ft, 1.0)[0];
    bounded = bounded && osi >= 0.0 && osi <= 0.5;
    if (t < 50) {
      std::vector<std::vector<Vec3>> fine;
      std::vector<double> fft;
      for (int f = 0; f < 8 * 16; ++f) {
        fft.push_back(f / 128.0);
        fine.push_back({wss(fft.back())});
      }
      worst = std::max(worst, std::abs(oscillatory_shear_index(fine, fft, 1.0)[0] - oracle::dense_osi(wss, 1.0)));
    }
  }
  o.require(bounded, "1000 random series in [0, 0.5]");
  o.require(worst < 1e-3, fmt("dense-quadrature agreement %.1e", worst));
  return o;
}

Outcome mri_round_trip() {
  Outcome o;
  const auto st = sequence_timings(SequenceParams{});
  o.require(std::abs(st.te - 1.66e-3) <= 0.05e-3, fmt("TE %.4f ms", st.te * 1e3));

  SequenceParams p;
  p.matrix = {28, 16, 56};
  p.venc = 1.5;
  p.cardiac_phases = 1;
  // 8 x 8 x 40 mm box whose faces lie on voxel boundaries
  const Vec3 lo(-0.005, -0.005, -0.021), hi(0.003, 0.003, 0.019);
  const auto mesh = generate_box_mesh(lo, hi, {4, 4, 20});
  const std::vector<double> m0(mesh.vertices.size(), 1.0);
  auto encode_all = [&](const Vec3& u, std::array<KSpaceData, 4>& k) {
    const std::vector<Vec3> field(mesh.vertices.size(), u);
    for (auto e : kAllEncodes)
      k[static_cast<size_t>(e)] = synthesize_signal(mesh, m0, field, p, e);
  };
  auto decode = [&](const std::array<KSpaceData, 4>& k) {
    std::array<ImageVolume, 4> img;
    for (size_t e = 0; e < 4; ++e)
      img[e] = reconstruct(k[e], p.matrix[0]);
    return phase_to_velocity(img[0], img[1], img[2], img[3], p.venc);
  };
  std::array<KSpaceData, 4> k;
  const Vec3 u(0.6, -0.45, 1.2);
  encode_all(u, k);
  const auto clean = reconstruct(k[0], p.matrix[0]);
  const auto& g = clean.geometry;
  std::vector<char> inside(g.voxel_count(), 0);
  for (int kk = 0; kk < g.dims[2]; ++kk)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i) {
        const Vec3 c = g.position(i, j, kk);
        double f = 1.0;
        for (int a = 0; a < 3; ++a)
          f *= oracle::overlap(c[a] - g.spacing[a] / 2, c[a] + g.spacing[a] / 2, lo[a], hi[a]) / g.spacing[a];
        inside[g.index(i, j, kk)] = f > 1.0 - 1e-9;
      }
  const auto dec = decode(k);
  double err = 0.0;
  for (size_t v = 0; v < inside.size(); ++v)
    if (inside[v])
      err = std::max(err, (dec.velocity[v] - u).cwiseAbs().maxCoeff());
  o.require(err < 1e-3 * p.venc, fmt("uniform round trip %.1e VENC", err / p.venc));

  std::array<KSpaceData, 4> w;
  encode_all(Vec3(1.1 * p.venc, 0, 0), w);
  const auto dw = decode(w);
  double wrap = 0.0;
  for (size_t v = 0; v < inside.size(); ++v)
    if (inside[v])
      wrap = std::max(wrap, std::abs(dw.velocity[v].x() + 0.9 * p.venc));
  o.require(wrap < 1e-3 * p.venc, fmt("1.1 VENC decodes within %.1e VENC of -0.9 VENC", wrap / p.venc));

  // SNR of the static box; moving spins would shift it off the mask
  const std::vector<Vec3> still(mesh.vertices.size(), Vec3::Zero());
  const auto ks = synthesize_signal(mesh, m0, still, p, Encode::Reference);
  auto noisy = ks;
  add_noise(noisy, 0.052, 1);
  const double snr = measure_snr(reconstruct(ks, p.matrix[0]), reconstruct(noisy, p.matrix[0]), inside);
  o.require(std::abs(snr - 13.5) <= 1.35, fmt("SNR %.2f", snr));
  return o;
}

Outcome windkessel_checks() {
  Outcome o;
  auto decay = [](double dt) {
    const WindkesselParams p{1.0, 0.5, 2.0, 1.0};
    FlowWaveform q;
    q.times = {0.0};
    q.values = {0.0};
    q.period = 1.0;
    q.kind = WaveformKind::Volumetric;
    return std::abs(simulate_windkessel(p, q, dt, 1).p_d.back() - std::exp(-1.0));
  };
  const double e = decay(1e-3) / std::exp(-1.0);
  o.require(e < 1e-8, fmt("decay error %.1e at tau/1000", e));
  const double order = std::log2(decay(1.0 / 16) / decay(1.0 / 32));
  o.require(std::abs(order - 4.0) <= 0.2, fmt("order %.3f", order));

  const WindkesselParams table{274.0, 5675.0, 5.08e-4, 107325.0};
  auto q = approximate_aortic_inflow();
  q.kind = WaveformKind::Volumetric;
  const auto periodic = scale_flow_to_periodic_start(q, table, 1e-3);
  const double drift = cycle_to_cycle_change(simulate_windkessel_full(table, periodic, 1e-3, 5), 5);
  o.require(drift < 1e-3, fmt("5-cycle drift %.1e (periodic start)", drift));
  const auto mean = scale_flow_to_distal_pressure(q, table);
  const double mdrift = cycle_to_cycle_change(simulate_windkessel_full(table, mean, 1e-3, 5), 5);
  o.detail += fmt("; mean-pressure scaling drift %.2f%% (informative)", 100 * mdrift);
  return o;
}

Outcome model_difference() {
  Outcome o;
  const double radius = 0.01, length = 0.05, rate = 10.0;
  const auto pl = fit_for_hct(reference_base_curves(), 70.0, reference_shear_rates());
  // pressure drop that puts the wall shear rate at 10 1/s
  const double dp = 2 * length * pl.m * std::pow(rate, pl.n) / radius;
  const auto mesh = generate_pipe_mesh(radius, length, kDefaultPipeResolution);
  const auto field = poiseuille_power_law(mesh, dp, pl);
  const auto grads = recover_gradients(mesh, field);
  const auto vol = nodal_volumes(mesh);
  const auto mpl = ViscosityModel::power_law("PL", pl);
  const auto mn = ViscosityModel::newtonian("N3.5", 3.5e-3);
  const auto rp = compute_hemodynamics(mesh, field, grads, vol, mpl);
  const auto rn = compute_hemodynamics(mesh, field, grads, vol, mn);
  double worst = 0.0;
  for (size_t i = 0; i < rp.wall_vertices.size(); ++i) {
    const double ratio = mpl(shear_rate(grads[0][static_cast<size_t>(rp.wall_vertices[i])])) / 3.5e-3;
    if (rn.wss_mag[0][i] > 0.0)
      worst = std::max(worst, std::abs(rp.wss_mag[0][i] / rn.wss_mag[0][i] / ratio - 1.0));
  }
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    const double ratio = mpl(shear_rate(grads[0][v])) / 3.5e-3;
    if (rn.el_rate[0][v] > 0.0)
      worst = std::max(worst, std::abs(rp.el_rate[0][v] / rn.el_rate[0][v] / ratio - 1.0));
  }
  o.require(worst < 1e-6, fmt("per-vertex ratio deviation %.1e", worst));

  // uniform shear 10 1/s: the segment comparison reduces to the closed form
  VelocityField shear;
  shear.frame_times = {0.0};
  shear.frames.emplace_back();
  for (const auto& x : mesh.vertices)
    shear.frames[0].emplace_back(0.0, 0.0, rate * (x.x() + radius));
  const SegmentLabels one{std::vector<Segment>(mesh.vertices.size(), Segment::AAo), 1};
  const auto rows = compare_models(segment_stats(compute_hemodynamics(mesh, shear, mpl), one),
                                   segment_stats(compute_hemodynamics(mesh, shear, mn), one));
  const double expected = (3.5e-3 / mpl(rate) - 1.0) * 100.0;
  bool sign = true;
  double dev = 0.0;
  for (const auto& r : rows)
    if (r.segment == "AAo" && r.param == "wss" && r.relative_percent) {
      dev = std::abs(*r.relative_percent - expected);
      sign = sign && *r.relative_percent < 0.0 && *r.absolute < 0.0;
    }
  o.require(dev < 1e-6 * std::abs(expected), fmt("Newtonian vs power law WSS %+.2f%% (closed form %+.2f%%)",
                                                 expected + dev, expected));
  o.require(sign, "smaller Newtonian stress reported negative");
  return o;
}

Outcome determinism() {
  Outcome o;
  const auto dir = fs::temp_directory_path() / "hemoflow_acceptance_runs";
  fs::remove_all(dir);
  const auto config = load_config(fs::path(HEMOFLOW_DATA_DIR) / "pipe_demo.ini");
  run_pipeline(config, dir / "a");
  run_pipeline(config, dir / "b");
  size_t files = 0;
  bool same = true;
  for (const auto& e : fs::directory_iterator(dir / "a" / "stats")) {
    ++files;
    same = same && slurp(e.path()) == slurp(dir / "b" / "stats" / e.path().filename());
  }
  o.require(files > 0 && same, fmt("%.0f stats CSVs bit-identical across two runs", static_cast<double>(files)));
  fs::remove_all(dir);
  return o;
}

} // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"Newtonian-equivalent viscosities", newtonian_equivalents},
      {"power-law fit round trip", fit_round_trip},
      {"pipe-flow oracle", pipe_oracle},
      {"OSI properties", osi_properties},
      {"MRI round trip", mri_round_trip},
      {"Windkessel", windkessel_checks},
      {"model-difference property", model_difference},
      {"determinism", determinism},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu %s: %s (%.2f s) %s\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", secs,
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
