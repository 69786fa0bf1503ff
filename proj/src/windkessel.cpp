// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hemoflow/windkessel.hpp"

#include "hemoflow/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>

namespace hemoflow {

void WindkesselParams::validate() const {
  require(rp > 0.0 && rd > 0.0 && c > 0.0, ErrorKind::InvalidArgument, "Windkessel Rp, Rd and C must be positive");
  require(std::isfinite(p_d0), ErrorKind::InvalidArgument, "initial distal pressure must be finite");
}

PressureTrace simulate_windkessel_full(const WindkesselParams& params, const FlowWaveform& q, double dt, int cycles) {
  params.validate();
  q.validate();
  require(dt > 0.0, ErrorKind::InvalidArgument, "time step must be positive");
  require(cycles >= 1, ErrorKind::InvalidArgument, "need at least one cycle");
  const auto steps = static_cast<long>(std::ceil(q.period / dt - 1e-9));
  const double h = q.period / static_cast<double>(steps);
  const double inv_rd = 1.0 / params.rd, inv_c = 1.0 / params.c;
  auto rhs = [&](double t, double p) { return (q.value_at(t) - p * inv_rd) * inv_c; };

  PressureTrace tr;
  const auto total = steps * cycles;
  tr.times.reserve(static_cast<size_t>(total + 1));
  double p = params.p_d0;
  for (long i = 0;; ++i) {
    const double t = static_cast<double>(i) * h;
    const double qt = q.value_at(t);
    tr.times.push_back(t);
    tr.p_d.push_back(p);
    tr.q.push_back(qt);
    tr.p_wk.push_back(params.rp * qt + p);
    if (i == total)
      break;
    const double k1 = rhs(t, p);
    const double k2 = rhs(t + 0.5 * h, p + 0.5 * h * k1);
    const double k3 = rhs(t + 0.5 * h, p + 0.5 * h * k2);
    const double k4 = rhs(t + h, p + h * k3);
    p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return tr;
}

PressureTrace simulate_windkessel(const WindkesselParams& params, const FlowWaveform& q, double dt, int cycles) {
  auto full = simulate_windkessel_full(params, q, dt, cycles);
  const size_t per_cycle = (full.times.size() - 1) / static_cast<size_t>(cycles);
  const size_t first = full.times.size() - 1 - per_cycle;
  PressureTrace last;
  auto tail = [&](const std::vector<double>& v) { return std::vector<double>(v.begin() + static_cast<long>(first), v.end()); };
  last.times = tail(full.times);
  last.p_wk = tail(full.p_wk);
  last.p_d = tail(full.p_d);
  last.q = tail(full.q);
  return last;
}

double cycle_to_cycle_change(const PressureTrace& full, int cycles) {
  require(cycles >= 2, ErrorKind::InvalidArgument, "need two cycles to compare");
  const size_t per_cycle = (full.times.size() - 1) / static_cast<size_t>(cycles);
  const size_t last = full.times.size() - 1 - per_cycle;
  const size_t prev = last - per_cycle;
  double diff = 0.0, scale = 0.0;
  for (size_t i = 0; i <= per_cycle; ++i) {
    diff = std::max(diff, std::abs(full.p_wk[last + i] - full.p_wk[prev + i]));
    scale = std::max(scale, std::abs(full.p_wk[last + i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

double waveform_mean(const FlowWaveform& w) {
  w.validate();
  if (w.times.size() == 1)
    return w.values.front();
  CompensatedSum s;
  const size_t n = w.times.size();
  for (size_t i = 0; i < n; ++i) {
    const double t1 = i + 1 < n ? w.times[i + 1] : w.times.front() + w.period;
    const double v1 = i + 1 < n ? w.values[i + 1] : w.values.front();
    s.add(0.5 * (w.values[i] + v1) * (t1 - w.times[i]));
  }
  return s.value() / w.period;
}

FlowWaveform scale_flow_to_distal_pressure(const FlowWaveform& q, const WindkesselParams& params) {
  params.validate();
  const double mean = waveform_mean(q);
  require(mean != 0.0, ErrorKind::InvalidArgument, "cannot rescale a zero-mean flow waveform");
  FlowWaveform out = q;
  const double factor = params.p_d0 / (params.rd * mean);
  for (auto& v : out.values)
    v *= factor;
  out.kind = WaveformKind::Volumetric;
  return out;
}

double periodic_start_pressure(const WindkesselParams& params, const FlowWaveform& q, double dt) {
  WindkesselParams decay = params;
  decay.p_d0 = 1.0;
  FlowWaveform zero = q;
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  const double a = simulate_windkessel(decay, zero, dt, 1).p_d.back();
  WindkesselParams forced = params;
  forced.p_d0 = 0.0;
  const double b = simulate_windkessel(forced, q, dt, 1).p_d.back();
  return b / (1.0 - a);
}

FlowWaveform scale_flow_to_periodic_start(const FlowWaveform& q, const WindkesselParams& params, double dt) {
  const double p_star = periodic_start_pressure(params, q, dt);
  require(p_star != 0.0 && std::isfinite(p_star), ErrorKind::InvalidArgument,
          "flow waveform yields a zero periodic start pressure");
  FlowWaveform out = q;
  for (auto& v : out.values)
    v *= params.p_d0 / p_star;
  out.kind = WaveformKind::Volumetric;
  return out;
}

void write_pressure_csv(const std::filesystem::path& path, const PressureTrace& trace) {
  auto out = detail::open_output(path);
  out << "t,p_wk,p_d\n";
  for (size_t i = 0; i < trace.times.size(); ++i)
    out << detail::format_double(trace.times[i]) << ',' << detail::format_double(trace.p_wk[i]) << ','
        << detail::format_double(trace.p_d[i]) << '\n';
}

} // namespace hemoflow
