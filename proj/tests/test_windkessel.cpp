// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hemoflow/error.hpp"
#include "hemoflow/windkessel.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

using namespace hemoflow;

namespace {

FlowWaveform constant_flow(double value, double period) {
  FlowWaveform q;
  q.times = {0.0};
  q.values = {value};
  q.period = period;
  q.kind = WaveformKind::Volumetric;
  return q;
}

// Smooth pulsatile flow with a positive mean.
FlowWaveform pulsatile_flow(double period, int samples = 64) {
  FlowWaveform q;
  q.period = period;
  q.kind = WaveformKind::Volumetric;
  for (int i = 0; i < samples; ++i) {
    const double t = period * i / samples;
    q.times.push_back(t);
    q.values.push_back(60.0 + 250.0 * std::exp(-std::pow((t - 0.15) / 0.06, 2)));
  }
  return q;
}

double decay_error(double tau, double dt) {
  const WindkesselParams p{1.0, tau / 2.0, 2.0, 1.0};
  const auto trace = simulate_windkessel(p, constant_flow(0.0, tau), dt, 1);
  return std::abs(trace.p_d.back() - std::exp(-1.0));
}

} // namespace

TEST_CASE("constant inflow reaches the steady state") {
  const WindkesselParams p{0.5, 2.0, 0.25, 0.0}; // tau = 0.5 s
  const auto trace = simulate_windkessel(p, constant_flow(3.0, 2.5), 1e-3, 1);
  CHECK(trace.p_d.back() == doctest::Approx(6.0).epsilon(1e-2));
  CHECK(trace.p_wk.back() == doctest::Approx(7.5).epsilon(1e-2));
  const auto start_at_steady = simulate_windkessel({0.5, 2.0, 0.25, 6.0}, constant_flow(3.0, 1.0), 1e-3, 2);
  for (double v : start_at_steady.p_d)
    CHECK(v == doctest::Approx(6.0).epsilon(1e-13));
  for (double v : start_at_steady.p_wk)
    CHECK(v == doctest::Approx(7.5).epsilon(1e-13));
}

TEST_CASE("exponential decay accuracy and order") {
  const double tau = 1.0;
  CHECK(decay_error(tau, tau / 1000.0) / std::exp(-1.0) < 1e-8);
  const double e1 = decay_error(tau, tau / 8.0);
  const double e2 = decay_error(tau, tau / 16.0);
  const double e3 = decay_error(tau, tau / 32.0);
  CHECK(std::log2(e1 / e2) == doctest::Approx(4.0).epsilon(0.05));
  CHECK(std::log2(e2 / e3) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("the step is shortened to divide the period") {
  const WindkesselParams p{1.0, 1.0, 1.0, 1.0};
  const auto trace = simulate_windkessel(p, constant_flow(0.0, 1.0), 0.3, 1);
  // ceil(1 / 0.3) = 4 steps, both cycle ends included
  REQUIRE(trace.times.size() == 5);
  CHECK(trace.times.front() == 0.0);
  CHECK(trace.times.back() == doctest::Approx(1.0));
}

TEST_CASE("linearity in the flow") {
  const WindkesselParams p{274.0, 5675.0, 5.08e-4, 0.0};
  auto q = pulsatile_flow(0.937);
  const auto a = simulate_windkessel(p, q, 1e-3, 3);
  for (auto& v : q.values)
    v *= 2.0;
  const auto b = simulate_windkessel(p, q, 1e-3, 3);
  REQUIRE(a.p_wk.size() == b.p_wk.size());
  for (size_t i = 0; i < a.p_wk.size(); ++i) {
    CHECK(b.p_wk[i] == doctest::Approx(2.0 * a.p_wk[i]).epsilon(1e-12));
    CHECK(b.p_d[i] == doctest::Approx(2.0 * a.p_d[i]).epsilon(1e-12));
  }
}

TEST_CASE("periodic state forgets the initial pressure") {
  const auto q = pulsatile_flow(0.937);
  // tau = 0.5 s; the transient is gone after 10 cycles of 0.937 s
  const WindkesselParams lo{274.0, 2500.0, 2e-4, 60000.0};
  const WindkesselParams hi{274.0, 2500.0, 2e-4, 140000.0};
  const int cycles = 10;
  const auto a = simulate_windkessel(lo, q, 1e-3, cycles);
  const auto b = simulate_windkessel(hi, q, 1e-3, cycles);
  double worst = 0.0;
  for (size_t i = 0; i < a.p_wk.size(); ++i)
    worst = std::max(worst, std::abs(a.p_wk[i] - b.p_wk[i]) / std::abs(b.p_wk[i]));
  CHECK(worst < 1e-3);
}

TEST_CASE("property: random outlets and flows stay finite and converge") {
  oracle::Gen gen(31);
  for (int trial = 0; trial < 20; ++trial) {
    const WindkesselParams p{gen.uniform(10, 500), gen.uniform(500, 8000), gen.uniform(1e-5, 1e-3), gen.uniform(0, 1e5)};
    FlowWaveform q;
    q.period = gen.uniform(0.5, 1.2);
    q.kind = WaveformKind::Volumetric;
    const int n = gen.integer(2, 40);
    for (int i = 0; i < n; ++i) {
      q.times.push_back(q.period * i / n);
      q.values.push_back(gen.uniform(0.0, 400.0));
    }
    const double dt = 1e-3;
    // on the periodic orbit the next cycle starts where this one did
    const double start = periodic_start_pressure(p, q, dt);
    const auto t = simulate_windkessel({p.rp, p.rd, p.c, start}, q, dt, 1);
    CHECK(t.p_d.back() == doctest::Approx(start).epsilon(1e-10));
    for (double v : t.p_wk)
      CHECK(std::isfinite(v));
  }
}

TEST_CASE("flow scaling helpers") {
  const WindkesselParams p{274.0, 5675.0, 5.08e-4, 107325.0};
  const auto q = pulsatile_flow(0.937);
  SUBCASE("mean scaling") {
    const auto s = scale_flow_to_distal_pressure(q, p);
    CHECK(waveform_mean(s) * p.rd == doctest::Approx(p.p_d0).epsilon(1e-12));
  }
  SUBCASE("periodic start scaling") {
    const auto s = scale_flow_to_periodic_start(q, p, 1e-3);
    CHECK(periodic_start_pressure(p, s, 1e-3) == doctest::Approx(p.p_d0).epsilon(1e-12));
    const auto full = simulate_windkessel_full(p, s, 1e-3, 5);
    CHECK(cycle_to_cycle_change(full, 5) < 1e-10);
  }
  SUBCASE("mean of a sampled waveform") {
    FlowWaveform tri;
    tri.times = {0.0, 0.5};
    tri.values = {0.0, 2.0};
    tri.period = 1.0;
    CHECK(waveform_mean(tri) == doctest::Approx(1.0));
  }
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(simulate_windkessel({-1.0, 1.0, 1.0, 0.0}, constant_flow(1.0, 1.0), 1e-3, 1), Error);
  CHECK_THROWS_AS(simulate_windkessel({1.0, 1.0, 1.0, 0.0}, constant_flow(1.0, 1.0), 0.0, 1), Error);
  CHECK_THROWS_AS(simulate_windkessel({1.0, 1.0, 1.0, 0.0}, constant_flow(1.0, 1.0), 1e-3, 0), Error);
}

TEST_CASE("pressure CSV") {
  const auto dir = oracle::scratch_dir("wk_csv");
  const auto t = simulate_windkessel({1.0, 2.0, 0.5, 1.0}, constant_flow(1.0, 1.0), 0.25, 1);
  write_pressure_csv(dir / "p.csv", t);
  std::ifstream in(dir / "p.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "t,p_wk,p_d");
  CHECK(first.rfind("0,", 0) == 0);
}
