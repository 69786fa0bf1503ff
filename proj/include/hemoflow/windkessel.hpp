// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HEMOFLOW_WINDKESSEL_HPP
#define HEMOFLOW_WINDKESSEL_HPP

#include "hemoflow/flowfields.hpp"

#include <filesystem>
#include <vector>

namespace hemoflow {

/// Three-element Windkessel outlet. Units are whatever consistent system the
/// caller uses; the solver never converts them.
struct WindkesselParams {
  double rp = 0.0;   // proximal resistance
  double rd = 0.0;   // distal resistance
  double c = 0.0;    // capacitance
  double p_d0 = 0.0; // distal pressure at t = 0

  double time_constant() const { return rd * c; }
  void validate() const;
};

struct PressureTrace {
  std::vector<double> times; // s
  std::vector<double> p_wk;
  std::vector<double> p_d;
  std::vector<double> q;
};

/// Integrates C dp_d/dt + p_d/Rd = Q(t) with classic RK4, Q linearly
/// interpolated between waveform samples, and returns the last cycle
/// (both endpoints included). The step is shortened so that an integer
/// number of steps spans one period.
PressureTrace simulate_windkessel(const WindkesselParams& params, const FlowWaveform& q, double dt, int cycles);

/// Same integration, returning every step of every cycle.
PressureTrace simulate_windkessel_full(const WindkesselParams& params, const FlowWaveform& q, double dt, int cycles);

/// Largest cycle-to-cycle change of p_wk between the last two cycles of a
/// full trace, relative to the largest |p_wk| of the last cycle.
double cycle_to_cycle_change(const PressureTrace& full, int cycles);

/// Rescales a flow waveform so that its mean times Rd equals p_d0, i.e. the
/// periodic state oscillates about the configured distal pressure.
FlowWaveform scale_flow_to_distal_pressure(const FlowWaveform& q, const WindkesselParams& params);

/// Rescales a flow waveform so that the periodic solution of the discrete
/// integrator (step `dt`) starts each cycle at p_d0. The one-cycle map of the
/// linear ODE is p -> a p + b, so the periodic start is b / (1 - a).
FlowWaveform scale_flow_to_periodic_start(const FlowWaveform& q, const WindkesselParams& params, double dt);

/// Start-of-cycle distal pressure of the periodic solution for `q`.
double periodic_start_pressure(const WindkesselParams& params, const FlowWaveform& q, double dt);

/// Cycle mean of a periodic waveform (trapezoid rule over the closed period).
double waveform_mean(const FlowWaveform& w);

void write_pressure_csv(const std::filesystem::path& path, const PressureTrace& trace);

} // namespace hemoflow

#endif
