// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HEMOFLOW_RHEOLOGY_HPP
#define HEMOFLOW_RHEOLOGY_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hemoflow {

inline constexpr double kDefaultShearRateFloor = 0.1; // 1/s

struct ViscositySample {
  double shear_rate = 0.0; // 1/s
  double viscosity = 0.0;  // Pa s
  double hct = 0.0;        // percent
};

/// Power-law rheology of one blood sample, mu = m * shear_rate^(n - 1).
struct PowerLawParams {
  double m = 0.0;   // consistency index, Pa s^n
  double n = 1.0;   // power-law index
  double hct = 0.0; // percent
  double fit_r2 = 1.0;
  double fit_rmse = 0.0; // Pa s
};

struct NewtonianFit {
  double mu = 0.0; // Pa s
  double hct = 0.0;
  double gamma0 = 0.0;
  double gamma1 = 0.0;
};

/// Weighted least-squares fit of (m, n) in linear viscosity space.
///
/// Samples must share one hematocrit. Empty `weights` selects the default
/// trapezoidal shear-rate spacing weights (see spacing_weights). The solve is
/// started from a log-log regression and refined by damped Gauss-Newton.
PowerLawParams fit_power_law(std::span<const ViscositySample> samples,
                             std::span<const double> weights = {});

/// Trapezoidal spacing weights for a set of shear rates, normalized to sum 1.
/// Clustered shear rates share their spacing so that dense regions of a
/// measurement series do not dominate the fit.
std::vector<double> spacing_weights(std::span<const double> shear_rates);

/// Synthetic samples at `target_hct`: each viscosity is the linear (in Hct)
/// blend of the two bracketing curves evaluated at the same shear rate.
/// Curves must be sorted by hct. Throws Extrapolation outside the curve range.
std::vector<ViscositySample> interpolate_hct(std::span<const PowerLawParams> curves,
                                             double target_hct,
                                             std::span<const double> shear_rates);

/// interpolate_hct followed by fit_power_law with default weights.
PowerLawParams fit_for_hct(std::span<const PowerLawParams> base_curves, double target_hct,
                           std::span<const double> shear_rates);

/// Newtonian viscosity preserving the mean power-law viscosity over
/// [gamma0, gamma1]: m (g1^n - g0^n) / (n (g1 - g0)).
NewtonianFit newtonian_equivalent(const PowerLawParams& pl, double gamma0, double gamma1);

double apparent_viscosity(const PowerLawParams& pl, double shear_rate,
                          double shear_rate_floor = kDefaultShearRateFloor);

/// Fitted rows for Hct {20, 32.5, 45, 57.5, 70} used as the shipped base curves.
std::vector<PowerLawParams> reference_base_curves();

/// Shear-rate grid of the base measurements (12 to 123 1/s, log spaced).
std::vector<double> reference_shear_rates();

/// Literature Newtonian viscosities, Pa s.
std::vector<double> literature_newtonian_viscosities();

/// A viscosity law evaluated per vertex by the hemodynamics module.
class ViscosityModel {
public:
  static ViscosityModel newtonian(std::string name, double mu);
  static ViscosityModel power_law(std::string name, const PowerLawParams& pl,
                                  double shear_rate_floor = kDefaultShearRateFloor);

  double operator()(double shear_rate) const {
    return is_newtonian_ ? mu_ : apparent_viscosity(pl_, shear_rate, floor_);
  }

  // Multiply the law by a constant (used for rescaling checks).
  ViscosityModel scaled(double factor) const;

  const std::string& name() const { return name_; }
  bool is_newtonian() const { return is_newtonian_; }
  double newtonian_mu() const { return mu_; }
  const PowerLawParams& power_law_params() const { return pl_; }
  double shear_rate_floor() const { return floor_; }
  std::string describe() const;

private:
  std::string name_;
  bool is_newtonian_ = true;
  double mu_ = 0.0;
  PowerLawParams pl_{};
  double floor_ = kDefaultShearRateFloor;
};

// CSV `shear_rate,viscosity,hct`
std::vector<ViscositySample> read_measurements_csv(const std::filesystem::path& path);
void write_measurements_csv(const std::filesystem::path& path, std::span<const ViscositySample> samples);
// CSV `hct,m,n,r2,rmse`
std::vector<PowerLawParams> read_params_csv(const std::filesystem::path& path);
void write_params_csv(const std::filesystem::path& path, std::span<const PowerLawParams> params);

} // namespace hemoflow

#endif
