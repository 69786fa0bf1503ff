// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hemoflow/rheology.hpp"

#include "hemoflow/error.hpp"
#include "text_util.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace hemoflow {

namespace {

struct FitState {
  double log_m;
  double n;
};

double weighted_cost(std::span<const ViscositySample> s, std::span<const double> w, const FitState& st) {
  double c = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    const double r = s[i].viscosity - std::exp(st.log_m + (st.n - 1.0) * std::log(s[i].shear_rate));
    c += w[i] * r * r;
  }
  return c;
}

FitState loglog_start(std::span<const ViscositySample> s, std::span<const double> w) {
  double sw = 0, sx = 0, sy = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    sw += w[i];
    sx += w[i] * std::log(s[i].shear_rate);
    sy += w[i] * std::log(s[i].viscosity);
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    const double dx = std::log(s[i].shear_rate) - mx;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * (std::log(s[i].viscosity) - my);
  }
  const double slope = sxy / sxx;
  return {my - slope * mx, 1.0 + slope};
}

} // namespace

std::vector<double> spacing_weights(std::span<const double> shear_rates) {
  const size_t n = shear_rates.size();
  std::vector<double> w(n, 0.0);
  if (n == 0)
    return w;
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return shear_rates[a] < shear_rates[b]; });
  for (size_t k = 0; k < n; ++k) {
    const double lo = shear_rates[order[k == 0 ? 0 : k - 1]];
    const double hi = shear_rates[order[k + 1 == n ? n - 1 : k + 1]];
    w[order[k]] = 0.5 * (hi - lo);
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  require(total > 0.0, ErrorKind::InvalidArgument, "spacing weights: shear rates are all equal");
  for (double& x : w)
    x /= total;
  return w;
}

PowerLawParams fit_power_law(std::span<const ViscositySample> samples, std::span<const double> weights) {
  if (samples.size() < 3)
    fail(ErrorKind::InsufficientData,
         "power-law fit needs at least 3 samples, got " + std::to_string(samples.size()));
  const double hct = samples.front().hct;
  std::vector<double> rates;
  rates.reserve(samples.size());
  for (const auto& s : samples) {
    require(std::abs(s.hct - hct) <= 1e-9 * std::max(1.0, std::abs(hct)), ErrorKind::InvalidArgument,
            "power-law fit: samples span more than one hematocrit");
    require(s.shear_rate > 0.0 && std::isfinite(s.shear_rate), ErrorKind::InvalidArgument,
            "power-law fit: shear rates must be positive");
    require(s.viscosity > 0.0 && std::isfinite(s.viscosity), ErrorKind::InvalidArgument,
            "power-law fit: viscosities must be positive");
    rates.push_back(s.shear_rate);
  }
  const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
  require(*hi > *lo, ErrorKind::InvalidArgument, "power-law fit: shear rates are all equal");

  std::vector<double> w;
  if (weights.empty()) {
    w = spacing_weights(rates);
  } else {
    require(weights.size() == samples.size(), ErrorKind::InvalidArgument,
            "power-law fit: weight count does not match sample count");
    w.assign(weights.begin(), weights.end());
    double total = 0.0;
    for (double x : w) {
      require(x >= 0.0 && std::isfinite(x), ErrorKind::InvalidArgument,
              "power-law fit: weights must be non-negative");
      total += x;
    }
    require(total > 0.0, ErrorKind::InvalidArgument, "power-law fit: weights sum to zero");
    for (double& x : w)
      x /= total;
  }

  // Levenberg-Marquardt on (log m, n); residuals stay in linear viscosity space.
  FitState st = loglog_start(samples, w);
  double cost = weighted_cost(samples, w, st);
  double lambda = 1e-3;
  bool converged = false;
  constexpr int kMaxIter = 200;
  for (int it = 0; it < kMaxIter && !converged; ++it) {
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (size_t i = 0; i < samples.size(); ++i) {
      const double lg = std::log(samples[i].shear_rate);
      const double f = std::exp(st.log_m + (st.n - 1.0) * lg);
      const Eigen::Vector2d j(f, f * lg);
      const double r = samples[i].viscosity - f;
      h += w[i] * j * j.transpose();
      g += w[i] * j * r;
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::Matrix2d a = h;
      a.diagonal() *= (1.0 + lambda);
      const Eigen::Vector2d step = a.ldlt().solve(g);
      if (!step.allFinite())
        break;
      const FitState trial{st.log_m + step(0), st.n + step(1)};
      const double trial_cost = weighted_cost(samples, w, trial);
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        const double rel = step.norm() / (1.0 + std::abs(st.log_m) + std::abs(st.n));
        st = trial;
        cost = trial_cost;
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        if (rel < 1e-13)
          converged = true;
        break;
      }
      lambda *= 10.0;
    }
    // No descent direction left: at the minimum to machine precision.
    if (!accepted)
      converged = true;
  }

  const double m = std::exp(st.log_m);
  if (!converged || !std::isfinite(m) || !std::isfinite(st.n) || m <= 0.0) {
    std::ostringstream msg;
    msg << "power-law fit did not converge (m=" << m << ", n=" << st.n << ", weighted SSE=" << cost << ")";
    fail(ErrorKind::FitFailure, msg.str());
  }

  double mean = 0.0;
  for (const auto& s : samples)
    mean += s.viscosity;
  mean /= static_cast<double>(samples.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& s : samples) {
    const double r = s.viscosity - m * std::pow(s.shear_rate, st.n - 1.0);
    ss_res += r * r;
    ss_tot += (s.viscosity - mean) * (s.viscosity - mean);
  }
  PowerLawParams out;
  out.m = m;
  out.n = st.n;
  out.hct = hct;
  out.fit_rmse = std::sqrt(ss_res / static_cast<double>(samples.size()));
  out.fit_r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res <= 1e-30 ? 1.0 : 0.0);
  return out;
}

std::vector<ViscositySample> interpolate_hct(std::span<const PowerLawParams> curves, double target_hct,
                                             std::span<const double> shear_rates) {
  require(!curves.empty(), ErrorKind::InsufficientData, "interpolate_hct: no base curves");
  for (size_t i = 1; i < curves.size(); ++i)
    require(curves[i].hct > curves[i - 1].hct, ErrorKind::InvalidArgument,
            "interpolate_hct: curves must be sorted by strictly increasing hct");
  const double lo = curves.front().hct, hi = curves.back().hct;
  if (!(target_hct >= lo && target_hct <= hi)) {
    std::ostringstream msg;
    msg << "interpolate_hct: target hct " << target_hct << " outside [" << lo << ", " << hi << "]";
    fail(ErrorKind::Extrapolation, msg.str());
  }
  for (double g : shear_rates)
    require(g > 0.0, ErrorKind::InvalidArgument, "interpolate_hct: shear rates must be positive");

  size_t k = 0;
  while (k + 1 < curves.size() && curves[k + 1].hct <= target_hct)
    ++k;
  std::vector<ViscositySample> out;
  out.reserve(shear_rates.size());
  for (double g : shear_rates) {
    double mu;
    if (target_hct == curves[k].hct) {
      mu = curves[k].m * std::pow(g, curves[k].n - 1.0);
    } else {
      const auto& a = curves[k];
      const auto& b = curves[k + 1];
      const double t = (target_hct - a.hct) / (b.hct - a.hct);
      mu = (1.0 - t) * a.m * std::pow(g, a.n - 1.0) + t * b.m * std::pow(g, b.n - 1.0);
    }
    out.push_back({g, mu, target_hct});
  }
  return out;
}

PowerLawParams fit_for_hct(std::span<const PowerLawParams> base_curves, double target_hct,
                           std::span<const double> shear_rates) {
  const auto samples = interpolate_hct(base_curves, target_hct, shear_rates);
  return fit_power_law(samples);
}

NewtonianFit newtonian_equivalent(const PowerLawParams& pl, double gamma0, double gamma1) {
  if (!(gamma1 > gamma0) || !(gamma0 >= 0.0)) {
    std::ostringstream msg;
    msg << "newtonian_equivalent: need gamma1 > gamma0 >= 0, got [" << gamma0 << ", " << gamma1 << "]";
    fail(ErrorKind::InvalidRange, msg.str());
  }
  require(pl.m > 0.0 && pl.n > 0.0, ErrorKind::InvalidArgument,
          "newtonian_equivalent: power-law parameters must be positive");
  NewtonianFit f;
  f.hct = pl.hct;
  f.gamma0 = gamma0;
  f.gamma1 = gamma1;
  if (pl.n == 1.0)
    f.mu = pl.m;
  else
    f.mu = pl.m * (std::pow(gamma1, pl.n) - std::pow(gamma0, pl.n)) / (pl.n * (gamma1 - gamma0));
  return f;
}

double apparent_viscosity(const PowerLawParams& pl, double shear_rate, double shear_rate_floor) {
  if (pl.n == 1.0)
    return pl.m;
  return pl.m * std::pow(std::max(shear_rate, shear_rate_floor), pl.n - 1.0);
}

std::vector<PowerLawParams> reference_base_curves() {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  return {
      {0.69e-2, 0.71, 20.0, nan, nan}, {1.73e-2, 0.63, 32.5, nan, nan}, {2.42e-2, 0.72, 45.0, nan, nan},
      {4.19e-2, 0.64, 57.5, nan, nan}, {5.40e-2, 0.63, 70.0, nan, nan},
  };
}

std::vector<double> reference_shear_rates() {
  constexpr int kCount = 10;
  constexpr double lo = 12.0, hi = 123.0;
  std::vector<double> g(kCount);
  for (int i = 0; i < kCount; ++i)
    g[static_cast<size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (kCount - 1));
  g.back() = hi;
  return g;
}

std::vector<double> literature_newtonian_viscosities() { return {3.0e-3, 3.5e-3, 4.0e-3, 4.5e-3}; }

ViscosityModel ViscosityModel::newtonian(std::string name, double mu) {
  require(mu > 0.0 && std::isfinite(mu), ErrorKind::InvalidArgument, "Newtonian viscosity must be positive");
  ViscosityModel v;
  v.name_ = std::move(name);
  v.is_newtonian_ = true;
  v.mu_ = mu;
  return v;
}

ViscosityModel ViscosityModel::power_law(std::string name, const PowerLawParams& pl, double shear_rate_floor) {
  require(pl.m > 0.0 && pl.n > 0.0, ErrorKind::InvalidArgument, "power-law parameters must be positive");
  require(shear_rate_floor > 0.0, ErrorKind::InvalidArgument, "shear-rate floor must be positive");
  ViscosityModel v;
  v.name_ = std::move(name);
  v.is_newtonian_ = false;
  v.pl_ = pl;
  v.floor_ = shear_rate_floor;
  return v;
}

ViscosityModel ViscosityModel::scaled(double factor) const {
  ViscosityModel v = *this;
  v.mu_ *= factor;
  v.pl_.m *= factor;
  return v;
}

std::string ViscosityModel::describe() const {
  std::ostringstream s;
  if (is_newtonian_)
    s << "newtonian(mu=" << detail::format_double(mu_) << ")";
  else
    s << "power_law(m=" << detail::format_double(pl_.m) << ", n=" << detail::format_double(pl_.n)
      << ", hct=" << detail::format_double(pl_.hct) << ", floor=" << detail::format_double(floor_) << ")";
  return s.str();
}

std::vector<ViscositySample> read_measurements_csv(const std::filesystem::path& path) {
  const auto table = detail::read_csv(path);
  const std::string ctx = path.string();
  const size_t cg = table.column("shear_rate", ctx), cm = table.column("viscosity", ctx),
               ch = table.column("hct", ctx);
  std::vector<ViscositySample> out;
  for (const auto& row : table.rows) {
    ViscositySample s{detail::parse_double(row[cg], ctx), detail::parse_double(row[cm], ctx),
                      detail::parse_double(row[ch], ctx)};
    require(s.shear_rate > 0.0 && s.viscosity > 0.0 && s.hct > 0.0 && s.hct < 100.0, ErrorKind::Validation,
            ctx + ": sample violates shear_rate > 0, viscosity > 0, 0 < hct < 100");
    out.push_back(s);
  }
  return out;
}

void write_measurements_csv(const std::filesystem::path& path, std::span<const ViscositySample> samples) {
  auto out = detail::open_output(path);
  out << "shear_rate,viscosity,hct\n";
  for (const auto& s : samples)
    out << detail::format_double(s.shear_rate) << ',' << detail::format_double(s.viscosity) << ','
        << detail::format_double(s.hct) << '\n';
}

std::vector<PowerLawParams> read_params_csv(const std::filesystem::path& path) {
  const auto table = detail::read_csv(path);
  const std::string ctx = path.string();
  const size_t ch = table.column("hct", ctx), cm = table.column("m", ctx), cn = table.column("n", ctx);
  std::vector<PowerLawParams> out;
  for (const auto& row : table.rows) {
    PowerLawParams p;
    p.hct = detail::parse_double(row[ch], ctx);
    p.m = detail::parse_double(row[cm], ctx);
    p.n = detail::parse_double(row[cn], ctx);
    p.fit_r2 = std::numeric_limits<double>::quiet_NaN();
    p.fit_rmse = std::numeric_limits<double>::quiet_NaN();
    for (size_t i = 0; i < table.header.size(); ++i) {
      if (table.header[i] == "r2")
        p.fit_r2 = detail::parse_double(row[i], ctx);
      if (table.header[i] == "rmse")
        p.fit_rmse = detail::parse_double(row[i], ctx);
    }
    require(p.m > 0.0 && p.n > 0.0, ErrorKind::Validation, ctx + ": m and n must be positive");
    out.push_back(p);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.hct < b.hct; });
  return out;
}

void write_params_csv(const std::filesystem::path& path, std::span<const PowerLawParams> params) {
  auto out = detail::open_output(path);
  out << "hct,m,n,r2,rmse\n";
  for (const auto& p : params)
    out << detail::format_double(p.hct) << ',' << detail::format_double(p.m) << ','
        << detail::format_double(p.n) << ',' << detail::format_double(p.fit_r2) << ','
        << detail::format_double(p.fit_rmse) << '\n';
}

} // namespace hemoflow
