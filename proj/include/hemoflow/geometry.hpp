// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HEMOFLOW_GEOMETRY_HPP
#define HEMOFLOW_GEOMETRY_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstddef>
#include <span>

namespace hemoflow {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Plane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ(); // not required to be unit length on input

  double signed_distance(const Vec3& x) const { return normal.normalized().dot(x - point); }
};

// Neumaier-compensated sum; used wherever totals are compared at 1e-12.
class CompensatedSum {
public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) {
  CompensatedSum s;
  for (double v : values)
    s.add(v);
  return s.value();
}

} // namespace hemoflow

#endif
