#pragma once

// Constant-velocity Kalman filter over boxes, state [cx, cy, s, r, vx, vy, vs]
// where s is the area and r = w / h. The aspect ratio carries no velocity.
// Used by the SORT baseline only.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "ibtrack/geometry.hpp"

namespace ibtrack {

using StateVector = Eigen::Matrix<double, 7, 1>;
using StateMatrix = Eigen::Matrix<double, 7, 7>;
using MeasVector = Eigen::Matrix<double, 4, 1>;
using MeasMatrix = Eigen::Matrix<double, 4, 4>;

/// Noise diagonals. Defaults follow the public SORT reference: R = diag(1,1,10,10),
/// P0 = diag(10,10,10,10,1e4,1e4,1e4), Q = diag(1,1,1,1,1e-2,1e-2,1e-4).
struct KalmanParams
{
  double init_position_var = 10.0;   // P0 for cx, cy, s, r
  double init_velocity_var = 1e4;    // P0 for vx, vy, vs
  double process_position_var = 1.0; // Q for cx, cy, s, r
  double process_velocity_var = 1e-2;  // Q for vx, vy
  double process_scale_velocity_var = 1e-4;  // Q for vs
  double measurement_center_var = 1.0;  // R for cx, cy
  double measurement_shape_var = 10.0;  // R for s, r
};

struct KalmanState
{
  StateVector mean = StateVector::Zero();
  StateMatrix covariance = StateMatrix::Identity();
  /// Set when a prediction drove the area non-positive and it was frozen.
  bool scale_clamped = false;
};

inline constexpr double kMinScale = 1e-6;

inline MeasVector box_to_measurement(const BBox& b)
{
  const Point c = center(b);
  MeasVector z;
  z << c.cx, c.cy, area(b), b.width() / b.height();
  return z;
}

/// Box from (cx, cy, s, r). s and r must be positive.
inline BBox state_to_box(const StateVector& x)
{
  const double s = std::max(x(2), kMinScale);
  const double r = std::max(x(3), kMinScale);
  const double w = std::sqrt(s * r);
  const double h = s / w;
  return {x(0) - w / 2.0, x(1) - h / 2.0, w, h};
}

inline StateMatrix transition_matrix()
{
  StateMatrix f = StateMatrix::Identity();
  f(0, 4) = 1.0;
  f(1, 5) = 1.0;
  f(2, 6) = 1.0;
  return f;
}

inline Eigen::Matrix<double, 4, 7> observation_matrix()
{
  Eigen::Matrix<double, 4, 7> h = Eigen::Matrix<double, 4, 7>::Zero();
  h.leftCols<4>().setIdentity();
  return h;
}

inline StateMatrix process_noise(const KalmanParams& p)
{
  StateVector d;
  d << p.process_position_var, p.process_position_var, p.process_position_var,
    p.process_position_var, p.process_velocity_var, p.process_velocity_var,
    p.process_scale_velocity_var;
  return d.asDiagonal();
}

inline MeasMatrix measurement_noise(const KalmanParams& p)
{
  MeasVector d;
  d << p.measurement_center_var, p.measurement_center_var, p.measurement_shape_var,
    p.measurement_shape_var;
  return d.asDiagonal();
}

inline KalmanState kf_init(const BBox& b, const KalmanParams& p = {})
{
  KalmanState st;
  st.mean.head<4>() = box_to_measurement(b);
  StateVector d;
  d << p.init_position_var, p.init_position_var, p.init_position_var, p.init_position_var,
    p.init_velocity_var, p.init_velocity_var, p.init_velocity_var;
  st.covariance = d.asDiagonal();
  return st;
}

inline void symmetrize(StateMatrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

/// One-frame prediction. A non-positive predicted area is frozen at kMinScale with
/// zero area velocity and flagged on the returned state.
inline KalmanState kf_predict(const KalmanState& st, const KalmanParams& p = {})
{
  const StateMatrix f = transition_matrix();
  KalmanState out;
  out.mean = f * st.mean;
  out.covariance = f * st.covariance * f.transpose() + process_noise(p);
  symmetrize(out.covariance);
  out.scale_clamped = st.scale_clamped;
  if (out.mean(2) <= 0.0) {
    out.mean(2) = kMinScale;
    out.mean(6) = 0.0;
    out.scale_clamped = true;
  }
  return out;
}

/// Measurement update with the Joseph-form covariance.
inline KalmanState kf_update(const KalmanState& st, const BBox& z, const KalmanParams& p = {})
{
  const auto h = observation_matrix();
  const MeasMatrix r = measurement_noise(p);
  const MeasVector innovation = box_to_measurement(z) - h * st.mean;
  const MeasMatrix s = h * st.covariance * h.transpose() + r;
  const Eigen::Matrix<double, 7, 4> gain = st.covariance * h.transpose() * s.inverse();

  KalmanState out;
  out.mean = st.mean + gain * innovation;
  const StateMatrix ikh = StateMatrix::Identity() - gain * h;
  out.covariance = ikh * st.covariance * ikh.transpose() + gain * r * gain.transpose();
  symmetrize(out.covariance);
  out.scale_clamped = st.scale_clamped;
  out.mean(2) = std::max(out.mean(2), kMinScale);
  out.mean(3) = std::max(out.mean(3), kMinScale);
  return out;
}

}  // namespace ibtrack
