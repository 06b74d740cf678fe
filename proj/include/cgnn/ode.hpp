#pragma once

// Explicit integrators over a flat state vector: classic fixed-step RK4 and
// Dormand-Prince 5(4) with step-size control. Both integrate in either time
// direction and keep a fixed number of tracked stage buffers, independent of
// the number of steps taken.

#include "cgnn/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>

namespace cgnn::ode {

struct Stats {
  std::size_t steps = 0;     // accepted steps
  std::size_t rejected = 0;  // rejected adaptive steps
  std::size_t rhs_evals = 0;
};

struct AdaptiveOptions {
  double rtol = 1e-3;
  double atol = 1e-4;
  std::size_t max_steps = 100000;
};

namespace detail {

inline void check_finite(const Vector& y, double t, std::size_t step) {
  if (!y.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite state at t = " << t << " (step " << step << ")";
    throw NumericError(msg.str());
  }
}

}  // namespace detail

/// Integrates y' = f(t, y) from t0 to t1 with `steps` equal RK4 steps.
/// `f(t, y, dy)` writes the derivative into `dy` (pre-sized, never aliased).
template <class Rhs>
Stats rk4(Rhs&& f, Vector& y, double t0, double t1, std::size_t steps) {
  Stats stats;
  if (steps == 0) return stats;
  const double h = (t1 - t0) / static_cast<double>(steps);
  const Index n = y.size();
  alloc::Tracked<Vector> k1{Vector(n)}, k2{Vector(n)}, k3{Vector(n)}, k4{Vector(n)}, tmp{Vector(n)};

  for (std::size_t s = 0; s < steps; ++s) {
    const double t = t0 + static_cast<double>(s) * h;
    f(t, y, *k1);
    *tmp = y + 0.5 * h * *k1;
    f(t + 0.5 * h, *tmp, *k2);
    *tmp = y + 0.5 * h * *k2;
    f(t + 0.5 * h, *tmp, *k3);
    *tmp = y + h * *k3;
    f(t + h, *tmp, *k4);
    y += (h / 6.0) * (*k1 + 2.0 * *k2 + 2.0 * *k3 + *k4);
    stats.rhs_evals += 4;
    ++stats.steps;
    detail::check_finite(y, t + h, s + 1);
  }
  return stats;
}

/// Dormand-Prince 5(4) with the 5th-order solution propagated. The error norm
/// is the RMS of err_i / (atol + rtol * max(|y_i|, |y_new_i|)).
template <class Rhs>
Stats dopri5(Rhs&& f, Vector& y, double t0, double t1, const AdaptiveOptions& opt) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b_hat
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  Stats stats;
  const double span = t1 - t0;
  if (span == 0.0) return stats;
  const double dir = span > 0 ? 1.0 : -1.0;
  const Index n = y.size();
  alloc::Tracked<Vector> k1{Vector(n)}, k2{Vector(n)}, k3{Vector(n)}, k4{Vector(n)}, k5{Vector(n)},
      k6{Vector(n)}, k7{Vector(n)}, tmp{Vector(n)}, ynew{Vector(n)};

  auto scaled_norm = [&](const Vector& err, const Vector& a, const Vector& b) {
    const Vector sc = (opt.atol + opt.rtol * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array()).matrix();
    return n == 0 ? 0.0 : std::sqrt((err.cwiseQuotient(sc)).squaredNorm() / static_cast<double>(n));
  };

  double t = t0;
  f(t, y, *k1);
  ++stats.rhs_evals;

  // Initial step guess (Hairer, Norsett & Wanner, II.4).
  double h;
  {
    const Vector zero = Vector::Zero(n);
    const double d0 = scaled_norm(y, y, zero);
    const double d1 = scaled_norm(*k1, y, zero);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, std::abs(span));
    *tmp = y + dir * h0 * *k1;
    f(t + dir * h0, *tmp, *k2);
    ++stats.rhs_evals;
    const double d2 = scaled_norm(*k2 - *k1, y, zero) / h0;
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                 : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    h = std::min({100 * h0, h1, std::abs(span)});
  }

  std::size_t attempts = 0;
  while (dir * (t1 - t) > 0) {
    if (attempts++ >= opt.max_steps) {
      std::ostringstream msg;
      msg << "adaptive solver exceeded " << opt.max_steps << " steps at t = " << t;
      throw NumericError(msg.str());
    }
    const bool last = h >= std::abs(t1 - t);
    if (last) h = std::abs(t1 - t);
    const double hs = dir * h;

    *tmp = y + hs * (a21 * *k1);
    f(t + c2 * hs, *tmp, *k2);
    *tmp = y + hs * (a31 * *k1 + a32 * *k2);
    f(t + c3 * hs, *tmp, *k3);
    *tmp = y + hs * (a41 * *k1 + a42 * *k2 + a43 * *k3);
    f(t + c4 * hs, *tmp, *k4);
    *tmp = y + hs * (a51 * *k1 + a52 * *k2 + a53 * *k3 + a54 * *k4);
    f(t + c5 * hs, *tmp, *k5);
    *tmp = y + hs * (a61 * *k1 + a62 * *k2 + a63 * *k3 + a64 * *k4 + a65 * *k5);
    f(t + hs, *tmp, *k6);
    *ynew = y + hs * (b1 * *k1 + b3 * *k3 + b4 * *k4 + b5 * *k5 + b6 * *k6);
    f(t + hs, *ynew, *k7);
    stats.rhs_evals += 6;

    *tmp = hs * (e1 * *k1 + e3 * *k3 + e4 * *k4 + e5 * *k5 + e6 * *k6 + e7 * *k7);
    const double err = scaled_norm(*tmp, y, *ynew);
    if (!std::isfinite(err)) {
      detail::check_finite(*ynew, t + hs, stats.steps + 1);
    }

    if (err <= 1.0) {
      t = last ? t1 : t + hs;
      y = *ynew;
      std::swap(*k1, *k7);  // first-same-as-last
      ++stats.steps;
      detail::check_finite(y, t, stats.steps);
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      ++stats.rejected;
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
    }
    if (h < 1e-14 * std::max(1.0, std::abs(t))) {
      throw NumericError("adaptive solver step size underflow at t = " + std::to_string(t));
    }
  }
  return stats;
}

}  // namespace cgnn::ode
