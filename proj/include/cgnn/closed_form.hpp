#pragma once

// Dense closed forms of the propagation dynamics and the identities that tie
// the discrete recursion, the exact log-ODEs and the first-order ODEs together.
// Everything here works on dense matrices and is meant for graphs of at most a
// few hundred nodes.

#include "cgnn/core.hpp"
#include "cgnn/ode.hpp"
#include "cgnn/spectral.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <string>

namespace cgnn {

/// Guard on |lambda_i + phi_j| below which a closed form is considered resonant.
inline constexpr double kResonanceGuard = 1e-12;

struct OracleReport {
  std::string name;
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Compares `computed` against `reference`. The relative error is normwise:
/// max |computed - reference| / max |reference|.
inline OracleReport compare(std::string name, const Matrix& computed, const Matrix& reference, double tolerance) {
  require_same_shape(computed, reference, "compare");
  OracleReport r;
  r.name = std::move(name);
  r.tolerance = tolerance;
  r.max_abs_err = computed.size() == 0 ? 0.0 : (computed - reference).cwiseAbs().maxCoeff();
  const double scale = reference.size() == 0 ? 0.0 : reference.cwiseAbs().maxCoeff();
  r.max_rel_err = scale > 0.0 ? r.max_abs_err / scale : r.max_abs_err;
  r.pass = std::isfinite(r.max_rel_err) && r.max_rel_err <= tolerance;
  return r;
}

/// Merges several comparisons into one report carrying the worst errors.
inline OracleReport worst_of(std::string name, std::span<const OracleReport> parts, double tolerance) {
  OracleReport r;
  r.name = std::move(name);
  r.tolerance = tolerance;
  r.pass = true;
  for (const auto& p : parts) {
    r.max_abs_err = std::max(r.max_abs_err, p.max_abs_err);
    r.max_rel_err = std::max(r.max_rel_err, p.max_rel_err);
    if (!std::isfinite(p.max_rel_err)) r.max_rel_err = p.max_rel_err;
  }
  r.pass = std::isfinite(r.max_rel_err) && r.max_rel_err <= tolerance;
  return r;
}

inline std::string format_sig10(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 10);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kOracleCsvHeader = "name,max_abs_err,max_rel_err,tolerance,pass";

inline std::string to_csv_row(const OracleReport& r) {
  return r.name + "," + format_sig10(r.max_abs_err) + "," + format_sig10(r.max_rel_err) + "," +
         format_sig10(r.tolerance) + "," + (r.pass ? "true" : "false");
}

// ---------------------------------------------------------------------------
// Discrete propagation H_{k+1} = A H_k W + H_0, H_0 = E

inline Matrix discrete_propagate(const Matrix& a, const Matrix& e, const std::optional<Matrix>& w, std::size_t n) {
  if (a.rows() != a.cols() || a.cols() != e.rows()) {
    throw DimensionError("discrete_propagate: A " + shape_str(a.rows(), a.cols()) + ", E " +
                         shape_str(e.rows(), e.cols()));
  }
  if (w && (w->rows() != e.cols() || w->cols() != e.cols())) {
    throw DimensionError("discrete_propagate: W " + shape_str(w->rows(), w->cols()) + " for width " +
                         std::to_string(e.cols()));
  }
  Matrix h = e;
  for (std::size_t k = 0; k < n; ++k) {
    Matrix next = a * h;
    if (w) next = next * *w;
    h = next + e;
  }
  return h;
}

/// (A - I)^{-1} (A^{n+1} - I) E, the summed form of the unweighted recursion.
inline Matrix discrete_closed_form(const Matrix& a, const Matrix& e, std::size_t n) {
  const Index size = a.rows();
  const Matrix b = a - Matrix::Identity(size, size);
  Eigen::FullPivLU<Matrix> lu(b);
  if (!lu.isInvertible()) throw NumericError("discrete_closed_form: A - I is singular");
  Matrix power = Matrix::Identity(size, size);
  Matrix base = a;
  for (std::size_t k = n + 1; k > 0; k >>= 1) {
    if (k & 1) power = power * base;
    base = base * base;
  }
  return lu.solve((power - Matrix::Identity(size, size)) * e);
}

// ---------------------------------------------------------------------------
// First-order ODE without weight: dH/dt = (A - I) H + E, H(0) = E

namespace detail {

inline EigenDecomp decompose_shifted(const Matrix& a) {
  Matrix b = a;
  b.diagonal().array() -= 1.0;
  return diagonalize(b);
}

inline void require_nonresonant(double s, const char* what) {
  if (std::abs(s) < kResonanceGuard) {
    throw NumericError(std::string(what) + ": resonant eigenvalue (|denominator| < 1e-12)");
  }
}

}  // namespace detail

/// (A-I)^{-1}(e^{(A-I)t} - I) E + e^{(A-I)t} E
inline Matrix analytic_solution_no_weight(const Matrix& a, const Matrix& e, double t) {
  if (a.rows() != a.cols() || a.cols() != e.rows()) {
    throw DimensionError("analytic_solution_no_weight: A " + shape_str(a.rows(), a.cols()) + ", E " +
                         shape_str(e.rows(), e.cols()));
  }
  const EigenDecomp d = detail::decompose_shifted(a);
  for (Index i = 0; i < d.values.size(); ++i) {
    detail::require_nonresonant(d.values[i], "analytic_solution_no_weight");
  }
  return d.map([t](double s) { return std::expm1(s * t) / s + std::exp(s * t); }) * e;
}

/// (I - A)^{-1} E
inline Matrix analytic_limit_no_weight(const Matrix& a, const Matrix& e) {
  if (a.rows() != a.cols() || a.cols() != e.rows()) {
    throw DimensionError("analytic_limit_no_weight: A " + shape_str(a.rows(), a.cols()) + ", E " +
                         shape_str(e.rows(), e.cols()));
  }
  const Index size = a.rows();
  Eigen::EigenSolver<Matrix> es(a, false);
  double rho = 0.0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) rho = std::max(rho, std::abs(es.eigenvalues()[i]));
  if (rho >= 1.0) {
    throw DomainError("analytic_limit_no_weight: spectral radius " + std::to_string(rho) + " >= 1");
  }
  Eigen::FullPivLU<Matrix> lu(Matrix::Identity(size, size) - a);
  if (!lu.isInvertible()) throw NumericError("analytic_limit_no_weight: I - A is singular");
  return lu.solve(e);
}

// ---------------------------------------------------------------------------
// Sylvester ODE: dH/dt = (A - I) H + H (W - I) + E, H(0) = E

namespace detail {

struct SylvesterBases {
  EigenDecomp left;   // A - I = P Lambda' P^{-1}
  EigenDecomp right;  // W - I = Q Phi' Q^{-1}
  Matrix e_tilde;     // P^{-1} E Q
};

inline SylvesterBases sylvester_bases(const Matrix& a, const Matrix& w, const Matrix& e) {
  if (a.rows() != a.cols() || w.rows() != w.cols() || a.cols() != e.rows() || w.rows() != e.cols()) {
    throw DimensionError("Sylvester closed form: A " + shape_str(a.rows(), a.cols()) + ", W " +
                         shape_str(w.rows(), w.cols()) + ", E " + shape_str(e.rows(), e.cols()));
  }
  SylvesterBases b{decompose_shifted(a), decompose_shifted(w), Matrix()};
  b.e_tilde = b.left.inverse_vectors * e * b.right.vectors;
  return b;
}

}  // namespace detail

/// e^{(A-I)t} E e^{(W-I)t} + P F(t) Q^{-1},
/// F_ij(t) = E~_ij / (l_i + p_j) * (e^{t (l_i + p_j)} - 1).
inline Matrix analytic_solution_with_weight(const Matrix& a, const Matrix& w, const Matrix& e, double t) {
  const auto b = detail::sylvester_bases(a, w, e);
  const Index n = b.e_tilde.rows(), d = b.e_tilde.cols();
  Matrix f(n, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double s = b.left.values[i] + b.right.values[j];
      detail::require_nonresonant(s, "analytic_solution_with_weight");
      f(i, j) = b.e_tilde(i, j) * std::expm1(t * s) / s;
    }
  }
  const Matrix homogeneous = b.left.map([t](double x) { return std::exp(x * t); }) * e *
                             b.right.map([t](double x) { return std::exp(x * t); });
  return homogeneous + b.left.vectors * f * b.right.inverse_vectors;
}

/// P G Q^{-1} with G_ij = -E~_ij / (l_i + p_j); requires every sum to be negative.
inline Matrix analytic_limit_with_weight(const Matrix& a, const Matrix& w, const Matrix& e) {
  const auto b = detail::sylvester_bases(a, w, e);
  const Index n = b.e_tilde.rows(), d = b.e_tilde.cols();
  Matrix g(n, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double s = b.left.values[i] + b.right.values[j];
      if (s >= 0.0) {
        throw DomainError("analytic_limit_with_weight: eigenvalue sum " + std::to_string(s) + " is not negative");
      }
      g(i, j) = -b.e_tilde(i, j) / s;
    }
  }
  return b.left.vectors * g * b.right.inverse_vectors;
}

// ---------------------------------------------------------------------------
// Exact log-ODE checks

/// Integrates dH/dt = ln(A) H + E from H(0) = (ln A)^{-1} (A - I) E up to t = n
/// and compares with (ln A)^{-1} (A^{n+1} - I) E = int_0^{n+1} A^s E ds.
inline OracleReport riemann_limit_check(const Matrix& a, const Matrix& e, std::size_t n, double tolerance = 1e-6,
                                        std::size_t steps_per_unit = 200) {
  if (a.rows() != a.cols() || a.cols() != e.rows()) {
    throw DimensionError("riemann_limit_check: A " + shape_str(a.rows(), a.cols()) + ", E " +
                         shape_str(e.rows(), e.cols()));
  }
  const Matrix log_a = matrix_log(a);
  Eigen::FullPivLU<Matrix> lu(log_a);
  if (!lu.isInvertible()) throw NumericError("riemann_limit_check: ln A is singular");
  const Index size = a.rows();

  const Matrix h0 = lu.solve((a - Matrix::Identity(size, size)) * e);
  const Index rows = e.rows(), cols = e.cols();
  Vector y = Eigen::Map<const Vector>(h0.data(), h0.size());
  auto f = [&](double, const Vector& yv, Vector& dy) {
    Eigen::Map<const Matrix> h(yv.data(), rows, cols);
    Eigen::Map<Matrix>(dy.data(), rows, cols).noalias() = log_a * h + e;
  };
  ode::rk4(f, y, 0.0, static_cast<double>(n), std::max<std::size_t>(1, n * steps_per_unit));
  const Matrix numeric = Eigen::Map<const Matrix>(y.data(), rows, cols);

  const EigenDecomp d = diagonalize(a);
  const double np1 = static_cast<double>(n + 1);
  const Matrix exact = d.map([np1](double x) {
    const double lx = std::log(std::max(x, kLogFloor));
    if (std::abs(lx) < 1e-14) return np1;
    return std::expm1(np1 * lx) / lx;
  }) * e;
  return compare("riemann_limit_n" + std::to_string(n), numeric, exact, tolerance);
}

/// P F Q^{-1} with F_ij = (L_ii E~_ij F_jj - E~_ij) / ln(L_ii F_jj), the exact
/// value of int_0^1 A^s E W^s ds. Pairs with L_ii F_jj = 1 take the limit E~_ij.
inline Matrix lemma2_closed_form(const Matrix& a, const Matrix& w, const Matrix& e) {
  const EigenDecomp p = diagonalize(a);
  const EigenDecomp q = diagonalize(w);
  const Matrix et = p.inverse_vectors * e * q.vectors;
  Matrix f(et.rows(), et.cols());
  for (Index j = 0; j < et.cols(); ++j) {
    for (Index i = 0; i < et.rows(); ++i) {
      const double lam = std::max(p.values[i], kLogFloor);
      const double phi = std::max(q.values[j], kLogFloor);
      const double lg = std::log(lam) + std::log(phi);
      f(i, j) = std::abs(lg) < 1e-14 ? et(i, j) : et(i, j) * std::expm1(lg) / lg;
    }
  }
  return p.vectors * f * q.inverse_vectors;
}

/// int_0^1 A^s E W^s ds by composite Simpson, doubling the panel count until
/// successive estimates agree to `refine_tol` (relative).
inline Matrix simpson_power_integral(const Matrix& a, const Matrix& w, const Matrix& e,
                                     double refine_tol = 1e-10, std::size_t max_panels = 1 << 16) {
  const EigenDecomp p = diagonalize(a);
  const EigenDecomp q = diagonalize(w);
  auto integrand = [&](double s) {
    auto pow_s = [s](double x) { return std::pow(std::max(x, kLogFloor), s); };
    return Matrix(p.map(pow_s) * e * q.map(pow_s));
  };
  auto simpson = [&](std::size_t panels) {
    const double h = 1.0 / static_cast<double>(panels);
    Matrix acc = integrand(0.0) + integrand(1.0);
    for (std::size_t k = 1; k < panels; ++k) {
      acc += (k % 2 == 1 ? 4.0 : 2.0) * integrand(static_cast<double>(k) * h);
    }
    return Matrix(acc * (h / 3.0));
  };
  std::size_t panels = 8;
  Matrix prev = simpson(panels);
  while (panels < max_panels) {
    panels *= 2;
    Matrix cur = simpson(panels);
    const double scale = std::max(cur.cwiseAbs().maxCoeff(), 1e-300);
    if ((cur - prev).cwiseAbs().maxCoeff() <= refine_tol * scale) return cur;
    prev = std::move(cur);
  }
  throw NumericError("simpson_power_integral: no convergence within " + std::to_string(max_panels) + " panels");
}

inline OracleReport lemma2_check(const Matrix& a, const Matrix& w, const Matrix& e, double tolerance = 1e-8) {
  if (a.rows() != a.cols() || w.rows() != w.cols() || a.cols() != e.rows() || w.rows() != e.cols()) {
    throw DimensionError("lemma2_check: A " + shape_str(a.rows(), a.cols()) + ", W " + shape_str(w.rows(), w.cols()) +
                         ", E " + shape_str(e.rows(), e.cols()));
  }
  return compare("lemma2_initial_value", lemma2_closed_form(a, w, e), simpson_power_integral(a, w, e), tolerance);
}

}  // namespace cgnn
