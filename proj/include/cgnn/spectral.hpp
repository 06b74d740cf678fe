#pragma once

// Dense eigendecomposition helpers, spectral matrix functions and the
// W = U diag(M) U^T channel-mixing parameterization.

#include "cgnn/core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace cgnn {

/// M = vectors * diag(values) * inverse_vectors
struct EigenDecomp {
  Matrix vectors;
  Vector values;
  Matrix inverse_vectors;

  Matrix reconstruct() const { return vectors * values.asDiagonal() * inverse_vectors; }

  /// P * diag(f(lambda)) * P^{-1}
  template <class F>
  Matrix map(F&& f) const {
    Vector mapped = values.unaryExpr(std::forward<F>(f));
    return vectors * mapped.asDiagonal() * inverse_vectors;
  }
};

inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kLogFloor = 1e-6;

inline bool is_symmetric(const Matrix& m, double tol = kSymmetryTolerance) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

/// Symmetric eigendecomposition; eigenvalues ascending, P^{-1} = P^T.
inline EigenDecomp eig_sym(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("eig_sym: matrix is " + shape_str(m.rows(), m.cols()));
  }
  if (m.size() > 0 && !is_symmetric(m)) {
    throw DomainError("eig_sym: matrix is not symmetric within 1e-10");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eig_sym: eigensolver did not converge");
  }
  return {solver.eigenvectors(), solver.eigenvalues(), solver.eigenvectors().transpose()};
}

/// Eigendecomposition of a general real matrix whose spectrum is real.
/// Eigenvalues are returned ascending.
inline EigenDecomp eig_real(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("eig_real: matrix is " + shape_str(m.rows(), m.cols()));
  }
  Eigen::EigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eig_real: eigensolver did not converge");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const auto& lambda = solver.eigenvalues();
  const auto& vecs = solver.eigenvectors();
  for (Index i = 0; i < lambda.size(); ++i) {
    if (std::abs(lambda[i].imag()) > 1e-10 * scale) {
      throw DomainError("eig_real: complex eigenvalue " + std::to_string(lambda[i].real()) + " + " +
                        std::to_string(lambda[i].imag()) + "i");
    }
  }
  std::vector<Index> order(static_cast<std::size_t>(lambda.size()));
  for (Index i = 0; i < lambda.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return lambda[a].real() < lambda[b].real(); });

  EigenDecomp out;
  out.values.resize(lambda.size());
  out.vectors.resize(m.rows(), m.cols());
  for (Index k = 0; k < lambda.size(); ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    out.values[k] = lambda[src].real();
    out.vectors.col(k) = vecs.col(src).real();
  }
  Eigen::FullPivLU<Matrix> lu(out.vectors);
  if (!lu.isInvertible()) {
    throw NumericError("eig_real: matrix is not diagonalizable (singular eigenvector basis)");
  }
  out.inverse_vectors = lu.inverse();
  return out;
}

/// Symmetric inputs take the orthogonal route, anything else the general one.
inline EigenDecomp diagonalize(const Matrix& m) {
  return is_symmetric(m) ? eig_sym(m) : eig_real(m);
}

/// P diag(ln max(lambda, floor)) P^{-1}. Eigenvalues below -1e-8 are rejected;
/// anything in [-1e-8, floor) is floored.
inline Matrix matrix_log(const Matrix& m, double floor = kLogFloor) {
  const EigenDecomp d = diagonalize(m);
  for (Index i = 0; i < d.values.size(); ++i) {
    if (d.values[i] < -1e-8) {
      throw DomainError("matrix_log: eigenvalue " + std::to_string(d.values[i]) +
                        " is negative beyond the floor tolerance");
    }
  }
  return d.map([floor](double x) { return std::log(std::max(x, floor)); });
}

inline Matrix matrix_exp(const Matrix& m, double t) {
  return diagonalize(m).map([t](double x) { return std::exp(x * t); });
}

/// e^{M t} E through an eigendecomposition of M. Intended for dense checks on
/// small graphs.
inline Matrix matrix_exp_action(const Matrix& m, double t, const Matrix& e) {
  if (m.cols() != e.rows()) {
    throw DimensionError("matrix_exp_action: " + shape_str(m.rows(), m.cols()) + " times " +
                         shape_str(e.rows(), e.cols()));
  }
  return matrix_exp(m, t) * e;
}

// ---------------------------------------------------------------------------
// Channel-mixing weight W = U diag(clamp(M)) U^T

/// Clamp margin for the eigenvalue parameters of W.
inline constexpr double kWeightClamp = 1e-3;

struct WeightSpec {
  Matrix basis;        // U, d x d
  Vector eigen_params; // M, length d

  Index dim() const noexcept { return basis.rows(); }
};

inline double clamp_eigen_param(double m) { return std::clamp(m, kWeightClamp, 1.0 - kWeightClamp); }

inline Vector clamped_eigen_params(const WeightSpec& spec) {
  return spec.eigen_params.unaryExpr([](double m) { return clamp_eigen_param(m); });
}

inline Matrix materialize_weight(const WeightSpec& spec) {
  if (spec.basis.rows() != spec.basis.cols() || spec.basis.rows() != spec.eigen_params.size()) {
    throw DimensionError("materialize_weight: basis " + shape_str(spec.basis.rows(), spec.basis.cols()) +
                         " with " + std::to_string(spec.eigen_params.size()) + " eigen parameters");
  }
  return spec.basis * clamped_eigen_params(spec).asDiagonal() * spec.basis.transpose();
}

/// U <- (1 + beta) U - beta (U U^T) U
inline Matrix orthogonality_retraction(const Matrix& u, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw DomainError("orthogonality_retraction: beta = " + std::to_string(beta) + " is outside (0, 1]");
  }
  return (1.0 + beta) * u - beta * (u * u.transpose()) * u;
}

inline double orthogonality_defect(const Matrix& u) {
  return (u * u.transpose() - Matrix::Identity(u.rows(), u.cols())).norm();
}

/// Orthogonal factor of a seeded Gaussian matrix, columns sign-fixed so the
/// result does not depend on the QR implementation's sign convention.
template <class Rng>
Matrix orthogonal_init(Index d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

}  // namespace cgnn
