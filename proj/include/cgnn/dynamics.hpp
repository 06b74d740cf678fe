#pragma once

// Continuous node-representation dynamics
//
//   dH/dt = (A - I) H + H (W - I) + E
//
// with the weight term present only for the channel-mixing variant and E
// dropped when the restart is disabled. Gradients are computed with the
// adjoint method: the adjoint a(t) = dL/dH(t) obeys
//
//   da/dt = -(A^T a - a + a (W - I)^T)
//
// and is integrated backward from t1 together with H and the parameter
// accumulators, so no trajectory is stored.

#include "cgnn/core.hpp"
#include "cgnn/graph.hpp"
#include "cgnn/ode.hpp"
#include "cgnn/spectral.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace cgnn {

enum class SolverMethod { FixedRk4, AdaptiveRk45 };

struct SolverConfig {
  SolverMethod method = SolverMethod::FixedRk4;
  double t1 = 1.0;
  double step = 1.0 / 40.0;
  double rtol = 1e-3;
  double atol = 1e-4;
  std::size_t max_steps = 100000;

  /// Fixed RK4 with exactly `steps` equal steps over [0, t1].
  static SolverConfig fixed(double t1, std::size_t steps = 40) {
    SolverConfig cfg;
    cfg.t1 = t1;
    cfg.step = t1 > 0.0 ? t1 / static_cast<double>(steps) : 1.0;
    return cfg;
  }

  static SolverConfig adaptive(double t1, double rtol = 1e-3, double atol = 1e-4) {
    SolverConfig cfg;
    cfg.method = SolverMethod::AdaptiveRk45;
    cfg.t1 = t1;
    cfg.rtol = rtol;
    cfg.atol = atol;
    return cfg;
  }

  /// ceil(t1 / step), ignoring round-off in the division.
  std::size_t fixed_steps() const {
    if (t1 <= 0.0) return 0;
    const double ratio = t1 / step;
    return static_cast<std::size_t>(std::ceil(ratio - 1e-9 * ratio));
  }

  void validate() const {
    if (!(t1 >= 0.0) || !std::isfinite(t1)) throw DomainError("solver: t1 must be finite and >= 0");
    if (!(step > 0.0)) throw DomainError("solver: step must be > 0");
    if (method == SolverMethod::FixedRk4 && max_steps < fixed_steps()) {
      throw DomainError("solver: max_steps " + std::to_string(max_steps) + " < ceil(t1/h) = " +
                        std::to_string(fixed_steps()));
    }
    if (method == SolverMethod::AdaptiveRk45 && !(rtol > 0.0 && atol > 0.0)) {
      throw DomainError("solver: adaptive tolerances must be > 0");
    }
  }
};

/// Node representation matrix at a point in time.
struct NodeStates {
  Matrix values;
  double time = 0.0;
};

struct OdeSpec {
  PropagationOperator op;
  Matrix restart;                   // E, num_nodes x width
  std::optional<WeightSpec> weight; // channel-mixing variant when present
  bool use_restart = true;

  Index num_nodes() const { return static_cast<Index>(op.num_nodes()); }
  Index width() const { return restart.cols(); }

  void validate() const {
    if (restart.rows() != num_nodes()) {
      throw DimensionError("OdeSpec: restart has " + std::to_string(restart.rows()) + " rows for " +
                           std::to_string(num_nodes()) + " nodes");
    }
    if (weight && (weight->basis.rows() != width() || weight->basis.cols() != width() ||
                   weight->eigen_params.size() != width())) {
      throw DimensionError("OdeSpec: weight of dimension " + std::to_string(weight->basis.rows()) +
                           " for state width " + std::to_string(width()));
    }
  }
};

namespace detail {

/// Evaluates the forward and adjoint right-hand sides with W - I precomputed.
class RhsEvaluator {
 public:
  explicit RhsEvaluator(const OdeSpec& spec) : spec_(spec) {
    spec.validate();
    if (spec.weight) {
      w_minus_i_ = materialize_weight(*spec.weight);
      w_minus_i_.diagonal().array() -= 1.0;
    }
  }

  bool has_weight() const noexcept { return spec_.weight.has_value(); }
  const Matrix& w_minus_i() const noexcept { return w_minus_i_; }

  /// out = (A - I) h + h (W - I) + E, with `kh` receiving K h.
  void forward(const Eigen::Ref<const Matrix>& h, Eigen::Ref<Matrix> out, Eigen::Ref<Matrix> kh) const {
    spec_.op.apply_kernel(h, kh);
    out = kh;
    out.array().colwise() *= spec_.op.alpha().array();
    out -= h;
    if (has_weight()) out.noalias() += h * w_minus_i_;
    if (spec_.use_restart) out += spec_.restart;
  }

  /// out = -(A^T a - a + a (W - I)^T)
  void adjoint(const Eigen::Ref<const Matrix>& a, Eigen::Ref<Matrix> out) const {
    spec_.op.apply_transpose(a, out);
    out -= a;
    if (has_weight()) out.noalias() += a * w_minus_i_.transpose();
    out = -out;
  }

 private:
  const OdeSpec& spec_;
  Matrix w_minus_i_;
};

template <class Rhs>
void run_solver(Rhs&& f, Vector& y, double t0, double t1, const SolverConfig& cfg) {
  if (cfg.method == SolverMethod::FixedRk4) {
    ode::rk4(std::forward<Rhs>(f), y, t0, t1, cfg.fixed_steps());
  } else {
    ode::dopri5(std::forward<Rhs>(f), y, t0, t1, {cfg.rtol, cfg.atol, cfg.max_steps});
  }
}

}  // namespace detail

/// dH/dt at `h`.
inline Matrix rhs(const OdeSpec& spec, const Matrix& h) {
  detail::RhsEvaluator eval(spec);
  require_same_shape(h, spec.restart, "rhs");
  Matrix out(h.rows(), h.cols()), kh(h.rows(), h.cols());
  eval.forward(h, out, kh);
  return out;
}

/// H(t1) from H(0) = h0.
inline NodeStates integrate(const OdeSpec& spec, const NodeStates& h0, const SolverConfig& cfg) {
  if (h0.time != 0.0) throw DomainError("integrate: initial state must be at time 0");
  cfg.validate();
  detail::RhsEvaluator eval(spec);
  require_same_shape(h0.values, spec.restart, "integrate");

  const Index rows = h0.values.rows(), cols = h0.values.cols();
  alloc::Tracked<Vector> y(Eigen::Map<const Vector>(h0.values.data(), h0.values.size()));
  alloc::Tracked<Matrix> kh(Matrix(rows, cols));
  auto f = [&](double, const Vector& yv, Vector& dy) {
    Eigen::Map<const Matrix> h(yv.data(), rows, cols);
    Eigen::Map<Matrix> out(dy.data(), rows, cols);
    eval.forward(h, out, *kh);
  };
  detail::run_solver(f, *y, 0.0, cfg.t1, cfg);
  return {Eigen::Map<const Matrix>(y->data(), rows, cols), cfg.t1};
}

// ---------------------------------------------------------------------------
// Augmentation: extra zero columns carried through the solve only.

inline Matrix augment(const Matrix& h) {
  Matrix out = Matrix::Zero(h.rows(), 2 * h.cols());
  out.leftCols(h.cols()) = h;
  return out;
}

inline NodeStates augment(const NodeStates& h) { return {augment(h.values), h.time}; }

inline Matrix deaugment(const Matrix& h) {
  if (h.cols() % 2 != 0) {
    throw DimensionError("deaugment: width " + std::to_string(h.cols()) + " is not even");
  }
  return h.leftCols(h.cols() / 2);
}

inline NodeStates deaugment(const NodeStates& h) { return {deaugment(h.values), h.time}; }

// ---------------------------------------------------------------------------
// Adjoint gradients

struct AdjointGradients {
  Matrix restart;      // dL/dE through the forcing term (zero when the restart is off)
  Matrix initial;      // dL/dH(0)
  Vector alpha;        // dL/dalpha_i per node
  Matrix weight;       // dL/dW for the materialized W (empty without weight)
  Matrix basis;        // dL/dU
  Vector eigen_params; // dL/dM (zero where the clamp is active)
};

/// Chain rule from dL/dW to the (U, M) parameterization.
inline void weight_param_gradients(const WeightSpec& spec, const Matrix& grad_w, Matrix& grad_u,
                                   Vector& grad_m) {
  const Vector m = clamped_eigen_params(spec);
  const Matrix sym = grad_w + grad_w.transpose();
  grad_u = sym * spec.basis * m.asDiagonal();
  grad_m = (spec.basis.transpose() * grad_w * spec.basis).diagonal();
  for (Index k = 0; k < grad_m.size(); ++k) {
    const double raw = spec.eigen_params[k];
    if (raw < kWeightClamp || raw > 1.0 - kWeightClamp) grad_m[k] = 0.0;
  }
}

/// Backward pass given H(t1). H is re-integrated backward jointly with the
/// adjoint and the accumulators
///   g_E = int a dt,  g_alpha_i = int sum_j a_ij (K H)_ij dt,  g_W = int H^T a dt.
inline AdjointGradients adjoint_from_final(const OdeSpec& spec, const NodeStates& h_final,
                                           const SolverConfig& cfg, const Matrix& grad_out) {
  cfg.validate();
  detail::RhsEvaluator eval(spec);
  require_same_shape(h_final.values, spec.restart, "adjoint_backward: final state");
  require_same_shape(grad_out, spec.restart, "adjoint_backward: grad_out");

  const Index n = spec.num_nodes(), w = spec.width();
  const Index block = n * w;
  const bool with_w = eval.has_weight();
  const Index total = 3 * block + n + (with_w ? w * w : 0);
  const Index off_h = 0, off_a = block, off_e = 2 * block, off_alpha = 3 * block, off_w = 3 * block + n;

  alloc::Tracked<Vector> y(Vector::Zero(total));
  y->segment(off_h, block) = Eigen::Map<const Vector>(h_final.values.data(), block);
  y->segment(off_a, block) = Eigen::Map<const Vector>(grad_out.data(), block);
  alloc::Tracked<Matrix> kh(Matrix(n, w));

  auto f = [&](double, const Vector& yv, Vector& dy) {
    Eigen::Map<const Matrix> h(yv.data() + off_h, n, w);
    Eigen::Map<const Matrix> a(yv.data() + off_a, n, w);
    Eigen::Map<Matrix> dh(dy.data() + off_h, n, w);
    Eigen::Map<Matrix> da(dy.data() + off_a, n, w);
    eval.forward(h, dh, *kh);
    eval.adjoint(a, da);
    Eigen::Map<Matrix>(dy.data() + off_e, n, w) = -a;
    dy.segment(off_alpha, n) = -(a.cwiseProduct(*kh)).rowwise().sum();
    if (with_w) Eigen::Map<Matrix>(dy.data() + off_w, w, w).noalias() = -(h.transpose() * a);
  };
  detail::run_solver(f, *y, cfg.t1, 0.0, cfg);

  AdjointGradients g;
  g.initial = Eigen::Map<const Matrix>(y->data() + off_a, n, w);
  if (spec.use_restart) {
    g.restart = Eigen::Map<const Matrix>(y->data() + off_e, n, w);
  } else {
    g.restart = Matrix::Zero(n, w);
  }
  g.alpha = y->segment(off_alpha, n);
  if (with_w) {
    g.weight = Eigen::Map<const Matrix>(y->data() + off_w, w, w);
    weight_param_gradients(*spec.weight, g.weight, g.basis, g.eigen_params);
  }
  return g;
}

/// Full adjoint pass: integrates forward to t1 (keeping only the final
/// state), then backward.
inline AdjointGradients adjoint_backward(const OdeSpec& spec, const NodeStates& h0, const SolverConfig& cfg,
                                         const Matrix& grad_out) {
  const NodeStates h_final = integrate(spec, h0, cfg);
  return adjoint_from_final(spec, h_final, cfg, grad_out);
}

}  // namespace cgnn
