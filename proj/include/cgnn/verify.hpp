#pragma once

// The oracle suite: each row checks one numerical path against an independent
// reference (closed form, quadrature, finite differences or a second solver
// configuration). Instances are small seeded random graphs with scalar alpha.

#include "cgnn/closed_form.hpp"
#include "cgnn/core.hpp"
#include "cgnn/dynamics.hpp"
#include "cgnn/graph.hpp"
#include "cgnn/model.hpp"
#include "cgnn/spectral.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace cgnn {

/// Erdos-Renyi graph G(n, p).
template <class Rng>
Graph random_graph(std::size_t n, double p, Rng& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (coin(rng)) edges.push_back({u, v});
  return Graph(n, std::move(edges));
}

template <class Rng>
Matrix random_normal(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = g(rng);
  return m;
}

/// Dense scalar-alpha operator on a random graph.
template <class Rng>
Matrix random_operator(std::size_t n, double alpha, double gamma, Rng& rng, double edge_p = 0.3) {
  return regularize(build_sym_norm(random_graph(n, edge_p, rng)), alpha, gamma).dense();
}

/// Symmetric W with eigenvalues drawn from (lo, hi).
template <class Rng>
WeightSpec random_weight(Index d, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector m(d);
  for (Index i = 0; i < d; ++i) m[i] = u(rng);
  return {orthogonal_init(d, rng), m};
}

struct VerifyOptions {
  std::uint64_t seed = 20200714;
  bool inject_fault = false;  // every tolerance forced to 0
};

namespace detail {

/// Dense fixed-step RK4 solution of the (optionally weighted) CGNN ODE with H(0) = E.
inline Matrix dense_rk4(const Matrix& a, const std::optional<Matrix>& w, const Matrix& e, double t1,
                        std::size_t steps) {
  const Index n = a.rows();
  const Matrix b = a - Matrix::Identity(n, n);
  Matrix c;
  if (w) c = *w - Matrix::Identity(w->rows(), w->cols());
  const Index rows = e.rows(), cols = e.cols();
  Vector y = Eigen::Map<const Vector>(e.data(), e.size());
  auto f = [&](double, const Vector& yv, Vector& dy) {
    Eigen::Map<const Matrix> h(yv.data(), rows, cols);
    Eigen::Map<Matrix> out(dy.data(), rows, cols);
    out.noalias() = b * h;
    if (w) out.noalias() += h * c;
    out += e;
  };
  ode::rk4(f, y, 0.0, t1, steps);
  return Eigen::Map<const Matrix>(y.data(), rows, cols);
}

/// e^{Bt} E e^{Ct} + int_0^t e^{Bu} E e^{Cu} du by composite Simpson.
inline Matrix sylvester_quadrature(const Matrix& a, const Matrix& w, const Matrix& e, double t,
                                   std::size_t panels) {
  const EigenDecomp p = diagonalize(a - Matrix::Identity(a.rows(), a.cols()));
  const EigenDecomp q = diagonalize(w - Matrix::Identity(w.rows(), w.cols()));
  auto term = [&](double u) {
    auto ex = [u](double x) { return std::exp(x * u); };
    return Matrix(p.map(ex) * e * q.map(ex));
  };
  const double h = t / static_cast<double>(panels);
  Matrix acc = term(0.0) + term(t);
  for (std::size_t k = 1; k < panels; ++k) acc += (k % 2 == 1 ? 4.0 : 2.0) * term(static_cast<double>(k) * h);
  return term(t) + acc * (h / 3.0);
}

/// Tiny classification instance for gradient checks.
struct FdInstance {
  ModelInput input;
  std::vector<std::size_t> mask;
};

template <class Rng>
FdInstance fd_instance(std::size_t n, Index features, Index classes, Rng& rng) {
  FdInstance inst;
  inst.input.adjacency = std::make_shared<const SymNormAdj>(build_sym_norm(random_graph(n, 0.35, rng)));
  inst.input.features = random_normal(static_cast<Index>(n), features, rng);
  std::uniform_int_distribution<int> lab(0, static_cast<int>(classes) - 1);
  for (std::size_t i = 0; i < n; ++i) {
    inst.input.labels.push_back(i < static_cast<std::size_t>(classes) ? static_cast<int>(i) : lab(rng));
    inst.mask.push_back(i);
  }
  inst.input.num_classes = classes;
  return inst;
}

inline double eval_loss(const ModelParams& p, const FdInstance& inst, const TrainConfig& cfg) {
  return loss(forward(p, inst.input, cfg), inst.input.labels, inst.mask, p, cfg.weight_decay);
}

/// Central differences on every parameter of `p`, step `h`.
inline ModelParams fd_gradient(const ModelParams& p, const FdInstance& inst, const TrainConfig& cfg, double h) {
  const Vector base = pack(p);
  Vector grad(base.size());
  ModelParams work = p;
  for (Index k = 0; k < base.size(); ++k) {
    Vector x = base;
    x[k] = base[k] + h;
    unpack(x, work);
    const double up = eval_loss(work, inst, cfg);
    x[k] = base[k] - h;
    unpack(x, work);
    const double down = eval_loss(work, inst, cfg);
    grad[k] = (up - down) / (2.0 * h);
  }
  unpack(grad, work);
  return work;
}

}  // namespace detail

/// Adjoint gradient of the full pipeline against central finite differences,
/// one comparison per parameter class.
template <class Rng>
std::vector<OracleReport> adjoint_fd_reports(Variant variant, Rng& rng, double tolerance = 1e-4) {
  TrainConfig cfg;
  cfg.variant = variant;
  cfg.hidden = 3;
  cfg.t1 = 1.5;
  cfg.solver_steps = 60;
  cfg.dropout = 0.0;
  cfg.gamma = 0.5;
  const auto inst = detail::fd_instance(10, 4, 3, rng);
  ModelParams p = init_params(cfg, 4, 3, 10, rng);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  for (Index i = 0; i < p.alpha_raw.size(); ++i) p.alpha_raw[i] = logit(0.8) + 0.5 * jitter(rng);
  p.enc_bias = 0.3 * random_normal(p.enc_bias.size(), 1, rng);
  p.dec_bias = 0.3 * random_normal(p.dec_bias.size(), 1, rng);
  if (p.weight_spec) p.weight_spec = random_weight(cfg.state_width(), 0.2, 0.8, rng);

  const LossAndGradient adj = loss_and_gradient(p, inst.input, cfg, inst.mask);
  const ModelParams fd = detail::fd_gradient(p, inst, cfg, 1e-5);
  const std::string tag = "adjoint_fd_" + to_string(variant) + "_";
  std::vector<OracleReport> out;
  out.push_back(compare(tag + "enc_weight", adj.grad.enc_weight, fd.enc_weight, tolerance));
  out.push_back(compare(tag + "enc_bias", adj.grad.enc_bias, fd.enc_bias, tolerance));
  out.push_back(compare(tag + "dec_weight", adj.grad.dec_weight, fd.dec_weight, tolerance));
  out.push_back(compare(tag + "dec_bias", adj.grad.dec_bias, fd.dec_bias, tolerance));
  out.push_back(compare(tag + "alpha", adj.grad.alpha_raw, fd.alpha_raw, tolerance));
  if (p.weight_spec) {
    out.push_back(compare(tag + "basis", adj.grad.weight_spec->basis, fd.weight_spec->basis, tolerance));
    out.push_back(
        compare(tag + "eigen_params", adj.grad.weight_spec->eigen_params, fd.weight_spec->eigen_params, tolerance));
  }
  return out;
}

/// Runs every oracle. Rows come back in a fixed order.
inline std::vector<OracleReport> run_oracle_suite(const VerifyOptions& opt = {}) {
  std::mt19937_64 rng(opt.seed);
  auto tol = [&](double t) { return opt.inject_fault ? 0.0 : t; };
  std::vector<OracleReport> rows;

  // RK4 (40 steps) against the no-weight closed form.
  {
    std::vector<OracleReport> parts;
    for (int g = 0; g < 3; ++g) {
      const Matrix a = random_operator(20, 0.9, 0.5, rng);
      const Matrix e = random_normal(20, 4, rng);
      for (double t1 : {1.0, 5.0, 12.0}) {
        parts.push_back(compare("", detail::dense_rk4(a, std::nullopt, e, t1, 40),
                                analytic_solution_no_weight(a, e, t1), tol(1e-6)));
      }
    }
    rows.push_back(worst_of("rk4_vs_closed_form_no_weight", parts, tol(1e-6)));
  }

  // Long-time limit, by integration and by the closed form.
  {
    const Matrix a = random_operator(20, 0.95, 0.5, rng);
    const Matrix e = random_normal(20, 4, rng);
    const Matrix limit = analytic_limit_no_weight(a, e);
    const OracleReport parts[] = {
        compare("", detail::dense_rk4(a, std::nullopt, e, 300.0, 1200), limit, tol(1e-5)),
        compare("", analytic_solution_no_weight(a, e, 300.0), limit, tol(1e-5)),
    };
    rows.push_back(worst_of("long_time_limit_no_weight", parts, tol(1e-5)));
  }

  // Recursion against its closed form for n = 0..64.
  {
    std::vector<OracleReport> parts;
    const Matrix a = random_operator(10, 0.9, 0.5, rng);
    const Matrix e = random_normal(10, 3, rng);
    for (std::size_t n = 0; n <= 64; ++n) {
      parts.push_back(compare("", discrete_propagate(a, e, std::nullopt, n), discrete_closed_form(a, e, n), tol(1e-9)));
    }
    rows.push_back(worst_of("discrete_recursion_vs_closed_form", parts, tol(1e-9)));
  }

  // Log-ODE against the exact Riemann integral.
  {
    std::vector<OracleReport> parts;
    const Matrix a = random_operator(6, 0.95, 0.62, rng, 0.5);
    const Matrix e = random_normal(6, 3, rng);
    for (std::size_t n : {1, 2, 5}) parts.push_back(riemann_limit_check(a, e, n, tol(1e-6)));
    rows.push_back(worst_of("riemann_log_ode", parts, tol(1e-6)));
  }

  // Weighted initial value against Simpson quadrature.
  {
    const Matrix a = random_operator(6, 0.95, 0.62, rng, 0.5);
    const Matrix w = materialize_weight(random_weight(3, 0.2, 0.9, rng));
    const Matrix e = random_normal(6, 3, rng);
    OracleReport r = lemma2_check(a, w, e, tol(1e-8));
    r.name = "lemma2_initial_value";
    rows.push_back(r);
  }

  // Weighted closed form: integration, limit and W = I reduction.
  {
    std::vector<OracleReport> integ, lim, red;
    for (int g = 0; g < 2; ++g) {
      const Matrix a = random_operator(8, 0.9, 0.5, rng, 0.4);
      const Matrix w = materialize_weight(random_weight(3, 0.1, 0.9, rng));
      const Matrix e = random_normal(8, 3, rng);
      for (double t1 : {1.0, 5.0, 12.0}) {
        integ.push_back(compare("", detail::dense_rk4(a, w, e, t1, 40), analytic_solution_with_weight(a, w, e, t1),
                                tol(1e-6)));
        red.push_back(compare("", analytic_solution_with_weight(a, Matrix::Identity(3, 3), e, t1),
                              analytic_solution_no_weight(a, e, t1), tol(1e-10)));
      }
      const Matrix limit = analytic_limit_with_weight(a, w, e);
      lim.push_back(compare("", analytic_solution_with_weight(a, w, e, 300.0), limit, tol(1e-5)));
      lim.push_back(compare("", detail::dense_rk4(a, w, e, 300.0, 1200), limit, tol(1e-5)));
    }
    rows.push_back(worst_of("sylvester_closed_form_vs_rk4", integ, tol(1e-6)));
    rows.push_back(worst_of("sylvester_long_time_limit", lim, tol(1e-5)));
    rows.push_back(worst_of("sylvester_identity_weight_reduction", red, tol(1e-10)));
  }

  // Closed form against the integral form of the Sylvester solution.
  {
    const Matrix a = random_operator(8, 0.9, 0.5, rng, 0.4);
    const Matrix w = materialize_weight(random_weight(3, 0.1, 0.9, rng));
    const Matrix e = random_normal(8, 3, rng);
    rows.push_back(compare("sylvester_integral_form", analytic_solution_with_weight(a, w, e, 5.0),
                           detail::sylvester_quadrature(a, w, e, 5.0, 2000), tol(1e-8)));
  }

  // Adjoint gradients against finite differences.
  for (Variant v : {Variant::Cgnn, Variant::CgnnWeight}) {
    const auto parts = adjoint_fd_reports(v, rng, tol(1e-4));
    rows.push_back(worst_of("adjoint_vs_finite_difference_" + to_string(v), parts, tol(1e-4)));
  }

  // Augmented and plain integration of the no-weight ODE.
  {
    auto s = std::make_shared<const SymNormAdj>(build_sym_norm(random_graph(20, 0.3, rng)));
    const Matrix e = random_normal(20, 4, rng);
    OdeSpec plain{regularize(s, Vector::Constant(20, 0.9), 0.5), e, std::nullopt, true};
    OdeSpec aug{plain.op, augment(e), std::nullopt, true};
    const SolverConfig cfg = SolverConfig::fixed(10.0, 40);
    rows.push_back(compare("augmentation_equivalence", deaugment(integrate(aug, {aug.restart, 0.0}, cfg).values),
                           integrate(plain, {e, 0.0}, cfg).values, tol(1e-10)));
  }

  // RK4 convergence order: error ratio on halving the step.
  {
    const Matrix a = random_operator(20, 0.9, 0.5, rng);
    const Matrix e = random_normal(20, 4, rng);
    const Matrix exact = analytic_solution_no_weight(a, e, 5.0);
    const double coarse = (detail::dense_rk4(a, std::nullopt, e, 5.0, 10) - exact).cwiseAbs().maxCoeff();
    const double fine = (detail::dense_rk4(a, std::nullopt, e, 5.0, 20) - exact).cwiseAbs().maxCoeff();
    OracleReport r;
    r.name = "rk4_order_step_halving";
    r.max_abs_err = fine;
    r.max_rel_err = fine / coarse;  // at most 1/8 for a fourth-order method
    r.tolerance = tol(0.125);
    r.pass = std::isfinite(r.max_rel_err) && r.max_rel_err <= r.tolerance;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace cgnn
