#include "cgnn/closed_form.hpp"
#include "cgnn/dynamics.hpp"
#include "cgnn/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace cgnn;

namespace {

// One isolated node with gamma = 1, so A = alpha.
OdeSpec scalar_spec(double alpha, double restart, std::optional<double> weight = std::nullopt) {
  auto s = std::make_shared<const SymNormAdj>(build_sym_norm(Graph(1, {})));
  OdeSpec spec{regularize(s, Vector::Constant(1, alpha), 1.0), Matrix::Constant(1, 1, restart), std::nullopt, true};
  if (weight) spec.weight = WeightSpec{Matrix::Identity(1, 1), Vector::Constant(1, *weight)};
  return spec;
}

struct Instance {
  OdeSpec spec;
  Matrix dense_a;
};

Instance random_instance(std::mt19937_64& rng, std::size_t n, Index width, bool per_node_alpha) {
  auto s = std::make_shared<const SymNormAdj>(build_sym_norm(random_graph(n, 0.3, rng)));
  std::uniform_real_distribution<double> u(0.5, 0.95);
  Vector alpha(static_cast<Index>(n));
  const double shared = u(rng);
  for (Index i = 0; i < alpha.size(); ++i) alpha[i] = per_node_alpha ? u(rng) : shared;
  OdeSpec spec{regularize(s, alpha, 0.5), random_normal(static_cast<Index>(n), width, rng), std::nullopt, true};
  return {spec, spec.op.dense()};
}

}  // namespace

TEST(Rhs, ScalarNoWeight) {
  EXPECT_DOUBLE_EQ(rhs(scalar_spec(0.5, 1.0), Matrix::Ones(1, 1))(0, 0), 0.5);
}

TEST(Rhs, FixedPointIsStationary) {
  std::mt19937_64 rng(21);
  const auto inst = random_instance(rng, 15, 3, true);
  const Matrix fixed = analytic_limit_no_weight(inst.dense_a, inst.spec.restart);
  EXPECT_LE(rhs(inst.spec, fixed).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Rhs, ScalarWithWeight) {
  EXPECT_NEAR(rhs(scalar_spec(0.5, 1.0, 0.5), Matrix::Ones(1, 1))(0, 0), 0.0, 1e-15);
}

TEST(Rhs, NoRestartDropsForcing) {
  auto spec = scalar_spec(0.5, 1.0);
  spec.use_restart = false;
  EXPECT_DOUBLE_EQ(rhs(spec, Matrix::Ones(1, 1))(0, 0), -0.5);
}

TEST(Rhs, DimensionMismatch) {
  EXPECT_THROW(rhs(scalar_spec(0.5, 1.0), Matrix::Ones(2, 1)), DimensionError);
  auto spec = scalar_spec(0.5, 1.0);
  spec.weight = WeightSpec{Matrix::Identity(2, 2), Vector::Constant(2, 0.5)};
  EXPECT_THROW(rhs(spec, Matrix::Ones(1, 1)), DimensionError);
}

TEST(Integrate, ScalarClosedForm) {
  const NodeStates h = integrate(scalar_spec(0.5, 1.0), {Matrix::Ones(1, 1), 0.0}, SolverConfig::fixed(2.0, 40));
  EXPECT_NEAR(h.values(0, 0), 1.6321205588285577, 1e-8);
  EXPECT_EQ(h.time, 2.0);
}

TEST(Integrate, AdaptiveScalarClosedForm) {
  const NodeStates h =
      integrate(scalar_spec(0.5, 1.0), {Matrix::Ones(1, 1), 0.0}, SolverConfig::adaptive(2.0, 1e-8, 1e-10));
  EXPECT_NEAR(h.values(0, 0), 1.6321205588285577, 1e-7);
}

TEST(Integrate, ScalarAffineFromOffsetStart) {
  // H(t) = H0 e^{-t/2} + 2 E (1 - e^{-t/2})
  auto spec = scalar_spec(0.5, 3.0);
  const Matrix h0 = Matrix::Constant(1, 1, 2.0);
  const double t = 1.5;
  const double got = integrate(spec, {h0, 0.0}, SolverConfig::fixed(t, 200)).values(0, 0);
  const double expected = 2.0 * std::exp(-0.5 * t) + 3.0 * (1.0 - std::exp(-0.5 * t)) / 0.5;
  EXPECT_NEAR(got, expected, 1e-10);
}

TEST(Integrate, MatchesClosedForm) {
  std::mt19937_64 rng(22);
  const auto inst = random_instance(rng, 20, 4, false);
  const Matrix e = inst.spec.restart;
  const Matrix got = integrate(inst.spec, {e, 0.0}, SolverConfig::fixed(5.0, 40)).values;
  const Matrix ref = analytic_solution_no_weight(inst.dense_a, e, 5.0);
  EXPECT_LE((got - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Integrate, WeightedMatchesClosedForm) {
  std::mt19937_64 rng(23);
  auto inst = random_instance(rng, 8, 3, false);
  inst.spec.weight = random_weight(3, 0.1, 0.9, rng);
  const Matrix e = inst.spec.restart;
  const Matrix got = integrate(inst.spec, {e, 0.0}, SolverConfig::fixed(4.0, 40)).values;
  const Matrix ref = analytic_solution_with_weight(inst.dense_a, materialize_weight(*inst.spec.weight), e, 4.0);
  EXPECT_LE((got - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Integrate, FixedPointStability) {
  std::mt19937_64 rng(24);
  const auto inst = random_instance(rng, 15, 3, true);
  const Matrix fixed = analytic_limit_no_weight(inst.dense_a, inst.spec.restart);
  for (double t : {1.0, 10.0, 50.0}) {
    const Matrix h = integrate(inst.spec, {fixed, 0.0}, SolverConfig::fixed(t, static_cast<std::size_t>(4 * t))).values;
    EXPECT_LE((h - fixed).norm(), 1e-8);
  }
}

TEST(Integrate, LongTimeLimit) {
  std::mt19937_64 rng(25);
  auto s = std::make_shared<const SymNormAdj>(build_sym_norm(random_graph(20, 0.3, rng)));
  OdeSpec spec{regularize(s, 0.95, 0.5), random_normal(20, 3, rng), std::nullopt, true};
  const Matrix limit = analytic_limit_no_weight(spec.op.dense(), spec.restart);
  const Matrix h = integrate(spec, {spec.restart, 0.0}, SolverConfig::fixed(300.0, 1200)).values;
  EXPECT_LE((h - limit).norm() / limit.norm(), 1e-5);
}

TEST(Integrate, NoRestartIsHomogeneousSolution) {
  std::mt19937_64 rng(26);
  auto inst = random_instance(rng, 12, 3, false);
  inst.spec.use_restart = false;
  const Matrix h0 = random_normal(12, 3, rng);
  const Matrix got = integrate(inst.spec, {h0, 0.0}, SolverConfig::fixed(3.0, 40)).values;
  const Matrix ref = matrix_exp_action(inst.dense_a - Matrix::Identity(12, 12), 3.0, h0);
  EXPECT_LE((got - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Integrate, RejectsNonzeroStartTime) {
  EXPECT_THROW(integrate(scalar_spec(0.5, 1.0), {Matrix::Ones(1, 1), 1.0}, SolverConfig::fixed(2.0)), DomainError);
}

TEST(Integrate, NonFiniteAborts) {
  auto spec = scalar_spec(0.5, std::numeric_limits<double>::infinity());
  EXPECT_THROW(integrate(spec, {Matrix::Ones(1, 1), 0.0}, SolverConfig::fixed(1.0)), NumericError);
}

TEST(Integrate, AdaptiveMaxSteps) {
  SolverConfig cfg = SolverConfig::adaptive(50.0, 1e-12, 1e-14);
  cfg.max_steps = 3;
  EXPECT_THROW(integrate(scalar_spec(0.5, 1.0), {Matrix::Ones(1, 1), 0.0}, cfg), NumericError);
}

TEST(SolverConfigTest, FixedStepCount) {
  EXPECT_EQ(SolverConfig::fixed(12.1, 40).fixed_steps(), 40u);
  SolverConfig c = SolverConfig::fixed(1.0);
  c.step = 0.3;
  EXPECT_EQ(c.fixed_steps(), 4u);
  c.max_steps = 3;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(Augment, RoundTrip) {
  std::mt19937_64 rng(27);
  const Matrix h = random_normal(5, 3, rng);
  const Matrix a = augment(h);
  EXPECT_EQ(a.cols(), 6);
  EXPECT_EQ(a.rightCols(3), Matrix::Zero(5, 3));
  EXPECT_EQ(deaugment(a), h);
  EXPECT_THROW(deaugment(Matrix::Zero(5, 3)), DimensionError);
}

TEST(Augment, AuxiliaryBlockStaysZero) {
  std::mt19937_64 rng(28);
  auto inst = random_instance(rng, 10, 3, true);
  OdeSpec aug{inst.spec.op, augment(inst.spec.restart), std::nullopt, true};
  const Matrix h = integrate(aug, {aug.restart, 0.0}, SolverConfig::fixed(7.0, 40)).values;
  EXPECT_EQ(h.rightCols(3), Matrix::Zero(10, 3));
  const Matrix plain = integrate(inst.spec, {inst.spec.restart, 0.0}, SolverConfig::fixed(7.0, 40)).values;
  EXPECT_LE((deaugment(h) - plain).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Adjoint, ScalarRestartGradient) {
  // L = H(1), H0 = E = 1, A = 0.5: dL/dE = 2 - e^{-1/2}
  const auto spec = scalar_spec(0.5, 1.0);
  const auto g = adjoint_backward(spec, {Matrix::Ones(1, 1), 0.0}, SolverConfig::fixed(1.0, 40), Matrix::Ones(1, 1));
  EXPECT_NEAR(g.restart(0, 0) + g.initial(0, 0), 1.3934693402873666, 1e-8);
  EXPECT_NEAR(g.initial(0, 0), std::exp(-0.5), 1e-8);
}

TEST(Adjoint, ZeroOutputGradient) {
  std::mt19937_64 rng(29);
  auto inst = random_instance(rng, 10, 3, true);
  inst.spec.weight = random_weight(3, 0.2, 0.8, rng);
  const auto g = adjoint_backward(inst.spec, {inst.spec.restart, 0.0}, SolverConfig::fixed(2.0, 20),
                                  Matrix::Zero(10, 3));
  EXPECT_EQ(g.restart.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g.initial.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g.alpha.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g.basis.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g.eigen_params.cwiseAbs().maxCoeff(), 0.0);
}

namespace {

// L = <G, H(t1)> as a function of the ODE inputs, for finite differences.
double linear_loss(const OdeSpec& spec, const Matrix& h0, const Matrix& g, const SolverConfig& cfg) {
  return (integrate(spec, {h0, 0.0}, cfg).values.cwiseProduct(g)).sum();
}

double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

void check_adjoint_against_fd(bool with_weight, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto inst = random_instance(rng, 10, 3, true);
  if (with_weight) inst.spec.weight = random_weight(3, 0.2, 0.8, rng);
  const Matrix h0 = random_normal(10, 3, rng);
  const Matrix g = random_normal(10, 3, rng);
  const SolverConfig cfg = SolverConfig::fixed(1.5, 60);
  const auto adj = adjoint_backward(inst.spec, {h0, 0.0}, cfg, g);
  const double h = 1e-5;

  auto fd_matrix = [&](const Matrix& base, auto&& eval) {
    Matrix out(base.rows(), base.cols());
    for (Index k = 0; k < base.size(); ++k) {
      Matrix p = base, m = base;
      p.data()[k] += h;
      m.data()[k] -= h;
      out.data()[k] = (eval(p) - eval(m)) / (2 * h);
    }
    return out;
  };

  const Matrix fd_restart = fd_matrix(inst.spec.restart, [&](const Matrix& e) {
    OdeSpec s = inst.spec;
    s.restart = e;
    return linear_loss(s, h0, g, cfg);
  });
  EXPECT_LE(rel_err(adj.restart, fd_restart), 1e-4);

  const Matrix fd_initial = fd_matrix(h0, [&](const Matrix& x) { return linear_loss(inst.spec, x, g, cfg); });
  EXPECT_LE(rel_err(adj.initial, fd_initial), 1e-4);

  const Matrix fd_alpha = fd_matrix(inst.spec.op.alpha(), [&](const Matrix& a) {
    OdeSpec s = inst.spec;
    s.op = regularize(inst.spec.op.base_ptr(), a, inst.spec.op.gamma());
    return linear_loss(s, h0, g, cfg);
  });
  EXPECT_LE(rel_err(adj.alpha, fd_alpha), 1e-4);

  if (with_weight) {
    const Matrix fd_u = fd_matrix(inst.spec.weight->basis, [&](const Matrix& u) {
      OdeSpec s = inst.spec;
      s.weight->basis = u;
      return linear_loss(s, h0, g, cfg);
    });
    EXPECT_LE(rel_err(adj.basis, fd_u), 1e-4);
    const Matrix fd_m = fd_matrix(inst.spec.weight->eigen_params, [&](const Matrix& m) {
      OdeSpec s = inst.spec;
      s.weight->eigen_params = m;
      return linear_loss(s, h0, g, cfg);
    });
    EXPECT_LE(rel_err(adj.eigen_params, fd_m), 1e-4);
  }
}

}  // namespace

TEST(Adjoint, MatchesFiniteDifferencesNoWeight) {
  for (std::uint64_t seed : {31, 32, 33}) check_adjoint_against_fd(false, seed);
}

TEST(Adjoint, MatchesFiniteDifferencesWithWeight) {
  for (std::uint64_t seed : {34, 35, 36}) check_adjoint_against_fd(true, seed);
}

TEST(Adjoint, NoRestartGivesZeroRestartGradient) {
  std::mt19937_64 rng(37);
  auto inst = random_instance(rng, 10, 2, true);
  inst.spec.use_restart = false;
  const auto g = adjoint_backward(inst.spec, {inst.spec.restart, 0.0}, SolverConfig::fixed(1.0, 20),
                                  Matrix::Ones(10, 2));
  EXPECT_EQ(g.restart, Matrix::Zero(10, 2));
  EXPECT_GT(g.initial.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Adjoint, ClampedEigenParamsGetZeroGradient) {
  std::mt19937_64 rng(38);
  auto inst = random_instance(rng, 6, 2, false);
  Vector m(2);
  m << 1.2, 0.5;
  inst.spec.weight = WeightSpec{orthogonal_init(2, rng), m};
  const auto g =
      adjoint_backward(inst.spec, {inst.spec.restart, 0.0}, SolverConfig::fixed(1.0, 20), Matrix::Ones(6, 2));
  EXPECT_EQ(g.eigen_params[0], 0.0);
  EXPECT_NE(g.eigen_params[1], 0.0);
}

TEST(Adjoint, MemoryIndependentOfStepCount) {
  std::mt19937_64 rng(39);
  const auto inst = random_instance(rng, 30, 4, true);
  std::vector<std::size_t> peaks;
  for (std::size_t steps : {10, 40, 160, 640}) {
    alloc::PeakScope scope;
    adjoint_backward(inst.spec, {inst.spec.restart, 0.0}, SolverConfig::fixed(5.0, steps), Matrix::Ones(30, 4));
    peaks.push_back(scope.peak_above_base());
  }
  for (auto p : peaks) EXPECT_EQ(p, peaks.front());
}
