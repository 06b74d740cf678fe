#pragma once

// Experiment drivers shared by the command-line tool and the acceptance
// checks: logistic-regression baseline, end-time sweeps and memory reports.

#include "cgnn/datasets.hpp"
#include "cgnn/model.hpp"

#include <cmath>
#include <future>
#include <random>
#include <string>
#include <vector>

namespace cgnn {

// ---------------------------------------------------------------------------
// Logistic regression on raw features

struct BaselineResult {
  double best_val_acc = -1.0;
  double test_acc_at_best_val = 0.0;
};

/// Multinomial logistic regression trained full-batch with Adam on the
/// training nodes; reports test accuracy at the best validation epoch.
inline BaselineResult logistic_regression_baseline(const Matrix& x, const std::vector<int>& labels,
                                                   Index num_classes, const Split& split,
                                                   std::size_t epochs = 500, double lr = 0.05,
                                                   double weight_decay = 5e-4) {
  const Index f = x.cols();
  Matrix w = Matrix::Zero(f, num_classes);
  Vector b = Vector::Zero(num_classes);
  Vector flat(w.size() + b.size());
  Optimizer opt(OptimizerKind::Adam, lr, flat.size());

  Matrix xt(static_cast<Index>(split.train.size()), f);
  for (std::size_t k = 0; k < split.train.size(); ++k) xt.row(static_cast<Index>(k)) = x.row(static_cast<Index>(split.train[k]));

  BaselineResult best;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    Matrix logits = xt * w;
    logits.rowwise() += b.transpose();
    Matrix g = softmax_rows(logits);
    for (std::size_t k = 0; k < split.train.size(); ++k) g(static_cast<Index>(k), labels[split.train[k]]) -= 1.0;
    g /= static_cast<double>(split.train.size());
    const Matrix gw = xt.transpose() * g + 2.0 * weight_decay * w;
    const Vector gb = g.colwise().sum().transpose();

    flat << w.reshaped(), b;
    Vector grad(flat.size());
    grad << gw.reshaped(), gb;
    opt.step(flat, grad);
    w = flat.head(w.size()).reshaped(f, num_classes);
    b = flat.tail(b.size());

    Matrix all = x * w;
    all.rowwise() += b.transpose();
    const Matrix probs = softmax_rows(all);
    const double val = accuracy(probs, labels, split.val);
    if (val > best.best_val_acc) {
      best.best_val_acc = val;
      best.test_acc_at_best_val = accuracy(probs, labels, split.test);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// End-time sweep

struct SweepRow {
  Variant variant;
  double t1;
  std::uint64_t seed;
  double test_acc;
};

/// Trains one model per (variant, t1, seed). Rows are ordered by variant, then
/// t1, then seed, whatever `jobs` is.
inline std::vector<SweepRow> sweep_time(const ModelInput& in, const Split& split, const TrainConfig& base,
                                        const std::vector<Variant>& variants, const std::vector<double>& t_list,
                                        const std::vector<std::uint64_t>& seeds, std::size_t jobs = 1) {
  if (t_list.empty()) throw DomainError("sweep-time: empty t_list");
  std::vector<SweepRow> rows;
  for (Variant v : variants)
    for (double t1 : t_list)
      for (auto seed : seeds) rows.push_back({v, t1, seed, 0.0});

  auto run = [&](std::size_t i) {
    TrainConfig c = base;
    c.variant = rows[i].variant;
    c.t1 = rows[i].t1;
    c.seed = rows[i].seed;
    return train(in, split, c).test_acc_at_best_val;
  };
  jobs = std::max<std::size_t>(1, jobs);
  for (std::size_t start = 0; start < rows.size(); start += jobs) {
    std::vector<std::future<double>> batch;
    const std::size_t end = std::min(rows.size(), start + jobs);
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async, run, i));
    }
    for (std::size_t i = start; i < end; ++i) rows[i].test_acc = batch[i - start].get();
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Memory report

struct MemRow {
  Variant variant;
  double t1;
  std::size_t steps;       // solver steps, or recursion depth for the discrete variant
  std::size_t peak_live;   // peak live tracked buffers during forward + backward
};

/// Recursion depth used for the discrete variant at end time t1.
inline std::size_t discrete_depth(double t1) { return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(t1))); }

/// Peak live buffer count for one forward + backward pass per variant and t1.
/// The continuous variants take t1 solver steps of unit size, the discrete
/// variant a recursion of depth t1.
inline std::vector<MemRow> memory_report(const ModelInput& in, const Split& split, const TrainConfig& base,
                                         const std::vector<Variant>& variants, const std::vector<double>& t_list) {
  if (t_list.empty()) throw DomainError("mem-report: empty t_list");
  std::vector<MemRow> rows;
  for (Variant v : variants) {
    for (double t1 : t_list) {
      TrainConfig c = base;
      c.variant = v;
      c.t1 = t1;
      c.solver = SolverMethod::FixedRk4;
      c.solver_steps = discrete_depth(t1);
      c.discrete_steps = discrete_depth(t1);
      c.validate();
      std::mt19937_64 rng(c.seed);
      const ModelParams p = init_params(c, in.features.cols(), in.num_classes, in.num_nodes(), rng);
      std::size_t peak = 0;
      {
        alloc::PeakScope scope;
        const LossAndGradient lg = loss_and_gradient(p, in, c, split.train);
        peak = scope.peak_above_base();
      }
      rows.push_back({v, t1, c.discrete_steps, peak});
    }
  }
  return rows;
}

/// Least-squares slope of y against x.
inline double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fitted_slope: need at least two paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw DomainError("fitted_slope: x values are all equal");
  return sxy / sxx;
}

}  // namespace cgnn
