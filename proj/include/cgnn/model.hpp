#pragma once

// Node classification model: affine encoder, continuous (or discrete)
// propagation, ReLU + softmax decoder, masked cross-entropy, and a full-batch
// training loop with Adam or RMSprop.

#include "cgnn/closed_form.hpp"
#include "cgnn/core.hpp"
#include "cgnn/datasets.hpp"
#include "cgnn/dynamics.hpp"
#include "cgnn/graph.hpp"
#include "cgnn/spectral.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cgnn {

enum class Variant { Cgnn, CgnnWeight, CgnnDiscrete, CgnnNoRestart };
enum class OptimizerKind { Adam, RmsProp };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::Cgnn: return "cgnn";
    case Variant::CgnnWeight: return "cgnn-weight";
    case Variant::CgnnDiscrete: return "cgnn-discrete";
    case Variant::CgnnNoRestart: return "cgnn-no-restart";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "cgnn") return Variant::Cgnn;
  if (s == "cgnn-weight") return Variant::CgnnWeight;
  if (s == "cgnn-discrete") return Variant::CgnnDiscrete;
  if (s == "cgnn-no-restart") return Variant::CgnnNoRestart;
  throw ParseError("unknown variant '" + std::string(s) + "'");
}

inline std::string to_string(OptimizerKind k) { return k == OptimizerKind::Adam ? "adam" : "rmsprop"; }

inline OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "adam") return OptimizerKind::Adam;
  if (s == "rmsprop") return OptimizerKind::RmsProp;
  throw ParseError("unknown optimizer '" + std::string(s) + "'");
}

struct TrainConfig {
  double lr = 0.01;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double weight_decay = 5e-4;
  double dropout = 0.5;          // input dropout in the encoder
  double decoder_dropout = 0.0;  // after the decoder ReLU
  std::size_t epochs = 400;
  double beta = 0.5;             // orthogonality retraction coefficient
  double t1 = 10.0;
  std::uint64_t seed = 0;
  Variant variant = Variant::Cgnn;
  Index hidden = 16;
  double alpha_init = 0.95;
  double gamma = 0.5;
  bool per_node_alpha = true;
  bool augment = true;
  bool encoder_relu = false;
  bool row_normalize = false;
  std::size_t solver_steps = 40;
  SolverMethod solver = SolverMethod::FixedRk4;
  double rtol = 1e-3;
  double atol = 1e-4;
  std::size_t discrete_steps = 50;

  void validate() const {
    if (!(lr >= 0.0)) throw DomainError("config: lr must be >= 0");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw DomainError("config: dropout must lie in [0, 1)");
    if (!(decoder_dropout >= 0.0 && decoder_dropout < 1.0)) {
      throw DomainError("config: decoder_dropout must lie in [0, 1)");
    }
    if (epochs < 1) throw DomainError("config: epochs must be >= 1");
    if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("config: beta must lie in (0, 1]");
    if (!(t1 >= 0.0)) throw DomainError("config: t1 must be >= 0");
    if (hidden < 1) throw DomainError("config: hidden must be >= 1");
    if (!(alpha_init > 0.0 && alpha_init < 1.0)) throw DomainError("config: alpha_init must lie in (0, 1)");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("config: gamma must lie in (0, 1]");
    if (!(weight_decay >= 0.0)) throw DomainError("config: weight_decay must be >= 0");
    if (solver_steps < 1) throw DomainError("config: solver_steps must be >= 1");
  }

  Index state_width() const { return augment && variant != Variant::CgnnDiscrete ? 2 * hidden : hidden; }

  SolverConfig solver_config() const {
    if (solver == SolverMethod::AdaptiveRk45) return SolverConfig::adaptive(t1, rtol, atol);
    return SolverConfig::fixed(t1, solver_steps);
  }
};

struct ModelParams {
  Matrix enc_weight;  // |F| x d
  Vector enc_bias;    // d
  Matrix dec_weight;  // d x c
  Vector dec_bias;    // c
  Vector alpha_raw;   // per node, or a single shared entry
  std::optional<WeightSpec> weight_spec;
};

struct Metrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
};

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Per-node alpha in (0, 1). The logistic output is kept strictly inside the
/// open interval even where it would round to 0 or 1.
inline Vector materialize_alpha(const ModelParams& p, std::size_t num_nodes) {
  static constexpr double lo = std::numeric_limits<double>::min();
  static constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon();
  auto sig = [](double x) { return std::clamp(logistic(x), lo, hi); };
  if (p.alpha_raw.size() == 1) return Vector::Constant(static_cast<Index>(num_nodes), sig(p.alpha_raw[0]));
  if (static_cast<std::size_t>(p.alpha_raw.size()) != num_nodes) {
    throw DimensionError("alpha has " + std::to_string(p.alpha_raw.size()) + " entries for " +
                         std::to_string(num_nodes) + " nodes");
  }
  return p.alpha_raw.unaryExpr(sig);
}

/// Glorot-uniform weights, zero biases, alpha at `alpha_init`, orthogonal U and
/// M = 0.9 for the weighted variant.
inline ModelParams init_params(const TrainConfig& cfg, Index num_features, Index num_classes, std::size_t num_nodes,
                               std::mt19937_64& rng) {
  auto glorot = [&](Index rows, Index cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = u(rng);
    return m;
  };
  ModelParams p;
  p.enc_weight = glorot(num_features, cfg.hidden);
  p.enc_bias = Vector::Zero(cfg.hidden);
  p.dec_weight = glorot(cfg.hidden, num_classes);
  p.dec_bias = Vector::Zero(num_classes);
  p.alpha_raw = Vector::Constant(cfg.per_node_alpha ? static_cast<Index>(num_nodes) : 1, logit(cfg.alpha_init));
  if (cfg.variant == Variant::CgnnWeight) {
    const Index w = cfg.state_width();
    p.weight_spec = WeightSpec{orthogonal_init(w, rng), Vector::Constant(w, 0.9)};
  }
  return p;
}

// ---------------------------------------------------------------------------
// Flat parameter packing (optimizer state and finite-difference checks)

inline Index param_count(const ModelParams& p) {
  Index n = p.enc_weight.size() + p.enc_bias.size() + p.dec_weight.size() + p.dec_bias.size() + p.alpha_raw.size();
  if (p.weight_spec) n += p.weight_spec->basis.size() + p.weight_spec->eigen_params.size();
  return n;
}

namespace detail {

template <class Params, class Fn>
void for_each_tensor(Params& p, Fn&& fn) {
  fn(p.enc_weight.data(), p.enc_weight.size());
  fn(p.enc_bias.data(), p.enc_bias.size());
  fn(p.dec_weight.data(), p.dec_weight.size());
  fn(p.dec_bias.data(), p.dec_bias.size());
  fn(p.alpha_raw.data(), p.alpha_raw.size());
  if (p.weight_spec) {
    fn(p.weight_spec->basis.data(), p.weight_spec->basis.size());
    fn(p.weight_spec->eigen_params.data(), p.weight_spec->eigen_params.size());
  }
}

}  // namespace detail

inline Vector pack(const ModelParams& p) {
  Vector out(param_count(p));
  Index off = 0;
  detail::for_each_tensor(p, [&](const double* d, Index n) {
    out.segment(off, n) = Eigen::Map<const Vector>(d, n);
    off += n;
  });
  return out;
}

inline void unpack(const Vector& flat, ModelParams& p) {
  if (flat.size() != param_count(p)) throw DimensionError("unpack: parameter vector has the wrong length");
  Index off = 0;
  detail::for_each_tensor(p, [&](double* d, Index n) {
    Eigen::Map<Vector>(d, n) = flat.segment(off, n);
    off += n;
  });
}

// ---------------------------------------------------------------------------
// Encoder / decoder / loss

/// Inverted dropout mask: entries are 0 or 1/(1-p). Empty when p == 0.
inline Matrix dropout_mask(Index rows, Index cols, double p, std::mt19937_64& rng) {
  if (p <= 0.0) return Matrix();
  std::bernoulli_distribution keep(1.0 - p);
  const double scale = 1.0 / (1.0 - p);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = keep(rng) ? scale : 0.0;
  return m;
}

/// E = dropout(X) * enc_weight + enc_bias. `mask` may be empty (no dropout).
inline Matrix encode(const ModelParams& p, const Matrix& x, const Matrix& mask = Matrix(), bool relu = false) {
  if (x.cols() != p.enc_weight.rows()) {
    throw DimensionError("encode: features have " + std::to_string(x.cols()) + " columns, encoder expects " +
                         std::to_string(p.enc_weight.rows()));
  }
  Matrix e = mask.size() ? Matrix(x.cwiseProduct(mask) * p.enc_weight) : Matrix(x * p.enc_weight);
  e.rowwise() += p.enc_bias.transpose();
  if (relu) e = e.cwiseMax(0.0);
  return e;
}

inline Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

inline Matrix decoder_logits(const ModelParams& p, const Matrix& relu_h) {
  Matrix logits = relu_h * p.dec_weight;
  logits.rowwise() += p.dec_bias.transpose();
  return logits;
}

/// softmax(ReLU(H) * dec_weight + dec_bias), row-wise.
inline Matrix decode(const ModelParams& p, const Matrix& h) {
  if (h.cols() != p.dec_weight.rows()) {
    throw DimensionError("decode: states have width " + std::to_string(h.cols()) + ", decoder expects " +
                         std::to_string(p.dec_weight.rows()));
  }
  return softmax_rows(decoder_logits(p, h.cwiseMax(0.0)));
}

inline double l2_penalty(const ModelParams& p, double weight_decay) {
  return weight_decay * (p.enc_weight.squaredNorm() + p.dec_weight.squaredNorm());
}

/// Mean negative log-likelihood over `mask` plus the L2 penalty on the
/// encoder and decoder weights.
inline double loss(const Matrix& probs, std::span<const int> labels, std::span<const std::size_t> mask,
                   const ModelParams& p, double weight_decay) {
  if (mask.empty()) throw DomainError("loss: empty mask");
  double nll = 0.0;
  for (std::size_t i : mask) {
    const double prob = probs(static_cast<Index>(i), labels[i]);
    nll -= std::log(std::max(prob, std::numeric_limits<double>::min()));
  }
  return nll / static_cast<double>(mask.size()) + l2_penalty(p, weight_decay);
}

/// Fraction of masked nodes whose argmax class matches the label; ties go
/// to the lowest class index.
inline double accuracy(const Matrix& probs, std::span<const int> labels, std::span<const std::size_t> mask) {
  if (mask.empty()) throw DomainError("accuracy: empty mask");
  std::size_t correct = 0;
  for (std::size_t i : mask) {
    Index best = 0;
    const auto row = probs.row(static_cast<Index>(i));
    for (Index c = 1; c < row.size(); ++c)
      if (row[c] > row[best]) best = c;
    if (best == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(mask.size());
}

// ---------------------------------------------------------------------------
// Forward / backward

/// Graph and features prepared once per run.
struct ModelInput {
  std::shared_ptr<const SymNormAdj> adjacency;
  Matrix features;
  std::vector<int> labels;
  Index num_classes = 0;

  std::size_t num_nodes() const { return adjacency->dim(); }

  static ModelInput from_dataset(const Dataset& ds, bool normalize_rows = false) {
    ModelInput in;
    in.adjacency = std::make_shared<const SymNormAdj>(build_sym_norm(ds.graph));
    in.features = normalize_rows ? row_normalize(ds.features) : ds.features;
    in.labels = ds.labels;
    in.num_classes = static_cast<Index>(ds.num_classes());
    return in;
  }
};

/// Random masks for one training step; empty matrices mean "no dropout".
struct DropoutMasks {
  Matrix input;
  Matrix decoder;
};

struct ForwardCache {
  Matrix encoded;      // E before augmentation
  Matrix hidden;       // H(t1) after deaugmentation
  Matrix relu_hidden;  // ReLU(hidden) with decoder dropout applied
  Matrix probs;
  NodeStates final_state;                       // augmented H(t1), continuous variants
  std::vector<alloc::Tracked<Matrix>> trajectory;  // H_0 .. H_{n-1}, discrete variant
};

inline OdeSpec make_ode_spec(const ModelParams& p, const ModelInput& in, const TrainConfig& cfg, Matrix restart) {
  OdeSpec spec;
  spec.op = PropagationOperator(in.adjacency, materialize_alpha(p, in.num_nodes()), cfg.gamma);
  spec.restart = std::move(restart);
  spec.use_restart = cfg.variant != Variant::CgnnNoRestart;
  if (cfg.variant == Variant::CgnnWeight) {
    if (!p.weight_spec) throw DomainError("cgnn-weight variant requires a weight spec");
    spec.weight = p.weight_spec;
  }
  return spec;
}

/// Propagates E for the configured variant and returns the de-augmented states.
inline Matrix propagate(const ModelParams& p, const ModelInput& in, const TrainConfig& cfg, const Matrix& e,
                        ForwardCache* cache = nullptr) {
  if (cfg.variant == Variant::CgnnDiscrete) {
    const PropagationOperator op(in.adjacency, materialize_alpha(p, in.num_nodes()), cfg.gamma);
    Matrix h = e;
    Matrix next(e.rows(), e.cols());
    if (cache) cache->trajectory.reserve(cfg.discrete_steps);
    for (std::size_t k = 0; k < cfg.discrete_steps; ++k) {
      if (cache) cache->trajectory.emplace_back(h);
      op.apply(h, next);
      h = next + e;
    }
    return h;
  }
  const Matrix h0 = cfg.augment ? augment(e) : e;
  const OdeSpec spec = make_ode_spec(p, in, cfg, h0);
  NodeStates out = integrate(spec, NodeStates{h0, 0.0}, cfg.solver_config());
  Matrix h = cfg.augment ? deaugment(out.values) : out.values;
  if (cache) cache->final_state = std::move(out);
  return h;
}

/// Class probabilities in evaluation mode (no dropout).
inline Matrix forward(const ModelParams& p, const ModelInput& in, const TrainConfig& cfg) {
  const Matrix e = encode(p, in.features, Matrix(), cfg.encoder_relu);
  return decode(p, propagate(p, in, cfg, e));
}

struct LossAndGradient {
  double loss = 0.0;
  ModelParams grad;  // same layout as the parameters
  Matrix probs;
};

/// Loss over `mask` and its gradient with respect to every parameter. The
/// continuous variants use the adjoint pass; the discrete variant
/// backpropagates through its stored trajectory.
inline LossAndGradient loss_and_gradient(const ModelParams& p, const ModelInput& in, const TrainConfig& cfg,
                                         std::span<const std::size_t> mask, const DropoutMasks& masks = {}) {
  if (mask.empty()) throw DomainError("loss_and_gradient: empty mask");
  ForwardCache cache;
  const Matrix x_in = masks.input.size() ? Matrix(in.features.cwiseProduct(masks.input)) : in.features;
  Matrix pre_enc = x_in * p.enc_weight;
  pre_enc.rowwise() += p.enc_bias.transpose();
  cache.encoded = cfg.encoder_relu ? Matrix(pre_enc.cwiseMax(0.0)) : pre_enc;
  cache.hidden = propagate(p, in, cfg, cache.encoded, &cache);
  cache.relu_hidden = cache.hidden.cwiseMax(0.0);
  if (masks.decoder.size()) cache.relu_hidden = cache.relu_hidden.cwiseProduct(masks.decoder);
  cache.probs = softmax_rows(decoder_logits(p, cache.relu_hidden));

  LossAndGradient out;
  out.loss = loss(cache.probs, in.labels, mask, p, cfg.weight_decay);
  out.grad = p;

  const Index n = static_cast<Index>(in.num_nodes());
  const double inv_m = 1.0 / static_cast<double>(mask.size());
  Matrix dlogits = Matrix::Zero(n, cache.probs.cols());
  for (std::size_t i : mask) {
    const Index r = static_cast<Index>(i);
    dlogits.row(r) = cache.probs.row(r) * inv_m;
    dlogits(r, in.labels[i]) -= inv_m;
  }
  out.grad.dec_weight = cache.relu_hidden.transpose() * dlogits + 2.0 * cfg.weight_decay * p.dec_weight;
  out.grad.dec_bias = dlogits.colwise().sum().transpose();

  Matrix dhidden = dlogits * p.dec_weight.transpose();
  if (masks.decoder.size()) dhidden = dhidden.cwiseProduct(masks.decoder);
  dhidden = (cache.hidden.array() > 0.0).select(dhidden, 0.0);

  Matrix dencoded;
  Vector dalpha;
  if (cfg.variant == Variant::CgnnDiscrete) {
    const PropagationOperator op(in.adjacency, materialize_alpha(p, in.num_nodes()), cfg.gamma);
    Matrix g = dhidden;
    dencoded = Matrix::Zero(g.rows(), g.cols());
    dalpha = Vector::Zero(n);
    Matrix kh(g.rows(), g.cols()), next(g.rows(), g.cols());
    for (std::size_t k = cache.trajectory.size(); k > 0; --k) {
      const Matrix& prev = *cache.trajectory[k - 1];
      op.apply_kernel(prev, kh);
      dalpha += g.cwiseProduct(kh).rowwise().sum();
      dencoded += g;
      op.apply_transpose(g, next);
      g = next;
    }
    dencoded += g;
  } else {
    const Matrix grad_out = cfg.augment ? augment(dhidden) : dhidden;
    const Matrix h0 = cfg.augment ? augment(cache.encoded) : cache.encoded;
    const OdeSpec spec = make_ode_spec(p, in, cfg, h0);
    AdjointGradients g = adjoint_from_final(spec, cache.final_state, cfg.solver_config(), grad_out);
    Matrix dh0 = g.initial + g.restart;
    dencoded = cfg.augment ? Matrix(dh0.leftCols(cfg.hidden)) : dh0;
    dalpha = g.alpha;
    if (cfg.variant == Variant::CgnnWeight) {
      out.grad.weight_spec->basis = g.basis;
      out.grad.weight_spec->eigen_params = g.eigen_params;
    }
  }
  if (cfg.encoder_relu) dencoded = (pre_enc.array() > 0.0).select(dencoded, 0.0);

  out.grad.enc_weight = x_in.transpose() * dencoded + 2.0 * cfg.weight_decay * p.enc_weight;
  out.grad.enc_bias = dencoded.colwise().sum().transpose();

  const Vector alpha = materialize_alpha(p, in.num_nodes());
  const Vector dsig = alpha.array() * (1.0 - alpha.array());
  if (p.alpha_raw.size() == 1) {
    out.grad.alpha_raw = Vector::Constant(1, dalpha.dot(dsig));
  } else {
    out.grad.alpha_raw = dalpha.cwiseProduct(dsig);
  }
  out.probs = std::move(cache.probs);
  return out;
}

// ---------------------------------------------------------------------------
// Optimizers over the packed parameter vector

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, Index size)
      : kind_(kind), lr_(lr), m_(Vector::Zero(size)), v_(Vector::Zero(size)) {}

  void step(Vector& params, const Vector& grad) {
    ++t_;
    if (kind_ == OptimizerKind::Adam) {
      constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
      m_ = b1 * m_ + (1.0 - b1) * grad;
      v_ = b2 * v_ + (1.0 - b2) * grad.cwiseAbs2();
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
      params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps);
    } else {
      constexpr double rho = 0.99, eps = 1e-8;
      v_ = rho * v_ + (1.0 - rho) * grad.cwiseAbs2();
      params.array() -= lr_ * grad.array() / (v_.array().sqrt() + eps);
    }
  }

 private:
  OptimizerKind kind_;
  double lr_;
  Vector m_, v_;
  std::size_t t_ = 0;
};

/// Clamps M into [eps, 1 - eps] and applies one retraction step to U.
inline void project_weight(ModelParams& p, double beta) {
  if (!p.weight_spec) return;
  p.weight_spec->eigen_params = clamped_eigen_params(*p.weight_spec);
  p.weight_spec->basis = orthogonality_retraction(p.weight_spec->basis, beta);
}

// ---------------------------------------------------------------------------
// Training

struct TrainResult {
  ModelParams best_params;
  ModelParams final_params;
  std::vector<Metrics> history;
  double best_val_acc = -1.0;
  double test_acc_at_best_val = 0.0;
  std::size_t best_epoch = 0;
};

inline double evaluate(const ModelParams& p, const ModelInput& in, const TrainConfig& cfg,
                       std::span<const std::size_t> mask) {
  return accuracy(forward(p, in, cfg), in.labels, mask);
}

using EpochCallback = std::function<void(const Metrics&)>;

/// Full-batch training with best-validation checkpointing. Deterministic for
/// a given seed, configuration and input.
inline TrainResult train(const ModelInput& in, const Split& split, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (split.train.empty() || split.val.empty() || split.test.empty()) {
    throw DomainError("train: train, val and test splits must be non-empty");
  }
  std::mt19937_64 rng(cfg.seed);
  ModelParams params = init_params(cfg, in.features.cols(), in.num_classes, in.num_nodes(), rng);
  Vector flat = pack(params);
  Optimizer opt(cfg.optimizer, cfg.lr, flat.size());

  TrainResult result;
  result.best_params = params;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    DropoutMasks masks;
    masks.input = dropout_mask(in.features.rows(), in.features.cols(), cfg.dropout, rng);
    masks.decoder = dropout_mask(in.features.rows(), cfg.hidden, cfg.decoder_dropout, rng);
    LossAndGradient lg;
    try {
      lg = loss_and_gradient(params, in, cfg, split.train, masks);
    } catch (const NumericError& e) {
      throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what());
    }
    if (!std::isfinite(lg.loss)) {
      throw NumericError("epoch " + std::to_string(epoch) + ": non-finite training loss");
    }
    opt.step(flat, pack(lg.grad));
    unpack(flat, params);
    project_weight(params, cfg.beta);
    flat = pack(params);

    const Matrix probs = forward(params, in, cfg);
    Metrics m;
    m.epoch = epoch;
    m.train_loss = lg.loss;
    m.train_acc = accuracy(probs, in.labels, split.train);
    m.val_acc = accuracy(probs, in.labels, split.val);
    m.test_acc = accuracy(probs, in.labels, split.test);
    result.history.push_back(m);
    if (m.val_acc > result.best_val_acc) {
      result.best_val_acc = m.val_acc;
      result.test_acc_at_best_val = m.test_acc;
      result.best_epoch = epoch;
      result.best_params = params;
    }
    if (on_epoch) on_epoch(m);
  }
  result.final_params = std::move(params);
  return result;
}

}  // namespace cgnn
