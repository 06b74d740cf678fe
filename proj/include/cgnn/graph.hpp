#pragma once

// Graph storage, symmetric normalization and the regularized propagation
// operator A = diag(alpha) * (gamma * I + (1 - gamma) * S).

#include "cgnn/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace cgnn {

/// Undirected edge, stored canonically with u < v.
struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple undirected graph. The constructor enforces the simple-graph
/// contract: no self-loops, no duplicate edges (in either orientation), all
/// indices below `num_nodes`.
class Graph {
 public:
  Graph() = default;

  Graph(std::size_t num_nodes, std::vector<Edge> edges) : num_nodes_(num_nodes) {
    for (auto& e : edges) {
      if (e.u >= num_nodes || e.v >= num_nodes) {
        throw DomainError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                          ") has an index out of range for " + std::to_string(num_nodes) +
                          " nodes");
      }
      if (e.u == e.v) {
        throw DomainError("self-loop on node " + std::to_string(e.u));
      }
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end());
    auto dup = std::adjacent_find(edges.begin(), edges.end());
    if (dup != edges.end()) {
      throw DomainError("duplicate edge (" + std::to_string(dup->u) + ", " +
                        std::to_string(dup->v) + ")");
    }
    edges_ = std::move(edges);
  }

  /// Symmetrizes and deduplicates raw (possibly directed) pairs, e.g. when
  /// both (u,v) and (v,u) are listed. Self-loops are still rejected.
  static Graph from_raw_edges(std::size_t num_nodes, std::vector<Edge> raw) {
    for (auto& e : raw) {
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(raw.begin(), raw.end());
    raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
    return Graph(num_nodes, std::move(raw));
  }

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> deg(num_nodes_, 0);
    for (const auto& e : edges_) {
      ++deg[e.u];
      ++deg[e.v];
    }
    return deg;
  }

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
};

/// One stored entry of a sparse matrix.
struct Triple {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// S = D^{-1/2} Adj D^{-1/2} in compressed-row form. Rows and columns inside a
/// row are in ascending order, so products accumulate in a fixed order.
class SymNormAdj {
 public:
  SymNormAdj() = default;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::vector<Triple> triples() const {
    std::vector<Triple> out;
    out.reserve(nnz());
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        out.push_back({r, cols_[k], values_[k]});
      }
    }
    return out;
  }

  /// out = S * x. `out` must already have the shape of `x` and must not alias it.
  void multiply(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> out) const {
    if (static_cast<std::size_t>(x.rows()) != dim_) {
      throw DimensionError("SymNormAdj::multiply: operand has " + std::to_string(x.rows()) +
                           " rows, operator has dimension " + std::to_string(dim_));
    }
    require_same_shape(x, out, "SymNormAdj::multiply");
    for (Index c = 0; c < x.cols(); ++c) {
      const double* src = x.col(c).data();
      double* dst = out.col(c).data();
      for (std::size_t r = 0; r < dim_; ++r) {
        double acc = 0.0;
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += values_[k] * src[cols_[k]];
        dst[r] = acc;
      }
    }
  }

  Matrix dense() const {
    Matrix m = Matrix::Zero(static_cast<Index>(dim_), static_cast<Index>(dim_));
    for (const auto& t : triples()) m(static_cast<Index>(t.row), static_cast<Index>(t.col)) = t.value;
    return m;
  }

 private:
  friend SymNormAdj build_sym_norm(const Graph& graph);

  std::size_t dim_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> values_;
};

/// Degree-0 nodes get D^{-1/2} = 0, leaving their row and column empty.
inline SymNormAdj build_sym_norm(const Graph& graph) {
  const std::size_t n = graph.num_nodes();
  const auto deg = graph.degrees();
  std::vector<double> inv_sqrt(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (deg[i] > 0) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(deg[i]));
  }

  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& e : graph.edges()) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }

  SymNormAdj s;
  s.dim_ = n;
  s.row_ptr_.assign(1, 0);
  s.row_ptr_.reserve(n + 1);
  s.cols_.reserve(2 * graph.num_edges());
  s.values_.reserve(2 * graph.num_edges());
  for (std::size_t r = 0; r < n; ++r) {
    std::sort(adj[r].begin(), adj[r].end());
    for (auto c : adj[r]) {
      s.cols_.push_back(c);
      s.values_.push_back(inv_sqrt[r] * inv_sqrt[c]);
    }
    s.row_ptr_.push_back(s.cols_.size());
  }
  return s;
}

/// Regularized operator A = diag(alpha) * K with K = gamma * I + (1 - gamma) * S.
/// Never materialized except through `dense()`; the base matrix is shared so
/// copies are cheap.
class PropagationOperator {
 public:
  PropagationOperator() = default;

  PropagationOperator(std::shared_ptr<const SymNormAdj> base, Vector alpha, double gamma)
      : base_(std::move(base)), alpha_(std::move(alpha)), gamma_(gamma) {
    if (!base_) throw DomainError("PropagationOperator: null base matrix");
    if (static_cast<std::size_t>(alpha_.size()) != base_->dim()) {
      throw DimensionError("PropagationOperator: alpha has " + std::to_string(alpha_.size()) +
                           " entries for " + std::to_string(base_->dim()) + " nodes");
    }
    for (Index i = 0; i < alpha_.size(); ++i) {
      if (!(alpha_[i] > 0.0 && alpha_[i] < 1.0)) {
        throw DomainError("alpha[" + std::to_string(i) + "] = " + std::to_string(alpha_[i]) +
                          " is outside (0, 1)");
      }
    }
    // gamma = 1 removes the graph term entirely; allowed for scalar checks.
    if (!(gamma_ > 0.0 && gamma_ <= 1.0)) {
      throw DomainError("gamma = " + std::to_string(gamma_) + " is outside (0, 1]");
    }
  }

  std::size_t num_nodes() const noexcept { return base_ ? base_->dim() : 0; }
  const SymNormAdj& base() const noexcept { return *base_; }
  const std::shared_ptr<const SymNormAdj>& base_ptr() const noexcept { return base_; }
  const Vector& alpha() const noexcept { return alpha_; }
  double gamma() const noexcept { return gamma_; }

  /// out = K * x
  void apply_kernel(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> out) const {
    base_->multiply(x, out);
    out *= (1.0 - gamma_);
    out += gamma_ * x;
  }

  /// out = A * x
  void apply(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> out) const {
    apply_kernel(x, out);
    out.array().colwise() *= alpha_.array();
  }

  /// out = A^T * x = K * diag(alpha) * x
  void apply_transpose(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> out) const {
    Matrix scaled = x;
    scaled.array().colwise() *= alpha_.array();
    apply_kernel(scaled, out);
  }

  Matrix dense() const {
    Matrix k = (1.0 - gamma_) * base_->dense();
    k.diagonal().array() += gamma_;
    return alpha_.asDiagonal() * k;
  }

 private:
  std::shared_ptr<const SymNormAdj> base_;
  Vector alpha_;
  double gamma_ = 0.5;
};

inline PropagationOperator regularize(std::shared_ptr<const SymNormAdj> s, Vector alpha, double gamma) {
  return PropagationOperator(std::move(s), std::move(alpha), gamma);
}

inline PropagationOperator regularize(std::shared_ptr<const SymNormAdj> s, double alpha, double gamma) {
  const auto n = static_cast<Index>(s->dim());
  return PropagationOperator(std::move(s), Vector::Constant(n, alpha), gamma);
}

inline PropagationOperator regularize(const SymNormAdj& s, const Vector& alpha, double gamma) {
  return PropagationOperator(std::make_shared<const SymNormAdj>(s), alpha, gamma);
}

inline PropagationOperator regularize(const SymNormAdj& s, double alpha, double gamma) {
  return regularize(s, Vector::Constant(static_cast<Index>(s.dim()), alpha), gamma);
}

inline Matrix apply(const PropagationOperator& a, const Matrix& h) {
  if (static_cast<std::size_t>(h.rows()) != a.num_nodes()) {
    throw DimensionError("apply: states have " + std::to_string(h.rows()) + " rows for " +
                         std::to_string(a.num_nodes()) + " nodes");
  }
  Matrix out(h.rows(), h.cols());
  a.apply(h, out);
  return out;
}

// ---------------------------------------------------------------------------
// Edge-list text format: "u\tv\n" per edge, 0-based, no header.

namespace detail {

inline std::size_t parse_index(std::string_view field, std::size_t line_no) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError("line " + std::to_string(line_no) + ": expected a non-negative integer, got '" +
                     std::string(field) + "'");
  }
  return value;
}

}  // namespace detail

inline std::vector<Edge> read_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected two tab-separated indices");
    }
    const std::string_view sv(line);
    edges.push_back({detail::parse_index(sv.substr(0, tab), line_no),
                     detail::parse_index(sv.substr(tab + 1), line_no)});
  }
  return edges;
}

inline void write_edge_list(std::ostream& out, const Graph& graph) {
  for (const auto& e : graph.edges()) out << e.u << '\t' << e.v << '\n';
}

}  // namespace cgnn
