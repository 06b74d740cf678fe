#pragma once

// Shared numeric types, error classes and the live-buffer registry used by the
// memory report.

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace cgnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of two operands disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the documented domain (alpha out of (0,1), self-loop, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Non-finite state, failed decomposition, step budget exhausted.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or configuration.
class ParseError : public Error {
 public:
  using Error::Error;
};

inline std::string shape_str(Index rows, Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

template <class A, class B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape " + shape_str(a.rows(), a.cols()) +
                         " does not match " + shape_str(b.rows(), b.cols()));
  }
}

namespace alloc {

/// Counts live state buffers held by solvers and trajectories. Only buffers
/// wrapped in `Tracked` are counted; Eigen expression temporaries are not.
struct Registry {
  std::size_t live = 0;
  std::size_t peak = 0;

  void acquire() noexcept {
    ++live;
    if (live > peak) peak = live;
  }
  void release() noexcept { --live; }
  void reset_peak() noexcept { peak = live; }
};

inline Registry& registry() noexcept {
  thread_local Registry instance;
  return instance;
}

/// Value wrapper that registers itself for its lifetime.
template <class T>
class Tracked {
 public:
  Tracked() { registry().acquire(); }
  explicit Tracked(T value) : value_(std::move(value)) { registry().acquire(); }
  Tracked(const Tracked& other) : value_(other.value_) { registry().acquire(); }
  Tracked(Tracked&& other) noexcept : value_(std::move(other.value_)) { registry().acquire(); }
  Tracked& operator=(const Tracked&) = default;
  Tracked& operator=(Tracked&&) noexcept = default;
  ~Tracked() { registry().release(); }

  T& operator*() noexcept { return value_; }
  const T& operator*() const noexcept { return value_; }
  T* operator->() noexcept { return &value_; }
  const T* operator->() const noexcept { return &value_; }

 private:
  T value_;
};

/// Resets the peak on construction and reports the high-water mark above the
/// starting live count.
class PeakScope {
 public:
  PeakScope() : base_(registry().live) { registry().reset_peak(); }
  std::size_t peak_above_base() const noexcept { return registry().peak - base_; }

 private:
  std::size_t base_;
};

}  // namespace alloc
}  // namespace cgnn
