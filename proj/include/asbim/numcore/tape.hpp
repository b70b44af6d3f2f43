#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "asbim/error.hpp"

namespace asbim::numcore {

class Tape;

/// Handle to a scalar recorded on a Tape. Cheap to copy; only valid while its tape lives.
class Var {
 public:
  Var() = default;
  double value() const;
  std::size_t index() const { return index_; }
  const Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}
  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

class Adjoints;

/// Scalar reverse-mode tape. Every node has at most two parents, so each record
/// stores the two local partials and the backward sweep is a single reverse pass.
/// Single-threaded; never share an instance.
class Tape {
 public:
  Var variable(double value) { return push(value, kNone, 0.0, kNone, 0.0, true); }
  Var constant(double value) { return push(value, kNone, 0.0, kNone, 0.0, false); }

  Var unary(const Var& a, double value, double da) {
    check(a);
    return push(value, a.index_, da, kNone, 0.0, false);
  }
  Var binary(const Var& a, const Var& b, double value, double da, double db) {
    check(a);
    check(b);
    return push(value, a.index_, da, b.index_, db, false);
  }

  double value(std::size_t i) const { return nodes_[i].value; }
  bool is_variable(std::size_t i) const { return nodes_[i].leaf_variable; }
  std::size_t size() const { return nodes_.size(); }

  /// d(output)/d(node) for every node recorded before `output`.
  Adjoints gradient(const Var& output) const;

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  struct Node {
    double value;
    std::size_t lhs;
    double d_lhs;
    std::size_t rhs;
    double d_rhs;
    bool leaf_variable;
  };

  Var push(double value, std::size_t lhs, double dl, std::size_t rhs, double dr, bool leaf) {
    nodes_.push_back({value, lhs, dl, rhs, dr, leaf});
    return Var(this, nodes_.size() - 1);
  }

  void check(const Var& v) const {
    if (v.tape_ != this || v.index_ >= nodes_.size()) throw InternalError("variable is not on this tape");
  }

  std::vector<Node> nodes_;
  friend class Adjoints;
};

/// Result of a backward sweep.
class Adjoints {
 public:
  /// ∂output/∂v. Throws InternalError when `v` was not registered as a variable on the same tape.
  double wrt(const Var& v) const {
    if (v.tape() != tape_ || v.index() >= adjoint_.size() || !tape_->is_variable(v.index())) {
      throw InternalError("parameter is not a variable on this tape");
    }
    return adjoint_[v.index()];
  }

 private:
  friend class Tape;
  Adjoints(const Tape* tape, std::vector<double> adj) : tape_(tape), adjoint_(std::move(adj)) {}
  const Tape* tape_;
  std::vector<double> adjoint_;
};

inline double Var::value() const {
  if (tape_ == nullptr) throw InternalError("unbound variable");
  return tape_->value(index_);
}

inline Adjoints Tape::gradient(const Var& output) const {
  check(output);
  std::vector<double> adj(output.index_ + 1, 0.0);
  adj[output.index_] = 1.0;
  for (std::size_t i = output.index_ + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (adj[i] == 0.0) continue;
    if (n.lhs != kNone) adj[n.lhs] += adj[i] * n.d_lhs;
    if (n.rhs != kNone) adj[n.rhs] += adj[i] * n.d_rhs;
  }
  return Adjoints(this, std::move(adj));
}

namespace tape_detail {
inline Tape& tape_of(const Var& v) {
  if (v.tape() == nullptr) throw InternalError("unbound variable");
  return *const_cast<Tape*>(v.tape());
}
}  // namespace tape_detail

inline Var operator+(const Var& a, const Var& b) {
  return tape_detail::tape_of(a).binary(a, b, a.value() + b.value(), 1.0, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
  return tape_detail::tape_of(a).binary(a, b, a.value() - b.value(), 1.0, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
  return tape_detail::tape_of(a).binary(a, b, a.value() * b.value(), b.value(), a.value());
}
inline Var operator/(const Var& a, const Var& b) {
  const double bv = b.value();
  return tape_detail::tape_of(a).binary(a, b, a.value() / bv, 1.0 / bv, -a.value() / (bv * bv));
}
inline Var operator-(const Var& a) { return tape_detail::tape_of(a).unary(a, -a.value(), -1.0); }

inline Var operator+(const Var& a, double c) { return tape_detail::tape_of(a).unary(a, a.value() + c, 1.0); }
inline Var operator+(double c, const Var& a) { return a + c; }
inline Var operator-(const Var& a, double c) { return tape_detail::tape_of(a).unary(a, a.value() - c, 1.0); }
inline Var operator-(double c, const Var& a) { return tape_detail::tape_of(a).unary(a, c - a.value(), -1.0); }
inline Var operator*(const Var& a, double c) { return tape_detail::tape_of(a).unary(a, a.value() * c, c); }
inline Var operator*(double c, const Var& a) { return a * c; }
inline Var operator/(const Var& a, double c) { return tape_detail::tape_of(a).unary(a, a.value() / c, 1.0 / c); }

inline Var exp(const Var& a) {
  const double e = std::exp(a.value());
  return tape_detail::tape_of(a).unary(a, e, e);
}
inline Var relu(const Var& a) {
  const double v = a.value();
  return tape_detail::tape_of(a).unary(a, v > 0.0 ? v : 0.0, v > 0.0 ? 1.0 : 0.0);
}
inline Var sigmoid(const Var& a) {
  const double v = a.value();
  const double s = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  return tape_detail::tape_of(a).unary(a, s, s * (1.0 - s));
}
inline Var square(const Var& a) { return a * a; }

}  // namespace asbim::numcore
