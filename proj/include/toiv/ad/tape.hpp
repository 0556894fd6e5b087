#pragma once

/**
 * @file tape.hpp
 * @brief Scalar reverse-mode automatic differentiation.
 *
 * Every arithmetic operation on tracked values appends one entry to a Tape:
 * the operand slots, the forward result and the local partials. backward()
 * walks the entries in reverse and accumulates adjoints with the chain rule.
 *
 * A Var either lives on a tape (it has a slot index) or is a constant, in
 * which case it carries no tape pointer and never receives an adjoint.
 * Comparisons look at forward values only; branch predicates are therefore
 * not differentiated and gradients are those of the branch actually taken.
 *
 * A tape is meant to be used by one thread, for one rollout, then dropped.
 */

#include "toiv/errors.hpp"

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace toiv::ad {

enum class Op : std::uint8_t { Input, Add, Sub, Mul, Div, Neg, Sqrt, Square };

class Tape;

//! Tracked scalar. Cheap to copy; refers to its tape by pointer.
class Var {
public:
  static constexpr std::int32_t kConstant = -1;

  Var() = default;
  Var(double value) : value_(value) {} // NOLINT: implicit lift of constants

  double value() const noexcept { return value_; }
  std::int32_t slot() const noexcept { return slot_; }
  Tape* tape() const noexcept { return tape_; }
  bool is_constant() const noexcept { return tape_ == nullptr; }

  auto operator<=>(const Var& o) const noexcept { return value_ <=> o.value_; }
  bool operator==(const Var& o) const noexcept { return value_ == o.value_; }

private:
  friend class Tape;
  Var(double value, Tape* tape, std::int32_t slot) : value_(value), slot_(slot), tape_(tape) {}

  double value_ = 0.0;
  std::int32_t slot_ = kConstant;
  Tape* tape_ = nullptr;
};

//! Adjoints of the lifted inputs, in lift order.
class GradientMap {
public:
  GradientMap() = default;
  explicit GradientMap(std::vector<double> adjoints) : adjoints_(std::move(adjoints)) {}

  //! Adjoint of the i-th lifted input.
  double operator[](std::size_t input_index) const { return adjoints_.at(input_index); }
  std::size_t size() const noexcept { return adjoints_.size(); }
  const std::vector<double>& values() const noexcept { return adjoints_; }

private:
  std::vector<double> adjoints_;
};

class Tape {
public:
  //! One recorded elementary operation.
  struct Entry {
    Op op = Op::Input;
    std::int32_t lhs = Var::kConstant;
    std::int32_t rhs = Var::kConstant;
    double lhs_value = 0.0; //!< operand value at record time (used for constants on replay)
    double rhs_value = 0.0;
    double result = 0.0;
    double d_lhs = 0.0;
    double d_rhs = 0.0;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void reserve(std::size_t n) { entries_.reserve(n); }

  //! Registers a new differentiable input.
  Var lift(double value) {
    const auto slot = push({Op::Input, Var::kConstant, Var::kConstant, value, 0.0, value, 0.0, 0.0});
    input_slots_.push_back(slot);
    return {value, this, slot};
  }

  //! Records a unary or binary result. Operands that are constants are
  //! remembered by value only.
  Var record(Op op, const Var& a, const Var& b, double result, double d_a, double d_b) {
    Entry e;
    e.op = op;
    e.lhs = own(a);
    e.rhs = own(b);
    e.lhs_value = a.value();
    e.rhs_value = b.value();
    e.result = result;
    e.d_lhs = d_a;
    e.d_rhs = d_b;
    return {result, this, push(e)};
  }

  //! Reverse sweep seeded with d(output)/d(output) = 1.
  GradientMap backward(const Var& output) const {
    if (output.tape() != this || output.slot() < 0 ||
        static_cast<std::size_t>(output.slot()) >= entries_.size()) {
      throw std::logic_error("backward: output was not recorded on this tape");
    }
    std::vector<double> adj(static_cast<std::size_t>(output.slot()) + 1, 0.0);
    adj.back() = 1.0;
    for (std::int32_t k = output.slot(); k >= 0; --k) {
      const double a = adj[static_cast<std::size_t>(k)];
      if (a == 0.0) {
        continue;
      }
      const Entry& e = entries_[static_cast<std::size_t>(k)];
      if (e.lhs >= 0) {
        adj[static_cast<std::size_t>(e.lhs)] += a * e.d_lhs;
      }
      if (e.rhs >= 0) {
        adj[static_cast<std::size_t>(e.rhs)] += a * e.d_rhs;
      }
    }
    std::vector<double> grads(input_slots_.size(), 0.0);
    for (std::size_t i = 0; i < input_slots_.size(); ++i) {
      const auto s = static_cast<std::size_t>(input_slots_[i]);
      grads[i] = s < adj.size() ? adj[s] : 0.0;
    }
    return GradientMap(std::move(grads));
  }

  //! Recomputes every forward value from the inputs and recorded constants.
  std::vector<double> replay() const {
    std::vector<double> out(entries_.size());
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      const Entry& e = entries_[k];
      const double a = e.lhs >= 0 ? out[static_cast<std::size_t>(e.lhs)] : e.lhs_value;
      const double b = e.rhs >= 0 ? out[static_cast<std::size_t>(e.rhs)] : e.rhs_value;
      switch (e.op) {
      case Op::Input: out[k] = e.lhs_value; break;
      case Op::Add: out[k] = a + b; break;
      case Op::Sub: out[k] = a - b; break;
      case Op::Mul: out[k] = a * b; break;
      case Op::Div: out[k] = a / b; break;
      case Op::Neg: out[k] = -a; break;
      case Op::Sqrt: out[k] = std::sqrt(a); break;
      case Op::Square: out[k] = a * a; break;
      }
    }
    return out;
  }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t input_count() const noexcept { return input_slots_.size(); }

private:
  std::int32_t push(const Entry& e) {
    if (entries_.size() >= static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
      throw std::length_error("tape: too many entries");
    }
    entries_.push_back(e);
    return static_cast<std::int32_t>(entries_.size() - 1);
  }

  std::int32_t own(const Var& v) const {
    if (v.is_constant()) {
      return Var::kConstant;
    }
    if (v.tape() != this) {
      throw std::logic_error("tape: operands belong to different tapes");
    }
    return v.slot();
  }

  std::vector<Entry> entries_;
  std::vector<std::int32_t> input_slots_;
};

namespace detail {

inline Tape* tape_of(const Var& a, const Var& b) {
  if (a.tape() != nullptr && b.tape() != nullptr && a.tape() != b.tape()) {
    throw std::logic_error("ad: operands belong to different tapes");
  }
  return a.tape() != nullptr ? a.tape() : b.tape();
}

} // namespace detail

inline Var operator+(const Var& a, const Var& b) {
  const double r = a.value() + b.value();
  Tape* t = detail::tape_of(a, b);
  return t ? t->record(Op::Add, a, b, r, 1.0, 1.0) : Var(r);
}

inline Var operator-(const Var& a, const Var& b) {
  const double r = a.value() - b.value();
  Tape* t = detail::tape_of(a, b);
  return t ? t->record(Op::Sub, a, b, r, 1.0, -1.0) : Var(r);
}

inline Var operator*(const Var& a, const Var& b) {
  const double r = a.value() * b.value();
  Tape* t = detail::tape_of(a, b);
  return t ? t->record(Op::Mul, a, b, r, b.value(), a.value()) : Var(r);
}

inline Var operator/(const Var& a, const Var& b) {
  if (b.value() == 0.0) {
    throw DegeneracyError("division by zero");
  }
  const double r = a.value() / b.value();
  Tape* t = detail::tape_of(a, b);
  return t ? t->record(Op::Div, a, b, r, 1.0 / b.value(), -r / b.value()) : Var(r);
}

inline Var operator-(const Var& a) {
  return a.tape() ? a.tape()->record(Op::Neg, a, Var(), -a.value(), -1.0, 0.0) : Var(-a.value());
}

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }
inline Var& operator/=(Var& a, const Var& b) { return a = a / b; }

inline Var sqrt(const Var& a) {
  if (a.value() < 0.0) {
    throw DegeneracyError("sqrt of negative value");
  }
  const double r = std::sqrt(a.value());
  if (!a.tape()) {
    return Var(r);
  }
  // d sqrt(x)/dx is unbounded at 0; callers never take sqrt of an exact zero
  // on a differentiated path (coincident centers are rejected earlier).
  const double d = r > 0.0 ? 0.5 / r : std::numeric_limits<double>::infinity();
  return a.tape()->record(Op::Sqrt, a, Var(), r, d, 0.0);
}

inline Var square(const Var& a) {
  const double r = a.value() * a.value();
  return a.tape() ? a.tape()->record(Op::Square, a, Var(), r, 2.0 * a.value(), 0.0) : Var(r);
}

} // namespace toiv::ad
