#pragma once

#include "toiv/ad/scalar.hpp"

#include <cmath>

namespace toiv {

//! 2D vector over a simulator scalar.
template <Scalar T>
struct Vec2 {
  T x{};
  T y{};

  Vec2() = default;
  Vec2(T x_, T y_) : x(std::move(x_)), y(std::move(y_)) {}

  template <Scalar U>
    requires(!std::same_as<T, U> && std::convertible_to<U, T>)
  explicit Vec2(const Vec2<U>& o) : x(o.x), y(o.y) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2 operator*(const T& s) const { return {x * s, y * s}; }
  Vec2 operator/(const T& s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) { return *this = *this + o; }
  Vec2& operator-=(const Vec2& o) { return *this = *this - o; }

  T dot(const Vec2& o) const { return x * o.x + y * o.y; }
  T squared_norm() const { return x * x + y * y; }
  T norm() const { return sqrt_of(squared_norm()); }

  Vec2<double> values() const { return {value_of(x), value_of(y)}; }
};

template <Scalar T>
Vec2<T> operator*(const T& s, const Vec2<T>& v) {
  return v * s;
}

using Vec2d = Vec2<double>;

} // namespace toiv
