#pragma once

#include "toiv/ad/tape.hpp"

#include <cmath>
#include <concepts>
#include <type_traits>

namespace toiv {

//! Scalar types the simulator is instantiated with: plain doubles for
//! forward-only evaluation, ad::Var when a gradient is wanted, long double
//! for high-precision finite-difference probes.
template <class T>
concept Scalar = std::same_as<T, double> || std::same_as<T, long double> || std::same_as<T, ad::Var>;

inline double value_of(double x) noexcept { return x; }
inline double value_of(long double x) noexcept { return static_cast<double>(x); }
inline double value_of(const ad::Var& x) noexcept { return x.value(); }

template <Scalar T>
T sqrt_of(const T& x) {
  if constexpr (std::is_floating_point_v<T>) {
    if (x < 0) {
      throw DegeneracyError("sqrt of negative value");
    }
    return std::sqrt(x);
  } else {
    return ad::sqrt(x);
  }
}

} // namespace toiv
