#pragma once

/**
 * @file contact.hpp
 * @brief Contact primitives of the direct-impulse model: candidate
 * integration, discrete penetration tests, time of impact, the rewound
 * collision state and the elastic jump map.
 *
 * Sign convention: penetration depth d is negative when penetrating and the
 * direction n points from the first body to the second (for a wall, from
 * the wall into the interior, with the ball as the second body). A pair is
 * approaching when its closing rate (v2 - v1) . n is negative, so
 * TOI = d / rate is positive.
 */

#include "toiv/sim/types.hpp"

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

namespace toiv {

inline constexpr double kCoincidentCenters = 1e-12;

//! Symplectic Euler candidate: v^ = v + u dt, then p^ = p + v^ dt.
//! Only Ball 1 is actuated.
template <Scalar T>
State<T> integrate_candidate(const State<T>& s, const Vec2<T>& u1, const T& dt) {
  State<T> c;
  c.v1 = s.v1 + u1 * dt;
  c.v2 = s.v2;
  c.p1 = s.p1 + c.v1 * dt;
  c.p2 = s.p2 + c.v2 * dt;
  return c;
}

template <Scalar T>
struct Penetration {
  ContactPair pair;
  T depth;
  Vec2<T> normal;
};

template <Scalar T>
Vec2<T> unit_between(const Vec2<T>& from, const Vec2<T>& to) {
  const Vec2<T> delta = to - from;
  const T len = delta.norm();
  if (value_of(len) < kCoincidentCenters) {
    throw DegeneracyError("coincident ball centers: contact direction undefined");
  }
  return delta / len;
}

//! Penetrating pairs at the given positions. An entry exists iff
//! d < tolerance, so an exact touch (d == 0) is reported.
template <Scalar T>
std::vector<Penetration<T>> detect_penetration(const Vec2<T>& p1, const Vec2<T>& p2, double radius,
                                               const std::optional<Wall>& wall,
                                               double tolerance = 1e-12) {
  std::vector<Penetration<T>> out;
  const Vec2<T> delta = p2 - p1;
  if (value_of(delta.squared_norm()) < kCoincidentCenters * kCoincidentCenters) {
    throw DegeneracyError("coincident ball centers: contact direction undefined");
  }
  // cheap reject before the sqrt, with margin for the tolerance
  const double reach = 2.0 * radius + tolerance;
  if (value_of(delta.squared_norm()) < reach * reach) {
    const T dist = delta.norm();
    const T depth = dist - T(2.0 * radius);
    if (value_of(depth) < tolerance) {
      out.push_back({ContactPair::BallBall, depth, delta / dist});
    }
  }
  if (wall) {
    const Vec2<T> into_interior{T(0.0), T(-1.0)};
    const T d1 = T(wall->level - radius) - p1.y;
    if (value_of(d1) < tolerance) {
      out.push_back({ContactPair::Ball1Wall, d1, into_interior});
    }
    const T d2 = T(wall->level - radius) - p2.y;
    if (value_of(d2) < tolerance) {
      out.push_back({ContactPair::Ball2Wall, d2, into_interior});
    }
  }
  return out;
}

//! Closing rate along n: (v2 - v1) . n for two balls, v . n for a ball
//! against the static wall.
template <Scalar T>
T closing_rate(ContactPair pair, const Vec2<T>& v1, const Vec2<T>& v2, const Vec2<T>& n) {
  switch (pair) {
  case ContactPair::BallBall: return (v2 - v1).dot(n);
  case ContactPair::Ball1Wall: return v1.dot(n);
  case ContactPair::Ball2Wall: return v2.dot(n);
  }
  return T(0.0);
}

//! Time of impact: the part of the step remaining after first contact,
//! TOI = d / rate, clamped to [0, dt]. Returns nullopt for separating or
//! grazing pairs (rate >= -approach_tolerance); those are not resolved.
//! A clamped TOI is a constant and carries no derivative.
template <Scalar T>
std::optional<T> compute_toi(const T& depth, const T& rate, double dt, double approach_tolerance = 1e-9) {
  if (!(value_of(rate) < -approach_tolerance)) {
    return std::nullopt;
  }
  const T toi = depth / rate;
  if (value_of(toi) <= 0.0) {
    return T(0.0);
  }
  if (value_of(toi) >= dt) {
    return T(dt);
  }
  return toi;
}

//! Time of impact from rewinding the candidate along its own linear motion
//! until the pair exactly touches. For a ball pair with relative offset a
//! and relative velocity b this is the positive root of
//! |a - b tau| = 2r; for a wall the plane distance is already linear in
//! time and the result equals compute_toi. Same approach guard and clamp as
//! compute_toi.
template <Scalar T>
std::optional<T> compute_toi_exact(const Penetration<T>& pen, const Vec2<T>& p1, const Vec2<T>& p2,
                                   const Vec2<T>& v1, const Vec2<T>& v2, double radius, double dt,
                                   double approach_tolerance = 1e-9) {
  const T rate = closing_rate(pen.pair, v1, v2, pen.normal);
  if (pen.pair != ContactPair::BallBall || !(value_of(rate) < -approach_tolerance)) {
    return compute_toi(pen.depth, rate, dt, approach_tolerance);
  }
  const Vec2<T> a = p2 - p1;
  const Vec2<T> b = v2 - v1;
  const T ab = a.dot(b);
  const T inside = T(4.0 * radius * radius) - a.squared_norm(); // >= 0 when penetrating
  const T disc = ab * ab + b.squared_norm() * inside;
  // (4r^2 - |a|^2) / (sqrt(disc) - a.b): the cancellation-free form of the root
  const T toi = inside / (sqrt_of(disc) - ab);
  if (value_of(toi) <= 0.0) {
    return T(0.0);
  }
  if (value_of(toi) >= dt) {
    return T(dt);
  }
  return toi;
}

template <Scalar T>
struct CollisionState {
  Vec2<T> v1, v2; //!< velocity at the contact instant
  Vec2<T> p1, p2; //!< position at the contact instant
  Vec2<T> normal; //!< collision direction n-bar
};

//! State rewound to the contact instant dt - TOI after the step start:
//! v-bar = v + u (dt - TOI), p-bar = p + v^ (dt - TOI). For a wall pair the
//! direction stays the wall normal.
template <Scalar T>
CollisionState<T> collision_state(const State<T>& s, const Vec2<T>& u1, const State<T>& candidate,
                                  const T& dt, const T& toi, ContactPair pair,
                                  const Vec2<T>& wall_normal = {T(0.0), T(-1.0)}) {
  const T before = dt - toi;
  CollisionState<T> c;
  c.v1 = s.v1 + u1 * before;
  c.v2 = s.v2;
  c.p1 = s.p1 + candidate.v1 * before;
  c.p2 = s.p2 + candidate.v2 * before;
  c.normal = pair == ContactPair::BallBall ? unit_between(c.p1, c.p2) : wall_normal;
  return c;
}

//! Frictionless, perfectly elastic jump map. Equal unit masses exchange
//! their normal velocity components; a ball hitting the wall has its normal
//! component reflected. Tangential components are untouched.
template <Scalar T>
std::pair<Vec2<T>, Vec2<T>> resolve_elastic(const Vec2<T>& v1, const Vec2<T>& v2, const Vec2<T>& n,
                                            ContactPair pair) {
  switch (pair) {
  case ContactPair::BallBall: {
    const Vec2<T> exchange = n * (v2 - v1).dot(n);
    return {v1 + exchange, v2 - exchange};
  }
  case ContactPair::Ball1Wall: return {v1 - n * (T(2.0) * v1.dot(n)), v2};
  case ContactPair::Ball2Wall: return {v1, v2 - n * (T(2.0) * v2.dot(n))};
  }
  return {v1, v2};
}

} // namespace toiv
