#pragma once

/**
 * @file objective.hpp
 * @brief Discrete optimal-control objective
 *
 *   J(u) = ||p2(T) - target||^2 + sum_i eps ||u_i||^2 dt
 *
 * evaluated over plain doubles, or over a tape when the gradient with
 * respect to every control entry is needed.
 */

#include "toiv/ad/tape.hpp"
#include "toiv/sim/step.hpp"

#include <span>
#include <vector>

namespace toiv {

struct ObjectiveConfig {
  double epsilon = 0.01;
  Vec2d target{0.0, 0.0};

  static ObjectiveConfig from(const ScenarioConfig& s) { return {s.epsilon, {0.0, 0.0}}; }
};

template <Scalar T>
T terminal_cost(const State<T>& s, const Vec2d& target = {0.0, 0.0}) {
  const Vec2<T> d = s.p2 - Vec2<T>(target);
  return d.squared_norm();
}

template <>
inline double terminal_cost<double>(const StateD& s, const Vec2d& target) {
  return (s.p2 - target).squared_norm();
}

template <Scalar T>
T running_cost(const Vec2<T>& u1, double epsilon) {
  return T(epsilon) * u1.squared_norm();
}

template <Scalar T>
T objective_from(const ScenarioConfig& scenario, const ContactConfig& contact, const ObjectiveConfig& obj,
                 std::span<const Vec2<T>> controls, EventLog* log = nullptr) {
  const auto traj = rollout<T>(scenario, contact, controls, log);
  const T dt(scenario.dt());
  T running(0.0);
  for (const auto& u : controls) {
    running = running + running_cost(u, obj.epsilon) * dt;
  }
  return terminal_cost(traj.back(), obj.target) + running;
}

//! Forward-only objective value.
inline double objective(const ScenarioConfig& scenario, const ContactConfig& contact, const ObjectiveConfig& obj,
                        const ControlSequence& controls, EventLog* log = nullptr) {
  return objective_from<double>(scenario, contact, obj, std::span<const Vec2d>(controls), log);
}

struct ValueAndGradient {
  double value = 0.0;
  std::vector<Vec2d> gradient; //!< d J / d u_i, one entry per step
};

//! Objective and its gradient with respect to every control entry, from one
//! recorded rollout.
inline ValueAndGradient objective_gradient(const ScenarioConfig& scenario, const ContactConfig& contact,
                                           const ObjectiveConfig& obj, const ControlSequence& controls) {
  ad::Tape tape;
  tape.reserve(controls.size() * 64);
  std::vector<Vec2<ad::Var>> lifted;
  lifted.reserve(controls.size());
  for (const auto& u : controls) {
    ad::Var ux = tape.lift(u.x);
    ad::Var uy = tape.lift(u.y);
    lifted.emplace_back(ux, uy);
  }
  const ad::Var loss =
      objective_from<ad::Var>(scenario, contact, obj, std::span<const Vec2<ad::Var>>(lifted));
  ValueAndGradient out;
  out.value = loss.value();
  out.gradient.resize(controls.size());
  if (loss.is_constant()) {
    return out;
  }
  const auto grads = tape.backward(loss);
  for (std::size_t i = 0; i < controls.size(); ++i) {
    out.gradient[i] = {grads[2 * i], grads[2 * i + 1]};
  }
  return out;
}

} // namespace toiv
