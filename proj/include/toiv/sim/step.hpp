#pragma once

/**
 * @file step.hpp
 * @brief One transition s_{n+1} = step(s_n, u_n, dt) for each contact
 * model, and full rollouts.
 *
 * Direct impulse model. After the symplectic Euler candidate (v^, p^) is
 * formed, every approaching penetrating pair is assigned a time of impact
 * and resolved in order of its contact instant (dt - TOI). With
 * toi_velocity the jump map sees the state rewound to the contact instant
 * (v-bar, n-bar); otherwise it sees the penetrated candidate (v^, n^). With
 * toi_position a resolved ball moves with v^ up to contact and with the
 * post-impact velocity afterwards; otherwise it moves with the post-impact
 * velocity for the whole step.
 */

#include "toiv/sim/contact.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <span>
#include <vector>

namespace toiv {

namespace detail {

template <Scalar T>
struct PendingContact {
  Penetration<T> pen;
  T toi;
};

inline bool touches_ball(ContactPair pair, int ball) {
  return pair == ContactPair::BallBall || (ball == 0 ? pair == ContactPair::Ball1Wall : pair == ContactPair::Ball2Wall);
}

template <Scalar T>
State<T> step_direct(const State<T>& s, const Vec2<T>& u1, double dt_value, const ScenarioConfig& scenario,
                     const ContactConfig& contact, long step_index, EventLog* log) {
  const T dt(dt_value);
  const State<T> cand = integrate_candidate(s, u1, dt);
  const auto pens = detect_penetration(cand.p1, cand.p2, scenario.radius, scenario.wall, contact.penetration_tolerance);
  if (pens.empty()) {
    return cand;
  }

  std::vector<PendingContact<T>> pending;
  for (const auto& pen : pens) {
    const auto toi =
        contact.toi_solver == ToiSolver::Exact
            ? compute_toi_exact(pen, cand.p1, cand.p2, cand.v1, cand.v2, scenario.radius, dt_value,
                                contact.approach_tolerance)
            : compute_toi(pen.depth, closing_rate(pen.pair, cand.v1, cand.v2, pen.normal), dt_value,
                          contact.approach_tolerance);
    if (toi) {
      pending.push_back({pen, *toi});
    }
  }
  if (pending.empty()) {
    return cand;
  }
  // earliest contact instant first, i.e. largest TOI first
  std::stable_sort(pending.begin(), pending.end(),
                   [](const auto& a, const auto& b) { return value_of(a.toi) > value_of(b.toi); });

  std::array<Vec2<T>, 2> vel{cand.v1, cand.v2};
  std::array<const Vec2<T>*, 2> cand_pos{&cand.p1, &cand.p2};
  std::array<std::optional<T>, 2> split; // TOI of the first contact of each ball
  std::array<bool, 3> pair_done{false, false, false};

  for (const auto& pc : pending) {
    const auto pair_id = static_cast<std::size_t>(pc.pen.pair);
    if (pair_done[pair_id]) {
      continue;
    }
    std::array<Vec2<T>, 2> v_in = vel;
    Vec2<T> n = pc.pen.normal;
    std::optional<CollisionState<T>> rewound;
    if (contact.toi_velocity) {
      rewound = collision_state(s, u1, cand, dt, pc.toi, pc.pen.pair, pc.pen.normal);
      n = rewound->normal;
      for (int b = 0; b < 2; ++b) {
        if (touches_ball(pc.pen.pair, b) && !split[static_cast<std::size_t>(b)]) {
          v_in[static_cast<std::size_t>(b)] = b == 0 ? rewound->v1 : rewound->v2;
        }
      }
    }
    // a ball already resolved earlier in this step may now be separating
    const bool revisits = (touches_ball(pc.pen.pair, 0) && split[0]) || (touches_ball(pc.pen.pair, 1) && split[1]);
    if (revisits && !(value_of(closing_rate(pc.pen.pair, v_in[0], v_in[1], n)) < -contact.approach_tolerance)) {
      continue;
    }

    auto [out1, out2] = resolve_elastic(v_in[0], v_in[1], n, pc.pen.pair);
    pair_done[pair_id] = true;
    for (int b = 0; b < 2; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      if (touches_ball(pc.pen.pair, b)) {
        vel[bi] = b == 0 ? out1 : out2;
        if (!split[bi]) {
          split[bi] = pc.toi;
        }
      }
    }

    if (log) {
      ContactEvent ev;
      ev.step = step_index;
      ev.pair = pc.pen.pair;
      ev.depth = value_of(pc.pen.depth);
      ev.penetration_dir = pc.pen.normal.values();
      ev.toi = value_of(pc.toi);
      ev.toi_clamped = ev.toi <= 0.0 || ev.toi >= dt_value;
      ev.collision_dir = n.values();
      const CollisionState<T> rw =
          rewound ? *rewound : collision_state(s, u1, cand, dt, pc.toi, pc.pen.pair, pc.pen.normal);
      ev.rewound_p1 = rw.p1.values();
      ev.rewound_p2 = rw.p2.values();
      ev.v_in1 = v_in[0].values();
      ev.v_in2 = v_in[1].values();
      ev.v_out1 = out1.values();
      ev.v_out2 = out2.values();
      log->push_back(ev);
    }
  }

  State<T> next;
  std::array<Vec2<T>, 2> pos{s.p1, s.p2};
  for (std::size_t b = 0; b < 2; ++b) {
    if (!split[b]) {
      pos[b] = *cand_pos[b];
      continue;
    }
    const Vec2<T>& v_hat = b == 0 ? cand.v1 : cand.v2;
    if (contact.toi_position) {
      const T toi = *split[b];
      pos[b] = pos[b] + v_hat * (dt - toi) + vel[b] * toi;
    } else {
      pos[b] = pos[b] + vel[b] * dt;
    }
  }
  next.p1 = pos[0];
  next.p2 = pos[1];
  next.v1 = vel[0];
  next.v2 = vel[1];
  return next;
}

template <Scalar T>
State<T> step_compliant(const State<T>& s, const Vec2<T>& u1, double dt_value, const ScenarioConfig& scenario,
                        const ContactConfig& contact, long step_index, EventLog* log) {
  const T dt(dt_value);
  const auto pens = detect_penetration(s.p1, s.p2, scenario.radius, scenario.wall, contact.penetration_tolerance);
  Vec2<T> f1 = u1;
  Vec2<T> f2{T(0.0), T(0.0)};
  for (const auto& pen : pens) {
    const T rate = closing_rate(pen.pair, s.v1, s.v2, pen.normal);
    // penalty on the second body along n; its reaction on the first
    const Vec2<T> f = pen.normal * (T(-contact.stiffness) * pen.depth - T(contact.damping) * rate);
    switch (pen.pair) {
    case ContactPair::BallBall:
      f1 -= f;
      f2 += f;
      break;
    case ContactPair::Ball1Wall: f1 += f; break;
    case ContactPair::Ball2Wall: f2 += f; break;
    }
    if (log) {
      ContactEvent ev;
      ev.step = step_index;
      ev.pair = pen.pair;
      ev.depth = value_of(pen.depth);
      ev.penetration_dir = pen.normal.values();
      ev.collision_dir = ev.penetration_dir;
      ev.rewound_p1 = s.p1.values();
      ev.rewound_p2 = s.p2.values();
      ev.v_in1 = s.v1.values();
      ev.v_in2 = s.v2.values();
      log->push_back(ev);
    }
  }
  State<T> next;
  next.v1 = s.v1 + f1 * dt;
  next.v2 = s.v2 + f2 * dt;
  next.p1 = s.p1 + next.v1 * dt;
  next.p2 = s.p2 + next.v2 * dt;
  if (log) {
    for (auto it = log->rbegin(); it != log->rend() && it->step == step_index; ++it) {
      it->v_out1 = next.v1.values();
      it->v_out2 = next.v2.values();
    }
  }
  return next;
}

template <Scalar T>
State<T> step_pbd(const State<T>& s, const Vec2<T>& u1, double dt_value, const ScenarioConfig& scenario,
                  const ContactConfig& contact, long step_index, EventLog* log) {
  const T dt(dt_value);
  const State<T> cand = integrate_candidate(s, u1, dt);
  const auto pens = detect_penetration(cand.p1, cand.p2, scenario.radius, scenario.wall, contact.penetration_tolerance);
  if (pens.empty()) {
    return cand;
  }
  State<T> next = cand;
  std::array<bool, 2> moved{false, false};
  for (const auto& pen : pens) {
    switch (pen.pair) {
    case ContactPair::BallBall: {
      const Vec2<T> half = pen.normal * (pen.depth * T(0.5)); // depth < 0: points from 2 to 1
      next.p1 += half;
      next.p2 -= half;
      moved = {true, true};
      break;
    }
    case ContactPair::Ball1Wall:
      next.p1 -= pen.normal * pen.depth;
      moved[0] = true;
      break;
    case ContactPair::Ball2Wall:
      next.p2 -= pen.normal * pen.depth;
      moved[1] = true;
      break;
    }
  }
  if (moved[0]) {
    next.v1 = (next.p1 - s.p1) / dt;
  }
  if (moved[1]) {
    next.v2 = (next.p2 - s.p2) / dt;
  }
  if (log) {
    for (const auto& pen : pens) {
      ContactEvent ev;
      ev.step = step_index;
      ev.pair = pen.pair;
      ev.depth = value_of(pen.depth);
      ev.penetration_dir = pen.normal.values();
      ev.collision_dir = ev.penetration_dir;
      ev.rewound_p1 = cand.p1.values();
      ev.rewound_p2 = cand.p2.values();
      ev.v_in1 = cand.v1.values();
      ev.v_in2 = cand.v2.values();
      ev.v_out1 = next.v1.values();
      ev.v_out2 = next.v2.values();
      log->push_back(ev);
    }
  }
  return next;
}

} // namespace detail

//! Advances the state by one step of the configured contact model.
//! Contact events are appended to `log` when it is non-null.
template <Scalar T>
State<T> step(const State<T>& s, const Vec2<T>& u1, double dt, const ScenarioConfig& scenario,
              const ContactConfig& contact, long step_index = 0, EventLog* log = nullptr) {
  switch (contact.model) {
  case ContactModel::DirectImpulse: return detail::step_direct(s, u1, dt, scenario, contact, step_index, log);
  case ContactModel::Compliant: return detail::step_compliant(s, u1, dt, scenario, contact, step_index, log);
  case ContactModel::PBD: return detail::step_pbd(s, u1, dt, scenario, contact, step_index, log);
  }
  return s;
}

//! N+1 states: the initial state followed by one state per control.
//! Degeneracies are rethrown with the failing step index attached.
template <Scalar T>
std::vector<State<T>> rollout(const ScenarioConfig& scenario, const ContactConfig& contact,
                              std::span<const Vec2<T>> controls, EventLog* log = nullptr) {
  if (controls.size() != static_cast<std::size_t>(scenario.steps)) {
    throw ConfigError("control sequence length " + std::to_string(controls.size()) + " does not match " +
                      std::to_string(scenario.steps) + " steps");
  }
  const double dt = scenario.dt();
  std::vector<State<T>> traj;
  traj.reserve(controls.size() + 1);
  traj.push_back(lift_state<T>(scenario.initial));
  for (std::size_t i = 0; i < controls.size(); ++i) {
    try {
      traj.push_back(step(traj.back(), controls[i], dt, scenario, contact, static_cast<long>(i), log));
    } catch (const DegeneracyError& e) {
      throw e.at_step(static_cast<long>(i));
    }
  }
  return traj;
}

inline std::vector<StateD> rollout(const ScenarioConfig& scenario, const ContactConfig& contact,
                                   const ControlSequence& controls, EventLog* log = nullptr) {
  return rollout<double>(scenario, contact, std::span<const Vec2d>(controls), log);
}

} // namespace toiv
