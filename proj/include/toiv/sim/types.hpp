#pragma once

#include "toiv/errors.hpp"
#include "toiv/sim/vec2.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toiv {

//! Positions and velocities of the two balls. Both have unit mass, so a
//! control force is numerically an acceleration.
template <Scalar T>
struct State {
  Vec2<T> p1, p2;
  Vec2<T> v1, v2;

  State<double> values() const { return {p1.values(), p2.values(), v1.values(), v2.values()}; }
};

using StateD = State<double>;

template <Scalar T>
State<T> lift_state(const StateD& s) {
  return {Vec2<T>(s.p1), Vec2<T>(s.p2), Vec2<T>(s.v1), Vec2<T>(s.v2)};
}

template <>
inline StateD lift_state<double>(const StateD& s) {
  return s;
}

//! Infinite horizontal wall; balls live below it.
struct Wall {
  double level = 1.0;
};

//! Per-step forces applied to Ball 1 (Ball 2 is never actuated).
using ControlSequence = std::vector<Vec2d>;

struct ScenarioConfig {
  std::string name = "custom";
  double radius = 0.2;
  StateD initial{};
  std::optional<Wall> wall;
  double horizon = 1.0;
  int steps = 480;
  double epsilon = 0.01;
  ControlSequence initial_controls;

  double dt() const { return horizon / steps; }

  void validate() const {
    auto finite = [](const Vec2d& v) { return std::isfinite(v.x) && std::isfinite(v.y); };
    if (!(radius > 0.0) || !std::isfinite(radius)) {
      throw ConfigError("radius must be positive");
    }
    if (steps < 1) {
      throw ConfigError("steps must be >= 1");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      throw ConfigError("horizon must be positive");
    }
    if (!(epsilon >= 0.0)) {
      throw ConfigError("epsilon must be >= 0");
    }
    if (!finite(initial.p1) || !finite(initial.p2) || !finite(initial.v1) || !finite(initial.v2)) {
      throw ConfigError("initial state must be finite");
    }
    if (wall && !std::isfinite(wall->level)) {
      throw ConfigError("wall level must be finite");
    }
    if ((initial.p2 - initial.p1).norm() < 2.0 * radius) {
      throw ConfigError("initial balls overlap");
    }
    if (wall && (wall->level - initial.p1.y - radius < 0.0 || wall->level - initial.p2.y - radius < 0.0)) {
      throw ConfigError("initial ball overlaps the wall");
    }
    if (initial_controls.size() != static_cast<std::size_t>(steps)) {
      throw ConfigError("initial control sequence must have one entry per step");
    }
    for (const auto& u : initial_controls) {
      if (!finite(u)) {
        throw ConfigError("initial controls must be finite");
      }
    }
  }
};

enum class ContactModel { DirectImpulse, Compliant, PBD };

inline std::string_view to_string(ContactModel m) {
  switch (m) {
  case ContactModel::DirectImpulse: return "direct";
  case ContactModel::Compliant: return "compliant";
  case ContactModel::PBD: return "pbd";
  }
  return "?";
}

inline ContactModel parse_contact_model(std::string_view s) {
  if (s == "direct") return ContactModel::DirectImpulse;
  if (s == "compliant") return ContactModel::Compliant;
  if (s == "pbd") return ContactModel::PBD;
  throw ConfigError("unknown contact model '" + std::string(s) + "'");
}

//! How the time of impact is obtained from a penetrated candidate.
enum class ToiSolver {
  Exact,     //!< root of the swept-circle distance along the step's linear motion
  Linearized //!< first-order estimate d / closing-rate
};

inline std::string_view to_string(ToiSolver s) { return s == ToiSolver::Exact ? "exact" : "linear"; }

inline ToiSolver parse_toi_solver(std::string_view s) {
  if (s == "exact") return ToiSolver::Exact;
  if (s == "linear") return ToiSolver::Linearized;
  throw ConfigError("unknown TOI solver '" + std::string(s) + "'");
}

struct ContactConfig {
  ContactModel model = ContactModel::DirectImpulse;
  bool toi_position = true;
  bool toi_velocity = true;
  ToiSolver toi_solver = ToiSolver::Exact;
  double stiffness = 1e4;          //!< Compliant penalty stiffness k
  double damping = 0.0;            //!< Compliant penalty damping c
  double penetration_tolerance = 1e-12;
  double approach_tolerance = 1e-9; //!< minimum closing rate for an impulse

  void validate() const {
    if (model != ContactModel::DirectImpulse && (toi_position || toi_velocity)) {
      throw ConfigError("TOI corrections apply to the direct impulse model only");
    }
    if (model == ContactModel::Compliant && (!(stiffness > 0.0) || !(damping >= 0.0))) {
      throw ConfigError("compliant model needs stiffness > 0 and damping >= 0");
    }
    if (!(penetration_tolerance >= 0.0) || !(approach_tolerance >= 0.0)) {
      throw ConfigError("tolerances must be non-negative");
    }
  }

  static ContactConfig direct(bool toi_position, bool toi_velocity) {
    ContactConfig c;
    c.toi_position = toi_position;
    c.toi_velocity = toi_velocity;
    return c;
  }

  static ContactConfig baseline(ContactModel model) {
    ContactConfig c;
    c.model = model;
    c.toi_position = false;
    c.toi_velocity = false;
    return c;
  }
};

enum class ContactPair { BallBall, Ball1Wall, Ball2Wall };

inline std::string_view to_string(ContactPair p) {
  switch (p) {
  case ContactPair::BallBall: return "ball-ball";
  case ContactPair::Ball1Wall: return "ball1-wall";
  case ContactPair::Ball2Wall: return "ball2-wall";
  }
  return "?";
}

//! Diagnostic record of one resolved (or projected/penalized) contact.
struct ContactEvent {
  long step = 0;
  ContactPair pair = ContactPair::BallBall;
  double depth = 0.0;          //!< <= 0 when penetrating
  Vec2d penetration_dir{};     //!< n-hat at the candidate positions
  double toi = 0.0;            //!< time remaining after the contact instant
  bool toi_clamped = false;
  Vec2d collision_dir{};       //!< direction actually used to resolve
  Vec2d rewound_p1{}, rewound_p2{};
  Vec2d v_in1{}, v_in2{};      //!< velocities fed to the jump map
  Vec2d v_out1{}, v_out2{};
};

using EventLog = std::vector<ContactEvent>;

} // namespace toiv
