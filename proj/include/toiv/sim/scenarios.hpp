#pragma once

#include "toiv/sim/types.hpp"

namespace toiv::scenarios {

//! Ball 1 is pushed up into Ball 2, which should end near the origin.
inline ScenarioConfig single_collision() {
  ScenarioConfig s;
  s.name = "single";
  s.radius = 0.2;
  s.initial = {{-1.0, -2.0}, {-1.0, -1.0}, {0.0, 0.0}, {0.0, 0.0}};
  s.horizon = 1.0;
  s.steps = 480;
  s.epsilon = 0.01;
  s.initial_controls.assign(static_cast<std::size_t>(s.steps), Vec2d{0.0, 3.0});
  return s;
}

//! Same goal with a wall at y = 1; the initial control produces two
//! ball-ball contacts and one ball-wall contact.
inline ScenarioConfig multi_collision() {
  ScenarioConfig s;
  s.name = "multi";
  s.radius = 0.2;
  s.initial = {{0.25, -0.3}, {-0.5, 0.6}, {0.0, 0.0}, {0.0, 0.0}};
  s.wall = Wall{1.0};
  s.horizon = 1.0;
  s.steps = 480;
  s.epsilon = 0.01;
  s.initial_controls.assign(static_cast<std::size_t>(s.steps), Vec2d{-3.5, 3.0});
  return s;
}

//! Analytical optimal loss for the built-in scenarios (0 when unknown).
inline double analytical_optimum(const std::string& name) {
  if (name == "single") return 0.3115;
  if (name == "multi") return 0.3737;
  return 0.0;
}

} // namespace toiv::scenarios
