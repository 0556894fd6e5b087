#pragma once

#include "toiv/opt/objective.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toiv {

enum class OptimizerMethod { GradientDescent, Momentum };

inline std::string_view to_string(OptimizerMethod m) {
  return m == OptimizerMethod::GradientDescent ? "gd" : "momentum";
}

inline OptimizerMethod parse_optimizer_method(std::string_view s) {
  if (s == "gd") return OptimizerMethod::GradientDescent;
  if (s == "momentum") return OptimizerMethod::Momentum;
  throw ConfigError("unknown optimizer method '" + std::string(s) + "'");
}

struct OptimizerConfig {
  OptimizerMethod method = OptimizerMethod::GradientDescent;
  double learning_rate = 30.0; // per-step gradients scale with dt
  double momentum = 0.9;
  int iterations = 2000;
  std::optional<double> grad_stop; //!< stop once max |grad| falls below this
  int snapshot_every = 50;         //!< 0 disables control snapshots

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw ConfigError("learning rate must be positive");
    }
    if (iterations < 1) {
      throw ConfigError("iterations must be >= 1");
    }
    if (method == OptimizerMethod::Momentum && !(momentum >= 0.0 && momentum < 1.0)) {
      throw ConfigError("momentum must lie in [0, 1)");
    }
    if (snapshot_every < 0) {
      throw ConfigError("snapshot_every must be >= 0");
    }
  }
};

struct IterationRecord {
  int iteration = 0;
  double loss = 0.0;
  double grad_max = 0.0; //!< max-norm of the gradient at this iterate
};

struct ControlSnapshot {
  int iteration = 0;
  ControlSequence controls;
};

struct LearningCurve {
  std::vector<IterationRecord> records;
  std::vector<ControlSnapshot> snapshots;
};

struct OptimizeResult {
  ControlSequence best_controls;
  double best_loss = std::numeric_limits<double>::infinity();
  int best_iteration = -1;
  double final_loss = 0.0; //!< loss of the last evaluated iterate
  LearningCurve curve;
};

//! First-order descent on the control sequence. Every iteration evaluates
//! the loss and gradient at the current iterate, records them, then steps.
//! Returns the best iterate seen, not the last one.
inline OptimizeResult optimize(const ScenarioConfig& scenario, const ContactConfig& contact,
                               const ObjectiveConfig& obj, const OptimizerConfig& cfg, ControlSequence controls,
                               const std::function<void(const IterationRecord&)>& on_iteration = {}) {
  scenario.validate();
  contact.validate();
  cfg.validate();
  if (controls.size() != static_cast<std::size_t>(scenario.steps)) {
    throw ConfigError("control sequence length does not match scenario steps");
  }

  OptimizeResult res;
  std::vector<Vec2d> velocity(controls.size(), Vec2d{0.0, 0.0});
  for (int it = 0; it < cfg.iterations; ++it) {
    const auto vg = objective_gradient(scenario, contact, obj, controls);
    double gmax = 0.0;
    for (const auto& g : vg.gradient) {
      if (!std::isfinite(g.x) || !std::isfinite(g.y)) {
        throw NonFiniteError("non-finite gradient", it);
      }
      gmax = std::max({gmax, std::abs(g.x), std::abs(g.y)});
    }
    if (!std::isfinite(vg.value)) {
      throw NonFiniteError("non-finite loss", it);
    }
    const IterationRecord rec{it, vg.value, gmax};
    res.curve.records.push_back(rec);
    if (on_iteration) {
      on_iteration(rec);
    }
    if (cfg.snapshot_every > 0 && it % cfg.snapshot_every == 0) {
      res.curve.snapshots.push_back({it, controls});
    }
    if (vg.value < res.best_loss) {
      res.best_loss = vg.value;
      res.best_iteration = it;
      res.best_controls = controls;
    }
    res.final_loss = vg.value;
    if (cfg.grad_stop && gmax < *cfg.grad_stop) {
      break;
    }
    for (std::size_t i = 0; i < controls.size(); ++i) {
      if (cfg.method == OptimizerMethod::Momentum) {
        velocity[i] = velocity[i] * cfg.momentum + vg.gradient[i];
        controls[i] -= velocity[i] * cfg.learning_rate;
      } else {
        controls[i] -= vg.gradient[i] * cfg.learning_rate;
      }
    }
  }
  return res;
}

} // namespace toiv
