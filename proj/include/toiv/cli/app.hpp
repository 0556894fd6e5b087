#pragma once

/**
 * @file app.hpp
 * @brief Command-line front end: simulate | optimize | ablate | gradcheck.
 *
 * Exit codes: 0 success, 2 configuration error, 3 simulation degeneracy,
 * 4 non-finite optimization.
 */

#include "toiv/exp/experiments.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace toiv::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kDegenerate = 3, kNonFinite = 4 };

namespace detail {

struct Options {
  std::string scenario = "single";
  std::string metadata;
  std::string model;
  std::string toi_position;
  std::string toi_velocity;
  std::string toi_solver;
  std::string controls;
  double lr = 0.0;
  int iters = 0;
  std::string out;
  std::uint64_t seed = 0;
  int samples = 20;
  bool quiet = false;
};

inline bool on_off(const std::string& v, const char* flag) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw ConfigError(std::string(flag) + " expects on|off, got '" + v + "'");
}

inline void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--scenario", o.scenario, "built-in scenario (single|multi) or scenario JSON path");
  sub->add_option("--metadata", o.metadata, "re-run from an emitted metadata.json (other flags except --out ignored)");
  sub->add_option("--model", o.model, "contact model: direct|compliant|pbd");
  sub->add_option("--toi-position", o.toi_position, "TOI-Position correction: on|off");
  sub->add_option("--toi-velocity", o.toi_velocity, "TOI-Velocity correction: on|off");
  sub->add_option("--toi-solver", o.toi_solver, "time-of-impact solver: exact|linear");
  sub->add_option("--lr", o.lr, "learning rate");
  sub->add_option("--iters", o.iters, "iteration budget");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--seed", o.seed, "seed for finite-difference probe selection");
  sub->add_flag("--quiet", o.quiet, "only print the final summary");
}

//! Resolves flags into a spec. Non-direct models default both TOI flags
//! off; asking for TOI corrections on them is a configuration error.
inline exp::ExperimentSpec build_spec(const std::string& command, const Options& o) {
  exp::ExperimentSpec spec;
  if (!o.metadata.empty()) {
    spec = exp::load_metadata(o.metadata);
    spec.command = command;
  } else {
    spec = exp::make_spec(command, o.scenario);
    if (!o.model.empty()) {
      spec.contact.model = parse_contact_model(o.model);
      if (spec.contact.model != ContactModel::DirectImpulse) {
        spec.contact.toi_position = spec.contact.toi_velocity = false;
      }
    }
    if (!o.toi_position.empty()) spec.contact.toi_position = on_off(o.toi_position, "--toi-position");
    if (!o.toi_velocity.empty()) spec.contact.toi_velocity = on_off(o.toi_velocity, "--toi-velocity");
    if (!o.toi_solver.empty()) spec.contact.toi_solver = parse_toi_solver(o.toi_solver);
    if (o.lr != 0.0) spec.optimizer.learning_rate = o.lr;
    if (o.iters != 0) spec.optimizer.iterations = o.iters;
    spec.seed = o.seed;
    spec.gradcheck_samples = o.samples;
    if (!o.controls.empty()) {
      spec.scenario.initial_controls = io::read_controls(o.controls);
    }
  }
  spec.out_dir = o.out;
  spec.validate();
  return spec;
}

inline void print_optimize(const exp::OptimizeSummary& s) {
  std::printf("best_loss %.6f (iteration %d)  final_loss %.6f", s.result.best_loss, s.result.best_iteration,
              s.result.final_loss);
  if (s.analytical > 0.0) {
    std::printf("  analytical %.4f  gap %+.2f%%", s.analytical, 100.0 * (s.result.best_loss - s.analytical) / s.analytical);
  }
  std::printf("\n");
}

} // namespace detail

inline int run(int argc, const char* const* argv) {
  CLI::App app{"Differentiable two-ball contact simulation with TOI gradient corrections"};
  app.require_subcommand(1);
  detail::Options o;
  auto* sim = app.add_subcommand("simulate", "roll out the scenario's control sequence");
  auto* opt = app.add_subcommand("optimize", "gradient-descent optimal control");
  auto* abl = app.add_subcommand("ablate", "2x2 TOI-Position / TOI-Velocity grid");
  auto* grad = app.add_subcommand("gradcheck", "adjoint vs finite differences, continuity sweep");
  for (auto* sub : {sim, opt, abl, grad}) {
    detail::add_common(sub, o);
  }
  sim->add_option("--controls", o.controls, "controls.csv to roll out instead of the scenario's");
  grad->add_option("--controls", o.controls, "controls.csv to check instead of the scenario's");
  grad->add_option("--samples", o.samples, "number of control entries to probe");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (sim->parsed()) {
      const auto spec = detail::build_spec("simulate", o);
      const auto res = exp::run_simulate(spec);
      std::printf("loss %.6f  events %zu\n", res.loss, res.events.size());
      for (const auto& e : res.events) {
        std::printf("  step %ld  %s  toi %.3e\n", e.step, std::string(to_string(e.pair)).c_str(), e.toi);
      }
    } else if (opt->parsed()) {
      const auto spec = detail::build_spec("optimize", o);
      const int every = std::max(1, spec.optimizer.iterations / 20);
      const auto res = exp::run_optimize(spec, [&](const IterationRecord& r) {
        if (!o.quiet && r.iteration % every == 0) {
          std::printf("iter %5d  loss %.6f  |grad|max %.3e\n", r.iteration, r.loss, r.grad_max);
        }
      });
      detail::print_optimize(res);
    } else if (abl->parsed()) {
      const auto spec = detail::build_spec("ablate", o);
      const auto res = exp::run_ablation(spec);
      std::printf("toi_position toi_velocity  %s\n", spec.scenario.name.c_str());
      for (const auto& c : res.cells) {
        if (c.summary) {
          std::printf("%-12s %-12s  %.4f\n", c.toi_position ? "on" : "off", c.toi_velocity ? "on" : "off",
                      c.summary->result.best_loss);
        } else {
          std::printf("%-12s %-12s  %s\n", c.toi_position ? "on" : "off", c.toi_velocity ? "on" : "off",
                      c.status.c_str());
        }
      }
      if (res.analytical > 0.0) {
        std::printf("analytical optimum          %.4f\n", res.analytical);
      }
    } else if (grad->parsed()) {
      const auto spec = detail::build_spec("gradcheck", o);
      const auto res = exp::run_gradcheck(spec);
      std::printf("checked %d entries (%d branch flips excluded)  max rel error %.3e\n", res.report.checked,
                  res.report.flipped, res.report.max_rel_error);
      for (const auto& sw : res.sweeps) {
        std::printf("continuity spacing %.0e: toi-velocity on max diff %.3e, off max diff %.3e\n", sw.spacing,
                    sw.on.max_adjacent_diff, sw.off.max_adjacent_diff);
      }
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const DegeneracyError& e) {
    std::fprintf(stderr, "simulation degeneracy: %s\n", e.what());
    return kDegenerate;
  } catch (const NonFiniteError& e) {
    std::fprintf(stderr, "non-finite optimization: %s\n", e.what());
    return kNonFinite;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  }
  return kOk;
}

inline int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("toiv");
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  return run(static_cast<int>(argv.size()), argv.data());
}

} // namespace toiv::cli
