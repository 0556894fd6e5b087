#pragma once

/**
 * @file experiments.hpp
 * @brief The four experiment drivers behind the CLI. Each returns its
 * results in memory and, when `out_dir` is set, writes its output bundle
 * (tables + metadata.json + summary.json) there.
 */

#include "toiv/exp/gradcheck.hpp"
#include "toiv/io/config.hpp"
#include "toiv/io/tables.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <functional>
#include <future>
#include <string>
#include <vector>

namespace toiv::exp {

using io::json;

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentSpec {
  std::string command = "optimize";
  std::string scenario_source = "single";
  ScenarioConfig scenario = scenarios::single_collision();
  ContactConfig contact{};
  ObjectiveConfig objective{};
  OptimizerConfig optimizer{};
  std::filesystem::path out_dir; //!< empty: nothing is written
  std::uint64_t seed = 0;
  int gradcheck_samples = 20;
  double fd_step = 1e-5;
  double sweep_spacing = 1e-4;

  void validate() const {
    scenario.validate();
    contact.validate();
    optimizer.validate();
    if (!(objective.epsilon >= 0.0)) {
      throw ConfigError("epsilon must be >= 0");
    }
    if (gradcheck_samples < 1 || !(fd_step > 0.0) || !(sweep_spacing > 0.0)) {
      throw ConfigError("gradcheck needs samples >= 1 and positive steps");
    }
  }
};

//! Spec for a built-in or file scenario with all defaults applied.
inline ExperimentSpec make_spec(const std::string& command, const std::string& scenario) {
  ExperimentSpec spec;
  spec.command = command;
  spec.scenario_source = scenario;
  auto doc = io::load_scenario_document(scenario);
  spec.scenario = std::move(doc.scenario);
  if (doc.contact) {
    spec.contact = *doc.contact;
  }
  if (doc.optimizer) {
    spec.optimizer = *doc.optimizer;
  }
  spec.objective = ObjectiveConfig::from(spec.scenario);
  return spec;
}

//! Everything needed to reproduce a run, without timing information.
inline json spec_to_json(const ExperimentSpec& spec) {
  return {{"command", spec.command},
          {"scenario_source", spec.scenario_source},
          {"scenario", io::to_json(spec.scenario)},
          {"contact", io::to_json(spec.contact)},
          {"objective", io::to_json(spec.objective)},
          {"optimizer", io::to_json(spec.optimizer)},
          {"seed", spec.seed},
          {"gradcheck", {{"samples", spec.gradcheck_samples}, {"fd_step", spec.fd_step}, {"sweep_spacing", spec.sweep_spacing}}}};
}

inline ExperimentSpec spec_from_json(const json& j) {
  ExperimentSpec spec;
  auto need = [&](const char* key) -> const json& {
    auto it = j.find(key);
    if (it == j.end()) {
      throw ConfigError(std::string("metadata: missing field '") + key + "'");
    }
    return *it;
  };
  spec.command = io::detail::string(need("command"), "command");
  spec.scenario_source = io::detail::string(need("scenario_source"), "scenario_source");
  spec.scenario = io::scenario_from_json(need("scenario"), "scenario");
  spec.contact = io::contact_from_json(need("contact"));
  spec.objective = io::objective_from_json(need("objective"));
  spec.optimizer = io::optimizer_from_json(need("optimizer"));
  if (!need("seed").is_number_unsigned()) {
    throw ConfigError("field 'seed': expected a non-negative integer");
  }
  spec.seed = need("seed").get<std::uint64_t>();
  const json& g = need("gradcheck");
  spec.gradcheck_samples = io::detail::integer(g.at("samples"), "gradcheck.samples");
  spec.fd_step = io::detail::number(g.at("fd_step"), "gradcheck.fd_step");
  spec.sweep_spacing = io::detail::number(g.at("sweep_spacing"), "gradcheck.sweep_spacing");
  return spec;
}

inline ExperimentSpec load_metadata(const std::filesystem::path& path) {
  return spec_from_json(io::read_json_file(path).at("spec"));
}

namespace detail {

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("cannot create output directory '" + dir.string() + "'");
  }
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("cannot write '" + path.string() + "'");
  }
  out << j.dump(2) << '\n';
}

inline void write_metadata(const std::filesystem::path& dir, const ExperimentSpec& spec, double seconds) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  write_json(dir / "metadata.json",
             {{"tool", "toiv"}, {"version", kVersion}, {"finished_at", stamp}, {"wall_clock_seconds", seconds},
              {"spec", spec_to_json(spec)}});
}

class Stopwatch {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

} // namespace detail

// ---------------------------------------------------------------- simulate

struct SimulateResult {
  std::vector<StateD> trajectory;
  EventLog events;
  double loss = 0.0;
};

inline SimulateResult run_simulate(const ExperimentSpec& spec) {
  spec.validate();
  detail::Stopwatch clock;
  SimulateResult res;
  res.trajectory = rollout(spec.scenario, spec.contact, spec.scenario.initial_controls, &res.events);
  res.loss = objective(spec.scenario, spec.contact, spec.objective, spec.scenario.initial_controls);
  if (!spec.out_dir.empty()) {
    detail::ensure_dir(spec.out_dir);
    io::write_trajectory(spec.out_dir / "trajectory.csv", res.trajectory, spec.scenario.dt(), res.events);
    io::write_events(spec.out_dir / "events.csv", res.events);
    json events = json::array();
    for (const auto& e : res.events) {
      events.push_back({{"step", e.step}, {"pair", std::string(to_string(e.pair))}});
    }
    detail::write_json(spec.out_dir / "summary.json", {{"loss", res.loss}, {"events", events}});
    detail::write_metadata(spec.out_dir, spec, clock.seconds());
  }
  return res;
}

// ---------------------------------------------------------------- optimize

struct OptimizeSummary {
  OptimizeResult result;
  double analytical = 0.0; //!< 0 when the scenario has no known optimum
};

inline json summary_json(const OptimizeSummary& s, const ExperimentSpec& spec) {
  return {{"scenario", spec.scenario.name},
          {"model", std::string(to_string(spec.contact.model))},
          {"toi_position", spec.contact.toi_position},
          {"toi_velocity", spec.contact.toi_velocity},
          {"best_loss", s.result.best_loss},
          {"best_iteration", s.result.best_iteration},
          {"final_loss", s.result.final_loss},
          {"initial_loss", s.result.curve.records.empty() ? 0.0 : s.result.curve.records.front().loss},
          {"analytical_loss", s.analytical > 0.0 ? json(s.analytical) : json(nullptr)}};
}

inline void write_optimize_bundle(const std::filesystem::path& dir, const ExperimentSpec& spec,
                                  const OptimizeSummary& s, double seconds) {
  detail::ensure_dir(dir);
  io::write_learning_curve(dir / "learning_curve.csv", s.result.curve);
  io::write_controls(dir / "controls.csv", s.result.best_controls, spec.scenario.dt());
  io::write_snapshots(dir / "control_snapshots.csv", s.result.curve);
  EventLog events;
  const auto traj = rollout(spec.scenario, spec.contact, s.result.best_controls, &events);
  io::write_trajectory(dir / "trajectory.csv", traj, spec.scenario.dt(), events);
  detail::write_json(dir / "summary.json", summary_json(s, spec));
  detail::write_metadata(dir, spec, seconds);
}

inline OptimizeSummary run_optimize(const ExperimentSpec& spec,
                                    const std::function<void(const IterationRecord&)>& on_iteration = {}) {
  spec.validate();
  detail::Stopwatch clock;
  OptimizeSummary s;
  s.result = optimize(spec.scenario, spec.contact, spec.objective, spec.optimizer, spec.scenario.initial_controls,
                      on_iteration);
  s.analytical = scenarios::analytical_optimum(spec.scenario.name);
  if (!spec.out_dir.empty()) {
    write_optimize_bundle(spec.out_dir, spec, s, clock.seconds());
  }
  return s;
}

// ---------------------------------------------------------------- ablate

struct AblationCell {
  bool toi_position = false;
  bool toi_velocity = false;
  std::optional<OptimizeSummary> summary; //!< empty when the run aborted
  std::string status = "ok";
};

struct AblationResult {
  std::vector<AblationCell> cells; //!< (off,off), (on,off), (off,on), (on,on)
  double analytical = 0.0;

  const AblationCell& cell(bool pos, bool vel) const {
    for (const auto& c : cells) {
      if (c.toi_position == pos && c.toi_velocity == vel) {
        return c;
      }
    }
    throw std::out_of_range("ablation cell");
  }
};

inline std::string cell_name(bool pos, bool vel) {
  return std::string("pos-") + (pos ? "on" : "off") + "_vel-" + (vel ? "on" : "off");
}

//! The 2x2 TOI flag grid under one optimizer configuration. Cells run
//! concurrently and write to their own subdirectories.
inline AblationResult run_ablation(const ExperimentSpec& spec) {
  if (spec.contact.model != ContactModel::DirectImpulse) {
    throw ConfigError("ablation requires the direct impulse model");
  }
  spec.validate();
  detail::Stopwatch clock;
  AblationResult res;
  res.analytical = scenarios::analytical_optimum(spec.scenario.name);
  const std::array<std::pair<bool, bool>, 4> grid{{{false, false}, {true, false}, {false, true}, {true, true}}};
  std::vector<std::future<AblationCell>> jobs;
  for (auto [pos, vel] : grid) {
    jobs.push_back(std::async(std::launch::async, [spec, pos, vel] {
      ExperimentSpec cell_spec = spec;
      cell_spec.contact.toi_position = pos;
      cell_spec.contact.toi_velocity = vel;
      if (!spec.out_dir.empty()) {
        cell_spec.out_dir = spec.out_dir / cell_name(pos, vel);
      }
      AblationCell cell{pos, vel, std::nullopt, "ok"};
      try {
        cell.summary = run_optimize(cell_spec);
      } catch (const DegeneracyError& e) {
        cell.status = std::string("degenerate: ") + e.what();
      } catch (const NonFiniteError& e) {
        cell.status = std::string("non-finite: ") + e.what();
      }
      return cell;
    }));
  }
  for (auto& j : jobs) {
    res.cells.push_back(j.get());
  }
  if (!spec.out_dir.empty()) {
    detail::ensure_dir(spec.out_dir);
    io::CsvWriter w(spec.out_dir / "ablation.csv", io::kAblationHeader);
    json rows = json::array();
    for (const auto& c : res.cells) {
      const double best = c.summary ? c.summary->result.best_loss : std::nan("");
      const double fin = c.summary ? c.summary->result.final_loss : std::nan("");
      const int it = c.summary ? c.summary->result.best_iteration : -1;
      const double gap = res.analytical > 0.0 ? 100.0 * (best - res.analytical) / res.analytical : std::nan("");
      w.row(spec.scenario.name, c.toi_position ? 1 : 0, c.toi_velocity ? 1 : 0, best, fin, it, res.analytical, gap,
            c.status);
      rows.push_back({{"toi_position", c.toi_position},
                      {"toi_velocity", c.toi_velocity},
                      {"best_loss", c.summary ? json(best) : json(nullptr)},
                      {"status", c.status}});
    }
    detail::write_json(spec.out_dir / "summary.json",
                       {{"scenario", spec.scenario.name},
                        {"analytical_loss", res.analytical > 0.0 ? json(res.analytical) : json(nullptr)},
                        {"cells", rows}});
    detail::write_metadata(spec.out_dir, spec, clock.seconds());
  }
  return res;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckResult {
  GradcheckReport report;
  std::optional<double> alpha_star;        //!< empty when no ball-ball contact shift exists
  std::vector<ContinuitySweep> sweeps;     //!< at spacing and spacing / 10
};

inline GradcheckResult run_gradcheck(const ExperimentSpec& spec) {
  spec.validate();
  detail::Stopwatch clock;
  GradcheckResult res;
  res.report = gradient_check(spec.scenario, spec.contact, spec.objective, spec.scenario.initial_controls,
                              spec.gradcheck_samples, spec.seed, spec.fd_step);
  const Vec2d direction{0.0, 1.0};
  if (spec.contact.model == ContactModel::DirectImpulse) {
    res.alpha_star = find_contact_shift(spec.scenario, spec.contact, spec.scenario.initial_controls, direction);
    if (res.alpha_star) {
      for (double spacing : {spec.sweep_spacing, spec.sweep_spacing / 10.0}) {
        res.sweeps.push_back(continuity_sweep(spec.scenario, spec.contact, spec.scenario.initial_controls,
                                              direction, *res.alpha_star, spacing));
      }
    }
  }
  if (!spec.out_dir.empty()) {
    detail::ensure_dir(spec.out_dir);
    io::write_gradcheck(spec.out_dir / "gradcheck.csv", res.report);
    io::write_continuity(spec.out_dir / "continuity.csv", res.sweeps);
    json sweeps = json::array();
    for (const auto& sw : res.sweeps) {
      sweeps.push_back({{"spacing", sw.spacing},
                        {"on_max_adjacent_diff", sw.on.max_adjacent_diff},
                        {"off_max_adjacent_diff", sw.off.max_adjacent_diff}});
    }
    detail::write_json(spec.out_dir / "summary.json",
                       {{"fd_step", res.report.h},
                        {"checked", res.report.checked},
                        {"branch_flips", res.report.flipped},
                        {"max_rel_error", res.report.max_rel_error},
                        {"alpha_star", res.alpha_star ? json(*res.alpha_star) : json(nullptr)},
                        {"continuity", sweeps}});
    detail::write_metadata(spec.out_dir, spec, clock.seconds());
  }
  return res;
}

} // namespace toiv::exp
