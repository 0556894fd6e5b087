#pragma once

/**
 * @file tables.hpp
 * @brief Comma-separated output tables. Every table has a one-line header
 * and a fixed column set:
 *
 *   trajectory.csv        step,t,p1x,p1y,v1x,v1y,p2x,p2y,v2x,v2y,events
 *   events.csv            step,pair,depth,toi,toi_clamped,nx,ny,v1x_out,v1y_out,v2x_out,v2y_out
 *   learning_curve.csv    iteration,loss,grad_max
 *   controls.csv          step,t,ux,uy
 *   control_snapshots.csv iteration,step,ux,uy
 *   ablation.csv          scenario,toi_position,toi_velocity,best_loss,final_loss,best_iteration,analytical,gap_pct,status
 *   gradcheck.csv         step,component,adjoint,finite_difference,rel_error,branch_flip
 *   continuity.csv        spacing,toi_velocity,alpha,contact_step,v2x,v2y
 *
 * `events` in trajectory.csv lists the contacts resolved while producing
 * that row's state, joined with ';' (empty when none).
 */

#include "toiv/errors.hpp"
#include "toiv/exp/gradcheck.hpp"
#include "toiv/opt/optimizer.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace toiv::io {

inline constexpr const char* kTrajectoryHeader = "step,t,p1x,p1y,v1x,v1y,p2x,p2y,v2x,v2y,events";
inline constexpr const char* kEventsHeader =
    "step,pair,depth,toi,toi_clamped,nx,ny,v1x_out,v1y_out,v2x_out,v2y_out";
inline constexpr const char* kLearningCurveHeader = "iteration,loss,grad_max";
inline constexpr const char* kControlsHeader = "step,t,ux,uy";
inline constexpr const char* kSnapshotsHeader = "iteration,step,ux,uy";
inline constexpr const char* kAblationHeader =
    "scenario,toi_position,toi_velocity,best_loss,final_loss,best_iteration,analytical,gap_pct,status";
inline constexpr const char* kGradcheckHeader = "step,component,adjoint,finite_difference,rel_error,branch_flip";
inline constexpr const char* kContinuityHeader = "spacing,toi_velocity,alpha,contact_step,v2x,v2y";

class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, const char* header) : out_(path) {
    if (!out_) {
      throw ConfigError("cannot write '" + path.string() + "'");
    }
    out_ << std::setprecision(17) << header << '\n';
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cells, first = false), ...);
    out_ << '\n';
  }

private:
  std::ofstream out_;
};

inline void write_trajectory(const std::filesystem::path& path, const std::vector<StateD>& traj, double dt,
                             const EventLog& events) {
  std::map<long, std::string> by_step; // events of step i produce state i + 1
  for (const auto& e : events) {
    auto& cell = by_step[e.step + 1];
    cell += (cell.empty() ? "" : ";") + std::string(to_string(e.pair));
  }
  CsvWriter w(path, kTrajectoryHeader);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj[i];
    const auto it = by_step.find(static_cast<long>(i));
    w.row(i, static_cast<double>(i) * dt, s.p1.x, s.p1.y, s.v1.x, s.v1.y, s.p2.x, s.p2.y, s.v2.x, s.v2.y,
          it == by_step.end() ? std::string() : it->second);
  }
}

inline void write_events(const std::filesystem::path& path, const EventLog& events) {
  CsvWriter w(path, kEventsHeader);
  for (const auto& e : events) {
    w.row(e.step, to_string(e.pair), e.depth, e.toi, e.toi_clamped ? 1 : 0, e.collision_dir.x, e.collision_dir.y,
          e.v_out1.x, e.v_out1.y, e.v_out2.x, e.v_out2.y);
  }
}

inline void write_learning_curve(const std::filesystem::path& path, const LearningCurve& curve) {
  CsvWriter w(path, kLearningCurveHeader);
  for (const auto& r : curve.records) {
    w.row(r.iteration, r.loss, r.grad_max);
  }
}

inline void write_controls(const std::filesystem::path& path, const ControlSequence& u, double dt) {
  CsvWriter w(path, kControlsHeader);
  for (std::size_t i = 0; i < u.size(); ++i) {
    w.row(i, static_cast<double>(i) * dt, u[i].x, u[i].y);
  }
}

inline void write_snapshots(const std::filesystem::path& path, const LearningCurve& curve) {
  CsvWriter w(path, kSnapshotsHeader);
  for (const auto& snap : curve.snapshots) {
    for (std::size_t i = 0; i < snap.controls.size(); ++i) {
      w.row(snap.iteration, i, snap.controls[i].x, snap.controls[i].y);
    }
  }
}

inline void write_gradcheck(const std::filesystem::path& path, const GradcheckReport& rep) {
  CsvWriter w(path, kGradcheckHeader);
  for (const auto& e : rep.entries) {
    w.row(e.step, e.component == 0 ? "x" : "y", e.adjoint, e.finite_difference, e.rel_error,
          e.branch_flip ? 1 : 0);
  }
}

inline void write_continuity(const std::filesystem::path& path, const std::vector<ContinuitySweep>& sweeps) {
  CsvWriter w(path, kContinuityHeader);
  for (const auto& sw : sweeps) {
    for (const SweepCurve* c : {&sw.on, &sw.off}) {
      for (const auto& p : c->points) {
        w.row(sw.spacing, c->toi_velocity ? 1 : 0, p.alpha, p.contact_step, p.v2_after.x, p.v2_after.y);
      }
    }
  }
}

//! A parsed table: header names and raw string cells.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) {
        return i;
      }
    }
    throw ConfigError("table has no column '" + name + "'");
  }

  double number(std::size_t row, const std::string& name) const {
    const std::string& cell = rows.at(row).at(column(name));
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size()) {
        throw std::invalid_argument(cell);
      }
      return v;
    } catch (const std::exception&) {
      throw ConfigError("row " + std::to_string(row + 2) + ", column '" + name + "': not a number");
    }
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    cells.emplace_back();
  }
  return cells;
}

inline Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open '" + path.string() + "'");
  }
  Table t;
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError(path.string() + ": empty table");
  }
  t.columns = split_csv_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    auto cells = split_csv_line(line);
    if (cells.size() != t.columns.size()) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.columns.size()) + " cells, got " + std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

//! Reads a controls.csv back into a sequence.
inline ControlSequence read_controls(const std::filesystem::path& path) {
  const Table t = read_table(path);
  ControlSequence u;
  u.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    u.push_back({t.number(i, "ux"), t.number(i, "uy")});
  }
  return u;
}

} // namespace toiv::io
