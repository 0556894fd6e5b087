#pragma once

/**
 * @file gradcheck.hpp
 * @brief Adjoint-vs-finite-difference probes and the contact-timestep
 * continuity sweep.
 *
 * The finite-difference side only calls the forward objective, evaluated in
 * long double, so it never touches the tape.
 */

#include "toiv/opt/objective.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <tuple>
#include <vector>

namespace toiv {

//! Relative error with an absolute floor so that two vanishing values
//! compare as equal.
inline double relative_error(double a, double b, double floor = 1e-12) {
  const double scale = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / scale;
}

//! Which discrete branches a rollout took: every contact event's step, pair
//! and whether its TOI was clamped.
using BranchSignature = std::vector<std::tuple<long, int, bool>>;

inline BranchSignature branch_signature(const EventLog& log) {
  BranchSignature sig;
  sig.reserve(log.size());
  for (const auto& e : log) {
    sig.emplace_back(e.step, static_cast<int>(e.pair), e.toi_clamped);
  }
  return sig;
}

struct GradcheckEntry {
  int step = 0;
  int component = 0; //!< 0 = x, 1 = y
  double adjoint = 0.0;
  double finite_difference = 0.0;
  double rel_error = 0.0;
  bool branch_flip = false; //!< the +/- h probes took different contact branches
};

struct GradcheckReport {
  double h = 1e-5;
  std::vector<GradcheckEntry> entries;
  double max_rel_error = 0.0; //!< over entries without a branch flip
  int flipped = 0;
  int checked = 0;
};

//! Central differences (f(u+h) - f(u-h)) / 2h at `samples` control entries
//! drawn without replacement from a seeded generator.
inline GradcheckReport gradient_check(const ScenarioConfig& scenario, const ContactConfig& contact,
                                      const ObjectiveConfig& obj, const ControlSequence& controls, int samples,
                                      std::uint64_t seed, double h = 1e-5) {
  GradcheckReport rep;
  rep.h = h;
  const auto vg = objective_gradient(scenario, contact, obj, controls);

  std::vector<int> flat(controls.size() * 2);
  std::iota(flat.begin(), flat.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(flat.begin(), flat.end(), rng);
  flat.resize(std::min<std::size_t>(flat.size(), static_cast<std::size_t>(std::max(samples, 0))));
  std::sort(flat.begin(), flat.end());

  for (int k : flat) {
    const auto i = static_cast<std::size_t>(k / 2);
    const int comp = k % 2;
    // evaluated in extended precision: the gradient of the running cost
    // alone can sit 5 orders of magnitude below the loss
    auto probe = [&](double delta, EventLog& log) {
      std::vector<Vec2<long double>> u;
      u.reserve(controls.size());
      for (const auto& c : controls) {
        u.emplace_back(c.x, c.y);
      }
      (comp == 0 ? u[i].x : u[i].y) += static_cast<long double>(delta);
      return objective_from<long double>(scenario, contact, obj, std::span<const Vec2<long double>>(u), &log);
    };
    EventLog plus_log, minus_log;
    const long double fp = probe(h, plus_log);
    const long double fm = probe(-h, minus_log);
    GradcheckEntry e;
    e.step = static_cast<int>(i);
    e.component = comp;
    e.adjoint = comp == 0 ? vg.gradient[i].x : vg.gradient[i].y;
    e.finite_difference = static_cast<double>((fp - fm) / (2.0L * static_cast<long double>(h)));
    e.rel_error = relative_error(e.adjoint, e.finite_difference);
    e.branch_flip = branch_signature(plus_log) != branch_signature(minus_log);
    if (e.branch_flip) {
      ++rep.flipped;
    } else {
      ++rep.checked;
      rep.max_rel_error = std::max(rep.max_rel_error, e.rel_error);
    }
    rep.entries.push_back(e);
  }
  return rep;
}

struct SweepPoint {
  double alpha = 0.0;
  long contact_step = -1;  //!< step of the first ball-ball event, -1 if none
  Vec2d v2_after{};        //!< Ball 2 velocity right after that event
};

struct SweepCurve {
  bool toi_velocity = false;
  std::vector<SweepPoint> points;
  double max_adjacent_diff = 0.0;
};

struct ContinuitySweep {
  double alpha_star = 0.0; //!< parameter where the first contact moves to another step
  double spacing = 0.0;
  SweepCurve on, off;
};

namespace detail {

inline ControlSequence shifted(const ControlSequence& base, const Vec2d& direction, double alpha) {
  ControlSequence u = base;
  for (auto& e : u) {
    e += direction * alpha;
  }
  return u;
}

inline std::optional<ContactEvent> first_ball_contact(const ScenarioConfig& scenario, const ContactConfig& contact,
                                                      const ControlSequence& u) {
  EventLog log;
  (void)rollout(scenario, contact, u, &log);
  for (const auto& e : log) {
    if (e.pair == ContactPair::BallBall) {
      return e;
    }
  }
  return std::nullopt;
}

inline long first_contact_step(const ScenarioConfig& scenario, const ContactConfig& contact,
                               const ControlSequence& u) {
  const auto e = first_ball_contact(scenario, contact, u);
  return e ? e->step : -1;
}

} // namespace detail

//! Locates the parameter alpha* nearest to 0 (searching upward) where the
//! first ball-ball contact of u(alpha) = base + alpha * direction moves to a
//! different step. Returns nullopt if none is found within `max_alpha`.
inline std::optional<double> find_contact_shift(const ScenarioConfig& scenario, const ContactConfig& contact,
                                                const ControlSequence& base, const Vec2d& direction,
                                                double max_alpha = 1.0, double probe = 1e-3) {
  const long s0 = detail::first_contact_step(scenario, contact, base);
  if (s0 < 0) {
    return std::nullopt;
  }
  double lo = 0.0;
  double hi = probe;
  while (detail::first_contact_step(scenario, contact, detail::shifted(base, direction, hi)) == s0) {
    lo = hi;
    hi += probe;
    if (hi > max_alpha) {
      return std::nullopt;
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (detail::first_contact_step(scenario, contact, detail::shifted(base, direction, mid)) == s0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

//! Post-collision velocity of Ball 2 along a grid of 2 * half_points values
//! of alpha with the given spacing, placed symmetrically so alpha* falls
//! between the two middle points. Run once with toi_velocity on and once off.
inline ContinuitySweep continuity_sweep(const ScenarioConfig& scenario, const ContactConfig& contact,
                                        const ControlSequence& base, const Vec2d& direction, double alpha_star,
                                        double spacing, int half_points = 10) {
  ContinuitySweep sweep;
  sweep.alpha_star = alpha_star;
  sweep.spacing = spacing;
  for (bool vel : {true, false}) {
    ContactConfig c = contact;
    c.toi_velocity = vel;
    SweepCurve curve;
    curve.toi_velocity = vel;
    for (int k = -half_points; k < half_points; ++k) {
      SweepPoint pt;
      pt.alpha = alpha_star + (k + 0.5) * spacing;
      if (const auto e = detail::first_ball_contact(scenario, c, detail::shifted(base, direction, pt.alpha))) {
        pt.contact_step = e->step;
        pt.v2_after = e->v_out2;
      }
      curve.points.push_back(pt);
    }
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
      curve.max_adjacent_diff =
          std::max(curve.max_adjacent_diff, (curve.points[k].v2_after - curve.points[k - 1].v2_after).norm());
    }
    (vel ? sweep.on : sweep.off) = std::move(curve);
  }
  return sweep;
}

} // namespace toiv
