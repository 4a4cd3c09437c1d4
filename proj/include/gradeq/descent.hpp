#ifndef GRADEQ_DESCENT_HPP
#define GRADEQ_DESCENT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradeq/losses.hpp"
#include "gradeq/schedule.hpp"
#include "gradeq/vec.hpp"

namespace gradeq {

enum class MirrorMap { identity, negative_entropy };

// Multiplicative-weights entries are floored here before renormalization, a
// documented deviation from exact arithmetic that avoids hard underflow.
inline constexpr double kWeightFloor = 1e-300;

/// Full record of a run: thetas holds theta_1..theta_{T+1}, grads the stepped
/// (sub)gradients g_1..g_T, reg_grads the implied proximal subgradients
/// g_r(theta_{t+1}) when a proximal step was taken. In sums-only mode just
/// the endpoints and running sums are kept, enough for endpoint identity
/// checks on long streams.
struct Trajectory {
  std::vector<Vec> thetas;
  std::vector<Vec> grads;
  std::vector<Vec> reg_grads;
  std::vector<double> etas;
  std::vector<double> loss_values;

  StepSchedule schedule = StepSchedule::constant(1.0);
  MirrorMap mirror = MirrorMap::identity;
  RegularizerSpec reg;

  bool dense = true;
  std::size_t steps = 0;
  Vec theta_first, theta_last;
  Vec grad_sum;
  Vec reg_grad_sum;
  Vec reg_grad_last;

  std::size_t size() const { return steps; }
  bool empty() const { return steps == 0; }

  const Vec& theta_at(std::size_t t) const {  // 1-based, t in 1..T+1
    if (!dense) throw std::logic_error("Trajectory: dense storage required");
    return thetas.at(t - 1);
  }
};

/// Online learner state. The parameter is mutated in place by the step
/// functions; online order is load-bearing, so a state is single-owner.
struct LearnerState {
  Vec theta;
  std::size_t t = 1;
  StepSchedule schedule = StepSchedule::constant(1.0);
  MirrorMap mirror = MirrorMap::identity;
  RegularizerSpec reg;
  bool dense_trace = true;

  void validate() const {
    if (t < 1) throw std::invalid_argument("LearnerState: t must be >= 1");
    if (theta.empty()) throw std::invalid_argument("LearnerState: empty theta");
    reg.validate();
    if (mirror == MirrorMap::negative_entropy) {
      double s = 0.0;
      for (double v : theta) {
        if (!(v > 0.0))
          throw std::invalid_argument("LearnerState: entropy mirror needs positive theta");
        s += v;
      }
      if (std::fabs(s - 1.0) > 1e-12)
        throw std::invalid_argument("LearnerState: entropy mirror needs theta on the simplex");
    }
  }
};

namespace detail {

inline void trace_init(Trajectory& traj, const LearnerState& st) {
  traj.schedule = st.schedule;
  traj.mirror = st.mirror;
  traj.reg = st.reg;
  traj.dense = st.dense_trace;
  traj.theta_first = st.theta;
  traj.theta_last = st.theta;
  traj.grad_sum.assign(st.theta.size(), 0.0);
  traj.reg_grad_sum.assign(st.theta.size(), 0.0);
  traj.reg_grad_last.assign(st.theta.size(), 0.0);
  if (traj.dense) traj.thetas.push_back(st.theta);
}

inline void trace_step(Trajectory& traj, const LearnerState& st, const Vec& g,
                       double eta, const Vec& g_r, double loss_value) {
  ++traj.steps;
  traj.theta_last = st.theta;
  axpy(1.0, g, traj.grad_sum);
  axpy(1.0, g_r, traj.reg_grad_sum);
  traj.reg_grad_last = g_r;
  if (traj.dense) {
    traj.thetas.push_back(st.theta);
    traj.grads.push_back(g);
    traj.reg_grads.push_back(g_r);
    traj.etas.push_back(eta);
    traj.loss_values.push_back(loss_value);
  }
}

// Euclidean projection onto the probability simplex (sort-based).
inline Vec project_simplex(const Vec& z) {
  Vec u(z);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double shift = 0.0, cs = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cs += u[i];
    double t = (cs - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) shift = t;
  }
  Vec out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::max(z[i] - shift, 0.0);
  return out;
}

}  // namespace detail

/// Plain gradient step theta <- theta - eta_t * g. Requires the identity
/// mirror and no proximal regularizer on the state.
inline void gd_step(LearnerState& state, const Vec& g, Trajectory* trace = nullptr,
                    double loss_value = 0.0) {
  if (state.mirror != MirrorMap::identity || state.reg.kind != RegKind::none)
    throw std::invalid_argument("gd_step: needs identity mirror and no prox regularizer");
  check_same_dim(state.theta, g, "gd_step");
  double eta = state.schedule.at(state.t);
  if (trace && trace->steps == 0 && trace->theta_first.empty())
    detail::trace_init(*trace, state);
  for (std::size_t i = 0; i < g.size(); ++i) state.theta[i] -= eta * g[i];
  state.t += 1;
  if (trace) {
    Vec gr(g.size(), 0.0);
    detail::trace_step(*trace, state, g, eta, gr, loss_value);
  }
}

/// Proximal mirror step: mirror image z with grad(Phi)(z) = grad(Phi)(theta)
/// - eta*g, then the Bregman-prox of the regularizer. The implied
/// regularizer subgradient g_r(theta_{t+1}) = (grad(Phi)(z) -
/// grad(Phi)(theta_{t+1}))/eta is recorded in the trace.
///
/// Supported combinations: identity x {none, l1, l2_half, l2_full, l2_ball,
/// simplex projection} and negative entropy x {none, simplex}. The entropy x
/// simplex case is the renormalized multiplicative-weights update.
inline void prox_mirror_step(LearnerState& state, const Vec& g,
                             Trajectory* trace = nullptr, double loss_value = 0.0) {
  check_same_dim(state.theta, g, "prox_mirror_step");
  double eta = state.schedule.at(state.t);
  if (trace && trace->steps == 0 && trace->theta_first.empty())
    detail::trace_init(*trace, state);
  Vec g_r(g.size(), 0.0);

  if (state.mirror == MirrorMap::identity) {
    Vec z(state.theta);
    for (std::size_t i = 0; i < g.size(); ++i) z[i] -= eta * g[i];
    Vec next;
    switch (state.reg.kind) {
      case RegKind::none:
        next = z;
        break;
      case RegKind::l1: {
        next.resize(z.size());
        double thr = eta * state.reg.lambda;
        for (std::size_t i = 0; i < z.size(); ++i)
          next[i] = sign0(z[i]) * std::max(std::fabs(z[i]) - thr, 0.0);
        break;
      }
      case RegKind::l2_half: {
        next = scaled(z, 1.0 / (1.0 + eta * state.reg.lambda));
        break;
      }
      case RegKind::l2_full: {
        next = scaled(z, 1.0 / (1.0 + 2.0 * eta * state.reg.lambda));
        break;
      }
      case RegKind::set_l2_ball: {
        double n = norm2(z);
        next = n > state.reg.radius ? scaled(z, state.reg.radius / n) : z;
        break;
      }
      case RegKind::set_simplex: {
        next = detail::project_simplex(z);
        break;
      }
    }
    for (std::size_t i = 0; i < z.size(); ++i) g_r[i] = (z[i] - next[i]) / eta;
    state.theta = std::move(next);
  } else {
    // negative entropy: grad(Phi)(w) = 1 + log w
    if (state.reg.kind != RegKind::none && state.reg.kind != RegKind::set_simplex)
      throw std::invalid_argument("prox_mirror_step: unsupported entropy/regularizer combination");
    Vec z(state.theta.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (!(state.theta[i] > 0.0))
        throw std::domain_error("prox_mirror_step: nonpositive weight under entropy map");
      z[i] = state.theta[i] * std::exp(-eta * g[i]);
      if (z[i] < kWeightFloor) z[i] = kWeightFloor;
    }
    Vec next(z);
    if (state.reg.kind == RegKind::set_simplex) {
      double s = std::accumulate(z.begin(), z.end(), 0.0);
      for (double& v : next) v /= s;
    }
    for (std::size_t i = 0; i < z.size(); ++i)
      g_r[i] = (std::log(z[i]) - std::log(next[i])) / eta;
    state.theta = std::move(next);
  }

  state.t += 1;
  if (trace) detail::trace_step(*trace, state, g, eta, g_r, loss_value);
}

/// Subgradient of the penalty alone (smooth/L1 kinds). Set characteristics
/// have no usable closed form here; take the proximal route instead.
inline Vec regularizer_subgradient(const RegularizerSpec& reg, const Vec& theta) {
  if (reg.kind == RegKind::set_simplex || reg.kind == RegKind::set_l2_ball)
    throw std::invalid_argument("regularizer_subgradient: use prox for set characteristics");
  if (reg.kind == RegKind::none)
    throw std::invalid_argument("regularizer_subgradient: no regularizer");
  Vec g(theta.size(), 0.0);
  detail::reg_subgrad_add(reg, theta, g);
  return g;
}

/// Run the online loop over a loss stream: at each round take the chosen
/// subgradient at the current iterate, then apply the configured step.
/// Deterministic given inputs; per-step errors carry the timestep index.
inline Trajectory run_stream(const std::vector<LossInstance>& losses,
                             LearnerState config) {
  config.validate();
  Trajectory traj;
  detail::trace_init(traj, config);
  bool plain = config.mirror == MirrorMap::identity && config.reg.kind == RegKind::none;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    try {
      double value = eval(losses[i], config.theta);
      Vec g = subgradient(losses[i], config.theta);
      if (plain)
        gd_step(config, g, &traj, value);
      else
        prox_mirror_step(config, g, &traj, value);
    } catch (const std::exception& e) {
      throw std::runtime_error("run_stream: step " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return traj;
}

}  // namespace gradeq

#endif
