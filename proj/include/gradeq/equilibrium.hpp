#ifndef GRADEQ_EQUILIBRIUM_HPP
#define GRADEQ_EQUILIBRIUM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradeq/descent.hpp"
#include "gradeq/losses.hpp"
#include "gradeq/vec.hpp"

namespace gradeq {

/// Per-prefix diagnostics: norm of the running average gradient, residual of
/// the applicable exact identity, and (optionally) an evaluated theoretical
/// bound with a satisfied flag.
struct EquilibriumReport {
  std::vector<double> prefix_avg_grad_norm;
  std::vector<double> identity_residual;
  std::optional<std::vector<double>> bound_series;
  std::vector<bool> satisfied;

  double bound_satisfaction_fraction() const {
    if (!bound_series || satisfied.empty()) return 1.0;
    std::size_t n = 0;
    for (bool s : satisfied) n += s ? 1 : 0;
    return static_cast<double>(n) / static_cast<double>(satisfied.size());
  }

  void attach_bounds(std::vector<double> bounds) {
    if (bounds.size() != prefix_avg_grad_norm.size())
      throw std::invalid_argument("attach_bounds: length mismatch");
    satisfied.resize(bounds.size());
    for (std::size_t i = 0; i < bounds.size(); ++i)
      satisfied[i] = prefix_avg_grad_norm[i] <= bounds[i];
    bound_series = std::move(bounds);
  }
};

/// Prefix averages of the stepped gradients and their norms.
inline EquilibriumReport avg_gradient(const Trajectory& traj) {
  if (traj.empty()) throw std::invalid_argument("avg_gradient: empty trajectory");
  if (!traj.dense) throw std::invalid_argument("avg_gradient: dense trajectory required");
  EquilibriumReport rep;
  Vec sum(traj.grads.front().size(), 0.0);
  for (std::size_t t = 0; t < traj.steps; ++t) {
    axpy(1.0, traj.grads[t], sum);
    rep.prefix_avg_grad_norm.push_back(norm2(sum) / static_cast<double>(t + 1));
  }
  rep.identity_residual.assign(traj.steps, 0.0);
  return rep;
}

/// Residuals of (1/T) sum g_t = (theta_1 - theta_{T+1}) / (eta T), one per
/// prefix. Exact (<= 1e-10) for any valid constant-step trajectory.
inline std::vector<double> identity_constant_step(const Trajectory& traj) {
  if (!traj.schedule.is_constant())
    throw std::invalid_argument("identity_constant_step: schedule is not constant");
  if (!traj.dense) throw std::invalid_argument("identity_constant_step: dense trajectory required");
  double eta = traj.schedule.eta;
  std::vector<double> out;
  out.reserve(traj.steps);
  Vec sum(traj.theta_first.size(), 0.0);
  for (std::size_t t = 1; t <= traj.steps; ++t) {
    axpy(1.0, traj.grads[t - 1], sum);
    double T = static_cast<double>(t);
    const Vec& tail = traj.theta_at(t + 1);
    double resid_sq = 0.0;
    for (std::size_t i = 0; i < sum.size(); ++i) {
      double lhs = sum[i] / T;
      double rhs = (traj.theta_first[i] - tail[i]) / (eta * T);
      resid_sq += (lhs - rhs) * (lhs - rhs);
    }
    out.push_back(std::sqrt(resid_sq));
  }
  return out;
}

/// Residuals of (1/T) sum g_t = (1/T) sum Delta_t (theta_t - theta_{T+1}),
/// with Delta_t = 1/eta_t - 1/eta_{t-1} and 1/eta_0 = 0.
inline std::vector<double> identity_decaying_step(const Trajectory& traj) {
  if (!traj.dense) throw std::invalid_argument("identity_decaying_step: dense trajectory required");
  if (traj.etas.size() != traj.steps)
    throw std::invalid_argument("identity_decaying_step: missing step record");
  std::vector<double> out;
  out.reserve(traj.steps);
  Vec gsum(traj.theta_first.size(), 0.0);
  // running sum of Delta_s * theta_s and of Delta_s
  Vec dtheta_sum(traj.theta_first.size(), 0.0);
  double dsum = 0.0;
  double inv_prev = 0.0;
  for (std::size_t t = 1; t <= traj.steps; ++t) {
    axpy(1.0, traj.grads[t - 1], gsum);
    double inv = 1.0 / traj.etas[t - 1];
    double delta = inv - inv_prev;
    inv_prev = inv;
    axpy(delta, traj.theta_at(t), dtheta_sum);
    dsum += delta;
    double T = static_cast<double>(t);
    const Vec& tail = traj.theta_at(t + 1);
    double resid_sq = 0.0;
    for (std::size_t i = 0; i < gsum.size(); ++i) {
      double lhs = gsum[i] / T;
      double rhs = (dtheta_sum[i] - dsum * tail[i]) / T;
      resid_sq += (lhs - rhs) * (lhs - rhs);
    }
    out.push_back(std::sqrt(resid_sq));
  }
  return out;
}

/// Residuals of the proximal-mirror identity
///   (1/T) sum (g_t + g_r(theta_t))
///     = [gradPhi(theta_1) + eta g_r(theta_1) - gradPhi(theta_{T+1})
///        - eta g_r(theta_{T+1})] / (eta T).
/// g_r(theta_1) defaults to zero, valid whenever 0 is a subgradient of the
/// regularizer at theta_1 (interior point / smooth penalty).
inline std::vector<double> identity_pmd(const Trajectory& traj,
                                        std::optional<Vec> g_r_theta1 = std::nullopt) {
  if (!traj.schedule.is_constant())
    throw std::invalid_argument("identity_pmd: constant schedule required");
  if (!traj.dense) throw std::invalid_argument("identity_pmd: dense trajectory required");
  if (traj.reg_grads.size() != traj.steps)
    throw std::invalid_argument("identity_pmd: missing regularizer-subgradient trace");
  std::size_t d = traj.theta_first.size();
  Vec gr1 = g_r_theta1.value_or(Vec(d, 0.0));
  if (gr1.size() != d) throw std::invalid_argument("identity_pmd: g_r(theta_1) dimension");
  double eta = traj.schedule.eta;

  auto mirror_of = [&](const Vec& th) {
    if (traj.mirror == MirrorMap::identity) return th;
    Vec out(th.size());
    for (std::size_t i = 0; i < th.size(); ++i) out[i] = 1.0 + std::log(th[i]);
    return out;
  };

  Vec head = mirror_of(traj.theta_first);
  axpy(eta, gr1, head);

  std::vector<double> out;
  out.reserve(traj.steps);
  Vec sum(d, 0.0);  // running sum of g_t + g_r(theta_t)
  axpy(1.0, gr1, sum);
  for (std::size_t t = 1; t <= traj.steps; ++t) {
    axpy(1.0, traj.grads[t - 1], sum);
    Vec tail = mirror_of(traj.theta_at(t + 1));
    axpy(eta, traj.reg_grads[t - 1], tail);
    double T = static_cast<double>(t);
    double resid_sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double lhs = sum[i] / T;
      double rhs = (head[i] - tail[i]) / (eta * T);
      resid_sq += (lhs - rhs) * (lhs - rhs);
    }
    out.push_back(std::sqrt(resid_sq));
    // g_r(theta_{t+1}) joins the running sum for the next prefix
    if (t < traj.steps) axpy(1.0, traj.reg_grads[t - 1], sum);
  }
  return out;
}

/// Identifiers for the closed-form average-gradient bounds. Names follow the
/// quantity each one bounds; see bound_value for the formulas.
enum class BoundId {
  gd_avg_grad,
  gd_avg_grad_zero_curv_1d,
  gd_avg_grad_zero_curv,
  gd_avg_grad_pos_curv,
  gd_avg_grad_quad_curv,
  quantile_avg_grad,
  quantile_coverage,
  squared_bias,
  logistic_bias,
  squared_groupwise_bias,
  logistic_groupwise_bias,
  glm_linear_avg_grad,
  glm_logistic_avg_grad,
  logistic_lasso_covariance,
  squared_ridge_covariance,
  logistic_lasso_multiaccuracy,
  squared_ridge_multiaccuracy,
  decaying_zero_curv_1d,
  decaying_zero_curv,
  decaying_pos_curv,
  decaying_quad_curv,
};

/// Constants feeding the bound formulas; only the fields a given BoundId
/// needs must be set.
struct BoundParams {
  double eta = 0.0;        // constant step size
  double L = 0.0;          // Lipschitz constant
  double h = 0.0;          // restorative horizon
  double b = 0.0;          // data / residual magnitude bound
  double c = 0.0;          // feature norm bound
  double delta = 0.0;      // squared-loss admissibility margin
  double epsilon = 0.0;    // logistic clipping margin
  double lambda = 0.0;     // regularization strength
  double d = 0.0;          // feature dimension
  double a = 0.0, bb = 1.0;  // logistic range endpoints
  double cap = 1.0;        // multiaccuracy class norm cap
  double theta1_norm = 0.0;
  double sched_c = 0.0, sched_alpha = 0.0;  // decaying schedules
};

namespace detail {

inline double ridge_C0(double lambda, double eta, double b, double c) {
  double num = (1.0 - lambda * eta - eta * c * c);
  num = num * num * b * b / (4.0 * (1.0 - lambda * eta - eta * c * c / 2.0));
  num += eta * c * c * b * b / 2.0;
  return num / (1.0 - lambda * eta / 2.0);
}

inline double ridge_C(double lambda, double eta, double b, double c) {
  return ridge_C0(lambda, eta, b, c) * (eta * (c * c + lambda) + 1.0);
}

inline double lasso_covariance_bound(const BoundParams& p, double T) {
  double Lfull = 2.0 * p.c + p.lambda * std::sqrt(p.d);
  return Lfull / T + (1.116 + p.eta * Lfull * Lfull) / (2.0 * p.lambda * p.eta * T) +
         p.lambda * std::sqrt(p.d);
}

inline double ridge_covariance_bound(const BoundParams& p, double T) {
  double C = ridge_C(p.lambda, p.eta, p.b, p.c);
  return p.b * p.c / T + std::sqrt(C) / (std::sqrt(p.lambda) * p.eta * T) +
         std::sqrt(p.lambda * C) + p.lambda * p.eta * p.b * p.c;
}

}  // namespace detail

namespace detail {

inline void need(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("bound_value: missing constant ") + what);
}

inline void check_bound_params(BoundId id, const BoundParams& p) {
  switch (id) {
    case BoundId::decaying_zero_curv_1d:
    case BoundId::decaying_zero_curv:
    case BoundId::decaying_pos_curv:
    case BoundId::decaying_quad_curv:
      need(p.sched_c > 0.0, "sched_c");
      need(p.sched_alpha >= 0.0 && p.sched_alpha < 1.0, "sched_alpha");
      return;
    default:
      need(p.eta > 0.0, "eta");
  }
  switch (id) {
    case BoundId::squared_bias:
    case BoundId::squared_groupwise_bias:
    case BoundId::glm_linear_avg_grad:
      need(p.delta > 0.0 && p.delta < 1.0, "delta");
      break;
    case BoundId::logistic_bias:
    case BoundId::logistic_groupwise_bias:
      need(p.epsilon > 0.0 && p.epsilon < 0.5, "epsilon");
      break;
    case BoundId::glm_logistic_avg_grad:
      need(p.epsilon > 0.0, "epsilon");
      need(p.bb > p.a, "a < bb");
      break;
    case BoundId::logistic_lasso_covariance:
    case BoundId::logistic_lasso_multiaccuracy:
    case BoundId::squared_ridge_covariance:
    case BoundId::squared_ridge_multiaccuracy:
      need(p.lambda > 0.0, "lambda");
      break;
    default:
      break;
  }
}

}  // namespace detail

/// Value of the bound with id `id` at prefix length T (or group count T_j
/// for the groupwise/GLM variants). theta_tail_norm is used only by
/// BoundId::gd_avg_grad.
inline double bound_value(BoundId id, const BoundParams& p, std::size_t Tn,
                          double theta_tail_norm = 0.0) {
  detail::check_bound_params(id, p);
  double T = static_cast<double>(Tn);
  switch (id) {
    case BoundId::gd_avg_grad:
      return (p.theta1_norm + theta_tail_norm) / (p.eta * T);
    case BoundId::gd_avg_grad_zero_curv_1d:
    case BoundId::gd_avg_grad_pos_curv:
      return 2.0 * p.theta1_norm / (p.eta * T) + p.L / T + p.h / (p.eta * T);
    case BoundId::gd_avg_grad_zero_curv:
      return 2.0 * p.theta1_norm / (p.eta * T) +
             std::sqrt(p.L * p.L / T + 2.0 * p.L * p.h / (p.eta * T));
    case BoundId::gd_avg_grad_quad_curv:
      return 2.0 * p.theta1_norm / (p.eta * T) + p.L / T + p.h / (p.eta * T);
    case BoundId::quantile_avg_grad:
      return (2.0 * p.theta1_norm + p.eta + p.b) / (p.eta * T);
    case BoundId::quantile_coverage:
      return (p.eta + p.b) / (p.eta * T);
    case BoundId::squared_bias:
    case BoundId::squared_groupwise_bias:
      return (p.b * p.eta * (1.0 + 1.0 / p.delta) + p.b / p.delta) / (p.eta * T);
    case BoundId::logistic_bias:
    case BoundId::logistic_groupwise_bias:
      return (2.0 * p.eta + std::log(1.0 / p.epsilon)) / (p.eta * T);
    case BoundId::glm_linear_avg_grad:
      return (2.0 * p.theta1_norm + p.b * p.eta * (1.0 + 1.0 / p.delta) + p.b / p.delta) /
             (p.eta * T);
    case BoundId::glm_logistic_avg_grad:
      return (2.0 * p.theta1_norm + (p.bb - p.a) * p.eta +
              std::log((p.bb - p.a) / (2.0 * p.epsilon))) /
             (p.eta * T);
    case BoundId::logistic_lasso_covariance:
      return detail::lasso_covariance_bound(p, T);
    case BoundId::squared_ridge_covariance:
      return detail::ridge_covariance_bound(p, T);
    case BoundId::logistic_lasso_multiaccuracy:
      return p.cap * detail::lasso_covariance_bound(p, T);
    case BoundId::squared_ridge_multiaccuracy:
      return p.cap * detail::ridge_covariance_bound(p, T);
    case BoundId::decaying_zero_curv_1d:
    case BoundId::decaying_pos_curv:
    case BoundId::decaying_quad_curv: {
      double Tpow = std::pow(T, 1.0 - p.sched_alpha);
      return 2.0 * p.theta1_norm / (p.sched_c * Tpow) +
             2.0 * (p.L + p.h / p.sched_c) / Tpow;
    }
    case BoundId::decaying_zero_curv: {
      double Tpow2 = std::pow(T, 2.0 * (1.0 - p.sched_alpha));
      double s = 0.0;
      for (std::size_t t = 1; t <= Tn; ++t) {
        double td = static_cast<double>(t);
        s += std::pow(td, -2.0 * p.sched_alpha) * p.L * p.L +
             2.0 * std::pow(td, -p.sched_alpha) * p.h * p.L / p.sched_c;
      }
      return 2.0 * p.theta1_norm / (p.sched_c * std::pow(T, 1.0 - p.sched_alpha)) +
             std::sqrt(s / Tpow2);
    }
  }
  throw std::invalid_argument("bound_value: unknown bound id");
}

/// Evaluate the chosen bound at every prefix of the trajectory. theta1 norm
/// is taken from the trajectory itself.
inline std::vector<double> bound_eval(const Trajectory& traj, BoundId id,
                                      BoundParams p) {
  if (traj.empty()) throw std::invalid_argument("bound_eval: empty trajectory");
  p.theta1_norm = norm2(traj.theta_first);
  if (p.eta == 0.0 && traj.schedule.is_constant()) p.eta = traj.schedule.eta;
  std::vector<double> out;
  out.reserve(traj.steps);
  for (std::size_t t = 1; t <= traj.steps; ++t) {
    double tail = id == BoundId::gd_avg_grad ? norm2(traj.theta_at(t + 1)) : 0.0;
    out.push_back(bound_value(id, p, t, tail));
  }
  return out;
}

enum class OracleKind { closed_form, numeric };

struct RegretReport {
  double cumulative_loss = 0.0;
  double oracle_loss = 0.0;
  Vec oracle_theta;
  double avg_regret = 0.0;
  OracleKind oracle_kind = OracleKind::closed_form;
  double oracle_tolerance = 0.0;
  bool converged = true;
};

namespace detail {

inline double total_loss(const std::vector<LossInstance>& losses, const Vec& theta) {
  double s = 0.0;
  for (const auto& l : losses) s += eval(l, theta);
  return s;
}

inline Vec total_subgradient(const std::vector<LossInstance>& losses, const Vec& theta) {
  Vec g(theta.size(), 0.0);
  for (const auto& l : losses) axpy(1.0, subgradient(l, theta), g);
  return g;
}

// Lower empirical quantile: smallest order statistic with cumulative
// fraction >= tau.
inline double lower_quantile(std::vector<double> v, double tau) {
  std::sort(v.begin(), v.end());
  double k = std::ceil(tau * static_cast<double>(v.size()));
  std::size_t idx = k < 1.0 ? 0 : static_cast<std::size_t>(k) - 1;
  if (idx >= v.size()) idx = v.size() - 1;
  return v[idx];
}

inline double golden_section(const std::function<double(double)>& fn, double lo,
                             double hi, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = fn(x1), f2 = fn(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = fn(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = fn(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Regret of the trajectory against the best fixed parameter. Closed-form
/// oracles: squared intercept (mean of residuals) and common-tau quantile
/// intercept (lower empirical quantile). Everything else is numeric: 1-D
/// golden section to 1e-8, multi-D batch gradient descent to gradient norm
/// 1e-6, with the method recorded in the report.
inline RegretReport regret(const Trajectory& traj,
                           const std::vector<LossInstance>& losses) {
  if (!traj.dense || traj.steps != losses.size())
    throw std::invalid_argument("regret: losses do not match trajectory");
  RegretReport rep;
  for (std::size_t t = 0; t < losses.size(); ++t)
    rep.cumulative_loss += eval(losses[t], traj.theta_at(t + 1));

  std::size_t d = traj.theta_first.size();
  bool all_squared = true, all_quantile = true, any_reg = false;
  double tau0 = losses.empty() ? 0.5 : losses.front().tau;
  for (const auto& l : losses) {
    all_squared &= l.kind == LossKind::squared;
    all_quantile &= l.kind == LossKind::quantile && l.tau == tau0;
    any_reg |= l.reg.kind != RegKind::none;
  }

  if (d == 1 && !any_reg && (all_squared || all_quantile) && !losses.empty()) {
    rep.oracle_kind = OracleKind::closed_form;
    std::vector<double> resp;
    resp.reserve(losses.size());
    for (const auto& l : losses) resp.push_back(l.response());
    double theta_star = 0.0;
    if (all_squared) {
      for (double v : resp) theta_star += v;
      theta_star /= static_cast<double>(resp.size());
    } else {
      theta_star = detail::lower_quantile(resp, tau0);
    }
    rep.oracle_theta = {theta_star};
  } else if (d == 1) {
    rep.oracle_kind = OracleKind::numeric;
    rep.oracle_tolerance = 1e-8;
    auto fn = [&](double th) { return detail::total_loss(losses, Vec{th}); };
    double lo = -1.0, hi = 1.0;
    for (const auto& l : losses) {
      lo = std::min(lo, l.response() - 1.0);
      hi = std::max(hi, l.response() + 1.0);
    }
    rep.oracle_theta = {detail::golden_section(fn, lo, hi, 1e-8)};
  } else {
    // batch gradient descent with backtracking line search
    rep.oracle_kind = OracleKind::numeric;
    rep.oracle_tolerance = 1e-6;
    Vec th(d, 0.0);
    double f = detail::total_loss(losses, th);
    rep.converged = false;
    for (int it = 0; it < 100000; ++it) {
      Vec g = detail::total_subgradient(losses, th);
      double gn = norm2(g);
      if (gn <= 1e-6) {
        rep.converged = true;
        break;
      }
      double step = 1.0;
      for (int ls = 0; ls < 60; ++ls) {
        Vec cand(th);
        axpy(-step, g, cand);
        double fc = detail::total_loss(losses, cand);
        if (fc < f - 0.25 * step * gn * gn) {
          th = std::move(cand);
          f = fc;
          break;
        }
        step *= 0.5;
      }
    }
    rep.oracle_theta = th;
    if (!rep.converged)
      throw std::runtime_error("regret: numeric oracle did not reach gradient tolerance");
  }

  rep.oracle_loss = detail::total_loss(losses, rep.oracle_theta);
  rep.avg_regret = (rep.cumulative_loss - rep.oracle_loss) /
                   static_cast<double>(losses.empty() ? 1 : losses.size());
  return rep;
}

/// Grid estimate of the no-move-regret objective: minimum over a
/// deterministic lattice of shifts delta in the radius ball of
/// (1/T) sum [l_t(theta_t + delta) - l_t(theta_t)]. An upper bound on the
/// infimum, adequate for detecting violations.
inline double nmr_estimate(const Trajectory& traj,
                           const std::vector<LossInstance>& losses, double radius,
                           std::size_t grid_size) {
  if (!(radius > 0.0)) throw std::invalid_argument("nmr_estimate: radius must be > 0");
  if (grid_size < 1) throw std::invalid_argument("nmr_estimate: grid_size must be >= 1");
  if (!traj.dense || traj.steps != losses.size())
    throw std::invalid_argument("nmr_estimate: losses do not match trajectory");
  std::size_t d = traj.theta_first.size();

  std::vector<Vec> deltas;
  deltas.push_back(Vec(d, 0.0));
  if (d == 1) {
    if (grid_size == 1) {
      deltas.push_back(Vec{radius});
      deltas.push_back(Vec{-radius});
    } else {
      for (std::size_t i = 0; i < grid_size; ++i) {
        double x = -radius + 2.0 * radius * static_cast<double>(i) /
                                 static_cast<double>(grid_size - 1);
        deltas.push_back(Vec{x});
      }
    }
  } else {
    auto per_axis = static_cast<std::size_t>(
        std::ceil(std::pow(static_cast<double>(grid_size), 1.0 / static_cast<double>(d))));
    per_axis = std::max<std::size_t>(per_axis, 2);
    std::vector<std::size_t> idx(d, 0);
    while (true) {
      Vec delta(d);
      for (std::size_t j = 0; j < d; ++j)
        delta[j] = -radius + 2.0 * radius * static_cast<double>(idx[j]) /
                               static_cast<double>(per_axis - 1);
      if (norm2(delta) <= radius) deltas.push_back(delta);
      std::size_t j = 0;
      while (j < d && ++idx[j] == per_axis) idx[j++] = 0;
      if (j == d) break;
    }
  }

  double best = kInf;
  double T = static_cast<double>(traj.steps);
  for (const auto& delta : deltas) {
    double s = 0.0;
    for (std::size_t t = 0; t < traj.steps; ++t) {
      Vec shifted(traj.theta_at(t + 1));
      axpy(1.0, delta, shifted);
      s += eval(losses[t], shifted) - eval(losses[t], traj.theta_at(t + 1));
    }
    best = std::min(best, s / T);
  }
  return best;
}

}  // namespace gradeq

#endif
