#ifndef GRADEQ_COUNTEREXAMPLES_HPP
#define GRADEQ_COUNTEREXAMPLES_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradeq/descent.hpp"
#include "gradeq/losses.hpp"
#include "gradeq/vec.hpp"

namespace gradeq {

/// Analytic targets attached to a construction; only the quantities the
/// construction pins are set.
struct AnalyticTargets {
  std::optional<double> avg_grad_norm;
  std::optional<double> avg_regret;
  std::optional<double> avg_loss;       // mean of (y_t - theta_t)^2, unhalved
  std::optional<double> bias;           // mean(theta) - mean(y)
  std::optional<double> oracle_loss;    // minimal mean (y - theta)^2, unhalved
  std::optional<double> final_sq_norm;  // ||theta_{T+1}||^2 after simulation
};

/// A hand-built iterate/loss pair realizing one of the no-regret vs
/// gradient-equilibrium dissociations. The true per-step loss is
/// loss_scale * eval(losses[t], .): the absolute-value loss |theta| is
/// realized as 2 * rho_{1/2}(0 - theta), which is the only Table-1 family
/// that reaches it.
struct Construction {
  std::string name;
  std::vector<Vec> thetas;
  std::vector<LossInstance> losses;
  double loss_scale = 1.0;
  AnalyticTargets analytic;

  std::size_t size() const { return thetas.size(); }

  void validate() const {
    if (thetas.size() != losses.size())
      throw std::invalid_argument("Construction: sequence length mismatch");
  }
};

/// Measured average gradient of the construction (scaled), as a vector.
inline Vec measured_avg_gradient(const Construction& cx) {
  cx.validate();
  if (cx.thetas.empty()) throw std::invalid_argument("empty construction");
  Vec sum(cx.thetas.front().size(), 0.0);
  for (std::size_t t = 0; t < cx.size(); ++t)
    axpy(cx.loss_scale, subgradient(cx.losses[t], cx.thetas[t]), sum);
  for (double& v : sum) v /= static_cast<double>(cx.size());
  return sum;
}

/// Measured average of the scaled losses along the sequence.
inline double measured_avg_loss(const Construction& cx) {
  cx.validate();
  double s = 0.0;
  for (std::size_t t = 0; t < cx.size(); ++t)
    s += cx.loss_scale * eval(cx.losses[t], cx.thetas[t]);
  return s / static_cast<double>(cx.size());
}

/// Measured average regret of the scaled losses against the best fixed
/// parameter, reusing the regret oracle from the equilibrium module through
/// a throwaway trajectory.
inline Trajectory construction_trajectory(const Construction& cx, double eta = 1.0) {
  cx.validate();
  Trajectory traj;
  traj.schedule = StepSchedule::constant(eta);
  traj.dense = true;
  traj.steps = cx.size();
  traj.thetas = cx.thetas;
  traj.thetas.push_back(cx.thetas.empty() ? Vec{0.0} : cx.thetas.back());
  traj.theta_first = traj.thetas.front();
  traj.theta_last = traj.thetas.back();
  for (std::size_t t = 0; t < cx.size(); ++t) {
    traj.grads.push_back(subgradient(cx.losses[t], cx.thetas[t]));
    traj.etas.push_back(eta);
    traj.loss_values.push_back(eval(cx.losses[t], cx.thetas[t]));
  }
  traj.grad_sum.assign(traj.theta_first.size(), 0.0);
  for (const auto& g : traj.grads) axpy(1.0, g, traj.grad_sum);
  return traj;
}

/// No regret without gradient equilibrium on absolute-value losses:
/// theta_t = 1/t (one admissible positive vanishing sequence). The average
/// gradient stays exactly 1 while the average regret is H_T / T.
inline Construction nr_not_geq_abs(std::size_t T) {
  if (T < 1) throw std::invalid_argument("nr_not_geq_abs: T must be >= 1");
  Construction cx;
  cx.name = "nr-not-geq-abs";
  cx.loss_scale = 2.0;
  double harmonic = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    cx.thetas.push_back(Vec{1.0 / static_cast<double>(t)});
    cx.losses.push_back(LossInstance::quantile(0.5, 0.0));
    harmonic += 1.0 / static_cast<double>(t);
  }
  cx.analytic.avg_grad_norm = 1.0;
  cx.analytic.avg_regret = harmonic / static_cast<double>(T);
  return cx;
}

/// Gradient equilibrium without no regret: theta_t = +-c alternating on
/// absolute-value losses. |avg gradient| <= 1/T, average regret = c.
inline Construction geq_not_nr_abs(std::size_t T, double c) {
  if (T < 1) throw std::invalid_argument("geq_not_nr_abs: T must be >= 1");
  if (!(c > 0.0)) throw std::invalid_argument("geq_not_nr_abs: c must be > 0");
  Construction cx;
  cx.name = "geq-not-nr-abs";
  cx.loss_scale = 2.0;
  for (std::size_t t = 1; t <= T; ++t) {
    cx.thetas.push_back(Vec{t % 2 == 1 ? c : -c});
    cx.losses.push_back(LossInstance::quantile(0.5, 0.0));
  }
  cx.analytic.avg_grad_norm = T % 2 == 0 ? 0.0 : 1.0 / static_cast<double>(T);
  cx.analytic.avg_regret = c;
  return cx;
}

namespace detail {

// na + mb = 0 must hold exactly; rational inputs are scaled to integers so
// float drift cannot fake or break the zero-regret claim.
inline bool exact_zero_combination(double a, double b, std::size_t n, std::size_t m) {
  const double scale = 720720.0;  // lcm(1..13), covers short decimal inputs
  double as = a * scale, bs = b * scale;
  double ar = std::round(as), br = std::round(bs);
  if (std::fabs(as - ar) > 1e-6 || std::fabs(bs - br) > 1e-6) return false;
  auto A = static_cast<std::int64_t>(ar);
  auto B = static_cast<std::int64_t>(br);
  return static_cast<std::int64_t>(n) * A + static_cast<std::int64_t>(m) * B == 0;
}

}  // namespace detail

/// No regret without gradient equilibrium on squared losses. Data repeats a
/// for n steps then b for m steps (na + mb = 0, a < 0 < b); iterates repeat
/// u = a and v = b + sqrt(alpha a^2 / beta + b^2). The average loss matches
/// the oracle exactly while the average gradient equals
/// sqrt(alpha beta a^2 + beta^2 b^2).
inline Construction nr_not_geq_squared(double a, double b, std::size_t n,
                                       std::size_t m, std::size_t reps) {
  if (!(a < 0.0 && 0.0 < b)) throw std::invalid_argument("nr_not_geq_squared: needs a < 0 < b");
  if (!(n > m && m >= 1)) throw std::invalid_argument("nr_not_geq_squared: needs n > m >= 1");
  if (reps < 1) throw std::invalid_argument("nr_not_geq_squared: reps must be >= 1");
  if (!detail::exact_zero_combination(a, b, n, m))
    throw std::invalid_argument("nr_not_geq_squared: na + mb != 0");
  double alpha = static_cast<double>(n) / static_cast<double>(n + m);
  double beta = static_cast<double>(m) / static_cast<double>(n + m);
  double v = b + std::sqrt(alpha * a * a / beta + b * b);

  Construction cx;
  cx.name = "nr-not-geq-squared";
  for (std::size_t r = 0; r < reps; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      cx.thetas.push_back(Vec{a});
      cx.losses.push_back(LossInstance::squared(a));
    }
    for (std::size_t i = 0; i < m; ++i) {
      cx.thetas.push_back(Vec{v});
      cx.losses.push_back(LossInstance::squared(b));
    }
  }
  cx.analytic.avg_grad_norm = std::sqrt(alpha * beta * a * a + beta * beta * b * b);
  cx.analytic.avg_regret = 0.0;
  cx.analytic.oracle_loss = alpha * a * a + beta * b * b;
  cx.analytic.avg_loss = alpha * a * a + beta * b * b;
  return cx;
}

/// Zero-regret, biased iterates for any data sequence: theta_t = y_t + s_T.
/// The average (unhalved) loss is s_T^2 and the bias is exactly s_T.
inline Construction zero_regret_bias(const std::vector<double>& y) {
  if (y.empty()) throw std::invalid_argument("zero_regret_bias: empty sequence");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y.size());
  double s = std::sqrt(var);

  Construction cx;
  cx.name = "zero-regret-bias";
  for (double v : y) {
    cx.thetas.push_back(Vec{v + s});
    cx.losses.push_back(LossInstance::squared(v));
  }
  cx.analytic.avg_loss = var;
  cx.analytic.bias = s;
  cx.analytic.avg_regret = 0.0;
  return cx;
}

/// Zero-curvature escape in d = 2: each loss is a GLM-linear instance whose
/// feature is the unit counter-clockwise normal of the current iterate with
/// response -L, so the gradient has norm L and is orthogonal to theta.
/// Under constant-step GD, ||theta_{T+1}||^2 = ||theta_1||^2 + eta^2 L^2 T
/// exactly.
inline Construction spiral_zero_curvature(double eta, double L, std::size_t T,
                                          Vec theta1 = {1.0, 0.0}) {
  if (!(eta > 0.0 && L > 0.0))
    throw std::invalid_argument("spiral_zero_curvature: eta and L must be > 0");
  if (theta1.size() != 2) throw std::invalid_argument("spiral_zero_curvature: dimension 2 only");
  if (norm2(theta1) == 0.0)
    throw std::invalid_argument("spiral_zero_curvature: theta_1 = 0 has no orthogonal direction");

  Construction cx;
  cx.name = "spiral-zero-curvature";
  Vec theta = theta1;
  for (std::size_t t = 0; t < T; ++t) {
    double nrm = norm2(theta);
    Vec x{-theta[1] / nrm, theta[0] / nrm};
    cx.thetas.push_back(theta);
    cx.losses.push_back(LossInstance::glm_linear(x, -L));
    // gradient is x * (x.theta - y) = L * x
    theta[0] -= eta * L * x[0];
    theta[1] -= eta * L * x[1];
  }
  cx.analytic.final_sq_norm =
      norm2_sq(theta1) + eta * eta * L * L * static_cast<double>(T);
  return cx;
}

}  // namespace gradeq

#endif
