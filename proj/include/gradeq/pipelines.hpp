#ifndef GRADEQ_PIPELINES_HPP
#define GRADEQ_PIPELINES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradeq/datagen.hpp"
#include "gradeq/descent.hpp"
#include "gradeq/equilibrium.hpp"
#include "gradeq/losses.hpp"
#include "gradeq/schedule.hpp"
#include "gradeq/vec.hpp"

namespace gradeq {

/// Output of the scalar debiasing pipelines: adjustment term, adjusted
/// prediction per step, the underlying descent trajectory, and the bias
/// series paired with its theoretical bound.
struct PipelineResult {
  std::vector<double> adjustment;
  std::vector<double> adjusted;      // classification: clamped to [0,1]
  std::vector<double> adjusted_raw;  // classification only, unclamped
  Trajectory traj;
  EquilibriumReport report;
  bool guarantee_void = false;
};

/// Per-group diagnostics, indexed by group-visit count. A group that never
/// appears yields a null report (count 0, empty series). A group whose count
/// is a vanishing fraction of the stream keeps its finite-sample bound but is
/// flagged as not meaningful.
struct GroupReport {
  std::string label;
  std::size_t count = 0;
  std::vector<double> bias_series;
  std::optional<std::vector<double>> bound_series;
  std::vector<bool> satisfied;
  bool bound_meaningful = true;

  bool is_null() const { return count == 0; }
  double final_bias() const { return bias_series.empty() ? 0.0 : bias_series.back(); }
};

struct MultigroupResult {
  PipelineResult base;
  std::vector<double> marginal_bias;
  std::vector<GroupReport> groups;
};

struct DecorrelateResult {
  std::vector<double> adjustment;
  std::vector<double> adjusted;
  std::vector<double> adjusted_raw;  // classification only
  std::vector<double> residuals;     // adjusted - y, the decorrelation target
  std::vector<double> covariance_series;
  std::vector<double> bound_series;
  std::vector<bool> satisfied;
  Trajectory traj;
};

struct QuantileTrackResult {
  std::vector<double> adjusted;  // f_t + theta_t
  std::vector<std::size_t> coverage_count;
  std::vector<double> coverage_gap;  // |C_t/t - tau|
  std::vector<double> bound_series;
  std::vector<bool> satisfied;
  double quantile_loss_sum = 0.0;
  Trajectory traj;
};

struct EnsembleResult {
  std::vector<double> adjusted;            // f_t + w_t . Theta_t
  std::vector<Vec> weights;                // w_1..w_{T+1}
  std::vector<Vec> expert_thetas;          // Theta_1..Theta_{T+1}
  std::vector<std::size_t> coverage_count;
  std::vector<double> coverage_gap;
  double quantile_loss_sum = 0.0;
  std::vector<double> expert_loss_sum;
  std::vector<std::size_t> expert_coverage_count;
};

struct EloTable {
  Vec scores;
  std::vector<std::size_t> counts;
  Vec signed_residual;  // sum over I_m of z_tm (p_t - y_t)
  Vec raw_residual;     // sum over I_m of (p_t - y_t)

  std::optional<double> signed_bias(std::size_t m) const {
    if (counts[m] == 0) return std::nullopt;
    return signed_residual[m] / static_cast<double>(counts[m]);
  }
  std::optional<double> raw_bias(std::size_t m) const {
    if (counts[m] == 0) return std::nullopt;
    return raw_residual[m] / static_cast<double>(counts[m]);
  }
};

struct EloResult {
  EloTable table;
  Trajectory traj;
  std::vector<double> p_series;  // predicted win probability of model_b
  std::vector<int> a_series, b_series;
  std::vector<double> y_series;
};

namespace detail {

// eta = 0 is an accepted no-op baseline: the parameter stays frozen at 0 and
// no bound is attached (there is no guarantee to check).
inline LearnerState scalar_state(double eta) {
  LearnerState st;
  st.theta = Vec{0.0};
  st.schedule = StepSchedule::constant(eta > 0.0 ? eta : 1.0);
  return st;
}

inline LearnerState vector_state(double eta, std::size_t d) {
  LearnerState st;
  st.theta = Vec(d, 0.0);
  st.schedule = StepSchedule::constant(eta > 0.0 ? eta : 1.0);
  return st;
}

// Step or, at eta = 0, record the round without moving.
inline void step_or_freeze(LearnerState& st, double eta, const Vec& g, Trajectory* traj,
                           double loss_value = 0.0) {
  if (eta > 0.0) {
    gd_step(st, g, traj, loss_value);
    return;
  }
  if (traj && traj->steps == 0 && traj->theta_first.empty()) trace_init(*traj, st);
  st.t += 1;
  if (traj) trace_step(*traj, st, g, 0.0, Vec(g.size(), 0.0), loss_value);
}

inline double quantile_loss(double tau, double u) {
  return u >= 0.0 ? tau * u : (1.0 - tau) * (-u);
}

inline bool eta_admissible_squared(double eta, double delta) {
  return eta <= 2.0 * (1.0 - delta) / ((1.0 + delta) * (1.0 + delta));
}

}  // namespace detail

/// Simple debiasing for regression: emit f_t + theta_t, update theta by the
/// residual gradient g = f + theta - y. The bias series is paired with the
/// squared-loss bound for the supplied (b, delta); step sizes beyond the
/// delta-admissible range void the guarantee but still run.
inline PipelineResult debias_regression(const Stream& stream, double eta, double b,
                                        double delta) {
  if (!(eta >= 0.0)) throw std::invalid_argument("debias_regression: eta must be >= 0");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("debias_regression: delta must lie in (0,1)");
  PipelineResult out;
  out.guarantee_void = !detail::eta_admissible_squared(eta, delta);
  LearnerState st = detail::scalar_state(eta);
  for (const auto& rec : stream.records) {
    double adj = st.theta[0];
    double pred = rec.f + adj;
    double g = pred - rec.y;
    out.adjustment.push_back(adj);
    out.adjusted.push_back(pred);
    detail::step_or_freeze(st, eta, Vec{g}, &out.traj, 0.5 * g * g);
  }
  if (!stream.records.empty()) {
    out.report = avg_gradient(out.traj);
    if (eta > 0.0) {
      BoundParams p;
      p.eta = eta;
      p.b = b;
      p.delta = delta;
      out.report.attach_bounds(bound_eval(out.traj, BoundId::squared_bias, p));
    }
  }
  return out;
}

/// Simple debiasing for classification: base probabilities are clipped into
/// [eps, 1-eps], the adjusted prediction is p_t + 2 sigma(theta_t) - 1
/// (clamped copy reported alongside the raw value; the update always uses
/// the raw one).
inline PipelineResult debias_classification(const Stream& stream, double eta,
                                            double eps) {
  if (!(eta >= 0.0))
    throw std::invalid_argument("debias_classification: eta must be >= 0");
  if (!(eps > 0.0 && eps < 0.5))
    throw std::invalid_argument("debias_classification: epsilon must lie in (0,0.5)");
  PipelineResult out;
  LearnerState st = detail::scalar_state(eta);
  for (const auto& rec : stream.records) {
    double p = std::clamp(rec.f, eps, 1.0 - eps);
    double adj = 2.0 * sigmoid(st.theta[0]) - 1.0;
    double raw = p + adj;
    double g = raw - rec.y;
    out.adjustment.push_back(adj);
    out.adjusted_raw.push_back(raw);
    out.adjusted.push_back(std::clamp(raw, 0.0, 1.0));
    double th = st.theta[0];
    double value = -(rec.y - p) * th + 2.0 * log1pexp(th) - th;
    detail::step_or_freeze(st, eta, Vec{g}, &out.traj, value);
  }
  if (!stream.records.empty()) {
    out.report = avg_gradient(out.traj);
    if (eta > 0.0) {
      BoundParams p;
      p.eta = eta;
      p.epsilon = eps;
      out.report.attach_bounds(bound_eval(out.traj, BoundId::logistic_bias, p));
    }
  }
  return out;
}

namespace detail {

inline MultigroupResult multigroup_run(const Stream& stream, double eta,
                                       bool classification, double b, double delta,
                                       double eps) {
  std::size_t d = stream.group_labels.size();
  if (d == 0) throw std::invalid_argument("multigroup: stream has no groups");
  MultigroupResult out;
  out.base.guarantee_void = !classification && !eta_admissible_squared(eta, delta);
  LearnerState st = vector_state(eta, d);
  out.groups.resize(d);
  for (std::size_t j = 0; j < d; ++j) out.groups[j].label = stream.group_labels[j];
  std::vector<double> group_sum(d, 0.0);
  double marginal_sum = 0.0;

  for (std::size_t t = 0; t < stream.size(); ++t) {
    const auto& rec = stream.records[t];
    if (rec.z.size() != d)
      throw std::runtime_error("multigroup: record " + std::to_string(t + 1) +
                               " has wrong group dimension");
    double s = dot(rec.z, st.theta);
    double adj, raw;
    if (classification) {
      double p = std::clamp(rec.f, eps, 1.0 - eps);
      adj = 2.0 * sigmoid(s) - 1.0;
      raw = p + adj;
    } else {
      adj = s;
      raw = rec.f + adj;
    }
    double resid = raw - rec.y;
    Vec g = scaled(rec.z, resid);
    out.base.adjustment.push_back(adj);
    if (classification) {
      out.base.adjusted_raw.push_back(raw);
      out.base.adjusted.push_back(std::clamp(raw, 0.0, 1.0));
    } else {
      out.base.adjusted.push_back(raw);
    }
    step_or_freeze(st, eta, g, &out.base.traj);

    marginal_sum += resid;
    out.marginal_bias.push_back(std::fabs(marginal_sum) / static_cast<double>(t + 1));
    for (std::size_t j = 0; j < d; ++j) {
      if (rec.z[j] == 0.0) continue;
      auto& gr = out.groups[j];
      gr.count += 1;
      group_sum[j] += resid;
      gr.bias_series.push_back(std::fabs(group_sum[j]) /
                               static_cast<double>(gr.count));
    }
  }

  // Disjoint groups decouple into per-coordinate 1-D runs, so the scalar
  // bounds apply with T_j in place of T.
  if (stream.disjoint_declared && eta > 0.0) {
    BoundParams p;
    p.eta = eta;
    if (classification) {
      p.epsilon = eps;
      p.a = -1.0;
      p.bb = 1.0;
    } else {
      p.b = b;
      p.delta = delta;
    }
    BoundId id = classification ? BoundId::glm_logistic_avg_grad
                                : BoundId::glm_linear_avg_grad;
    for (auto& gr : out.groups) {
      if (gr.is_null()) continue;
      std::vector<double> bounds;
      bounds.reserve(gr.count);
      for (std::size_t k = 1; k <= gr.count; ++k)
        bounds.push_back(bound_value(id, p, k));
      gr.satisfied.resize(bounds.size());
      for (std::size_t k = 0; k < bounds.size(); ++k)
        gr.satisfied[k] = gr.bias_series[k] <= bounds[k];
      gr.bound_series = std::move(bounds);
      gr.bound_meaningful = gr.count * 100 >= stream.size();
    }
  }
  return out;
}

}  // namespace detail

/// Multigroup debiasing for regression: g = z (f + z.theta - y); per-group
/// bias over I_j = {t : z_tj = 1}, with per-group bounds attached when the
/// stream declares disjoint groups.
inline MultigroupResult multigroup_regression(const Stream& stream, double eta,
                                              double b, double delta) {
  if (!(eta >= 0.0))
    throw std::invalid_argument("multigroup_regression: eta must be >= 0");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("multigroup_regression: delta must lie in (0,1)");
  return detail::multigroup_run(stream, eta, false, b, delta, 0.0);
}

/// Multigroup debiasing for classification: g = z (p - y + 2 sigma(z.theta)
/// - 1), adjusted prediction p + 2 sigma(z.theta) - 1.
inline MultigroupResult multigroup_classification(const Stream& stream, double eta,
                                                  double eps) {
  if (!(eta >= 0.0))
    throw std::invalid_argument("multigroup_classification: eta must be >= 0");
  if (!(eps > 0.0 && eps < 0.5))
    throw std::invalid_argument("multigroup_classification: epsilon must lie in (0,0.5)");
  return detail::multigroup_run(stream, eta, true, 0.0, 0.0, eps);
}

/// Decorrelation by ridge-penalized squared loss on residuals. Verifies the
/// supplied norm bounds ||z_t|| <= c and |y_t - f_t| <= b, and the step-size
/// admissibility eta < 1/(lambda + c^2/2). Reports the covariance norm
/// ||(1/T) sum (f + z.theta - y) z|| against its bound.
inline DecorrelateResult decorrelate_ridge(const Stream& stream, double eta,
                                           double lambda, double b, double c) {
  if (!(lambda > 0.0)) throw std::invalid_argument("decorrelate_ridge: lambda must be > 0");
  if (!(eta > 0.0 && eta < 1.0 / (lambda + c * c / 2.0)))
    throw std::invalid_argument("decorrelate_ridge: eta inadmissible for (lambda, c)");
  std::size_t d = stream.records.empty() ? 0 : stream.records.front().z.size();
  if (d == 0) throw std::invalid_argument("decorrelate_ridge: stream has no features");
  DecorrelateResult out;
  LearnerState st = detail::vector_state(eta, d);
  Vec cov_sum(d, 0.0);
  BoundParams p;
  p.eta = eta;
  p.lambda = lambda;
  p.b = b;
  p.c = c;

  for (std::size_t t = 0; t < stream.size(); ++t) {
    const auto& rec = stream.records[t];
    if (norm2(rec.z) > c + 1e-9)
      throw std::runtime_error("decorrelate_ridge: ||z|| > c at step " +
                                  std::to_string(t + 1));
    if (std::fabs(rec.y - rec.f) > b + 1e-9)
      throw std::runtime_error("decorrelate_ridge: |y - f| > b at step " +
                                  std::to_string(t + 1));
    double s = dot(rec.z, st.theta);
    double adjusted = rec.f + s;
    double resid = adjusted - rec.y;
    Vec g = scaled(rec.z, resid);
    axpy(lambda, st.theta, g);
    out.adjustment.push_back(s);
    out.adjusted.push_back(adjusted);
    out.residuals.push_back(resid);
    gd_step(st, g, &out.traj);

    axpy(resid, rec.z, cov_sum);
    Vec avg = scaled(cov_sum, 1.0 / static_cast<double>(t + 1));
    out.covariance_series.push_back(norm2(avg));
    out.bound_series.push_back(
        bound_value(BoundId::squared_ridge_covariance, p, t + 1));
    out.satisfied.push_back(out.covariance_series.back() <= out.bound_series.back());
  }
  return out;
}

/// Decorrelation by lasso-penalized generalized-logistic loss (a = -1, b = 1
/// on residuals y - p). Binary labels required.
inline DecorrelateResult decorrelate_lasso_logistic(const Stream& stream, double eta,
                                                    double lambda, double c) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("decorrelate_lasso_logistic: lambda must be > 0");
  if (!(eta > 0.0)) throw std::invalid_argument("decorrelate_lasso_logistic: eta must be > 0");
  std::size_t d = stream.records.empty() ? 0 : stream.records.front().z.size();
  if (d == 0) throw std::invalid_argument("decorrelate_lasso_logistic: stream has no features");
  DecorrelateResult out;
  LearnerState st = detail::vector_state(eta, d);
  Vec cov_sum(d, 0.0);
  BoundParams p;
  p.eta = eta;
  p.lambda = lambda;
  p.c = c;
  p.d = static_cast<double>(d);

  for (std::size_t t = 0; t < stream.size(); ++t) {
    const auto& rec = stream.records[t];
    if (rec.y != 0.0 && rec.y != 1.0)
      throw std::runtime_error("decorrelate_lasso_logistic: non-binary label at step " +
                                  std::to_string(t + 1));
    if (norm2(rec.z) > c + 1e-9)
      throw std::runtime_error("decorrelate_lasso_logistic: ||z|| > c at step " +
                                  std::to_string(t + 1));
    double u = dot(rec.z, st.theta);
    double adj = 2.0 * sigmoid(u) - 1.0;
    double raw = rec.f + adj;
    double resid = raw - rec.y;
    Vec g = scaled(rec.z, resid);
    for (std::size_t i = 0; i < d; ++i) g[i] += lambda * sign0(st.theta[i]);
    out.adjustment.push_back(adj);
    out.adjusted_raw.push_back(raw);
    out.adjusted.push_back(std::clamp(raw, 0.0, 1.0));
    out.residuals.push_back(resid);
    gd_step(st, g, &out.traj);

    axpy(resid, rec.z, cov_sum);
    Vec avg = scaled(cov_sum, 1.0 / static_cast<double>(t + 1));
    out.covariance_series.push_back(norm2(avg));
    out.bound_series.push_back(
        bound_value(BoundId::logistic_lasso_covariance, p, t + 1));
    out.satisfied.push_back(out.covariance_series.back() <= out.bound_series.back());
  }
  return out;
}

/// sup over {F = z . alpha : ||alpha|| <= cap} of |(1/T) sum residual_t
/// F(x_t)|, which by Cauchy-Schwarz equals ||(1/T) sum residual_t z_t|| *
/// cap exactly.
inline double multiaccuracy_sup(const std::vector<double>& residuals,
                                const std::vector<Vec>& zs, double cap) {
  if (residuals.size() != zs.size())
    throw std::invalid_argument("multiaccuracy_sup: series length mismatch");
  if (residuals.empty()) return 0.0;
  Vec sum(zs.front().size(), 0.0);
  for (std::size_t t = 0; t < residuals.size(); ++t) axpy(residuals[t], zs[t], sum);
  Vec avg = scaled(sum, 1.0 / static_cast<double>(residuals.size()));
  return norm2(avg) * cap;
}

/// Quantile tracking: theta <- theta - eta * (1{y < f + theta} - tau), the
/// subgradient convention counting a tie y = f + theta as not covered
/// (gradient -tau there). Coverage gap |C_t/t - tau| is paired with the
/// bound (eta + b) / (eta t).
inline QuantileTrackResult quantile_track(const Stream& stream, double tau, double eta,
                                          double b) {
  if (!(tau >= 0.0 && tau <= 1.0))
    throw std::invalid_argument("quantile_track: tau must lie in [0,1]");
  if (!(eta >= 0.0)) throw std::invalid_argument("quantile_track: eta must be >= 0");
  QuantileTrackResult out;
  LearnerState st = detail::scalar_state(eta);
  BoundParams p;
  p.eta = eta;
  p.b = b;
  std::size_t covered = 0;
  for (std::size_t t = 0; t < stream.size(); ++t) {
    const auto& rec = stream.records[t];
    double q = rec.f + st.theta[0];
    bool cov = rec.y < q;
    double g = cov ? 1.0 - tau : -tau;
    out.adjusted.push_back(q);
    out.quantile_loss_sum += detail::quantile_loss(tau, rec.y - q);
    detail::step_or_freeze(st, eta, Vec{g}, &out.traj);
    covered += cov ? 1 : 0;
    out.coverage_count.push_back(covered);
    double gap = std::fabs(static_cast<double>(covered) / static_cast<double>(t + 1) - tau);
    out.coverage_gap.push_back(gap);
    if (eta > 0.0) {
      out.bound_series.push_back(bound_value(BoundId::quantile_coverage, p, t + 1));
      out.satisfied.push_back(gap <= out.bound_series.back());
    }
  }
  return out;
}

/// Quantile ensembling: K trackers with rates nu_k, mixed by multiplicative
/// weights. Each expert updates on its own signed error sigma^k; the weight
/// update uses the ensemble-level signed error sigma with rate nu_ens, which
/// is the mirror-descent step on the quantile loss of the mixture.
inline EnsembleResult quantile_ensemble(const Stream& stream, double tau,
                                        const std::vector<double>& nus, double nu_ens) {
  if (nus.empty()) throw std::invalid_argument("quantile_ensemble: needs K >= 1 experts");
  for (double nu : nus)
    if (!(nu > 0.0)) throw std::invalid_argument("quantile_ensemble: rates must be > 0");
  if (!(nu_ens > 0.0)) throw std::invalid_argument("quantile_ensemble: ensemble rate must be > 0");
  std::size_t K = nus.size();
  EnsembleResult out;
  out.expert_loss_sum.assign(K, 0.0);
  out.expert_coverage_count.assign(K, 0);
  Vec w(K, 1.0 / static_cast<double>(K));
  Vec theta(K, 0.0);
  out.weights.push_back(w);
  out.expert_thetas.push_back(theta);
  std::size_t covered = 0;

  for (std::size_t t = 0; t < stream.size(); ++t) {
    const auto& rec = stream.records[t];
    double mix = dot(w, theta);
    double q = rec.f + mix;
    out.adjusted.push_back(q);
    out.quantile_loss_sum += detail::quantile_loss(tau, rec.y - q);
    bool cov = rec.y < q;
    double sigma_ens = (cov ? 1.0 : 0.0) - tau;

    Vec sigma_k(K);
    for (std::size_t k = 0; k < K; ++k) {
      double qk = rec.f + theta[k];
      bool covk = rec.y < qk;
      sigma_k[k] = (covk ? 1.0 : 0.0) - tau;
      out.expert_loss_sum[k] += detail::quantile_loss(tau, rec.y - qk);
      out.expert_coverage_count[k] += covk ? 1 : 0;
    }

    Vec z(K);
    for (std::size_t k = 0; k < K; ++k) {
      z[k] = w[k] * std::exp(-nu_ens * theta[k] * sigma_ens);
      if (z[k] < kWeightFloor) z[k] = kWeightFloor;
    }
    double zsum = 0.0;
    for (double v : z) zsum += v;
    for (std::size_t k = 0; k < K; ++k) {
      theta[k] -= nus[k] * sigma_k[k];
      w[k] = z[k] / zsum;
    }
    out.weights.push_back(w);
    out.expert_thetas.push_back(theta);

    covered += cov ? 1 : 0;
    out.coverage_count.push_back(covered);
    out.coverage_gap.push_back(
        std::fabs(static_cast<double>(covered) / static_cast<double>(t + 1) - tau));
  }
  return out;
}

/// Online Elo over M competitors: p_t = sigma(theta_b - theta_a), update
/// theta <- theta - eta_t (z (p - y) + lambda sign(theta)) with z = e_b -
/// e_a. Per-model signed and raw residual sums track the two bias readings.
inline EloResult elo_run(const std::vector<StreamRecord>& battles, std::size_t M,
                         StepSchedule schedule, double l1_lambda = 0.0) {
  if (M < 2) throw std::invalid_argument("elo_run: needs M >= 2");
  if (l1_lambda < 0.0) throw std::invalid_argument("elo_run: lambda must be >= 0");
  EloResult out;
  out.table.scores.assign(M, 0.0);
  out.table.counts.assign(M, 0);
  out.table.signed_residual.assign(M, 0.0);
  out.table.raw_residual.assign(M, 0.0);
  LearnerState st;
  st.theta.assign(M, 0.0);
  st.schedule = std::move(schedule);

  for (std::size_t t = 0; t < battles.size(); ++t) {
    const auto& rec = battles[t];
    int a = rec.model_a, b = rec.model_b;
    if (a < 0 || b < 0 || a == b || static_cast<std::size_t>(a) >= M ||
        static_cast<std::size_t>(b) >= M)
      throw std::runtime_error("elo_run: invalid competitor index at battle " +
                                  std::to_string(t + 1));
    if (rec.y != 0.0 && rec.y != 1.0)
      throw std::runtime_error("elo_run: outcome must be 0 or 1 at battle " +
                                  std::to_string(t + 1));
    auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
    double p = sigmoid(st.theta[ub] - st.theta[ua]);
    double diff = p - rec.y;
    Vec g(M, 0.0);
    g[ua] = -diff;
    g[ub] = diff;
    if (l1_lambda > 0.0)
      for (std::size_t m = 0; m < M; ++m) g[m] += l1_lambda * sign0(st.theta[m]);
    gd_step(st, g, &out.traj);

    out.table.counts[ua] += 1;
    out.table.counts[ub] += 1;
    out.table.signed_residual[ua] += -diff;
    out.table.signed_residual[ub] += diff;
    out.table.raw_residual[ua] += diff;
    out.table.raw_residual[ub] += diff;
    out.p_series.push_back(p);
    out.a_series.push_back(a);
    out.b_series.push_back(b);
    out.y_series.push_back(rec.y);
  }
  out.table.scores = st.theta;
  return out;
}

inline EloResult elo_run(const std::vector<StreamRecord>& battles, std::size_t M,
                         double eta, double l1_lambda = 0.0) {
  if (eta == 0.0) {
    // frozen baseline: scores stay 0, every prediction is 1/2
    EloResult out;
    out.table.scores.assign(M, 0.0);
    out.table.counts.assign(M, 0);
    out.table.signed_residual.assign(M, 0.0);
    out.table.raw_residual.assign(M, 0.0);
    LearnerState st;
    st.theta.assign(M, 0.0);
    st.schedule = StepSchedule::constant(1.0);
    for (std::size_t t = 0; t < battles.size(); ++t) {
      const auto& rec = battles[t];
      auto ua = static_cast<std::size_t>(rec.model_a);
      auto ub = static_cast<std::size_t>(rec.model_b);
      if (rec.model_a < 0 || rec.model_b < 0 || ua == ub || ua >= M || ub >= M)
        throw std::runtime_error("elo_run: invalid competitor index at battle " +
                                    std::to_string(t + 1));
      double p = 0.5;
      double diff = p - rec.y;
      Vec g(M, 0.0);
      g[ua] = -diff;
      g[ub] = diff;
      detail::step_or_freeze(st, 0.0, g, &out.traj);
      out.table.counts[ua] += 1;
      out.table.counts[ub] += 1;
      out.table.signed_residual[ua] += -diff;
      out.table.signed_residual[ub] += diff;
      out.table.raw_residual[ua] += diff;
      out.table.raw_residual[ub] += diff;
      out.p_series.push_back(p);
      out.a_series.push_back(rec.model_a);
      out.b_series.push_back(rec.model_b);
      out.y_series.push_back(rec.y);
    }
    return out;
  }
  return elo_run(battles, M, StepSchedule::constant(eta), l1_lambda);
}

/// Elo table state after the first T battles, recomputed from the run log.
inline EloTable elo_table_at(const EloResult& res, std::size_t T) {
  std::size_t M = res.table.scores.size();
  EloTable t;
  t.counts.assign(M, 0);
  t.signed_residual.assign(M, 0.0);
  t.raw_residual.assign(M, 0.0);
  T = std::min(T, res.p_series.size());
  for (std::size_t i = 0; i < T; ++i) {
    auto ua = static_cast<std::size_t>(res.a_series[i]);
    auto ub = static_cast<std::size_t>(res.b_series[i]);
    double diff = res.p_series[i] - res.y_series[i];
    t.counts[ua] += 1;
    t.counts[ub] += 1;
    t.signed_residual[ua] += -diff;
    t.signed_residual[ub] += diff;
    t.raw_residual[ua] += diff;
    t.raw_residual[ub] += diff;
  }
  t.scores = res.traj.dense ? res.traj.theta_at(T + 1) : res.traj.theta_last;
  return t;
}

}  // namespace gradeq

#endif
