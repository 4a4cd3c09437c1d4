#ifndef GRADEQ_LOSSES_HPP
#define GRADEQ_LOSSES_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "gradeq/vec.hpp"

namespace gradeq {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Numerically stable sigmoid; branch avoids overflow of exp for |u| > 700.
inline double sigmoid(double u) {
  if (u <= 0.0) {
    double e = std::exp(u);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(-u));
}

/// log(1 + e^u) without overflow.
inline double log1pexp(double u) {
  if (u > 0.0) return u + std::log1p(std::exp(-u));
  return std::log1p(std::exp(u));
}

enum class LossKind { squared, quantile, gen_logistic, glm_linear, glm_logistic };

enum class RegKind { none, l1, l2_half, l2_full, set_simplex, set_l2_ball };

/// Penalty attached to a loss or used as the proximal term in descent.
/// l2_half is (lambda/2)||th||^2, l2_full is lambda*||th||^2; both forms
/// appear in the bound formulas and are kept distinct so each bound is
/// checked against the exact form it was derived for.
struct RegularizerSpec {
  RegKind kind = RegKind::none;
  double lambda = 0.0;
  double radius = 1.0;  // set_l2_ball only

  void validate() const {
    if (lambda < 0.0) throw std::invalid_argument("RegularizerSpec: lambda < 0");
    if (kind == RegKind::set_l2_ball && !(radius > 0.0))
      throw std::invalid_argument("RegularizerSpec: ball radius must be positive");
  }

  static RegularizerSpec none() { return {}; }
  static RegularizerSpec l1(double lambda) { return {RegKind::l1, lambda, 1.0}; }
  static RegularizerSpec l2_half(double lambda) { return {RegKind::l2_half, lambda, 1.0}; }
  static RegularizerSpec l2_full(double lambda) { return {RegKind::l2_full, lambda, 1.0}; }
  static RegularizerSpec simplex() { return {RegKind::set_simplex, 0.0, 1.0}; }
  static RegularizerSpec l2_ball(double radius) { return {RegKind::set_l2_ball, 0.0, radius}; }
};

/// One timestep's loss. Scalar kinds (squared, quantile, gen_logistic) act on
/// a 1-dimensional parameter; GLM kinds act on a parameter matching x. When a
/// base prediction f is present the effective response is y - f, i.e. the
/// loss is fit to the residual.
struct LossInstance {
  LossKind kind = LossKind::squared;
  double y = 0.0;
  std::optional<Vec> x;       // GLM kinds only
  std::optional<double> f;    // base prediction
  double tau = 0.5;           // quantile only
  double a = 0.0, b = 1.0;    // gen_logistic / glm_logistic range
  RegularizerSpec reg;

  double response() const { return f ? y - *f : y; }

  std::size_t dim() const {
    switch (kind) {
      case LossKind::glm_linear:
      case LossKind::glm_logistic:
        return x ? x->size() : 0;
      default:
        return 1;
    }
  }

  void validate() const {
    reg.validate();
    if (!std::isfinite(y)) throw std::invalid_argument("LossInstance: non-finite y");
    if (f && !std::isfinite(*f)) throw std::invalid_argument("LossInstance: non-finite f");
    switch (kind) {
      case LossKind::quantile:
        if (!(tau >= 0.0 && tau <= 1.0))
          throw std::invalid_argument("LossInstance: quantile needs tau in [0,1]");
        break;
      case LossKind::gen_logistic:
      case LossKind::glm_logistic:
        if (!(a < b)) throw std::invalid_argument("LossInstance: logistic needs a < b");
        if (kind == LossKind::gen_logistic) {
          double r = response();
          if (!(r >= a && r <= b))
            throw std::invalid_argument("LossInstance: logistic response outside [a,b]");
        }
        break;
      default:
        break;
    }
    if (kind == LossKind::glm_linear || kind == LossKind::glm_logistic) {
      if (!x || x->empty() || !all_finite(*x))
        throw std::invalid_argument("LossInstance: GLM kind needs a finite feature vector");
    }
  }

  static LossInstance squared(double y, std::optional<double> f = std::nullopt,
                              RegularizerSpec reg = {}) {
    LossInstance inst;
    inst.kind = LossKind::squared;
    inst.y = y;
    inst.f = f;
    inst.reg = reg;
    inst.validate();
    return inst;
  }

  static LossInstance quantile(double tau, double y,
                               std::optional<double> f = std::nullopt,
                               RegularizerSpec reg = {}) {
    LossInstance inst;
    inst.kind = LossKind::quantile;
    inst.tau = tau;
    inst.y = y;
    inst.f = f;
    inst.reg = reg;
    inst.validate();
    return inst;
  }

  static LossInstance gen_logistic(double a, double b, double y,
                                   std::optional<double> f = std::nullopt,
                                   RegularizerSpec reg = {}) {
    LossInstance inst;
    inst.kind = LossKind::gen_logistic;
    inst.a = a;
    inst.b = b;
    inst.y = y;
    inst.f = f;
    inst.reg = reg;
    inst.validate();
    return inst;
  }

  static LossInstance glm_linear(Vec x, double y,
                                 std::optional<double> f = std::nullopt,
                                 RegularizerSpec reg = {}) {
    LossInstance inst;
    inst.kind = LossKind::glm_linear;
    inst.x = std::move(x);
    inst.y = y;
    inst.f = f;
    inst.reg = reg;
    inst.validate();
    return inst;
  }

  static LossInstance glm_logistic(double a, double b, Vec x, double y,
                                   std::optional<double> f = std::nullopt,
                                   RegularizerSpec reg = {}) {
    LossInstance inst;
    inst.kind = LossKind::glm_logistic;
    inst.a = a;
    inst.b = b;
    inst.x = std::move(x);
    inst.y = y;
    inst.f = f;
    inst.reg = reg;
    inst.validate();
    return inst;
  }
};

namespace detail {

inline void check_theta_dim(const LossInstance& loss, const Vec& theta) {
  if (theta.size() != loss.dim())
    throw std::invalid_argument("loss/theta dimension mismatch");
}

inline bool on_simplex(const Vec& theta, double tol = 1e-9) {
  double s = 0.0;
  for (double v : theta) {
    if (v < 0.0) return false;
    s += v;
  }
  return std::fabs(s - 1.0) <= tol;
}

inline double reg_eval(const RegularizerSpec& reg, const Vec& theta) {
  switch (reg.kind) {
    case RegKind::none:
      return 0.0;
    case RegKind::l1:
      return reg.lambda * norm1(theta);
    case RegKind::l2_half:
      return 0.5 * reg.lambda * norm2_sq(theta);
    case RegKind::l2_full:
      return reg.lambda * norm2_sq(theta);
    case RegKind::set_simplex:
      return on_simplex(theta) ? 0.0 : kInf;
    case RegKind::set_l2_ball:
      return norm2(theta) <= reg.radius ? 0.0 : kInf;
  }
  return 0.0;
}

// Chosen subgradient of the penalty. L1 uses sign with 0 at 0 (the minimal
// norm element of the subdifferential). For set characteristics, 0 is always
// a valid normal-cone element on the set; off the set there is none.
inline void reg_subgrad_add(const RegularizerSpec& reg, const Vec& theta, Vec& g) {
  switch (reg.kind) {
    case RegKind::none:
      return;
    case RegKind::l1:
      for (std::size_t i = 0; i < theta.size(); ++i)
        g[i] += reg.lambda * sign0(theta[i]);
      return;
    case RegKind::l2_half:
      for (std::size_t i = 0; i < theta.size(); ++i) g[i] += reg.lambda * theta[i];
      return;
    case RegKind::l2_full:
      for (std::size_t i = 0; i < theta.size(); ++i)
        g[i] += 2.0 * reg.lambda * theta[i];
      return;
    case RegKind::set_simplex:
      if (!on_simplex(theta))
        throw std::domain_error("subgradient: theta outside the simplex");
      return;
    case RegKind::set_l2_ball:
      if (norm2(theta) > reg.radius)
        throw std::domain_error("subgradient: theta outside the ball");
      return;
  }
}

}  // namespace detail

/// Loss value at theta, including the regularizer term when present.
inline double eval(const LossInstance& loss, const Vec& theta) {
  detail::check_theta_dim(loss, theta);
  double r = loss.response();
  double base = 0.0;
  switch (loss.kind) {
    case LossKind::squared: {
      double u = r - theta[0];
      base = 0.5 * u * u;
      break;
    }
    case LossKind::quantile: {
      double u = r - theta[0];
      base = u >= 0.0 ? loss.tau * u : (1.0 - loss.tau) * (-u);
      break;
    }
    case LossKind::gen_logistic: {
      double th = theta[0];
      base = -r * th + (loss.b - loss.a) * log1pexp(th) + loss.a * th;
      break;
    }
    case LossKind::glm_linear: {
      double u = dot(*loss.x, theta);
      double e = r - u;
      base = 0.5 * e * e;
      break;
    }
    case LossKind::glm_logistic: {
      double u = dot(*loss.x, theta);
      base = -r * u + (loss.b - loss.a) * log1pexp(u) + loss.a * u;
      break;
    }
  }
  return base + detail::reg_eval(loss.reg, theta);
}

/// The chosen generalized subgradient at theta. Deterministic tie rules:
/// the quantile loss returns -tau at theta = y, and the L1 penalty
/// contributes 0 on zero coordinates.
inline Vec subgradient(const LossInstance& loss, const Vec& theta) {
  detail::check_theta_dim(loss, theta);
  double r = loss.response();
  Vec g(theta.size(), 0.0);
  switch (loss.kind) {
    case LossKind::squared:
      g[0] = theta[0] - r;
      break;
    case LossKind::quantile:
      g[0] = theta[0] > r ? 1.0 - loss.tau : -loss.tau;
      break;
    case LossKind::gen_logistic:
      g[0] = -r + (loss.b - loss.a) * sigmoid(theta[0]) + loss.a;
      break;
    case LossKind::glm_linear: {
      double u = dot(*loss.x, theta);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = (*loss.x)[i] * (u - r);
      break;
    }
    case LossKind::glm_logistic: {
      double u = dot(*loss.x, theta);
      double factor = (loss.b - loss.a) * sigmoid(u) + loss.a - r;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = (*loss.x)[i] * factor;
      break;
    }
  }
  detail::reg_subgrad_add(loss.reg, theta, g);
  return g;
}

enum class CurvatureKind { zero, constant, quadratic };

/// Restorative-field parameters: beyond the horizon h the gradient inner
/// product g(th).th must be at least phi(th), where phi is 0, a constant
/// kappa, or (eta/2)||g(th)||^2.
struct RestorativeSpec {
  double h = 0.0;
  CurvatureKind curvature = CurvatureKind::zero;
  double kappa = 0.0;

  void validate() const {
    if (!(h >= 0.0)) throw std::invalid_argument("RestorativeSpec: h < 0");
    if (curvature == CurvatureKind::constant && !(kappa >= 0.0))
      throw std::invalid_argument("RestorativeSpec: kappa < 0");
  }

  static RestorativeSpec zero(double h) { return {h, CurvatureKind::zero, 0.0}; }
  static RestorativeSpec constant(double h, double kappa) {
    return {h, CurvatureKind::constant, kappa};
  }
  static RestorativeSpec quadratic(double h) {
    return {h, CurvatureKind::quadratic, 0.0};
  }
};

/// True iff theta is inside the horizon, or the restorative inequality
/// g(theta).theta >= phi(theta) holds at theta.
inline bool restorative_check(const LossInstance& loss, const Vec& theta,
                              const RestorativeSpec& spec, double eta = 0.0) {
  spec.validate();
  if (spec.curvature == CurvatureKind::quadratic && !(eta > 0.0))
    throw std::invalid_argument("restorative_check: quadratic curvature needs eta > 0");
  if (norm2(theta) <= spec.h) return true;
  Vec g = subgradient(loss, theta);
  double lhs = dot(g, theta);
  double phi = 0.0;
  switch (spec.curvature) {
    case CurvatureKind::zero:
      phi = 0.0;
      break;
    case CurvatureKind::constant:
      phi = spec.kappa;
      break;
    case CurvatureKind::quadratic:
      phi = 0.5 * eta * norm2_sq(g);
      break;
  }
  return lhs >= phi;
}

/// Minimal horizon making the quantile loss at response y restorative with
/// zero curvature.
inline double horizon_quantile(double y) { return std::fabs(y); }

/// Minimal horizon for the generalized logistic loss at response y in [a,b];
/// +inf at the endpoints.
inline double horizon_logistic(double y, double a, double b) {
  if (!(a < b)) throw std::invalid_argument("horizon_logistic: needs a < b");
  if (!(y >= a && y <= b))
    throw std::invalid_argument("horizon_logistic: y outside [a,b]");
  if (y == a || y == b) return kInf;
  return std::fabs(std::log((y - a) / (b - y)));
}

/// Horizon valid for all responses in [a+eps, b-eps].
inline double horizon_logistic_bounded(double eps, double a, double b) {
  if (!(a < b)) throw std::invalid_argument("horizon_logistic_bounded: needs a < b");
  if (!(eps > 0.0 && eps < 0.5 * (b - a)))
    throw std::invalid_argument("horizon_logistic_bounded: eps outside (0,(b-a)/2)");
  return std::log((b - a) / (2.0 * eps));
}

/// Horizons from the restricted strong-monotonicity bridge. A loss whose
/// subgradients satisfy (g(th) - g(0)) . th >= alpha ||th||^2 beyond the
/// horizon, with ||g(0)|| <= b, is restorative with zero curvature for any
/// h >= b / alpha.
inline double horizon_monotone_zero(double b, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("horizon_monotone_zero: alpha must be > 0");
  if (!(b >= 0.0)) throw std::invalid_argument("horizon_monotone_zero: b must be >= 0");
  return b / alpha;
}

/// Same bridge, positive curvature eta L^2 / 2 for L-Lipschitz losses. The
/// horizon is the larger root of alpha x^2 - b x - eta L^2/2, the exact
/// point beyond which the defining quadratic stays nonnegative.
inline double horizon_monotone_pos(double b, double alpha, double eta, double L) {
  if (!(alpha > 0.0)) throw std::invalid_argument("horizon_monotone_pos: alpha must be > 0");
  if (!(eta > 0.0 && L >= 0.0 && b >= 0.0))
    throw std::invalid_argument("horizon_monotone_pos: bad constants");
  double kappa = 0.5 * eta * L * L;
  return (b + std::sqrt(b * b + 4.0 * alpha * kappa)) / (2.0 * alpha);
}

/// Adding restricted beta-co-coercivity and beta-smoothness gives quadratic
/// curvature beyond the larger root of
///   alpha (1 - eta beta/2) x^2 - b (1 + eta beta) x - eta b^2/2.
/// Requires eta <= 2 / beta.
inline double horizon_monotone_quad(double b, double alpha, double beta, double eta) {
  if (!(alpha > 0.0 && beta > 0.0))
    throw std::invalid_argument("horizon_monotone_quad: alpha, beta must be > 0");
  if (!(eta > 0.0 && eta < 2.0 / beta))
    throw std::invalid_argument("horizon_monotone_quad: needs 0 < eta < 2/beta");
  if (!(b >= 0.0)) throw std::invalid_argument("horizon_monotone_quad: b must be >= 0");
  double c = alpha * (1.0 - eta * beta / 2.0);
  double B = b * (1.0 + eta * beta);
  double K = 0.5 * eta * b * b;
  return (B + std::sqrt(B * B + 4.0 * c * K)) / (2.0 * c);
}

/// inf_u (sigma(u) - y) * u over u and y in [a,b], scaled to (b-a) * c* where
/// c* = 1 - u* and u* solves u = 1 + e^{-u}. The root is found by bisection
/// to absolute tolerance 1e-10; c* >= -0.279 always holds.
inline double infimum_logistic_inner(double a, double b) {
  if (!(a < b)) throw std::invalid_argument("infimum_logistic_inner: needs a < b");
  double lo = 1.0, hi = 2.0;  // u - 1 - e^{-u} changes sign on [1,2]
  while (hi - lo > 1e-10) {
    double mid = 0.5 * (lo + hi);
    if (mid - 1.0 - std::exp(-mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double u_star = 0.5 * (lo + hi);
  return (b - a) * (1.0 - u_star);
}

/// inf_u { a1*(u-y)*u - a2*(u-y)^2 } over |y| <= b, for a1 > a2.
inline double infimum_squared_inner(double a1, double a2, double bbound) {
  if (!(a1 > a2)) throw std::invalid_argument("infimum_squared_inner: needs a1 > a2");
  double d = a1 - 2.0 * a2;
  double b2 = bbound * bbound;
  return -(d * d) * b2 / (4.0 * (a1 - a2)) - a2 * b2;
}

}  // namespace gradeq

#endif
