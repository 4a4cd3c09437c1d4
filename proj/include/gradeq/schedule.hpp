#ifndef GRADEQ_SCHEDULE_HPP
#define GRADEQ_SCHEDULE_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gradeq {

/// Step-size schedule. Polynomial decay gives eta_t = c * t^{-alpha} with
/// alpha in [0,1); constant is the alpha = 0 special case kept explicit.
struct StepSchedule {
  enum class Kind { constant, polynomial, explicit_list };

  Kind kind = Kind::constant;
  double eta = 1.0;       // constant
  double c = 1.0;         // polynomial coefficient
  double alpha = 0.0;     // polynomial exponent
  std::vector<double> etas;  // explicit_list

  static StepSchedule constant(double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("StepSchedule: eta must be > 0");
    StepSchedule s;
    s.kind = Kind::constant;
    s.eta = eta;
    return s;
  }

  static StepSchedule polynomial(double c, double alpha) {
    if (!(c > 0.0)) throw std::invalid_argument("StepSchedule: c must be > 0");
    if (!(alpha >= 0.0 && alpha < 1.0))
      throw std::invalid_argument("StepSchedule: alpha must lie in [0,1)");
    StepSchedule s;
    s.kind = Kind::polynomial;
    s.c = c;
    s.alpha = alpha;
    return s;
  }

  static StepSchedule explicit_list(std::vector<double> etas) {
    if (etas.empty()) throw std::invalid_argument("StepSchedule: empty list");
    for (double e : etas)
      if (!(e > 0.0)) throw std::invalid_argument("StepSchedule: eta_t must be > 0");
    StepSchedule s;
    s.kind = Kind::explicit_list;
    s.etas = std::move(etas);
    return s;
  }

  bool is_constant() const { return kind == Kind::constant; }

  bool is_nonincreasing() const {
    switch (kind) {
      case Kind::constant:
      case Kind::polynomial:
        return true;
      case Kind::explicit_list:
        for (std::size_t i = 1; i < etas.size(); ++i)
          if (etas[i] > etas[i - 1]) return false;
        return true;
    }
    return true;
  }

  /// Step size at 1-based timestep t.
  double at(std::size_t t) const {
    if (t < 1) throw std::invalid_argument("StepSchedule: t must be >= 1");
    switch (kind) {
      case Kind::constant:
        return eta;
      case Kind::polynomial:
        return c * std::pow(static_cast<double>(t), -alpha);
      case Kind::explicit_list:
        if (t > etas.size())
          throw std::invalid_argument("StepSchedule: t beyond explicit list");
        return etas[t - 1];
    }
    return eta;
  }

  /// Delta_t = 1/eta_t - 1/eta_{t-1}, with 1/eta_0 = 0.
  double delta(std::size_t t) const {
    double inv_prev = t == 1 ? 0.0 : 1.0 / at(t - 1);
    return 1.0 / at(t) - inv_prev;
  }
};

}  // namespace gradeq

#endif
