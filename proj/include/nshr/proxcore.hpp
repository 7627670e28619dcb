#pragma once

// Proximal maps, Moreau envelopes and the separable test objectives.
//
// An objective is only ever accessed through two oracles: its (extended-real)
// value and its proximal map. Everything else (envelope value, envelope
// gradient) is derived from the prox, so nonsmooth pieces are handled exactly.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nshr/point.hpp"

namespace nshr {

/// S_tau(xi) = sign(xi) max(|xi| - tau, 0).
inline double soft_threshold(double xi, double tau) {
  require(tau >= 0.0, "soft_threshold: tau must be nonnegative");
  if (xi > tau) return xi - tau;
  if (xi < -tau) return xi + tau;
  return 0.0;
}

/// Convex objective exposed through value and proximal-map oracles.
///
/// Implementations must be immutable after construction so that one instance
/// can drive several trajectories concurrently.
class ProxObjective {
 public:
  virtual ~ProxObjective() = default;

  virtual Eigen::Index dimension() const = 0;
  /// May return +infinity outside the effective domain.
  virtual double value(const Point& x) const = 0;
  /// argmin_y value(y) + |x - y|^2 / (2 gamma), gamma > 0.
  virtual Point prox(double gamma, const Point& x) const = 0;

  virtual std::optional<double> optimal_value() const { return std::nullopt; }
  virtual std::optional<Point> minimizer() const { return std::nullopt; }
};

/// One coordinate of a separable objective.
struct ScalarPiece {
  std::function<double(double)> value;
  /// (gamma, xi) -> argmin_y value(y) + (xi - y)^2 / (2 gamma)
  std::function<double(double, double)> prox;
};

/// y -> q/2 y^2 + w |y|, with closed-form prox
/// S_{w gamma / (1 + q gamma)}(xi / (1 + q gamma)).
inline ScalarPiece quadratic_l1_piece(double q, double w) {
  require(q >= 0.0 && w >= 0.0, "quadratic_l1_piece: q and w must be nonnegative");
  return ScalarPiece{
      [q, w](double y) { return 0.5 * q * y * y + w * std::abs(y); },
      [q, w](double gamma, double xi) {
        const double shrink = 1.0 + q * gamma;
        return soft_threshold(xi / shrink, w * gamma / shrink);
      }};
}

/// f(x) = sum_i f_i(x_i).
class SeparableObjective : public ProxObjective {
 public:
  explicit SeparableObjective(std::vector<ScalarPiece> pieces,
                              std::optional<double> optimal_value = std::nullopt,
                              std::optional<Point> minimizer = std::nullopt)
      : pieces_(std::move(pieces)),
        optimal_value_(optimal_value),
        minimizer_(std::move(minimizer)) {
    require(!pieces_.empty(), "SeparableObjective: at least one piece required");
    if (minimizer_) {
      require(minimizer_->size() == dimension(), "SeparableObjective: minimizer dimension mismatch");
    }
  }

  Eigen::Index dimension() const override { return static_cast<Eigen::Index>(pieces_.size()); }

  double value(const Point& x) const override {
    check_dimension(x);
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) total += pieces_[i].value(x[i]);
    return total;
  }

  Point prox(double gamma, const Point& x) const override {
    require(gamma > 0.0, "prox: gamma must be positive");
    check_dimension(x);
    Point out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = pieces_[i].prox(gamma, x[i]);
    return out;
  }

  std::optional<double> optimal_value() const override { return optimal_value_; }
  std::optional<Point> minimizer() const override { return minimizer_; }

  const ScalarPiece& piece(Eigen::Index i) const { return pieces_.at(static_cast<std::size_t>(i)); }

 private:
  void check_dimension(const Point& x) const {
    require(x.size() == dimension(), "objective: expected dimension " + std::to_string(dimension()) +
                                         ", got " + std::to_string(x.size()));
  }

  std::vector<ScalarPiece> pieces_;
  std::optional<double> optimal_value_;
  std::optional<Point> minimizer_;
};

/// f(x) = 1/2 (q1 x1^2 + q2 x2^2) + w |x|_1 on R^2; minimizer 0, f* = 0.
class TestObjective : public SeparableObjective {
 public:
  explicit TestObjective(double q1 = 1.0, double q2 = 1000.0, double l1_weight = 1.0)
      : SeparableObjective({quadratic_l1_piece(q1, l1_weight), quadratic_l1_piece(q2, l1_weight)},
                           0.0, Point::Zero(2)),
        q1_(q1),
        q2_(q2),
        l1_weight_(l1_weight) {
    require(q1 > 0.0 && q2 > 0.0 && l1_weight > 0.0,
            "TestObjective: curvatures and l1 weight must be positive");
  }

  double q1() const { return q1_; }
  double q2() const { return q2_; }
  double l1_weight() const { return l1_weight_; }

 private:
  double q1_, q2_, l1_weight_;
};

/// f(x) = q/2 |x|^2 in dimension n.
inline std::shared_ptr<SeparableObjective> make_quadratic_objective(Eigen::Index n, double q = 1.0) {
  require(n >= 1, "make_quadratic_objective: dimension must be positive");
  return std::make_shared<SeparableObjective>(
      std::vector<ScalarPiece>(static_cast<std::size_t>(n), quadratic_l1_piece(q, 0.0)), 0.0,
      Point::Zero(n));
}

/// Closed-form prox of the two-dimensional test objective (q = 1 and 1000, unit l1 weight).
inline Point prox_test_objective(double gamma, const Point& x) {
  require(gamma > 0.0, "prox_test_objective: gamma must be positive");
  require(x.size() == 2, "prox_test_objective: expected a two-dimensional point");
  static const TestObjective objective;
  return objective.prox(gamma, x);
}

/// Prox, envelope value and envelope gradient from a single prox evaluation.
struct MoreauEvaluation {
  Point prox;
  double value;
  Point gradient;
};

inline MoreauEvaluation moreau(const ProxObjective& objective, double gamma, const Point& x) {
  require(gamma > 0.0, "moreau: gamma must be positive");
  Point p = objective.prox(gamma, x);
  Point gradient = (x - p) / gamma;
  const double value = objective.value(p) + (x - p).squaredNorm() / (2.0 * gamma);
  return {std::move(p), value, std::move(gradient)};
}

/// f_gamma(x) = min_y f(y) + |x - y|^2 / (2 gamma).
inline double moreau_value(const ProxObjective& objective, double gamma, const Point& x) {
  return moreau(objective, gamma, x).value;
}

/// grad f_gamma(x) = (x - prox_{gamma f}(x)) / gamma; 1/gamma-Lipschitz.
inline Point moreau_gradient(const ProxObjective& objective, double gamma, const Point& x) {
  require(gamma > 0.0, "moreau_gradient: gamma must be positive");
  return (x - objective.prox(gamma, x)) / gamma;
}

template <class Real>
struct Interval {
  Real lo;
  Real hi;
};

/// Independent prox oracle: golden-section minimization of
/// y -> fn(y) + (x - y)^2 / (2 gamma) on a bracket containing the minimizer.
///
/// `Real` may be an extended-precision type; near a smooth minimizer the
/// subproblem is flat to O(dy^2), so value comparisons in double cannot resolve
/// the argmin much below sqrt(eps) relative.
template <class Real, class Fn>
Real brute_force_prox_1d(Fn&& fn, Real gamma, Real x, Interval<Real> bracket,
                         Real tolerance = Real(1e-12)) {
  using std::isfinite;
  using std::sqrt;
  require(gamma > Real(0), "brute_force_prox_1d: gamma must be positive");
  require(bracket.lo < bracket.hi, "brute_force_prox_1d: invalid bracket (lo >= hi)");

  auto subproblem = [&](const Real& y) {
    const Real fy = fn(y);
    if (!isfinite(static_cast<double>(fy))) {
      throw NumericalError("brute_force_prox_1d: non-finite function value inside bracket");
    }
    const Real d = x - y;
    return fy + d * d / (Real(2) * gamma);
  };

  const Real inv_phi = (sqrt(Real(5)) - Real(1)) / Real(2);
  Real a = bracket.lo;
  Real b = bracket.hi;
  Real c = b - inv_phi * (b - a);
  Real d = a + inv_phi * (b - a);
  Real fc = subproblem(c);
  Real fd = subproblem(d);
  for (int iter = 0; iter < 1000 && (b - a) > tolerance; ++iter) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = subproblem(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = subproblem(d);
    }
  }
  return (a + b) / Real(2);
}

/// Same oracle with the bracket found automatically: starting from
/// [x - 1, x + 1], each end is pushed outward (width doubling) until the
/// subproblem's one-sided slope points back into the interval.
template <class Real, class Fn>
Real brute_force_prox_1d(Fn&& fn, Real gamma, Real x, Real tolerance = Real(1e-12)) {
  require(gamma > Real(0), "brute_force_prox_1d: gamma must be positive");
  auto subproblem = [&](const Real& y) {
    const Real d = x - y;
    return fn(y) + d * d / (Real(2) * gamma);
  };
  auto probe = [](const Real& y) {
    using std::abs;
    return Real(1e-6) * (Real(1) + abs(y));
  };
  Real lo = x - Real(1);
  Real hi = x + Real(1);
  Real width = Real(1);
  for (int iter = 0; iter < 200 && subproblem(lo + probe(lo)) > subproblem(lo); ++iter) {
    width *= Real(2);
    lo = x - width;
  }
  width = Real(1);
  for (int iter = 0; iter < 200 && subproblem(hi - probe(hi)) > subproblem(hi); ++iter) {
    width *= Real(2);
    hi = x + width;
  }
  return brute_force_prox_1d(std::forward<Fn>(fn), gamma, x, Interval<Real>{lo, hi}, tolerance);
}

}  // namespace nshr
