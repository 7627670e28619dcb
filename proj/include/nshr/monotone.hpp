#pragma once

// Maximally monotone operators accessed through their resolvents, Yosida
// approximations, and the operator-calculus identities behind the monotone
// inclusion analysis.

#include <cmath>
#include <memory>
#include <optional>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "nshr/point.hpp"
#include "nshr/proxcore.hpp"

namespace nshr {

/// Maximally monotone A, known only through J_{lambda A} = (I + lambda A)^{-1}.
/// There is deliberately no set-valued evaluation of A itself.
class MonotoneOperator {
 public:
  virtual ~MonotoneOperator() = default;

  virtual Eigen::Index dimension() const = 0;
  virtual Point resolvent(double lambda, const Point& x) const = 0;
  /// A known point with 0 in A(zero), if any.
  virtual std::optional<Point> zero() const { return std::nullopt; }
};

/// A = subdifferential of a convex objective; J_{lambda A} = prox_{lambda f}.
class SubdifferentialOperator : public MonotoneOperator {
 public:
  explicit SubdifferentialOperator(std::shared_ptr<const ProxObjective> objective)
      : objective_(std::move(objective)) {
    require(objective_ != nullptr, "SubdifferentialOperator: null objective");
  }

  Eigen::Index dimension() const override { return objective_->dimension(); }
  Point resolvent(double lambda, const Point& x) const override {
    return objective_->prox(lambda, x);
  }
  std::optional<Point> zero() const override { return objective_->minimizer(); }

  const ProxObjective& objective() const { return *objective_; }
  const std::shared_ptr<const ProxObjective>& objective_ptr() const { return objective_; }

 private:
  std::shared_ptr<const ProxObjective> objective_;
};

/// A(x) = M x with M + M^T positive semidefinite. The origin is always a zero.
class LinearMonotoneOperator : public MonotoneOperator {
 public:
  explicit LinearMonotoneOperator(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
    require(matrix_.rows() >= 1 && matrix_.rows() == matrix_.cols(),
            "LinearMonotoneOperator: matrix must be square");
    const Eigen::MatrixXd sym = matrix_ + matrix_.transpose();
    const double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    require(eig.eigenvalues().minCoeff() >= -1e-12 * scale,
            "LinearMonotoneOperator: M + M^T is not positive semidefinite");
  }

  Eigen::Index dimension() const override { return matrix_.rows(); }

  Point resolvent(double lambda, const Point& x) const override {
    require(lambda > 0.0, "resolvent: lambda must be positive");
    require(x.size() == dimension(), "resolvent: dimension mismatch");
    const Eigen::MatrixXd system =
        Eigen::MatrixXd::Identity(dimension(), dimension()) + lambda * matrix_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    if (!(lu.rcond() > 1e-14)) {
      throw NumericalError("resolvent: I + lambda M is numerically singular");
    }
    return lu.solve(x);
  }

  std::optional<Point> zero() const override { return Point::Zero(dimension()); }

  const Eigen::MatrixXd& matrix() const { return matrix_; }

 private:
  Eigen::MatrixXd matrix_;
};

/// Quarter-turn rotation [[0, -1], [1, 0]]: monotone but not a subdifferential.
inline std::shared_ptr<LinearMonotoneOperator> make_rotation_operator() {
  Eigen::MatrixXd m(2, 2);
  m << 0.0, -1.0, 1.0, 0.0;
  return std::make_shared<LinearMonotoneOperator>(m);
}

/// A_lambda(x) = (x - J_{lambda A}(x)) / lambda.
inline Point yosida(const MonotoneOperator& op, double lambda, const Point& x) {
  require(lambda > 0.0, "yosida: lambda must be positive");
  return (x - op.resolvent(lambda, x)) / lambda;
}

/// |J_{alpha A}x - J_{beta A}((beta/alpha) x + (1 - beta/alpha) J_{alpha A}x)|;
/// vanishes for exact resolvents.
inline double resolvent_identity_residual(const MonotoneOperator& op, double alpha, double beta,
                                          const Point& x) {
  require(alpha > 0.0 && beta > 0.0, "resolvent_identity_residual: parameters must be positive");
  const Point j_alpha = op.resolvent(alpha, x);
  const double ratio = beta / alpha;
  const Point shifted = ratio * x + (1.0 - ratio) * j_alpha;
  return (j_alpha - op.resolvent(beta, shifted)).norm();
}

/// (2|beta - alpha| / alpha) |A_beta x| - |A_beta x - A_alpha x|; nonnegative
/// for every maximally monotone A.
inline double yosida_perturbation_margin(const MonotoneOperator& op, double alpha, double beta,
                                         const Point& x) {
  require(alpha > 0.0 && beta > 0.0, "yosida_perturbation_margin: parameters must be positive");
  const Point a_alpha = yosida(op, alpha, x);
  const Point a_beta = yosida(op, beta, x);
  return 2.0 * std::abs(beta - alpha) / alpha * a_beta.norm() - (a_beta - a_alpha).norm();
}

/// |x - x*| / lambda - |A_lambda x| for a known zero x*; nonnegative.
inline double yosida_basic_bound_margin(const MonotoneOperator& op, double lambda,
                                        const Point& x) {
  const auto z = op.zero();
  require(z.has_value(), "yosida_basic_bound_margin: operator has no known zero");
  require(lambda > 0.0, "yosida_basic_bound_margin: lambda must be positive");
  return (x - *z).norm() / lambda - yosida(op, lambda, x).norm();
}

struct Majorant {
  double m;
  double n;
};

/// For P(x, y) = a|x|^2 + b<x, y> + c|y|^2 with a, c < 0 and b^2 - 4ac < 0,
/// picks m = fraction * Delta / (4c) inside the admissible open interval and
/// n = (Delta - 4mc) / (4(m + a)), so that P(x, y) <= -m|x|^2 - n|y|^2.
inline Majorant majorant_coefficients(double a, double b, double c, double epsilon_fraction = 0.5) {
  require(a < 0.0, "majorant_coefficients: a must be negative");
  require(c < 0.0, "majorant_coefficients: c must be negative");
  require(epsilon_fraction > 0.0 && epsilon_fraction < 1.0,
          "majorant_coefficients: fraction must lie in (0, 1)");
  const double discriminant = b * b - 4.0 * a * c;
  require(discriminant < 0.0, "majorant_coefficients: b^2 - 4ac must be negative");
  const double m = epsilon_fraction * discriminant / (4.0 * c);
  const double n = (discriminant - 4.0 * m * c) / (4.0 * (m + a));
  return {m, n};
}

}  // namespace nshr
