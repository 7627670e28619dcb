#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nshr {

/// A point of the (finite-dimensional) Hilbert space R^n.
using Point = Eigen::VectorXd;

/// Raised when an intermediate quantity stops being finite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

inline void require_finite(const Point& x, const std::string& what) {
  if (!x.allFinite()) throw NumericalError("non-finite value in " + what);
}

}  // namespace nshr
