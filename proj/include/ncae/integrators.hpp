#pragma once
// Classical 4th-order Runge-Kutta step for autonomous vector fields.

#include <stdexcept>

#include <Eigen/Core>

namespace ncae {

/// One RK4 step of size dt for the field rhs: x -> dx/dt.
/// Throws if the input state or the result is non-finite.
template <typename Rhs>
inline Eigen::VectorXd rk4_step(const Rhs& rhs, const Eigen::VectorXd& x,
                                double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be > 0");
  if (!x.allFinite()) {
    throw std::runtime_error("rk4_step: non-finite state");
  }
  const Eigen::VectorXd k1 = rhs(x);
  const Eigen::VectorXd k2 = rhs(x + (0.5 * dt) * k1);
  const Eigen::VectorXd k3 = rhs(x + (0.5 * dt) * k2);
  const Eigen::VectorXd k4 = rhs(x + dt * k3);
  Eigen::VectorXd out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) {
    throw std::runtime_error("rk4_step: state diverged (non-finite result)");
  }
  return out;
}

}  // namespace ncae
