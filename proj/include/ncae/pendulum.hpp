#pragma once
// 16-DoF pendulum datasets. The first four joints evolve as independent
// frictionless pendulums (q_i'' = -(g/l_i) sin q_i); the remaining twelve
// coordinates are algebraic couplings of q1..q4, either fixed ("standard")
// or length-dependent ("context"). States are x = (q1..q4, f(q[, l])) with
// time derivatives (q', (df/dq) q').

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ncae/dataset.hpp"
#include "ncae/integrators.hpp"
#include "ncae/rng.hpp"

namespace ncae {

enum class CouplingMode { standard, context };

inline std::string coupling_mode_name(CouplingMode m) {
  return m == CouplingMode::standard ? "standard" : "context";
}

inline CouplingMode coupling_mode_from_name(const std::string& s) {
  if (s == "standard") return CouplingMode::standard;
  if (s == "context") return CouplingMode::context;
  throw std::invalid_argument("unknown coupling mode: " + s);
}

namespace detail {

/// Even extension |q|^p of the integer even powers to real exponents:
/// reduces to q^2 exactly at p = 2, stays defined for negative bases.
inline double real_power(double q, double p) { return std::pow(std::abs(q), p); }

/// d/dq |q|^p = p * sign(q) * |q|^(p-1); zero at q = 0 for the p > 1 used
/// here, which is the continuous limit.
inline double real_power_dq(double q, double p) {
  if (q == 0.0) return 0.0;
  const double s = q > 0.0 ? 1.0 : -1.0;
  return p * s * std::pow(std::abs(q), p - 1.0);
}

}  // namespace detail

/// Fixed coupling block: q5..q16 as functions of q1..q4.
inline Eigen::VectorXd coupling_standard(const Eigen::Vector4d& q) {
  const double q1 = q[0], q2 = q[1], q3 = q[2], q4 = q[3];
  Eigen::VectorXd f(12);
  f[0] = q3 - std::cos(q2);
  f[1] = q1 + 0.1 * std::sin(q2);
  f[2] = q4 * std::cos(q2);
  f[3] = q1 + q3 * q3;
  f[4] = 1.5 * std::sin(q2);
  f[5] = -q4 * q1;
  f[6] = std::sin(q1);
  f[7] = 0.4 * q3 * q4;
  f[8] = -0.9 * q1 - q2 + q3 - 2.0 * q4 * q4;
  f[9] = -3.0 * std::sin(q3);
  f[10] = -2.0 * q3 * q3;
  f[11] = -0.9 * q1 * q1;
  return f;
}

/// Length-dependent coupling block; reduces to coupling_standard exactly
/// at l = (0.5, 0.5, 0.5, 0.5).
inline Eigen::VectorXd coupling_context(const Eigen::Vector4d& q,
                                        const Eigen::Vector4d& l) {
  const double q1 = q[0], q2 = q[1], q3 = q[2], q4 = q[3];
  const double a1 = 2.0 * l[0], a2 = 2.0 * l[1], a3 = 2.0 * l[2],
               a4 = 2.0 * l[3];
  const double p1 = 2.0 * a1, p3 = 2.0 * a3, p4 = 2.0 * a4;
  Eigen::VectorXd f(12);
  f[0] = q3 - std::cos(a2 * q2);
  f[1] = q1 + a1 * 0.1 * std::sin(a2 * q2);
  f[2] = q4 * std::cos(a4 * q2);
  f[3] = q1 + detail::real_power(q3, p3);
  f[4] = a2 * 1.5 * std::sin(q2);
  f[5] = -(l[3] + l[0]) * q4 * q1;
  f[6] = std::sin(a1 * q1);
  f[7] = a3 * 0.4 * q3 * q4;
  f[8] = -a1 * 0.9 * q1 - q2 + q3 - 2.0 * detail::real_power(q4, p4);
  f[9] = -a3 * 3.0 * std::sin(q3);
  f[10] = -2.0 * detail::real_power(q3, p3);
  f[11] = -0.9 * detail::real_power(q1, p1);
  return f;
}

inline Eigen::VectorXd coupling(const Eigen::Vector4d& q,
                                const Eigen::Vector4d& l, CouplingMode mode) {
  return mode == CouplingMode::standard ? coupling_standard(q)
                                        : coupling_context(q, l);
}

/// Analytic 12x4 Jacobian d(q5..q16)/d(q1..q4) of the coupling block.
inline Eigen::MatrixXd coupling_jacobian(const Eigen::Vector4d& q,
                                         const Eigen::Vector4d& l,
                                         CouplingMode mode) {
  const double q1 = q[0], q2 = q[1], q3 = q[2], q4 = q[3];
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(12, 4);
  if (mode == CouplingMode::standard) {
    J(0, 1) = std::sin(q2);
    J(0, 2) = 1.0;
    J(1, 0) = 1.0;
    J(1, 1) = 0.1 * std::cos(q2);
    J(2, 1) = -q4 * std::sin(q2);
    J(2, 3) = std::cos(q2);
    J(3, 0) = 1.0;
    J(3, 2) = 2.0 * q3;
    J(4, 1) = 1.5 * std::cos(q2);
    J(5, 0) = -q4;
    J(5, 3) = -q1;
    J(6, 0) = std::cos(q1);
    J(7, 2) = 0.4 * q4;
    J(7, 3) = 0.4 * q3;
    J(8, 0) = -0.9;
    J(8, 1) = -1.0;
    J(8, 2) = 1.0;
    J(8, 3) = -4.0 * q4;
    J(9, 2) = -3.0 * std::cos(q3);
    J(10, 2) = -4.0 * q3;
    J(11, 0) = -1.8 * q1;
    return J;
  }
  const double a1 = 2.0 * l[0], a2 = 2.0 * l[1], a3 = 2.0 * l[2],
               a4 = 2.0 * l[3];
  const double p1 = 2.0 * a1, p3 = 2.0 * a3, p4 = 2.0 * a4;
  J(0, 1) = a2 * std::sin(a2 * q2);
  J(0, 2) = 1.0;
  J(1, 0) = 1.0;
  J(1, 1) = a1 * 0.1 * a2 * std::cos(a2 * q2);
  J(2, 1) = -q4 * a4 * std::sin(a4 * q2);
  J(2, 3) = std::cos(a4 * q2);
  J(3, 0) = 1.0;
  J(3, 2) = detail::real_power_dq(q3, p3);
  J(4, 1) = a2 * 1.5 * std::cos(q2);
  J(5, 0) = -(l[3] + l[0]) * q4;
  J(5, 3) = -(l[3] + l[0]) * q1;
  J(6, 0) = a1 * std::cos(a1 * q1);
  J(7, 2) = a3 * 0.4 * q4;
  J(7, 3) = a3 * 0.4 * q3;
  J(8, 0) = -a1 * 0.9;
  J(8, 1) = -1.0;
  J(8, 2) = 1.0;
  J(8, 3) = -2.0 * detail::real_power_dq(q4, p4);
  J(9, 2) = -a3 * 3.0 * std::cos(q3);
  J(10, 2) = -2.0 * detail::real_power_dq(q3, p3);
  J(11, 0) = -0.9 * detail::real_power_dq(q1, p1);
  return J;
}

struct PendulumConfig {
  Eigen::Vector4d lengths;         // meters, in [0.35, 0.65]
  Eigen::Vector4d initial_angles;  // radians at t = 0 (released at rest)
  CouplingMode coupling = CouplingMode::standard;
  double dt = 1e-3;
  double duration = 3.0;
  double gravity = 9.81;
};

/// Integrates the four independent joints with RK4 on (q, q') in R^8 and
/// assembles the 16-dimensional coupled state and its time derivative at
/// every step. Context is always the length vector.
inline Trajectory simulate_pendulum(const PendulumConfig& cfg) {
  for (int i = 0; i < 4; ++i) {
    if (!(cfg.lengths[i] > 0.0)) {
      throw std::invalid_argument("pendulum: lengths must be positive");
    }
  }
  if (!(cfg.dt > 0.0) || !(cfg.duration > 0.0)) {
    throw std::invalid_argument("pendulum: dt and duration must be positive");
  }
  const int steps = static_cast<int>(std::llround(cfg.duration / cfg.dt));
  const auto rhs = [&](const Eigen::VectorXd& s) {
    Eigen::VectorXd d(8);
    for (int i = 0; i < 4; ++i) {
      d[i] = s[4 + i];
      d[4 + i] = -(cfg.gravity / cfg.lengths[i]) * std::sin(s[i]);
    }
    return d;
  };

  Eigen::VectorXd s(8);
  s.head<4>() = cfg.initial_angles;
  s.tail<4>().setZero();

  Trajectory tr;
  tr.states.resize(16, steps);
  tr.derivs.resize(16, steps);
  for (int t = 0; t < steps; ++t) {
    const Eigen::Vector4d q = s.head<4>();
    const Eigen::Vector4d qd = s.tail<4>();
    tr.states.col(t).head<4>() = q;
    tr.states.col(t).tail<12>() = coupling(q, cfg.lengths, cfg.coupling);
    tr.derivs.col(t).head<4>() = qd;
    tr.derivs.col(t).tail<12>() =
        coupling_jacobian(q, cfg.lengths, cfg.coupling) * qd;
    s = rk4_step(rhs, s, cfg.dt);
  }
  tr.context = cfg.lengths;
  return tr;
}

/// Train split: 100 trajectories, lengths ~ U[0.35, 0.65]^4 and initial
/// angles ~ U[0 deg, 30 deg]^4 (per-trajectory derived RNG; lengths drawn
/// before angles). Test split: the 4^4 = 256 grid over lengths in
/// {0.35, 0.45, 0.55, 0.65} (l1 slowest index), all angles 15 deg.
inline Dataset build_pendulum_dataset(const std::string& split,
                                      CouplingMode mode, std::uint64_t seed) {
  Dataset ds;
  ds.system = "pendulum";
  ds.regime = coupling_mode_name(mode);
  ds.split = split;
  ds.dt = 1e-3;
  ds.seed = seed;

  const double deg = 0.017453292519943295;  // pi / 180
  if (split == "train") {
    for (int i = 0; i < 100; ++i) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      PendulumConfig cfg;
      cfg.coupling = mode;
      for (int j = 0; j < 4; ++j) cfg.lengths[j] = rng.uniform(0.35, 0.65);
      for (int j = 0; j < 4; ++j) {
        cfg.initial_angles[j] = rng.uniform(0.0, 30.0 * deg);
      }
      ds.trajectories.push_back(simulate_pendulum(cfg));
    }
  } else if (split == "test") {
    const double grid[4] = {0.35, 0.45, 0.55, 0.65};
    for (int i1 = 0; i1 < 4; ++i1) {
      for (int i2 = 0; i2 < 4; ++i2) {
        for (int i3 = 0; i3 < 4; ++i3) {
          for (int i4 = 0; i4 < 4; ++i4) {
            PendulumConfig cfg;
            cfg.coupling = mode;
            cfg.lengths << grid[i1], grid[i2], grid[i3], grid[i4];
            cfg.initial_angles.setConstant(15.0 * deg);
            ds.trajectories.push_back(simulate_pendulum(cfg));
          }
        }
      }
    }
  } else {
    throw std::invalid_argument("unknown split: " + split);
  }
  return ds;
}

}  // namespace ncae
