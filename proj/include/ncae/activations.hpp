#pragma once
// Mutually inverse activation pair.
//
// For a shear angle alpha in (0, pi/4) the two branches are strictly
// increasing scalar maps with unit slope at the origin and asymptotic slopes
// tan(pi/4 + alpha) / tan(pi/4 - alpha); the "+" branch is convex, the "-"
// branch concave, and they are exact functional inverses of each other.
// Closed form, with s = sin(alpha), c = cos(alpha):
//
//   a = 1/s^2 - 1/c^2     b = 1/s^2 + 1/c^2    k = 2/(s c)
//   v = sqrt(2)/c         w = sqrt(2)/s
//   u = k x -+ v          (sign is the branch)
//   sigma(x) = (b x -+ w +- hypot(u, sqrt(2 a))) / a
//
// All derivative formulas below stage their divisions (u/R first, then
// divide the remaining factors one at a time) so that inputs as large as
// 1e150 neither overflow nor lose the asymptote.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ncae {

inline constexpr double kSqrt2 = 1.4142135623730950488016887242097;

/// Value, x-derivatives and alpha-derivatives of one activation branch.
struct SigmaDerivs {
  double val;     ///< sigma(x; alpha)
  double dx;      ///< d sigma / dx
  double dxx;     ///< d^2 sigma / dx^2
  double dal;     ///< d sigma / d alpha
  double dxdal;   ///< d^2 sigma / (dx d alpha)
};

/// Per-alpha constants of the closed form, reusable across a whole batch.
struct SigmaCoef {
  double a, b, k, v, w, s2a;      // value/x-derivative constants
  double ap, bp, kp, vp, wp;      // their alpha-derivatives
};

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 0.78539816339744830962)) {
    throw std::domain_error("activation shear angle must lie in (0, pi/4), got " +
                            std::to_string(alpha));
  }
}

inline SigmaCoef sigma_coef(double alpha) {
  check_alpha(alpha);
  const double s = std::sin(alpha), c = std::cos(alpha);
  const double s2 = s * s, c2 = c * c;
  SigmaCoef o;
  o.a = 1.0 / s2 - 1.0 / c2;
  o.b = 1.0 / s2 + 1.0 / c2;
  o.k = 2.0 / (s * c);
  o.v = kSqrt2 / c;
  o.w = kSqrt2 / s;
  o.s2a = std::sqrt(2.0 * o.a);
  o.ap = -2.0 * c / (s2 * s) - 2.0 * s / (c2 * c);
  o.bp = -2.0 * c / (s2 * s) + 2.0 * s / (c2 * c);
  o.kp = -2.0 * (c2 - s2) / (s2 * c2);
  o.vp = kSqrt2 * s / c2;
  o.wp = -kSqrt2 * c / s2;
  return o;
}

/// Activation value only. br = +1 selects the convex branch, -1 the concave.
inline double sigma_value(double x, const SigmaCoef& q, double br) {
  const double u = q.k * x - br * q.v;
  const double R = std::hypot(u, q.s2a);
  return (q.b * x - br * q.w + br * R) / q.a;
}

/// Value plus first x-derivative (enough for forward + tangent passes).
inline void sigma_value_dx(double x, const SigmaCoef& q, double br,
                           double& val, double& dx) {
  const double u = q.k * x - br * q.v;
  const double R = std::hypot(u, q.s2a);
  const double uR = u / R;
  val = (q.b * x - br * q.w + br * R) / q.a;
  dx = (q.b + br * q.k * uR) / q.a;
}

/// Full derivative set needed by the reverse pass.
inline SigmaDerivs sigma_all(double x, const SigmaCoef& q, double br) {
  SigmaDerivs o;
  const double u = q.k * x - br * q.v;
  const double R = std::hypot(u, q.s2a);
  const double uR = u / R;
  o.val = (q.b * x - br * q.w + br * R) / q.a;
  o.dx = (q.b + br * q.k * uR) / q.a;
  o.dxx = br * ((2.0 * q.k * q.k) / R) / R / R;
  const double up = q.kp * x - br * q.vp;
  const double Rp = uR * up + q.ap / R;
  o.dal = (q.bp * x - br * q.wp + br * Rp) / q.a - o.val * q.ap / q.a;
  const double d_kuR =
      q.kp * uR + ((q.k * (2.0 * q.a * up / R - uR * q.ap)) / R) / R;
  o.dxdal = (q.bp + br * d_kuR) / q.a - o.dx * q.ap / q.a;
  return o;
}

inline void check_finite_input(double x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("activation input must be finite");
  }
}

/// Convex branch, scalar convenience API.
inline double sigma_plus(double x, double alpha) {
  check_finite_input(x);
  return sigma_value(x, sigma_coef(alpha), +1.0);
}

/// Concave branch (inverse of sigma_plus), scalar convenience API.
inline double sigma_minus(double x, double alpha) {
  check_finite_input(x);
  return sigma_value(x, sigma_coef(alpha), -1.0);
}

/// Saturating map from an unconstrained raw value into (alpha_min, alpha_max):
/// a scaled and shifted logistic sigmoid.
inline double alpha_from_raw(double raw, double alpha_min, double alpha_max) {
  if (!(alpha_min > 0.0) || !(alpha_min < alpha_max) ||
      !(alpha_max < 0.78539816339744830962)) {
    throw std::invalid_argument(
        "alpha bounds must satisfy 0 < alpha_min < alpha_max < pi/4");
  }
  const double sig = 1.0 / (1.0 + std::exp(-raw));
  return (alpha_max - alpha_min) * sig + alpha_min;
}

/// Derivative of alpha_from_raw with respect to raw.
inline double alpha_from_raw_deriv(double raw, double alpha_min,
                                   double alpha_max) {
  const double sig = 1.0 / (1.0 + std::exp(-raw));
  return (alpha_max - alpha_min) * sig * (1.0 - sig);
}

inline SigmaDerivs sigma_plus_all(double x, double alpha) {
  check_finite_input(x);
  return sigma_all(x, sigma_coef(alpha), +1.0);
}

inline SigmaDerivs sigma_minus_all(double x, double alpha) {
  check_finite_input(x);
  return sigma_all(x, sigma_coef(alpha), -1.0);
}

/// Per-row coefficient table for a layer whose n units carry distinct alphas.
struct SigmaCoefTable {
  std::vector<SigmaCoef> rows;

  static SigmaCoefTable from_alpha(const Eigen::VectorXd& alpha) {
    SigmaCoefTable t;
    t.rows.reserve(static_cast<std::size_t>(alpha.size()));
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
      t.rows.push_back(sigma_coef(alpha[i]));
    }
    return t;
  }
};

/// Batch kernel: value + dx for an (n x m) matrix, alpha varying by row.
inline void sigma_batch_fwd(const Eigen::MatrixXd& X, const SigmaCoefTable& t,
                            double br, Eigen::MatrixXd& val,
                            Eigen::MatrixXd& dx) {
  const Eigen::Index n = X.rows(), m = X.cols();
  val.resize(n, m);
  dx.resize(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double* xc = X.col(j).data();
    double* vc = val.col(j).data();
    double* dc = dx.col(j).data();
    for (Eigen::Index i = 0; i < n; ++i) {
      sigma_value_dx(xc[i], t.rows[static_cast<std::size_t>(i)], br, vc[i], dc[i]);
    }
  }
}

/// Batch kernel: the full derivative set, alpha varying by row.
inline void sigma_batch_all(const Eigen::MatrixXd& X, const SigmaCoefTable& t,
                            double br, Eigen::MatrixXd& val, Eigen::MatrixXd& dx,
                            Eigen::MatrixXd& dxx, Eigen::MatrixXd& dal,
                            Eigen::MatrixXd& dxdal) {
  const Eigen::Index n = X.rows(), m = X.cols();
  val.resize(n, m);
  dx.resize(n, m);
  dxx.resize(n, m);
  dal.resize(n, m);
  dxdal.resize(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double* xc = X.col(j).data();
    double* vc = val.col(j).data();
    double* d1 = dx.col(j).data();
    double* d2 = dxx.col(j).data();
    double* da = dal.col(j).data();
    double* dm = dxdal.col(j).data();
    for (Eigen::Index i = 0; i < n; ++i) {
      SigmaDerivs s = sigma_all(xc[i], t.rows[static_cast<std::size_t>(i)], br);
      vc[i] = s.val;
      d1[i] = s.dx;
      d2[i] = s.dxx;
      da[i] = s.dal;
      dm[i] = s.dxdal;
    }
  }
}

}  // namespace ncae
