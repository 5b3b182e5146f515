#pragma once
// Lorenz '96 cyclic lattice: right-hand side, trajectory generation over
// forcing regimes, and the spatial-spectrum diagnostic used to identify
// the traveling-wave mode of an attractor.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ncae/dataset.hpp"
#include "ncae/integrators.hpp"
#include "ncae/rng.hpp"

namespace ncae {

struct Lorenz96Config {
  int dim = 36;
  double forcing = 0.0;
  double dt = 0.01;
  int steps = 500;
  // Warm-up length discarded before recording. The initial pattern sits in
  // the wavenumber-8 basin; beyond F ~ 3.163 that basin destabilizes and
  // the state escapes to the wavenumber-7 attractor after an F-dependent
  // delay (about 10500 steps at F = 3.193, growing toward the threshold,
  // infinite below F ~ 3.14). 13000 steps lands between the escape times
  // on either side of F = 3.163, so recordings start after every
  // super-threshold escape has completed while every sub-threshold
  // trajectory still carries the wavenumber-8 pattern.
  int transient_steps = 13000;
};

/// dx_k/dt = (x_{k+1} - x_{k-2}) x_{k-1} - x_k + F with cyclic indices.
inline Eigen::VectorXd lorenz96_rhs(const Eigen::VectorXd& x, double forcing) {
  const Eigen::Index n = x.size();
  if (n < 4) {
    throw std::invalid_argument("lorenz96_rhs: dimension must be >= 4");
  }
  Eigen::VectorXd out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double xp1 = x[(k + 1) % n];
    const double xm1 = x[(k - 1 + n) % n];
    const double xm2 = x[(k - 2 + n) % n];
    out[k] = (xp1 - xm2) * xm1 - x[k] + forcing;
  }
  return out;
}

/// Integrates from x_k(0) = F + sin(8.05 * 2*pi*k/N), k = 1..N, discards
/// the transient, then records `steps` samples of state and RHS.
inline Trajectory generate_lorenz96(const Lorenz96Config& cfg) {
  if (cfg.dim < 4) throw std::invalid_argument("lorenz96: dim must be >= 4");
  if (cfg.steps < 1) throw std::invalid_argument("lorenz96: steps must be >= 1");
  if (cfg.transient_steps < 0) {
    throw std::invalid_argument("lorenz96: transient_steps must be >= 0");
  }
  const double two_pi = 6.283185307179586476925286766559;
  Eigen::VectorXd x(cfg.dim);
  for (int k = 1; k <= cfg.dim; ++k) {
    x[k - 1] = cfg.forcing + std::sin(8.05 * two_pi * k / cfg.dim);
  }
  const auto rhs = [&](const Eigen::VectorXd& s) {
    return lorenz96_rhs(s, cfg.forcing);
  };
  for (int i = 0; i < cfg.transient_steps; ++i) {
    x = rk4_step(rhs, x, cfg.dt);
  }
  Trajectory tr;
  tr.states.resize(cfg.dim, cfg.steps);
  tr.derivs.resize(cfg.dim, cfg.steps);
  for (int i = 0; i < cfg.steps; ++i) {
    tr.states.col(i) = x;
    tr.derivs.col(i) = rhs(x);
    x = rk4_step(rhs, x, cfg.dt);
  }
  tr.context = Eigen::VectorXd::Constant(1, cfg.forcing);
  return tr;
}

/// Wavenumber (1..N/2) whose spatial DFT power, summed over all time
/// samples, dominates — the spatial frequency of a traveling wave.
inline int dominant_spatial_mode(const Eigen::MatrixXd& states) {
  const Eigen::Index n = states.rows();
  const Eigen::Index steps = states.cols();
  if (n < 2 || steps < 1) {
    throw std::invalid_argument("dominant_spatial_mode: empty states");
  }
  const double two_pi = 6.283185307179586476925286766559;
  int best_k = 1;
  double best_power = -1.0;
  for (int k = 1; k <= static_cast<int>(n) / 2; ++k) {
    double power = 0.0;
    for (Eigen::Index t = 0; t < steps; ++t) {
      double re = 0.0, im = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const double angle = two_pi * k * static_cast<double>(j) /
                             static_cast<double>(n);
        re += states(j, t) * std::cos(angle);
        im -= states(j, t) * std::sin(angle);
      }
      power += re * re + im * im;
    }
    if (power > best_power) {
      best_power = power;
      best_k = k;
    }
  }
  return best_k;
}

enum class LorenzRegime { standard_a, standard_b, context };

inline std::string lorenz_regime_name(LorenzRegime r) {
  switch (r) {
    case LorenzRegime::standard_a: return "standard_a";
    case LorenzRegime::standard_b: return "standard_b";
    case LorenzRegime::context: return "context";
  }
  throw std::invalid_argument("unknown Lorenz regime");
}

inline LorenzRegime lorenz_regime_from_name(const std::string& s) {
  if (s == "standard_a") return LorenzRegime::standard_a;
  if (s == "standard_b") return LorenzRegime::standard_b;
  if (s == "context") return LorenzRegime::context;
  throw std::invalid_argument("unknown Lorenz regime: " + s);
}

/// Forcing interval of a regime: the narrow ranges on either side of the
/// wavenumber transition near F = 3.163, or their union.
inline void lorenz_regime_range(LorenzRegime r, double& lo, double& hi) {
  switch (r) {
    case LorenzRegime::standard_a: lo = 3.133; hi = 3.163; return;
    case LorenzRegime::standard_b: lo = 3.163; hi = 3.193; return;
    case LorenzRegime::context: lo = 3.133; hi = 3.193; return;
  }
  throw std::invalid_argument("unknown Lorenz regime");
}

/// Train split: 18 trajectories with F drawn uniformly from the regime
/// range (one derived RNG per trajectory index). Test split: 10
/// trajectories with F linearly spaced across the range, endpoints
/// included. Context is the scalar (F).
inline Dataset build_lorenz_dataset(LorenzRegime regime,
                                    const std::string& split,
                                    std::uint64_t seed,
                                    int transient_steps = 13000) {
  double lo = 0.0, hi = 0.0;
  lorenz_regime_range(regime, lo, hi);
  Dataset ds;
  ds.system = "lorenz96";
  ds.regime = lorenz_regime_name(regime);
  ds.split = split;
  ds.dt = 0.01;
  ds.seed = seed;

  std::vector<double> forcings;
  if (split == "train") {
    for (int i = 0; i < 18; ++i) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      forcings.push_back(rng.uniform(lo, hi));
    }
  } else if (split == "test") {
    const int count = 10;
    for (int i = 0; i < count; ++i) {
      forcings.push_back(lo + (hi - lo) * i / (count - 1));
    }
  } else {
    throw std::invalid_argument("unknown split: " + split);
  }

  for (double forcing : forcings) {
    Lorenz96Config cfg;
    cfg.forcing = forcing;
    cfg.transient_steps = transient_steps;
    ds.trajectories.push_back(generate_lorenz96(cfg));
  }
  return ds;
}

}  // namespace ncae
