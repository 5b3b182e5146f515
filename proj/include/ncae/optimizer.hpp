#pragma once
// Adam on the product of Euclidean parameters and biorthogonal pairs.
//
// Euclidean tensors (biases, modulation weights) take a standard Adam step
// with decoupled weight decay. Each biorthogonal pair additionally:
// decays in ambient space, projects its gradient to the tangent space,
// keeps moments in ambient coordinates (identity transport), steps, and
// retracts back onto the constraint set. A singular retraction is retried
// at half the step length up to 5 times before the error propagates.
//
// Pair tensors use a per-tensor (scalar) second moment: the running average
// of ||T||_F^2 rather than entrywise squares. Entrywise adaptivity scales
// every entry's step to the full learning rate, which at the large rates
// used here makes the pair norms random-walk until the loss explodes;
// normalizing by the tensor-level gradient RMS keeps the manifold update a
// damped momentum flow and matches the per-tensor inner-product adaptivity
// that off-the-shelf Riemannian Adam implementations apply to custom
// manifold parameters.
//
// Two rate groups: "main" (pairs + base biases) and "nmd" (modulation MLP
// and heads), with independent learning rates and weight decays.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "ncae/manifold.hpp"
#include "ncae/network.hpp"
#include "ncae/training.hpp"

namespace ncae {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Reduce-on-plateau: strict improvement of the monitored loss resets the
/// counter; `patience` consecutive non-improvements fire a rate cut.
struct PlateauScheduler {
  int patience = 200;
  double factor = 0.9;
  double best = std::numeric_limits<double>::infinity();
  int counter = 0;

  /// Returns true when the learning rates should be multiplied by `factor`.
  bool observe(double loss) {
    if (loss < best) {
      best = loss;
      counter = 0;
      return false;
    }
    if (++counter >= patience) {
      counter = 0;
      return true;
    }
    return false;
  }
};

/// Entrywise Adam moments for a Euclidean tensor.
struct Moments {
  Eigen::MatrixXd m1, m2;
  static Moments zeros(Eigen::Index rows, Eigen::Index cols) {
    return {Eigen::MatrixXd::Zero(rows, cols),
            Eigen::MatrixXd::Zero(rows, cols)};
  }
};

/// First moment plus scalar second moment for a manifold tensor.
struct PairMoments {
  Eigen::MatrixXd m1;
  double m2 = 0.0;
  static PairMoments zeros(Eigen::Index rows, Eigen::Index cols) {
    return {Eigen::MatrixXd::Zero(rows, cols), 0.0};
  }
};

struct OptimState {
  std::vector<PairMoments> phi, psi;
  std::vector<Moments> bias;
  std::vector<Moments> w_alpha, w_bias, mlp_w, mlp_b;
  long step_count = 0;
  double lr_main = 0.0;
  double lr_nmd = 0.0;
  PlateauScheduler scheduler;
};

inline OptimState init_optim_state(const ModelParams& p, double lr_main,
                                   double lr_nmd) {
  OptimState st;
  st.lr_main = lr_main;
  st.lr_nmd = lr_nmd;
  for (const auto& pr : p.pairs) {
    st.phi.push_back(PairMoments::zeros(pr.phi.rows(), pr.phi.cols()));
    st.psi.push_back(PairMoments::zeros(pr.psi.rows(), pr.psi.cols()));
  }
  for (const auto& b : p.base_biases) {
    st.bias.push_back(Moments::zeros(b.size(), 1));
  }
  if (p.spec.variant == Variant::modulated) {
    for (const auto& w : p.neuromod.w_alpha) {
      st.w_alpha.push_back(Moments::zeros(w.rows(), w.cols()));
    }
    for (const auto& w : p.neuromod.w_bias) {
      st.w_bias.push_back(Moments::zeros(w.rows(), w.cols()));
    }
    for (const auto& w : p.neuromod.mlp_w) {
      st.mlp_w.push_back(Moments::zeros(w.rows(), w.cols()));
    }
    for (const auto& b : p.neuromod.mlp_b) {
      st.mlp_b.push_back(Moments::zeros(b.size(), 1));
    }
  }
  return st;
}

namespace detail {

/// Entrywise Adam step with decoupled decay on a dense tensor (in place).
template <typename Mat>
inline void adam_euclidean(Mat& param, const Eigen::MatrixXd& grad,
                           Moments& mo, double lr, double wd,
                           const AdamConfig& cfg, double bc1, double bc2) {
  param *= (1.0 - lr * wd);
  mo.m1 = cfg.beta1 * mo.m1 + (1.0 - cfg.beta1) * grad;
  mo.m2 = cfg.beta2 * mo.m2 + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  param.noalias() -=
      lr *
      ((mo.m1 / bc1).array() / ((mo.m2 / bc2).array().sqrt() + cfg.epsilon))
          .matrix();
}

/// Momentum + tensor-RMS-normalized step for one side of a pair.
inline Eigen::MatrixXd pair_step(const Eigen::MatrixXd& tangent,
                                 PairMoments& mo, double lr,
                                 const AdamConfig& cfg, double bc1,
                                 double bc2) {
  mo.m1 = cfg.beta1 * mo.m1 + (1.0 - cfg.beta1) * tangent;
  mo.m2 = cfg.beta2 * mo.m2 + (1.0 - cfg.beta2) * tangent.squaredNorm();
  const double denom = std::sqrt(mo.m2 / bc2) + cfg.epsilon;
  return (-lr / denom / bc1) * mo.m1;
}

}  // namespace detail

/// One optimizer step over all parameters. Gradients must come from
/// param_gradients on the current parameters.
inline void riemannian_adam_step(ModelParams& p, const Gradients& g,
                                 OptimState& st, const AdamConfig& cfg,
                                 double main_wd, double nmd_wd) {
  ++st.step_count;
  const double bc1 =
      1.0 - std::pow(cfg.beta1, static_cast<double>(st.step_count));
  const double bc2 =
      1.0 - std::pow(cfg.beta2, static_cast<double>(st.step_count));
  const int L = static_cast<int>(p.pairs.size());

  for (int l = 0; l < L; ++l) {
    BiorthPair& pr = p.pairs[l];
    // Ambient decoupled decay; the retraction re-establishes the constraint.
    pr.phi *= (1.0 - st.lr_main * main_wd);
    pr.psi *= (1.0 - st.lr_main * main_wd);
    Eigen::MatrixXd t_phi, t_psi;
    tangent_project(pr, g.g_phi[l], g.g_psi[l], t_phi, t_psi);
    const Eigen::MatrixXd step_phi =
        detail::pair_step(t_phi, st.phi[l], st.lr_main, cfg, bc1, bc2);
    const Eigen::MatrixXd step_psi =
        detail::pair_step(t_psi, st.psi[l], st.lr_main, cfg, bc1, bc2);
    if (main_wd == 0.0 && step_phi.isZero(0.0) && step_psi.isZero(0.0)) {
      continue;  // exact no-op; skip the (inexact) identity retraction
    }
    double shrink = 1.0;
    for (int attempt = 0;; ++attempt) {
      try {
        pr = retract(pr, shrink * step_phi, shrink * step_psi);
        break;
      } catch (const RetractionSingularError&) {
        if (attempt >= 5) throw;
        shrink *= 0.5;
      }
    }
  }
  for (int l = 0; l < L; ++l) {
    detail::adam_euclidean(p.base_biases[l], g.g_bias[l], st.bias[l],
                           st.lr_main, main_wd, cfg, bc1, bc2);
  }
  if (p.spec.variant == Variant::modulated) {
    for (std::size_t i = 0; i < p.neuromod.w_alpha.size(); ++i) {
      detail::adam_euclidean(p.neuromod.w_alpha[i], g.g_w_alpha[i],
                             st.w_alpha[i], st.lr_nmd, nmd_wd, cfg, bc1, bc2);
      detail::adam_euclidean(p.neuromod.w_bias[i], g.g_w_bias[i],
                             st.w_bias[i], st.lr_nmd, nmd_wd, cfg, bc1, bc2);
    }
    for (std::size_t i = 0; i < p.neuromod.mlp_w.size(); ++i) {
      detail::adam_euclidean(p.neuromod.mlp_w[i], g.g_mlp_w[i], st.mlp_w[i],
                             st.lr_nmd, nmd_wd, cfg, bc1, bc2);
      detail::adam_euclidean(p.neuromod.mlp_b[i], g.g_mlp_b[i], st.mlp_b[i],
                             st.lr_nmd, nmd_wd, cfg, bc1, bc2);
    }
  }
}

}  // namespace ncae
