#pragma once
// Loss and exact parameter gradients.
//
// The training loss for a batch of size N is
//   L = (1/N) sum_i ||x_i - P(x_i)||^2 + ||v_i - dP(x_i)[v_i]||^2
// with v = xdot. The directional-derivative term is produced by the
// forward-mode tangent stream; its parameter gradient therefore needs
// reverse accumulation through both the primal and the tangent chains,
// which is what accumulate_group_gradients implements. For the
// context-concat variant only the leading state rows enter the loss.

#include <cstring>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "ncae/network.hpp"

namespace ncae {

/// One training sample: state, state derivative, trajectory context.
struct Sample {
  Eigen::VectorXd x;
  Eigen::VectorXd xdot;
  Eigen::VectorXd context;
};

struct LossBreakdown {
  double total = 0.0;
  double recon = 0.0;
  double deriv = 0.0;
  int batch_size = 0;
};

/// Gradient arrays mirroring every trainable tensor of a model.
struct Gradients {
  std::vector<Eigen::MatrixXd> g_phi, g_psi;
  std::vector<Eigen::VectorXd> g_bias;
  std::vector<Eigen::MatrixXd> g_w_alpha, g_w_bias;
  std::vector<Eigen::MatrixXd> g_mlp_w;
  std::vector<Eigen::VectorXd> g_mlp_b;

  static Gradients zeros_like(const ModelParams& p) {
    Gradients g;
    for (const auto& pr : p.pairs) {
      g.g_phi.push_back(Eigen::MatrixXd::Zero(pr.phi.rows(), pr.phi.cols()));
      g.g_psi.push_back(Eigen::MatrixXd::Zero(pr.psi.rows(), pr.psi.cols()));
    }
    for (const auto& b : p.base_biases) {
      g.g_bias.push_back(Eigen::VectorXd::Zero(b.size()));
    }
    if (p.spec.variant == Variant::modulated) {
      for (const auto& w : p.neuromod.w_alpha) {
        g.g_w_alpha.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
      }
      for (const auto& w : p.neuromod.w_bias) {
        g.g_w_bias.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
      }
      for (const auto& w : p.neuromod.mlp_w) {
        g.g_mlp_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
      }
      for (const auto& b : p.neuromod.mlp_b) {
        g.g_mlp_b.push_back(Eigen::VectorXd::Zero(b.size()));
      }
    }
    return g;
  }

  void set_zero() {
    for (auto& m : g_phi) m.setZero();
    for (auto& m : g_psi) m.setZero();
    for (auto& v : g_bias) v.setZero();
    for (auto& m : g_w_alpha) m.setZero();
    for (auto& m : g_w_bias) m.setZero();
    for (auto& m : g_mlp_w) m.setZero();
    for (auto& v : g_mlp_b) v.setZero();
  }
};

/// Number of leading model-space rows that enter the loss: the context
/// block appended by the concat variant is excluded.
inline int loss_rows(const ModelParams& p) {
  return p.spec.variant == Variant::context_concat ? p.spec.state_dim
                                                   : p.spec.input_dim();
}

/// Forward + reverse over one group of columns sharing a ResolvedParams.
/// Residual sums of squares are accumulated into recon_sse / deriv_sse
/// (unnormalized); gradients are accumulated into g scaled by 2/batch_total.
/// Pass g = nullptr for a loss-only evaluation.
inline void accumulate_group_gradients(const ModelParams& p,
                                       const ResolvedParams& r,
                                       const Eigen::MatrixXd& X,
                                       const Eigen::MatrixXd& V,
                                       int batch_total, Gradients* g,
                                       double& recon_sse, double& deriv_sse) {
  const int L = p.spec.num_layers();
  const int nl_rows = loss_rows(p);
  ForwardTape tape;
  forward_batch(p, r, X, V, tape);

  Eigen::MatrixXd R1 = tape.output() - X;
  Eigen::MatrixXd R2 = tape.output_dot() - V;
  if (nl_rows < X.rows()) {
    R1.bottomRows(X.rows() - nl_rows).setZero();
    R2.bottomRows(X.rows() - nl_rows).setZero();
  }
  recon_sse += R1.squaredNorm();
  deriv_sse += R2.squaredNorm();
  if (g == nullptr) return;

  const double scale = 2.0 / static_cast<double>(batch_total);
  Eigen::MatrixXd ad = scale * R1;
  Eigen::MatrixXd add = scale * R2;

  std::vector<Eigen::VectorXd> adj_alpha(L), adj_bias(L);
  Eigen::MatrixXd sval, sdx, sdxx, sdal, sdxdal;

  // Decoder chain, layers L..1.
  for (int l = L; l >= 1; --l) {
    const BiorthPair& pr = p.pairs[l - 1];
    g->g_phi[l - 1].noalias() += ad * tape.dec_g[l - 1].transpose();
    g->g_phi[l - 1].noalias() += add * tape.dec_gd[l - 1].transpose();
    adj_bias[l - 1] = ad.rowwise().sum();
    Eigen::MatrixXd ag = pr.phi.transpose() * ad;
    Eigen::MatrixXd agd = pr.phi.transpose() * add;
    sigma_batch_all(tape.dec_d[l - 1], r.layers[l - 1].coef, +1.0, sval, sdx,
                    sdxx, sdal, sdxdal);
    const Eigen::MatrixXd& dd_prev = tape.dec_dd[l - 1];
    adj_alpha[l - 1] =
        (sdal.cwiseProduct(ag) + sdxdal.cwiseProduct(dd_prev).cwiseProduct(agd))
            .rowwise()
            .sum();
    ad = sdx.cwiseProduct(ag) +
         sdxx.cwiseProduct(dd_prev).cwiseProduct(agd);
    add = sdx.cwiseProduct(agd);
  }

  // Encoder chain, layers 1..L (reverse of application order L..1).
  for (int l = 1; l <= L; ++l) {
    const BiorthPair& pr = p.pairs[l - 1];
    sigma_batch_all(tape.enc_t[l - 1], r.layers[l - 1].coef, -1.0, sval, sdx,
                    sdxx, sdal, sdxdal);
    const Eigen::MatrixXd& td = tape.enc_td[l - 1];
    Eigen::MatrixXd at =
        sdx.cwiseProduct(ad) + sdxx.cwiseProduct(td).cwiseProduct(add);
    Eigen::MatrixXd atd = sdx.cwiseProduct(add);
    adj_alpha[l - 1] +=
        (sdal.cwiseProduct(ad) + sdxdal.cwiseProduct(td).cwiseProduct(add))
            .rowwise()
            .sum();
    g->g_psi[l - 1].noalias() +=
        (tape.enc_e[l].colwise() - r.layers[l - 1].bias) * at.transpose();
    g->g_psi[l - 1].noalias() += tape.enc_ed[l] * atd.transpose();
    ad.noalias() = pr.psi * at;
    add.noalias() = pr.psi * atd;
    adj_bias[l - 1] -= ad.rowwise().sum();
  }

  if (p.spec.variant != Variant::modulated) {
    for (int l = 1; l <= L; ++l) {
      g->g_bias[l - 1] += adj_bias[l - 1];
    }
    return;
  }

  // Modulation heads and the context MLP.
  const Eigen::VectorXd& s = r.signal;
  Eigen::VectorXd a_signal = Eigen::VectorXd::Zero(s.size());
  for (int l = 1; l <= L; ++l) {
    const Eigen::VectorXd& raw = r.raw_alpha[l - 1];
    Eigen::VectorXd a_raw(raw.size());
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
      a_raw[i] = alpha_from_raw_deriv(raw[i], p.neuromod.alpha_min,
                                      p.neuromod.alpha_max) *
                 adj_alpha[l - 1][i];
    }
    g->g_w_alpha[l - 1].noalias() += s * a_raw.transpose();
    a_signal.noalias() += p.neuromod.w_alpha[l - 1] * a_raw;
    g->g_w_bias[l - 1].noalias() += s * adj_bias[l - 1].transpose();
    a_signal.noalias() += p.neuromod.w_bias[l - 1] * adj_bias[l - 1];
    g->g_bias[l - 1] += adj_bias[l - 1];
  }
  const int nl = static_cast<int>(p.neuromod.mlp_w.size());
  Eigen::VectorXd a_h = a_signal;
  for (int i = nl - 1; i >= 0; --i) {
    Eigen::VectorXd a_pre;
    if (i == nl - 1) {
      a_pre = a_h;  // linear output layer
    } else {
      const Eigen::VectorXd& pre = r.mlp_tape.pre[i];
      a_pre = a_h;
      for (Eigen::Index k = 0; k < a_pre.size(); ++k) {
        a_pre[k] *= silu_deriv(pre[k]);
      }
    }
    const Eigen::VectorXd& inp =
        (i == 0) ? r.mlp_tape.input : r.mlp_tape.act[i - 1];
    g->g_mlp_w[i].noalias() += a_pre * inp.transpose();
    g->g_mlp_b[i] += a_pre;
    a_h.noalias() = p.neuromod.mlp_w[i].transpose() * a_pre;
  }
}

/// Splits a sample list into runs of identical context and evaluates
/// loss (and gradients when g != nullptr) group by group in order.
inline LossBreakdown loss_and_gradients(const ModelParams& p,
                                        const std::vector<Sample>& batch,
                                        Gradients* g) {
  if (batch.empty()) {
    throw std::invalid_argument("empty batch");
  }
  const int N = static_cast<int>(batch.size());
  const int in_dim = p.spec.input_dim();
  double recon_sse = 0.0, deriv_sse = 0.0;

  // Only the modulated variant resolves per-context parameters; for the
  // other variants the whole batch shares one resolution (context enters
  // the concat variant through the input columns alone).
  const bool split_on_context = p.spec.variant == Variant::modulated;
  std::size_t begin = 0;
  while (begin < batch.size()) {
    std::size_t end = begin + 1;
    while (end < batch.size() &&
           (!split_on_context ||
            (batch[end].context.size() == batch[begin].context.size() &&
             (batch[end].context.array() == batch[begin].context.array())
                 .all()))) {
      ++end;
    }
    const int m = static_cast<int>(end - begin);
    Eigen::MatrixXd X(in_dim, m), V(in_dim, m);
    for (int j = 0; j < m; ++j) {
      const Sample& smp = batch[begin + j];
      X.col(j) = assemble_input(p, smp.x, smp.context);
      V.col(j) = assemble_tangent(p, smp.xdot);
    }
    ResolvedParams r = resolve_params(p, batch[begin].context);
    accumulate_group_gradients(p, r, X, V, N, g, recon_sse, deriv_sse);
    begin = end;
  }
  LossBreakdown lb;
  lb.batch_size = N;
  lb.recon = recon_sse / N;
  lb.deriv = deriv_sse / N;
  lb.total = lb.recon + lb.deriv;
  return lb;
}

/// Mean loss of a batch (no gradients).
inline LossBreakdown loss_ae(const ModelParams& p,
                             const std::vector<Sample>& batch) {
  return loss_and_gradients(p, batch, nullptr);
}

/// Exact gradients of loss_ae for every parameter tensor.
inline LossBreakdown param_gradients(const ModelParams& p,
                                     const std::vector<Sample>& batch,
                                     Gradients& g) {
  return loss_and_gradients(p, batch, &g);
}

}  // namespace ncae
