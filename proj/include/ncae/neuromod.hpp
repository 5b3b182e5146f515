#pragma once
// Context-driven modulation of layer parameters.
//
// Stage 1: a small fully connected MLP with SiLU hidden activations and a
// linear output maps the context vector c to a signal s.
// Stage 2: per autoencoder layer l, linear heads map s to a raw shear
// vector (squashed into (alpha_min, alpha_max)) and to a bias offset that
// is added to the layer's base bias.

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ncae/activations.hpp"
#include "ncae/rng.hpp"

namespace ncae {

/// SiLU (swish) activation x * sigmoid(x).
inline double silu(double x) { return x / (1.0 + std::exp(-x)); }

/// Derivative of SiLU: sigmoid(x) * (1 + x * (1 - sigmoid(x))).
inline double silu_deriv(double x) {
  const double sg = 1.0 / (1.0 + std::exp(-x));
  return sg * (1.0 + x * (1.0 - sg));
}

/// Forward tape of the context MLP, kept for reverse-mode accumulation.
struct MlpTape {
  Eigen::VectorXd input;
  std::vector<Eigen::VectorXd> pre;  ///< preactivation of each MLP layer
  std::vector<Eigen::VectorXd> act;  ///< output of each MLP layer
};

/// Parameters of the modulation network.
struct NeuromodNet {
  std::vector<int> topology;  ///< [context_dim, hidden..., signal_dim]
  std::vector<Eigen::MatrixXd> mlp_w;  ///< layer i: topology[i+1] x topology[i]
  std::vector<Eigen::VectorXd> mlp_b;
  std::vector<Eigen::MatrixXd> w_alpha;  ///< per layer l: d_s x n_{l-1}
  std::vector<Eigen::MatrixXd> w_bias;   ///< per layer l: d_s x n_l
  double alpha_min = 1e-5;
  double alpha_max = 0.39269908169872415481;  // pi/8

  int context_dim() const { return topology.front(); }
  int signal_dim() const { return topology.back(); }
};

/// Builds a modulation net with Gaussian(0, 0.01^2) weights and zero MLP
/// biases, matching the given autoencoder chain widths (n_0..n_L).
inline NeuromodNet init_neuromod(const std::vector<int>& topology,
                                 const std::vector<int>& chain_widths,
                                 Rng& rng) {
  if (topology.size() < 2) {
    throw std::invalid_argument("modulation MLP topology needs >= 2 entries");
  }
  NeuromodNet net;
  net.topology = topology;
  const int ds = topology.back();
  for (std::size_t i = 0; i + 1 < topology.size(); ++i) {
    Eigen::MatrixXd W(topology[i + 1], topology[i]);
    for (Eigen::Index c = 0; c < W.cols(); ++c) {
      for (Eigen::Index r = 0; r < W.rows(); ++r) {
        W(r, c) = 0.01 * rng.normal();
      }
    }
    net.mlp_w.push_back(std::move(W));
    net.mlp_b.push_back(Eigen::VectorXd::Zero(topology[i + 1]));
  }
  for (std::size_t l = 1; l < chain_widths.size(); ++l) {
    Eigen::MatrixXd Wa(ds, chain_widths[l - 1]);
    Eigen::MatrixXd Wb(ds, chain_widths[l]);
    for (Eigen::Index c = 0; c < Wa.cols(); ++c) {
      for (Eigen::Index r = 0; r < Wa.rows(); ++r) {
        Wa(r, c) = 0.01 * rng.normal();
      }
    }
    for (Eigen::Index c = 0; c < Wb.cols(); ++c) {
      for (Eigen::Index r = 0; r < Wb.rows(); ++r) {
        Wb(r, c) = 0.01 * rng.normal();
      }
    }
    net.w_alpha.push_back(std::move(Wa));
    net.w_bias.push_back(std::move(Wb));
  }
  return net;
}

/// Runs the context MLP, recording a tape for the reverse pass.
inline Eigen::VectorXd modulation_signal(const NeuromodNet& net,
                                         const Eigen::VectorXd& c,
                                         MlpTape* tape = nullptr) {
  if (c.size() != net.context_dim()) {
    throw std::invalid_argument("context dimension mismatch: expected " +
                                std::to_string(net.context_dim()) + ", got " +
                                std::to_string(c.size()));
  }
  if (tape) {
    tape->input = c;
    tape->pre.clear();
    tape->act.clear();
  }
  Eigen::VectorXd h = c;
  const std::size_t nl = net.mlp_w.size();
  for (std::size_t i = 0; i < nl; ++i) {
    Eigen::VectorXd pre = net.mlp_w[i] * h + net.mlp_b[i];
    if (i + 1 < nl) {
      h = pre.unaryExpr([](double v) { return silu(v); });
    } else {
      h = pre;  // linear output
    }
    if (tape) {
      tape->pre.push_back(pre);
      tape->act.push_back(h);
    }
  }
  return h;
}

/// Per-layer modulated parameters derived from the signal s:
///   alpha^(l) = squash(W_alpha^T s),  b^(l) = W_bias^T s + base_bias.
/// `raw_out`, when given, receives the pre-squash values for the reverse pass.
inline void layer_parameters(const NeuromodNet& net, const Eigen::VectorXd& s,
                             std::size_t layer,
                             const Eigen::VectorXd& base_bias,
                             Eigen::VectorXd& alpha, Eigen::VectorXd& bias,
                             Eigen::VectorXd* raw_out = nullptr) {
  if (layer < 1 || layer > net.w_alpha.size()) {
    throw std::out_of_range("modulated layer index out of range: " +
                            std::to_string(layer));
  }
  const Eigen::MatrixXd& Wa = net.w_alpha[layer - 1];
  const Eigen::MatrixXd& Wb = net.w_bias[layer - 1];
  if (s.size() != Wa.rows() || base_bias.size() != Wb.cols()) {
    throw std::invalid_argument("modulation head shape mismatch at layer " +
                                std::to_string(layer));
  }
  Eigen::VectorXd raw = Wa.transpose() * s;
  alpha = raw.unaryExpr([&](double r) {
    return alpha_from_raw(r, net.alpha_min, net.alpha_max);
  });
  bias = Wb.transpose() * s + base_bias;
  if (raw_out) *raw_out = raw;
}

}  // namespace ncae
