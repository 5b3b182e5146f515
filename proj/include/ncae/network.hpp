#pragma once
// Constrained autoencoder stacks built from biorthogonal layer pairs.
//
// Encoder layer l:  rho^(l)(x)  = sigma_minus(Psi_l^T (x - b^(l)); alpha^(l))
// Decoder layer l:  phi^(l)(z)  = Phi_l sigma_plus(z; alpha^(l)) + b^(l)
// Encoder applies layers L..1, decoder 1..L; biorthogonality Psi^T Phi = I
// makes rho∘phi the identity on the latent space and P = phi∘rho an
// idempotent projection. Three variants:
//   - plain:              fixed alpha, context ignored
//   - context_concat:     context appended to the model input
//   - modulated:          per-layer (alpha, bias) produced from the context
// A forward-mode tangent stream runs alongside the primal pass so that
// directional derivatives of P and rho come out of the same traversal.

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ncae/activations.hpp"
#include "ncae/manifold.hpp"
#include "ncae/neuromod.hpp"
#include "ncae/rng.hpp"

namespace ncae {

enum class Variant { plain, context_concat, modulated };

inline std::string variant_name(Variant v) {
  switch (v) {
    case Variant::plain: return "cae";
    case Variant::context_concat: return "context_cae";
    case Variant::modulated: return "ncae";
  }
  throw std::logic_error("unknown variant");
}

inline Variant variant_from_name(const std::string& s) {
  if (s == "cae") return Variant::plain;
  if (s == "context_cae") return Variant::context_concat;
  if (s == "ncae") return Variant::modulated;
  throw std::invalid_argument("unknown variant '" + s +
                              "' (expected cae | context_cae | ncae)");
}

/// Architecture description shared by all variants.
struct ArchitectureSpec {
  Variant variant = Variant::plain;
  int latent_dim = 0;               ///< d = n_0
  std::vector<int> layer_widths;    ///< n_1..n_L (non-decreasing)
  int state_dim = 0;                ///< physical state size
  int context_dim = 0;              ///< 0 for the plain variant
  double static_alpha = 0.39269908169872415481;  ///< pi/8 for fixed variants
  std::vector<int> mlp_topology;    ///< modulated variant only
  double alpha_min = 1e-5;
  double alpha_max = 0.39269908169872415481;

  int num_layers() const { return static_cast<int>(layer_widths.size()); }
  int input_dim() const { return layer_widths.back(); }

  /// Full width chain n_0..n_L.
  std::vector<int> chain() const {
    std::vector<int> c;
    c.push_back(latent_dim);
    c.insert(c.end(), layer_widths.begin(), layer_widths.end());
    return c;
  }

  void validate() const {
    if (latent_dim < 1 || layer_widths.empty()) {
      throw std::invalid_argument("architecture needs latent_dim >= 1 and at "
                                  "least one layer width");
    }
    int prev = latent_dim;
    for (int w : layer_widths) {
      if (w < prev) {
        throw std::invalid_argument(
            "layer widths must be non-decreasing from the latent dimension");
      }
      prev = w;
    }
    const int expected =
        state_dim + (variant == Variant::context_concat ? context_dim : 0);
    if (input_dim() != expected) {
      throw std::invalid_argument(
          "last layer width " + std::to_string(input_dim()) +
          " does not match expected input size " + std::to_string(expected));
    }
    if (variant != Variant::plain && context_dim < 1) {
      throw std::invalid_argument(
          "context-aware variants need context_dim >= 1");
    }
    if (variant == Variant::modulated) {
      if (mlp_topology.size() < 2) {
        throw std::invalid_argument(
            "modulated variant needs an MLP topology with >= 2 entries");
      }
      if (mlp_topology.front() != context_dim) {
        throw std::invalid_argument("MLP input width must equal context_dim");
      }
    }
  }
};

/// All trainable parameters of one model.
struct ModelParams {
  ArchitectureSpec spec;
  std::vector<BiorthPair> pairs;            ///< layer l at index l-1
  std::vector<Eigen::VectorXd> base_biases; ///< b_l, length n_l, index l-1
  NeuromodNet neuromod;                     ///< used by modulated variant only
};

/// Deterministic initialization: orthonormal pairs, zero biases, small
/// Gaussian modulation weights.
inline ModelParams init_model(const ArchitectureSpec& spec, Rng& rng) {
  spec.validate();
  ModelParams p;
  p.spec = spec;
  const std::vector<int> chain = spec.chain();
  for (std::size_t l = 1; l < chain.size(); ++l) {
    p.pairs.push_back(init_biorthogonal(chain[l], chain[l - 1], rng));
    p.base_biases.push_back(Eigen::VectorXd::Zero(chain[l]));
  }
  if (spec.variant == Variant::modulated) {
    p.neuromod = init_neuromod(spec.mlp_topology, chain, rng);
    p.neuromod.alpha_min = spec.alpha_min;
    p.neuromod.alpha_max = spec.alpha_max;
  }
  return p;
}

/// Per-layer (alpha, bias) resolved for one context, with activation
/// coefficient tables; carries the modulation tape for the reverse pass.
struct ResolvedParams {
  struct Layer {
    Eigen::VectorXd alpha;  ///< n_{l-1}
    Eigen::VectorXd bias;   ///< n_l
    SigmaCoefTable coef;    ///< per-row constants derived from alpha
  };
  std::vector<Layer> layers;
  bool modulated = false;
  Eigen::VectorXd signal;                 ///< MLP output s
  MlpTape mlp_tape;
  std::vector<Eigen::VectorXd> raw_alpha; ///< pre-squash values per layer
};

/// Computes the effective per-layer parameters for a given context.
/// For fixed-alpha variants the context only gates input assembly and is
/// not consulted here.
inline ResolvedParams resolve_params(const ModelParams& p,
                                     const Eigen::VectorXd& context) {
  const int L = p.spec.num_layers();
  const std::vector<int> chain = p.spec.chain();
  ResolvedParams r;
  r.layers.resize(L);
  if (p.spec.variant == Variant::modulated) {
    if (context.size() != p.spec.context_dim) {
      throw std::invalid_argument(
          "modulated variant needs a context of dimension " +
          std::to_string(p.spec.context_dim));
    }
    r.modulated = true;
    r.signal = modulation_signal(p.neuromod, context, &r.mlp_tape);
    r.raw_alpha.resize(L);
    for (int l = 1; l <= L; ++l) {
      layer_parameters(p.neuromod, r.signal, l, p.base_biases[l - 1],
                       r.layers[l - 1].alpha, r.layers[l - 1].bias,
                       &r.raw_alpha[l - 1]);
      r.layers[l - 1].coef = SigmaCoefTable::from_alpha(r.layers[l - 1].alpha);
    }
  } else {
    for (int l = 1; l <= L; ++l) {
      r.layers[l - 1].alpha =
          Eigen::VectorXd::Constant(chain[l - 1], p.spec.static_alpha);
      r.layers[l - 1].bias = p.base_biases[l - 1];
      r.layers[l - 1].coef = SigmaCoefTable::from_alpha(r.layers[l - 1].alpha);
    }
  }
  return r;
}

/// Assembles the model-space input column for one state vector.
inline Eigen::VectorXd assemble_input(const ModelParams& p,
                                      const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& context) {
  if (x.size() != p.spec.state_dim) {
    throw std::invalid_argument("state dimension mismatch: expected " +
                                std::to_string(p.spec.state_dim) + ", got " +
                                std::to_string(x.size()));
  }
  if (p.spec.variant == Variant::context_concat) {
    if (context.size() != p.spec.context_dim) {
      throw std::invalid_argument(
          "context-concat variant needs a context of dimension " +
          std::to_string(p.spec.context_dim));
    }
    Eigen::VectorXd out(x.size() + context.size());
    out << x, context;
    return out;
  }
  return x;
}

/// Tangent-direction counterpart of assemble_input (context block is zero:
/// the context is constant along a trajectory).
inline Eigen::VectorXd assemble_tangent(const ModelParams& p,
                                        const Eigen::VectorXd& v) {
  if (v.size() != p.spec.state_dim) {
    throw std::invalid_argument("tangent dimension mismatch");
  }
  if (p.spec.variant == Variant::context_concat) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(p.spec.input_dim());
    out.head(v.size()) = v;
    return out;
  }
  return v;
}

/// Full forward + tangent tape over a batch (columns = samples).
struct ForwardTape {
  // Encoder intermediates, layer l stored at index l-1:
  //   enc_t[l-1]  = Psi_l^T (e_l - b^(l))         (n_{l-1} x m)
  //   enc_td[l-1] = Psi_l^T ed_l
  // Chain values e_l at index l (0..L), e_L = input, e_0 = latent.
  std::vector<Eigen::MatrixXd> enc_t, enc_td;
  std::vector<Eigen::MatrixXd> enc_e, enc_ed;
  // Decoder intermediates, d_0 = latent, d_L = reconstruction:
  //   dec_g[l-1]  = sigma_plus(d_{l-1})
  //   dec_gd[l-1] = dsigma_plus/dx ⊙ dd_{l-1}
  std::vector<Eigen::MatrixXd> dec_g, dec_gd;
  std::vector<Eigen::MatrixXd> dec_d, dec_dd;

  const Eigen::MatrixXd& latent() const { return enc_e.front(); }
  const Eigen::MatrixXd& latent_dot() const { return enc_ed.front(); }
  const Eigen::MatrixXd& output() const { return dec_d.back(); }
  const Eigen::MatrixXd& output_dot() const { return dec_dd.back(); }
};

/// Runs the primal + tangent forward pass over model-space inputs X with
/// tangent directions V (both input_dim x m).
inline void forward_batch(const ModelParams& p, const ResolvedParams& r,
                          const Eigen::MatrixXd& X, const Eigen::MatrixXd& V,
                          ForwardTape& tape) {
  const int L = p.spec.num_layers();
  if (X.rows() != p.spec.input_dim() || V.rows() != X.rows() ||
      V.cols() != X.cols()) {
    throw std::invalid_argument("forward pass input shape mismatch");
  }
  tape.enc_t.assign(L, {});
  tape.enc_td.assign(L, {});
  tape.enc_e.assign(L + 1, {});
  tape.enc_ed.assign(L + 1, {});
  tape.dec_g.assign(L, {});
  tape.dec_gd.assign(L, {});
  tape.dec_d.assign(L + 1, {});
  tape.dec_dd.assign(L + 1, {});

  tape.enc_e[L] = X;
  tape.enc_ed[L] = V;
  Eigen::MatrixXd sdx;
  for (int l = L; l >= 1; --l) {
    const auto& lay = r.layers[l - 1];
    const BiorthPair& pr = p.pairs[l - 1];
    tape.enc_t[l - 1].noalias() =
        pr.psi.transpose() * (tape.enc_e[l].colwise() - lay.bias);
    tape.enc_td[l - 1].noalias() = pr.psi.transpose() * tape.enc_ed[l];
    sigma_batch_fwd(tape.enc_t[l - 1], lay.coef, -1.0, tape.enc_e[l - 1], sdx);
    tape.enc_ed[l - 1] = sdx.cwiseProduct(tape.enc_td[l - 1]);
  }
  tape.dec_d[0] = tape.enc_e[0];
  tape.dec_dd[0] = tape.enc_ed[0];
  for (int l = 1; l <= L; ++l) {
    const auto& lay = r.layers[l - 1];
    const BiorthPair& pr = p.pairs[l - 1];
    sigma_batch_fwd(tape.dec_d[l - 1], lay.coef, +1.0, tape.dec_g[l - 1], sdx);
    tape.dec_gd[l - 1] = sdx.cwiseProduct(tape.dec_dd[l - 1]);
    tape.dec_d[l].noalias() = pr.phi * tape.dec_g[l - 1];
    tape.dec_d[l].colwise() += lay.bias;
    tape.dec_dd[l].noalias() = pr.phi * tape.dec_gd[l - 1];
  }
}

/// Decoder-only pass (with tangent) from latent columns Z, Zdot.
inline void decode_batch(const ModelParams& p, const ResolvedParams& r,
                         const Eigen::MatrixXd& Z, const Eigen::MatrixXd& Zdot,
                         Eigen::MatrixXd& out, Eigen::MatrixXd& out_dot) {
  const int L = p.spec.num_layers();
  if (Z.rows() != p.spec.latent_dim) {
    throw std::invalid_argument("latent dimension mismatch");
  }
  Eigen::MatrixXd d = Z, dd = Zdot, sv, sdx;
  for (int l = 1; l <= L; ++l) {
    const auto& lay = r.layers[l - 1];
    const BiorthPair& pr = p.pairs[l - 1];
    sigma_batch_fwd(d, lay.coef, +1.0, sv, sdx);
    dd = (pr.phi * sdx.cwiseProduct(dd).matrix()).eval();
    d = (pr.phi * sv.matrix()).eval();
    d.colwise() += lay.bias;
  }
  out = d;
  out_dot = dd;
}

// ---------------------------------------------------------------------------
// Scalar (single-sample) conveniences. All take the physical state vector
// and handle context assembly internally.
// ---------------------------------------------------------------------------

/// Latent code z = rho(x) (rho applied to [x; c] for the concat variant).
inline Eigen::VectorXd encode(const ModelParams& p, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& context = {}) {
  ResolvedParams r = resolve_params(p, context);
  ForwardTape t;
  Eigen::VectorXd xin = assemble_input(p, x, context);
  forward_batch(p, r, xin, Eigen::VectorXd::Zero(xin.size()), t);
  return t.latent().col(0);
}

/// Decoded state phi(z) in model space (n_L entries).
inline Eigen::VectorXd decode(const ModelParams& p, const Eigen::VectorXd& z,
                              const Eigen::VectorXd& context = {}) {
  ResolvedParams r = resolve_params(p, context);
  Eigen::MatrixXd out, out_dot;
  decode_batch(p, r, z, Eigen::VectorXd::Zero(z.size()), out, out_dot);
  return out.col(0);
}

/// Projection P(x) = phi(rho(x)) in model space (n_L entries).
inline Eigen::VectorXd project(const ModelParams& p, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& context = {}) {
  ResolvedParams r = resolve_params(p, context);
  ForwardTape t;
  Eigen::VectorXd xin = assemble_input(p, x, context);
  forward_batch(p, r, xin, Eigen::VectorXd::Zero(xin.size()), t);
  return t.output().col(0);
}

/// Directional derivative of the projection: dP(x)[v], exact forward mode.
inline Eigen::VectorXd project_jvp(const ModelParams& p,
                                   const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& v,
                                   const Eigen::VectorXd& context = {}) {
  ResolvedParams r = resolve_params(p, context);
  ForwardTape t;
  forward_batch(p, r, assemble_input(p, x, context), assemble_tangent(p, v), t);
  return t.output_dot().col(0);
}

/// Directional derivative of the encoder: d rho(x)[v].
inline Eigen::VectorXd encode_jvp(const ModelParams& p,
                                  const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& v,
                                  const Eigen::VectorXd& context = {}) {
  ResolvedParams r = resolve_params(p, context);
  ForwardTape t;
  forward_batch(p, r, assemble_input(p, x, context), assemble_tangent(p, v), t);
  return t.latent_dot().col(0);
}

/// Maximum biorthogonality defect across all layer pairs.
inline double max_pair_defect(const ModelParams& p) {
  double d = 0.0;
  for (const auto& pr : p.pairs) {
    d = std::max(d, biorthogonality_defect(pr));
  }
  return d;
}

}  // namespace ncae
