// Acceptance suite. Each numbered check prints exactly one PASS/FAIL line
// and exits 0 (pass) or 1 (fail). Usage: acceptance <number 1..11> [cache_dir]
//
// Checks 8-10 train real models; they share datasets and checkpoints via
// the cache directory so reruns and the context-sweep check reuse the same
// trained weights instead of repeating half-hour runs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "ncae/ncae.hpp"

using namespace ncae;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int report(int n, bool ok, const std::string& detail, double elapsed) {
  std::printf("criterion %d: %s — %s (%.1f s)\n", n, ok ? "PASS" : "FAIL",
              detail.c_str(), elapsed);
  return ok ? 0 : 1;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

Eigen::VectorXd random_vec(Rng& rng, int n, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

Eigen::VectorXd random_context_for(const ArchitectureSpec& s, Rng& rng) {
  if (s.context_dim == 0) return {};
  Eigen::VectorXd c(s.context_dim);
  for (int i = 0; i < c.size(); ++i) c[i] = rng.uniform(0.3, 3.2);
  return c;
}

const Variant kVariants[3] = {Variant::plain, Variant::context_concat,
                              Variant::modulated};

// ---------------------------------------------------------------------------
// 1. Mutually inverse activation branches on a dense grid.
// ---------------------------------------------------------------------------

int check_1() {
  const auto t0 = Clock::now();
  const double alphas[4] = {1e-4, 0.05, 0.1, M_PI / 8.0};
  double worst = 0.0;
  for (double alpha : alphas) {
    for (int i = 0; i <= 2000; ++i) {
      const double x = -10.0 + 0.01 * i;
      worst = std::max(
          worst, std::abs(sigma_minus(sigma_plus(x, alpha), alpha) - x));
      worst = std::max(
          worst, std::abs(sigma_plus(sigma_minus(x, alpha), alpha) - x));
    }
  }
  return report(1, worst < 1e-9,
                "activation branch round-trip max deviation " + fmt(worst),
                seconds_since(t0));
}

// ---------------------------------------------------------------------------
// 2. Idempotent projection and exact latent recovery for random models.
// ---------------------------------------------------------------------------

int check_2() {
  const auto t0 = Clock::now();
  Rng rng(20);
  double worst_latent = 0.0, worst_idem = 0.0;
  for (Variant v : kVariants) {
    const ArchitectureSpec s = default_architecture("lorenz96", v);
    for (int draw = 0; draw < 100; ++draw) {
      const ModelParams p = init_model(s, rng);
      const Eigen::VectorXd c = random_context_for(s, rng);
      const Eigen::VectorXd z = random_vec(rng, s.latent_dim);
      // The encoder and projection consume full model-space vectors; for
      // the concat variant the decoder's reconstructed context entries
      // ride along instead of the originals.
      const auto reapply = [&](auto&& fn, const Eigen::VectorXd& full) {
        if (v == Variant::context_concat) {
          return fn(p, full.head(s.state_dim).eval(),
                    full.tail(s.context_dim).eval());
        }
        return fn(p, full, c);
      };
      const Eigen::VectorXd full = decode(p, z, c);
      const Eigen::VectorXd z2 = reapply(
          [](const ModelParams& m, const Eigen::VectorXd& a,
             const Eigen::VectorXd& b) { return encode(m, a, b); },
          full);
      worst_latent =
          std::max(worst_latent, (z2 - z).cwiseAbs().maxCoeff());
      const Eigen::VectorXd x = random_vec(rng, s.state_dim, 2.0);
      const Eigen::VectorXd p1 = project(p, x, c);
      const Eigen::VectorXd p2 = reapply(
          [](const ModelParams& m, const Eigen::VectorXd& a,
             const Eigen::VectorXd& b) { return project(m, a, b); },
          p1);
      worst_idem = std::max(worst_idem, (p2 - p1).cwiseAbs().maxCoeff());
    }
  }
  const bool ok = worst_latent < 1e-9 && worst_idem < 1e-8;
  return report(2, ok,
                "latent round-trip " + fmt(worst_latent) +
                    ", repeated projection " + fmt(worst_idem),
                seconds_since(t0));
}

// ---------------------------------------------------------------------------
// 3. Pairing constraint holds after every optimizer step of a real run.
// ---------------------------------------------------------------------------

int check_3() {
  const auto t0 = Clock::now();
  const Dataset train =
      build_lorenz_dataset(LorenzRegime::context, "train", 2030);
  const std::vector<Sample> samples = flatten_samples(train);

  const ArchitectureSpec spec =
      default_architecture("lorenz96", Variant::modulated);
  TrainConfig tc = default_train_config("lorenz96");
  Rng init_rng(derive_seed(103, 0));
  ModelParams p = init_model(spec, init_rng);
  OptimState st = init_optim_state(p, tc.main_lr, tc.nmd_lr);
  Gradients g = Gradients::zeros_like(p);

  Rng order_rng(derive_seed(103, 1));
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  int steps = 0;
  double worst = 0.0;
  std::vector<Sample> batch;
  while (steps < 1050) {
    order_rng.shuffle(order);
    for (std::size_t b = 0; b < order.size() && steps < 1050;
         b += static_cast<std::size_t>(tc.batch_size)) {
      batch.clear();
      const std::size_t end =
          std::min(order.size(), b + static_cast<std::size_t>(tc.batch_size));
      for (std::size_t i = b; i < end; ++i) batch.push_back(samples[order[i]]);
      g.set_zero();
      param_gradients(p, batch, g);
      riemannian_adam_step(p, g, st, tc.adam, tc.main_weight_decay,
                           tc.nmd_weight_decay);
      worst = std::max(worst, max_pair_defect(p));
      ++steps;
    }
  }
  return report(3, worst < 1e-7,
                "max pairing defect over " + std::to_string(steps) +
                    " optimizer steps " + fmt(worst),
                seconds_since(t0));
}

// ---------------------------------------------------------------------------
// 4. Analytic loss gradients match central finite differences entrywise.
// ---------------------------------------------------------------------------

struct GradError {
  double rel = 0.0;
  std::string where;
};

void fd_check_tensor(ModelParams& p, const std::vector<Sample>& batch,
                     double* data, Eigen::Index size, const double* analytic,
                     const std::string& name, GradError& err) {
  // h balances truncation (~h^2) against rounding noise (~eps*|loss|/h);
  // at 1e-5 both sit below the 1e-8 absolute floor for batch losses of a
  // few hundred, so near-zero modulation gradients are not drowned out.
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < size; ++i) {
    const double save = data[i];
    data[i] = save + h;
    const double up = loss_ae(p, batch).total;
    data[i] = save - h;
    const double dn = loss_ae(p, batch).total;
    data[i] = save;
    const double fd = (up - dn) / (2.0 * h);
    const double an = analytic[i];
    const double abs_err = std::abs(an - fd);
    if (abs_err < 1e-8) continue;
    const double rel = abs_err / std::max(std::abs(an), std::abs(fd));
    if (rel > err.rel) {
      err.rel = rel;
      err.where = name + "[" + std::to_string(i) + "]";
    }
  }
}

int check_4() {
  const auto t0 = Clock::now();
  Rng rng(40);
  GradError err;
  for (Variant v : kVariants) {
    const ArchitectureSpec s = default_architecture("lorenz96", v);
    ModelParams p = init_model(s, rng);
    std::vector<Sample> batch;
    const Eigen::VectorXd shared_c = random_context_for(s, rng);
    for (int i = 0; i < 4; ++i) {
      Sample smp;
      smp.x = random_vec(rng, s.state_dim, 1.5);
      smp.xdot = random_vec(rng, s.state_dim, 1.5);
      // Two context groups in the batch to exercise per-group evaluation.
      smp.context = (i < 2) ? shared_c : random_context_for(s, rng);
      batch.push_back(std::move(smp));
    }
    Gradients g = Gradients::zeros_like(p);
    param_gradients(p, batch, g);
    const std::string tag = variant_name(v) + ":";
    for (std::size_t l = 0; l < p.pairs.size(); ++l) {
      fd_check_tensor(p, batch, p.pairs[l].phi.data(), p.pairs[l].phi.size(),
                      g.g_phi[l].data(), tag + "phi" + std::to_string(l + 1),
                      err);
      fd_check_tensor(p, batch, p.pairs[l].psi.data(), p.pairs[l].psi.size(),
                      g.g_psi[l].data(), tag + "psi" + std::to_string(l + 1),
                      err);
      fd_check_tensor(p, batch, p.base_biases[l].data(),
                      p.base_biases[l].size(), g.g_bias[l].data(),
                      tag + "bias" + std::to_string(l + 1), err);
    }
    if (v == Variant::modulated) {
      for (std::size_t i = 0; i < p.neuromod.mlp_w.size(); ++i) {
        fd_check_tensor(p, batch, p.neuromod.mlp_w[i].data(),
                        p.neuromod.mlp_w[i].size(), g.g_mlp_w[i].data(),
                        tag + "mlp_w" + std::to_string(i), err);
        fd_check_tensor(p, batch, p.neuromod.mlp_b[i].data(),
                        p.neuromod.mlp_b[i].size(), g.g_mlp_b[i].data(),
                        tag + "mlp_b" + std::to_string(i), err);
      }
      for (std::size_t l = 0; l < p.neuromod.w_alpha.size(); ++l) {
        fd_check_tensor(p, batch, p.neuromod.w_alpha[l].data(),
                        p.neuromod.w_alpha[l].size(), g.g_w_alpha[l].data(),
                        tag + "w_alpha" + std::to_string(l + 1), err);
        fd_check_tensor(p, batch, p.neuromod.w_bias[l].data(),
                        p.neuromod.w_bias[l].size(), g.g_w_bias[l].data(),
                        tag + "w_bias" + std::to_string(l + 1), err);
      }
    }
  }
  const bool ok = err.rel < 1e-5;
  const std::string where = err.where.empty() ? "(all below floor)" : err.where;
  return report(4, ok,
                "worst gradient/finite-difference relative error " +
                    fmt(err.rel) + " at " + where,
                seconds_since(t0));
}

// ---------------------------------------------------------------------------
// 5. Directional derivatives of projection and encoder match differences.
// ---------------------------------------------------------------------------

int check_5() {
  const auto t0 = Clock::now();
  Rng rng(50);
  const double h = 1e-6;
  double worst = 0.0;
  for (Variant v : kVariants) {
    const ArchitectureSpec s = default_architecture("lorenz96", v);
    for (int rep = 0; rep < 20; ++rep) {
      const ModelParams p = init_model(s, rng);
      const Eigen::VectorXd c = random_context_for(s, rng);
      const Eigen::VectorXd x = random_vec(rng, s.state_dim, 1.5);
      const Eigen::VectorXd d = random_vec(rng, s.state_dim);
      {
        const Eigen::VectorXd jvp = project_jvp(p, x, d, c);
        const Eigen::VectorXd fd =
            (project(p, (x + h * d).eval(), c) -
             project(p, (x - h * d).eval(), c)) /
            (2 * h);
        worst = std::max(worst, (jvp - fd).cwiseAbs().maxCoeff() /
                                    std::max(1.0, fd.cwiseAbs().maxCoeff()));
      }
      {
        const Eigen::VectorXd jvp = encode_jvp(p, x, d, c);
        const Eigen::VectorXd fd =
            (encode(p, (x + h * d).eval(), c) -
             encode(p, (x - h * d).eval(), c)) /
            (2 * h);
        worst = std::max(worst, (jvp - fd).cwiseAbs().maxCoeff() /
                                    std::max(1.0, fd.cwiseAbs().maxCoeff()));
      }
    }
  }
  return report(5, worst < 1e-5,
                "worst directional-derivative relative error " + fmt(worst),
                seconds_since(t0));
}

// ---------------------------------------------------------------------------
// 6. Lorenz '96 generator: equilibrium, integrator order, wave modes.
// ---------------------------------------------------------------------------

int check_6() {
  const auto t0 = Clock::now();
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(36, 3.163);
  const bool equil = lorenz96_rhs(uniform, 3.163).isZero(0.0);

  const auto decay = [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(-x);
  };
  const double exact = std::exp(-1.0);
  auto err_at = [&](int steps) {
    Eigen::VectorXd x(1);
    x << 1.0;
    for (int i = 0; i < steps; ++i) x = rk4_step(decay, x, 1.0 / steps);
    return std::abs(x[0] - exact);
  };
  const double order = std::log2(err_at(20) / err_at(40));
  const bool order_ok = order > 3.7 && order < 4.3;

  Lorenz96Config lo;
  lo.forcing = 3.133;
  const int mode_lo = dominant_spatial_mode(generate_lorenz96(lo).states);
  Lorenz96Config hi;
  hi.forcing = 3.193;
  const int mode_hi = dominant_spatial_mode(generate_lorenz96(hi).states);

  const bool ok = equil && order_ok && mode_lo == 8 && mode_hi == 7;
  return report(
      6, ok,
      "equilibrium " + std::string(equil ? "exact" : "violated") +
          ", observed integrator order " + fmt(order) + ", wave modes " +
          std::to_string(mode_lo) + "/" + std::to_string(mode_hi) +
          " at forcing 3.133/3.193",
      seconds_since(t0));
}

// ---------------------------------------------------------------------------
// 7. Coupling-table equivalence at half-meter lengths and exact Jacobians.
// ---------------------------------------------------------------------------

int check_7() {
  const auto t0 = Clock::now();
  Rng rng(70);
  const Eigen::Vector4d half = Eigen::Vector4d::Constant(0.5);
  double worst_eq = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Eigen::Vector4d q;
    for (int j = 0; j < 4; ++j) q[j] = 3.0 * rng.normal();
    worst_eq = std::max(worst_eq,
                        (coupling_context(q, half) - coupling_standard(q))
                            .cwiseAbs()
                            .maxCoeff());
  }

  double worst_jac = 0.0;
  const double h = 1e-6;
  for (CouplingMode mode : {CouplingMode::standard, CouplingMode::context}) {
    for (int rep = 0; rep < 100; ++rep) {
      Eigen::Vector4d q, l;
      for (int j = 0; j < 4; ++j) {
        q[j] = 2.0 * rng.normal();
        l[j] = rng.uniform(0.35, 0.65);
      }
      const Eigen::MatrixXd J = coupling_jacobian(q, l, mode);
      for (int col = 0; col < 4; ++col) {
        Eigen::Vector4d qp = q, qm = q;
        qp[col] += h;
        qm[col] -= h;
        const Eigen::VectorXd fd =
            (coupling(qp, l, mode) - coupling(qm, l, mode)) / (2 * h);
        for (int row = 0; row < 12; ++row) {
          worst_jac = std::max(worst_jac,
                               std::abs(J(row, col) - fd[row]) /
                                   std::max(1.0, std::abs(fd[row])));
        }
      }
    }
  }
  const bool ok = worst_eq < 1e-12 && worst_jac < 1e-6;
  return report(7, ok,
                "half-meter equivalence " + fmt(worst_eq) +
                    ", Jacobian/difference error " + fmt(worst_jac),
                seconds_since(t0));
}

// ---------------------------------------------------------------------------
// Shared trained-model cache for checks 8 and 10.
// ---------------------------------------------------------------------------

struct TrainedLorenz {
  ModelParams cae, ctx, ncae;
  Dataset test;
};

// Chosen so no training context lands in the narrow band around the
// bifurcation whose basin escape would fall inside the recorded window
// (which would mix both wave families in one trajectory).
constexpr std::uint64_t kLorenzDataSeed = 2030;
constexpr int kDeskEpochs = 800;
constexpr std::uint64_t kMasterSeed[3] = {101, 102, 103};

ModelParams train_or_load(const std::string& dir, const ArchitectureSpec& spec,
                          const std::vector<Sample>& samples,
                          std::uint64_t master, int epochs,
                          const TrainConfig& base) {
  if (std::filesystem::exists(dir + "/manifest.json")) {
    CheckpointMeta meta;
    ModelParams p = checkpoint_load(dir, &meta);
    if (meta.seed == master && meta.epoch == epochs &&
        p.spec.variant == spec.variant) {
      std::printf("  [cache] reusing %s\n", dir.c_str());
      return p;
    }
  }
  TrainConfig tc = base;
  tc.epochs = epochs;
  Rng init_rng(derive_seed(master, 0));
  ModelParams p = init_model(spec, init_rng);
  tc.seed = derive_seed(master, 1);
  const auto t0 = Clock::now();
  const auto history = train_model(p, samples, tc, [&](const EpochRecord& r) {
    if (r.epoch % 100 == 0) {
      std::printf("  [%s] epoch %d/%d loss %.5f (%.0f s)\n",
                  variant_name(spec.variant).c_str(), r.epoch, epochs, r.total,
                  seconds_since(t0));
      std::fflush(stdout);
    }
  });
  CheckpointMeta meta;
  meta.seed = master;
  meta.epoch = epochs;
  if (!history.empty()) meta.final_loss = history.back().total;
  meta.hyperparameters = train_config_to_json(tc);
  std::filesystem::create_directories(dir);
  checkpoint_save(p, meta, dir);
  return p;
}

TrainedLorenz ensure_lorenz_models(const std::string& cache) {
  std::filesystem::create_directories(cache);
  const std::string train_dir = cache + "/l96_train";
  const std::string test_dir = cache + "/l96_test";
  Dataset train, test;
  if (std::filesystem::exists(train_dir + "/manifest.json")) {
    train = dataset_read(train_dir);
  } else {
    train = build_lorenz_dataset(LorenzRegime::context, "train",
                                 kLorenzDataSeed);
    std::filesystem::create_directories(train_dir);
    dataset_write(train, train_dir);
  }
  if (std::filesystem::exists(test_dir + "/manifest.json")) {
    test = dataset_read(test_dir);
  } else {
    test = build_lorenz_dataset(LorenzRegime::context, "test", kLorenzDataSeed);
    std::filesystem::create_directories(test_dir);
    dataset_write(test, test_dir);
  }
  const std::vector<Sample> samples = flatten_samples(train);
  const TrainConfig base = default_train_config("lorenz96");

  TrainedLorenz out;
  out.test = std::move(test);
  out.cae = train_or_load(cache + "/l96_cae",
                          default_architecture("lorenz96", Variant::plain),
                          samples, kMasterSeed[0], kDeskEpochs, base);
  out.ctx = train_or_load(
      cache + "/l96_context_cae",
      default_architecture("lorenz96", Variant::context_concat), samples,
      kMasterSeed[1], kDeskEpochs, base);
  out.ncae = train_or_load(cache + "/l96_ncae",
                           default_architecture("lorenz96", Variant::modulated),
                           samples, kMasterSeed[2], kDeskEpochs, base);
  return out;
}

// ---------------------------------------------------------------------------
// 8. Desk-scale Lorenz context experiment: modulated model halves the
//    median state error and attains the smallest median derivative error.
// ---------------------------------------------------------------------------

int check_8(const std::string& cache) {
  const auto t0 = Clock::now();
  const TrainedLorenz m = ensure_lorenz_models(cache);
  const EvalReport rc = evaluate_model(m.cae, m.test);
  const EvalReport rx = evaluate_model(m.ctx, m.test);
  const EvalReport rn = evaluate_model(m.ncae, m.test);
  const bool state_ok = rn.state.median <= 0.5 * rc.state.median &&
                        rn.state.median <= 0.5 * rx.state.median;
  const bool deriv_ok = rn.deriv.median < rc.deriv.median &&
                        rn.deriv.median < rx.deriv.median;
  return report(
      8, state_ok && deriv_ok,
      "median state RMSE " + fmt(rn.state.median) + " (plain " +
          fmt(rc.state.median) + ", concat " + fmt(rx.state.median) +
          "), median derivative RMSE " + fmt(rn.deriv.median) + " (plain " +
          fmt(rc.deriv.median) + ", concat " + fmt(rx.deriv.median) + ")",
      seconds_since(t0));
}

// ---------------------------------------------------------------------------
// 9. Desk-scale pendulum experiment with the length-dependent coupling.
// ---------------------------------------------------------------------------

constexpr std::uint64_t kPendulumDataSeed = 2027;
constexpr std::uint64_t kPendulumMaster[3] = {201, 202, 203};

int check_9(const std::string& cache) {
  const auto t0 = Clock::now();
  Dataset train =
      build_pendulum_dataset("train", CouplingMode::context, kPendulumDataSeed);
  train.trajectories.resize(10);
  const std::vector<Sample> samples = flatten_samples(train, 10);
  const Dataset test =
      build_pendulum_dataset("test", CouplingMode::context, kPendulumDataSeed);
  const TrainConfig base = default_train_config("pendulum");
  const int epochs = 500;

  std::filesystem::create_directories(cache);
  const ModelParams cae = train_or_load(
      cache + "/pend_cae", default_architecture("pendulum", Variant::plain),
      samples, kPendulumMaster[0], epochs, base);
  const ModelParams ctx = train_or_load(
      cache + "/pend_context_cae",
      default_architecture("pendulum", Variant::context_concat), samples,
      kPendulumMaster[1], epochs, base);
  const ModelParams ncae = train_or_load(
      cache + "/pend_ncae",
      default_architecture("pendulum", Variant::modulated), samples,
      kPendulumMaster[2], epochs, base);

  const EvalReport rc = evaluate_model(cae, test);
  const EvalReport rx = evaluate_model(ctx, test);
  const EvalReport rn = evaluate_model(ncae, test);
  const bool ok = rn.state.median < rc.state.median &&
                  rn.state.median < rx.state.median &&
                  rn.deriv.median < rc.deriv.median &&
                  rn.deriv.median < rx.deriv.median;
  return report(
      9, ok,
      "median state RMSE " + fmt(rn.state.median) + " (plain " +
          fmt(rc.state.median) + ", concat " + fmt(rx.state.median) +
          "), median derivative RMSE " + fmt(rn.deriv.median) + " (plain " +
          fmt(rc.deriv.median) + ", concat " + fmt(rx.deriv.median) + ")",
      seconds_since(t0));
}

// ---------------------------------------------------------------------------
// 10. Swept contexts move the modulated model's latent orbits far more
//     than the concatenation baseline's.
// ---------------------------------------------------------------------------

double mean_pairwise_displacement(const ModelParams& p, const Trajectory& tr,
                                  const std::vector<double>& contexts) {
  std::vector<Eigen::MatrixXd> orbits;
  for (double c : contexts) {
    const Eigen::VectorXd ctx = Eigen::VectorXd::Constant(1, c);
    Eigen::MatrixXd X, V;
    assemble_trajectory(p, tr, ctx, X, V);
    const ResolvedParams r = resolve_params(p, ctx);
    ForwardTape tape;
    forward_batch(p, r, X, V, tape);
    orbits.push_back(tape.latent());
  }
  double total = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < orbits.size(); ++i) {
    for (std::size_t j = i + 1; j < orbits.size(); ++j) {
      total += (orbits[i] - orbits[j]).colwise().norm().mean();
      ++pairs;
    }
  }
  return total / pairs;
}

int check_10(const std::string& cache) {
  const auto t0 = Clock::now();
  const TrainedLorenz m = ensure_lorenz_models(cache);
  const std::vector<double> sweep = {3.133, 3.148, 3.163, 3.178, 3.193};
  const Trajectory& tr = m.test.trajectories.front();
  const double d_ncae = mean_pairwise_displacement(m.ncae, tr, sweep);
  const double d_ctx = mean_pairwise_displacement(m.ctx, tr, sweep);
  const bool ok = d_ncae > 10.0 * d_ctx;
  return report(10, ok,
                "mean latent orbit displacement under swept contexts: "
                "modulated " +
                    fmt(d_ncae) + " vs concatenation " + fmt(d_ctx) +
                    " (ratio " + fmt(d_ctx > 0 ? d_ncae / d_ctx : 0.0) + ")",
                seconds_since(t0));
}

// ---------------------------------------------------------------------------
// 11. Bitwise-lossless serialization of datasets and checkpoints.
// ---------------------------------------------------------------------------

bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

int check_11(const std::string& cache) {
  const auto t0 = Clock::now();
  std::filesystem::create_directories(cache);
  bool ok = true;
  std::string why = "datasets and checkpoints round-trip bitwise";

  {
    Lorenz96Config cfg;
    cfg.forcing = 3.17;
    cfg.steps = 40;
    cfg.transient_steps = 100;
    Dataset ds;
    ds.system = "lorenz96";
    ds.regime = "context";
    ds.split = "test";
    ds.dt = cfg.dt;
    ds.seed = 1;
    ds.trajectories = {generate_lorenz96(cfg)};
    PendulumConfig pc;
    pc.lengths << 0.4, 0.5, 0.6, 0.35;
    pc.initial_angles << 0.1, 0.2, 0.3, 0.1;
    pc.coupling = CouplingMode::context;
    Trajectory pt = simulate_pendulum(pc);
    pt.states.conservativeResize(16, 50);
    pt.derivs.conservativeResize(16, 50);
    Dataset ds2;
    ds2.system = "pendulum";
    ds2.regime = "context";
    ds2.split = "train";
    ds2.dt = pc.dt;
    ds2.trajectories = {pt};
    int idx = 0;
    for (const Dataset& d : {ds, ds2}) {
      const std::string dir = cache + "/rt_ds_" + std::to_string(idx++);
      std::filesystem::create_directories(dir);
      dataset_write(d, dir);
      const Dataset rt = dataset_read(dir);
      for (std::size_t i = 0; i < d.trajectories.size(); ++i) {
        if (!bitwise_equal(rt.trajectories[i].states,
                           d.trajectories[i].states) ||
            !bitwise_equal(rt.trajectories[i].derivs,
                           d.trajectories[i].derivs)) {
          ok = false;
          why = "dataset payload changed across a round trip";
        }
      }
    }
  }

  Rng rng(110);
  for (Variant v : kVariants) {
    const ArchitectureSpec s = default_architecture("lorenz96", v);
    const ModelParams p = init_model(s, rng);
    const std::string dir = cache + "/rt_ckpt_" + variant_name(v);
    std::filesystem::create_directories(dir);
    CheckpointMeta meta;
    meta.seed = 7;
    meta.epoch = 1;
    checkpoint_save(p, meta, dir);
    const ModelParams q = checkpoint_load(dir);
    for (std::size_t l = 0; l < p.pairs.size(); ++l) {
      if (!bitwise_equal(p.pairs[l].phi, q.pairs[l].phi) ||
          !bitwise_equal(p.pairs[l].psi, q.pairs[l].psi) ||
          !bitwise_equal(p.base_biases[l], q.base_biases[l])) {
        ok = false;
        why = "checkpoint tensors changed across a round trip";
      }
    }
    const Eigen::VectorXd c = random_context_for(s, rng);
    const Eigen::VectorXd x = random_vec(rng, s.state_dim, 1.5);
    const Eigen::VectorXd d = random_vec(rng, s.state_dim);
    if (!bitwise_equal(project(p, x, c), project(q, x, c)) ||
        !bitwise_equal(project_jvp(p, x, d, c), project_jvp(q, x, d, c)) ||
        !bitwise_equal(encode(p, x, c), encode(q, x, c))) {
      ok = false;
      why = "reloaded model outputs differ from the saved model's";
    }
  }
  return report(11, ok, why, seconds_since(t0));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <1..11> [cache_dir]\n", argv[0]);
    return 2;
  }
  const int n = std::atoi(argv[1]);
  const std::string cache = argc > 2 ? argv[2] : "acceptance_cache";
  try {
    switch (n) {
      case 1: return check_1();
      case 2: return check_2();
      case 3: return check_3();
      case 4: return check_4();
      case 5: return check_5();
      case 6: return check_6();
      case 7: return check_7();
      case 8: return check_8(cache);
      case 9: return check_9(cache);
      case 10: return check_10(cache);
      case 11: return check_11(cache);
      default:
        std::fprintf(stderr, "unknown check number %d\n", n);
        return 2;
    }
  } catch (const std::exception& e) {
    std::printf("criterion %d: FAIL — unhandled error: %s\n", n, e.what());
    return 1;
  }
}
