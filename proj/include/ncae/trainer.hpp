#pragma once
// Mini-batch training loop: shuffled epochs, two-group Adam, and a
// reduce-on-plateau schedule driven by the epoch-mean training loss.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncae/optimizer.hpp"
#include "ncae/rng.hpp"
#include "ncae/training.hpp"

namespace ncae {

struct SchedulerConfig {
  int patience = 200;
  double factor = 0.9;
};

struct TrainConfig {
  int epochs = 0;
  int batch_size = 1;
  double main_lr = 5e-2;
  double main_weight_decay = 0.0;
  double nmd_lr = 5e-3;
  double nmd_weight_decay = 0.0;
  SchedulerConfig scheduler;
  unsigned long long seed = 0;
  AdamConfig adam;

  void validate() const {
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (!(main_lr > 0.0) || !(nmd_lr > 0.0)) {
      throw std::invalid_argument("learning rates must be positive");
    }
    if (main_weight_decay < 0.0 || nmd_weight_decay < 0.0) {
      throw std::invalid_argument("weight decay must be non-negative");
    }
    if (!(scheduler.factor > 0.0) || !(scheduler.factor < 1.0)) {
      throw std::invalid_argument("scheduler factor must lie in (0,1)");
    }
    if (scheduler.patience < 1) {
      throw std::invalid_argument("scheduler patience must be >= 1");
    }
  }
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double total = 0.0;
  double recon = 0.0;
  double deriv = 0.0;
  double lr_main = 0.0;  // rates in effect after this epoch's schedule update
  double lr_nmd = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Lexicographic ordering on context vectors, used to group equal contexts
/// inside a shuffled batch so each distinct context is resolved once.
inline bool context_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

/// Trains `p` in place over shuffled mini-batches (last partial batch
/// included) and returns one record per epoch. The plateau scheduler
/// watches the epoch-mean total loss and cuts both group rates by
/// `scheduler.factor` when it fires. Deterministic for a fixed seed.
inline std::vector<EpochRecord> train_model(ModelParams& p,
                                            const std::vector<Sample>& data,
                                            const TrainConfig& cfg,
                                            const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("training set is empty");

  OptimState st = init_optim_state(p, cfg.main_lr, cfg.nmd_lr);
  st.scheduler.patience = cfg.scheduler.patience;
  st.scheduler.factor = cfg.scheduler.factor;

  const int total = static_cast<int>(data.size());
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);
  Gradients grads = Gradients::zeros_like(p);
  const bool group_by_context = p.spec.variant == Variant::modulated;

  std::vector<EpochRecord> history;
  history.reserve(static_cast<std::size_t>(cfg.epochs));
  std::vector<Sample> batch;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double sum_total = 0.0, sum_recon = 0.0, sum_deriv = 0.0;
    for (int start = 0; start < total; start += cfg.batch_size) {
      const int m = std::min(cfg.batch_size, total - start);
      batch.resize(static_cast<std::size_t>(m));
      if (group_by_context) {
        std::sort(order.begin() + start, order.begin() + start + m,
                  [&](int ia, int ib) {
                    return context_less(data[static_cast<std::size_t>(ia)].context,
                                        data[static_cast<std::size_t>(ib)].context);
                  });
      }
      for (int j = 0; j < m; ++j) {
        batch[static_cast<std::size_t>(j)] =
            data[static_cast<std::size_t>(order[static_cast<std::size_t>(start + j)])];
      }
      grads.set_zero();
      const LossBreakdown lb = param_gradients(p, batch, grads);
      if (!std::isfinite(lb.total)) {
        throw std::runtime_error(
            "training aborted: non-finite loss at epoch " +
            std::to_string(epoch) + ", batch offset " + std::to_string(start));
      }
      riemannian_adam_step(p, grads, st, cfg.adam, cfg.main_weight_decay,
                           cfg.nmd_weight_decay);
      sum_total += lb.total * m;
      sum_recon += lb.recon * m;
      sum_deriv += lb.deriv * m;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.total = sum_total / total;
    rec.recon = sum_recon / total;
    rec.deriv = sum_deriv / total;
    if (!std::isfinite(rec.total)) {
      throw std::runtime_error("training aborted: non-finite epoch loss at epoch " +
                               std::to_string(epoch));
    }
    if (st.scheduler.observe(rec.total)) {
      st.lr_main *= st.scheduler.factor;
      st.lr_nmd *= st.scheduler.factor;
    }
    rec.lr_main = st.lr_main;
    rec.lr_nmd = st.lr_nmd;
    history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return history;
}

}  // namespace ncae
