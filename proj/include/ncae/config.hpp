#pragma once
// Experiment configuration: JSON schema with strict key checking and
// per-experiment defaults that reproduce the published hyperparameter
// tables. A config selects an experiment ("pendulum" or "lorenz96") and a
// model variant; architecture and optimization fields default from the
// tables and may be overridden individually. Unknown keys are errors and
// are reported with their full field path.

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ncae/network.hpp"
#include "ncae/trainer.hpp"

namespace ncae {

struct ExperimentConfig {
  std::string experiment;  // "pendulum" | "lorenz96"
  ArchitectureSpec architecture;
  TrainConfig training;
};

/// Hyperparameter-table architecture for (experiment, variant).
inline ArchitectureSpec default_architecture(const std::string& experiment,
                                             Variant variant) {
  ArchitectureSpec s;
  s.variant = variant;
  if (experiment == "pendulum") {
    s.state_dim = 16;
    s.latent_dim = 4;
    switch (variant) {
      case Variant::plain:
        s.context_dim = 0;
        s.layer_widths = {8, 16, 16, 16};
        break;
      case Variant::context_concat:
        s.context_dim = 4;
        s.layer_widths = {8, 16, 16, 20};
        break;
      case Variant::modulated:
        s.context_dim = 4;
        s.layer_widths = {8, 12, 14, 16};
        s.mlp_topology = {4, 4, 4};
        break;
    }
  } else if (experiment == "lorenz96") {
    s.state_dim = 36;
    s.latent_dim = 2;
    switch (variant) {
      case Variant::plain:
        s.context_dim = 0;
        s.layer_widths = {21, 36};
        break;
      case Variant::context_concat:
        s.context_dim = 1;
        s.layer_widths = {20, 37};
        break;
      case Variant::modulated:
        s.context_dim = 1;
        s.layer_widths = {18, 36};
        s.mlp_topology = {1, 2, 2, 2};
        break;
    }
  } else {
    throw std::invalid_argument("unknown experiment: " + experiment);
  }
  return s;
}

/// Hyperparameter-table optimization settings for an experiment.
inline TrainConfig default_train_config(const std::string& experiment) {
  TrainConfig t;
  t.epochs = 5000;
  t.main_lr = 5e-2;
  t.nmd_lr = 5e-3;
  t.nmd_weight_decay = 1e-3;
  t.scheduler.patience = 200;
  t.scheduler.factor = 0.9;
  if (experiment == "pendulum") {
    t.batch_size = 4096;
    t.main_weight_decay = 1e-5;
  } else if (experiment == "lorenz96") {
    t.batch_size = 512;
    t.main_weight_decay = 1e-4;
  } else {
    throw std::invalid_argument("unknown experiment: " + experiment);
  }
  return t;
}

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  if (!j.is_object()) {
    throw std::runtime_error("config error: " + path + " must be an object");
  }
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw std::runtime_error("config error: unknown key " +
                               (path.empty() ? item.key()
                                             : path + "." + item.key()));
    }
  }
}

template <typename T>
inline void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

/// Parses and validates a config document. Required keys: `experiment`,
/// `variant`. All others default from the tables.
inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  detail::check_keys(j, "", {"experiment", "variant", "architecture",
                             "training"});
  if (!j.contains("experiment") || !j.contains("variant")) {
    throw std::runtime_error(
        "config error: required keys 'experiment' and 'variant'");
  }
  ExperimentConfig cfg;
  cfg.experiment = j.at("experiment").get<std::string>();
  const Variant variant =
      variant_from_name(j.at("variant").get<std::string>());
  cfg.architecture = default_architecture(cfg.experiment, variant);
  cfg.training = default_train_config(cfg.experiment);

  if (j.contains("architecture")) {
    const nlohmann::json& a = j.at("architecture");
    detail::check_keys(a, "architecture",
                       {"latent_dim", "layer_widths", "mlp_topology",
                        "static_alpha", "alpha_min", "alpha_max"});
    detail::maybe(a, "latent_dim", cfg.architecture.latent_dim);
    detail::maybe(a, "layer_widths", cfg.architecture.layer_widths);
    detail::maybe(a, "mlp_topology", cfg.architecture.mlp_topology);
    detail::maybe(a, "static_alpha", cfg.architecture.static_alpha);
    detail::maybe(a, "alpha_min", cfg.architecture.alpha_min);
    detail::maybe(a, "alpha_max", cfg.architecture.alpha_max);
  }
  if (j.contains("training")) {
    const nlohmann::json& t = j.at("training");
    detail::check_keys(t, "training",
                       {"epochs", "batch_size", "main_lr",
                        "main_weight_decay", "nmd_lr", "nmd_weight_decay",
                        "scheduler", "adam", "seed"});
    detail::maybe(t, "epochs", cfg.training.epochs);
    detail::maybe(t, "batch_size", cfg.training.batch_size);
    detail::maybe(t, "main_lr", cfg.training.main_lr);
    detail::maybe(t, "main_weight_decay", cfg.training.main_weight_decay);
    detail::maybe(t, "nmd_lr", cfg.training.nmd_lr);
    detail::maybe(t, "nmd_weight_decay", cfg.training.nmd_weight_decay);
    detail::maybe(t, "seed", cfg.training.seed);
    if (t.contains("scheduler")) {
      const nlohmann::json& s = t.at("scheduler");
      detail::check_keys(s, "training.scheduler", {"patience", "factor"});
      detail::maybe(s, "patience", cfg.training.scheduler.patience);
      detail::maybe(s, "factor", cfg.training.scheduler.factor);
    }
    if (t.contains("adam")) {
      const nlohmann::json& a = t.at("adam");
      detail::check_keys(a, "training.adam", {"beta1", "beta2", "epsilon"});
      detail::maybe(a, "beta1", cfg.training.adam.beta1);
      detail::maybe(a, "beta2", cfg.training.adam.beta2);
      detail::maybe(a, "epsilon", cfg.training.adam.epsilon);
    }
  }
  cfg.architecture.validate();
  cfg.training.validate();
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed config JSON in " + path + ": " +
                             e.what());
  }
  return parse_experiment_config(j);
}

/// JSON echo of a TrainConfig for checkpoint manifests.
inline nlohmann::json train_config_to_json(const TrainConfig& t) {
  nlohmann::json j;
  j["epochs"] = t.epochs;
  j["batch_size"] = t.batch_size;
  j["main_lr"] = t.main_lr;
  j["main_weight_decay"] = t.main_weight_decay;
  j["nmd_lr"] = t.nmd_lr;
  j["nmd_weight_decay"] = t.nmd_weight_decay;
  j["scheduler"] = {{"patience", t.scheduler.patience},
                    {"factor", t.scheduler.factor}};
  j["adam"] = {{"beta1", t.adam.beta1},
               {"beta2", t.adam.beta2},
               {"epsilon", t.adam.epsilon}};
  j["seed"] = t.seed;
  return j;
}

}  // namespace ncae
