#pragma once
// Model checkpoints: `manifest.json` (architecture, run metadata, named
// tensor offsets) plus `weights.bin` (little-endian IEEE doubles). The
// round trip is bitwise-lossless, so a reloaded model reproduces forward
// outputs exactly. Tensor shapes in the manifest are validated against
// the architecture on load.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "ncae/network.hpp"

namespace ncae {

struct CheckpointMeta {
  std::uint64_t seed = 0;
  int epoch = 0;
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  nlohmann::json hyperparameters;  // free-form echo of the training config
};

namespace detail {

struct NamedTensor {
  std::string name;
  const double* data;
  Eigen::Index rows, cols;
};

inline void collect_tensors(const ModelParams& p,
                            std::vector<NamedTensor>& out) {
  const int L = p.spec.num_layers();
  for (int l = 1; l <= L; ++l) {
    const BiorthPair& pr = p.pairs[static_cast<std::size_t>(l - 1)];
    out.push_back({"phi" + std::to_string(l), pr.phi.data(), pr.phi.rows(),
                   pr.phi.cols()});
    out.push_back({"psi" + std::to_string(l), pr.psi.data(), pr.psi.rows(),
                   pr.psi.cols()});
    const Eigen::VectorXd& b = p.base_biases[static_cast<std::size_t>(l - 1)];
    out.push_back({"bias" + std::to_string(l), b.data(), b.size(), 1});
  }
  if (p.spec.variant == Variant::modulated) {
    for (std::size_t i = 0; i < p.neuromod.mlp_w.size(); ++i) {
      const Eigen::MatrixXd& w = p.neuromod.mlp_w[i];
      out.push_back({"mlp_w" + std::to_string(i), w.data(), w.rows(),
                     w.cols()});
      const Eigen::VectorXd& b = p.neuromod.mlp_b[i];
      out.push_back({"mlp_b" + std::to_string(i), b.data(), b.size(), 1});
    }
    for (int l = 1; l <= L; ++l) {
      const Eigen::MatrixXd& wa =
          p.neuromod.w_alpha[static_cast<std::size_t>(l - 1)];
      out.push_back({"w_alpha" + std::to_string(l), wa.data(), wa.rows(),
                     wa.cols()});
      const Eigen::MatrixXd& wb =
          p.neuromod.w_bias[static_cast<std::size_t>(l - 1)];
      out.push_back({"w_bias" + std::to_string(l), wb.data(), wb.rows(),
                     wb.cols()});
    }
  }
}

inline double* tensor_slot(ModelParams& p, const std::string& name,
                           Eigen::Index& rows, Eigen::Index& cols) {
  const auto layer_of = [](const std::string& s, std::size_t prefix) {
    return std::stoi(s.substr(prefix));
  };
  if (name.rfind("phi", 0) == 0) {
    auto& m = p.pairs[static_cast<std::size_t>(layer_of(name, 3) - 1)].phi;
    rows = m.rows(); cols = m.cols(); return m.data();
  }
  if (name.rfind("psi", 0) == 0) {
    auto& m = p.pairs[static_cast<std::size_t>(layer_of(name, 3) - 1)].psi;
    rows = m.rows(); cols = m.cols(); return m.data();
  }
  if (name.rfind("bias", 0) == 0) {
    auto& v = p.base_biases[static_cast<std::size_t>(layer_of(name, 4) - 1)];
    rows = v.size(); cols = 1; return v.data();
  }
  if (name.rfind("mlp_w", 0) == 0) {
    auto& m = p.neuromod.mlp_w[static_cast<std::size_t>(layer_of(name, 5))];
    rows = m.rows(); cols = m.cols(); return m.data();
  }
  if (name.rfind("mlp_b", 0) == 0) {
    auto& v = p.neuromod.mlp_b[static_cast<std::size_t>(layer_of(name, 5))];
    rows = v.size(); cols = 1; return v.data();
  }
  if (name.rfind("w_alpha", 0) == 0) {
    auto& m = p.neuromod.w_alpha[static_cast<std::size_t>(layer_of(name, 7) - 1)];
    rows = m.rows(); cols = m.cols(); return m.data();
  }
  if (name.rfind("w_bias", 0) == 0) {
    auto& m = p.neuromod.w_bias[static_cast<std::size_t>(layer_of(name, 6) - 1)];
    rows = m.rows(); cols = m.cols(); return m.data();
  }
  throw std::runtime_error("checkpoint: unknown tensor name " + name);
}

}  // namespace detail

inline void checkpoint_save(const ModelParams& p, const CheckpointMeta& meta,
                            const std::string& dir) {
  nlohmann::json manifest;
  manifest["format"] = "model-checkpoint-v1";
  nlohmann::json arch;
  arch["variant"] = variant_name(p.spec.variant);
  arch["latent_dim"] = p.spec.latent_dim;
  arch["layer_widths"] = p.spec.layer_widths;
  arch["state_dim"] = p.spec.state_dim;
  arch["context_dim"] = p.spec.context_dim;
  arch["static_alpha"] = p.spec.static_alpha;
  arch["alpha_min"] = p.spec.alpha_min;
  arch["alpha_max"] = p.spec.alpha_max;
  arch["mlp_topology"] = p.spec.mlp_topology;
  manifest["architecture"] = arch;
  manifest["seed"] = meta.seed;
  manifest["epoch"] = meta.epoch;
  if (std::isfinite(meta.final_loss)) manifest["final_loss"] = meta.final_loss;
  if (!meta.hyperparameters.is_null()) {
    manifest["hyperparameters"] = meta.hyperparameters;
  }

  std::vector<detail::NamedTensor> tensors;
  detail::collect_tensors(p, tensors);
  std::uint64_t offset = 0;
  nlohmann::json jt = nlohmann::json::array();
  for (const auto& t : tensors) {
    const std::uint64_t bytes =
        sizeof(double) * static_cast<std::uint64_t>(t.rows * t.cols);
    jt.push_back({{"name", t.name},
                  {"rows", t.rows},
                  {"cols", t.cols},
                  {"offset", offset},
                  {"bytes", bytes}});
    offset += bytes;
  }
  manifest["tensors"] = jt;
  manifest["total_bytes"] = offset;

  {
    std::ofstream mf(dir + "/manifest.json", std::ios::binary);
    if (!mf) throw std::runtime_error("cannot write " + dir + "/manifest.json");
    mf << manifest.dump(2) << "\n";
  }
  std::ofstream wf(dir + "/weights.bin", std::ios::binary);
  if (!wf) throw std::runtime_error("cannot write " + dir + "/weights.bin");
  for (const auto& t : tensors) {
    wf.write(reinterpret_cast<const char*>(t.data),
             static_cast<std::streamsize>(sizeof(double) * t.rows * t.cols));
  }
  if (!wf) throw std::runtime_error("write failure on " + dir + "/weights.bin");
}

inline ModelParams checkpoint_load(const std::string& dir,
                                   CheckpointMeta* meta = nullptr) {
  std::ifstream mf(dir + "/manifest.json", std::ios::binary);
  if (!mf) throw std::runtime_error("cannot open " + dir + "/manifest.json");
  nlohmann::json manifest;
  try {
    mf >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed manifest.json in " + dir + ": " +
                             e.what());
  }
  if (manifest.value("format", "") != "model-checkpoint-v1") {
    throw std::runtime_error("unrecognized checkpoint format in " + dir);
  }
  const nlohmann::json& arch = manifest.at("architecture");
  ArchitectureSpec spec;
  spec.variant = variant_from_name(arch.at("variant").get<std::string>());
  spec.latent_dim = arch.at("latent_dim").get<int>();
  spec.layer_widths = arch.at("layer_widths").get<std::vector<int>>();
  spec.state_dim = arch.at("state_dim").get<int>();
  spec.context_dim = arch.at("context_dim").get<int>();
  spec.static_alpha = arch.at("static_alpha").get<double>();
  spec.alpha_min = arch.at("alpha_min").get<double>();
  spec.alpha_max = arch.at("alpha_max").get<double>();
  spec.mlp_topology = arch.at("mlp_topology").get<std::vector<int>>();
  spec.validate();

  // Allocate parameter storage at the architecture's shapes; the file's
  // declared shapes must agree exactly.
  ModelParams p;
  p.spec = spec;
  const std::vector<int> chain = spec.chain();
  for (std::size_t l = 1; l < chain.size(); ++l) {
    BiorthPair pr;
    pr.phi.setZero(chain[l], chain[l - 1]);
    pr.psi.setZero(chain[l], chain[l - 1]);
    p.pairs.push_back(std::move(pr));
    p.base_biases.push_back(Eigen::VectorXd::Zero(chain[l]));
  }
  if (spec.variant == Variant::modulated) {
    p.neuromod.topology = spec.mlp_topology;
    p.neuromod.alpha_min = spec.alpha_min;
    p.neuromod.alpha_max = spec.alpha_max;
    const auto& topo = spec.mlp_topology;
    for (std::size_t i = 0; i + 1 < topo.size(); ++i) {
      p.neuromod.mlp_w.push_back(
          Eigen::MatrixXd::Zero(topo[i + 1], topo[i]));
      p.neuromod.mlp_b.push_back(Eigen::VectorXd::Zero(topo[i + 1]));
    }
    const int d_s = topo.back();
    for (std::size_t l = 1; l < chain.size(); ++l) {
      p.neuromod.w_alpha.push_back(
          Eigen::MatrixXd::Zero(d_s, chain[l - 1]));
      p.neuromod.w_bias.push_back(Eigen::MatrixXd::Zero(d_s, chain[l]));
    }
  }

  const std::uint64_t declared = manifest.at("total_bytes").get<std::uint64_t>();
  std::ifstream wf(dir + "/weights.bin", std::ios::binary | std::ios::ate);
  if (!wf) throw std::runtime_error("cannot open " + dir + "/weights.bin");
  const std::uint64_t actual = static_cast<std::uint64_t>(wf.tellg());
  if (actual != declared) {
    throw std::runtime_error(
        "checkpoint format error in " + dir + "/weights.bin: expected " +
        std::to_string(declared) + " bytes, found " + std::to_string(actual));
  }

  for (const auto& jt : manifest.at("tensors")) {
    const std::string name = jt.at("name").get<std::string>();
    Eigen::Index rows = 0, cols = 0;
    double* dst = detail::tensor_slot(p, name, rows, cols);
    if (jt.at("rows").get<Eigen::Index>() != rows ||
        jt.at("cols").get<Eigen::Index>() != cols) {
      throw std::runtime_error(
          "checkpoint shape mismatch for tensor " + name + ": manifest " +
          std::to_string(jt.at("rows").get<long long>()) + "x" +
          std::to_string(jt.at("cols").get<long long>()) +
          ", architecture requires " + std::to_string(rows) + "x" +
          std::to_string(cols));
    }
    wf.seekg(static_cast<std::streamoff>(jt.at("offset").get<std::uint64_t>()));
    wf.read(reinterpret_cast<char*>(dst),
            static_cast<std::streamsize>(sizeof(double) * rows * cols));
    if (!wf) throw std::runtime_error("checkpoint read: truncated weights.bin");
  }

  if (meta) {
    meta->seed = manifest.value("seed", std::uint64_t{0});
    meta->epoch = manifest.value("epoch", 0);
    meta->final_loss = manifest.value(
        "final_loss", std::numeric_limits<double>::quiet_NaN());
    meta->hyperparameters = manifest.value("hyperparameters", nlohmann::json());
  }
  return p;
}

}  // namespace ncae
