#pragma once
// Trajectory container and lossless on-disk dataset format.
//
// A dataset directory holds `manifest.json` plus `data.bin`. The binary
// file stores each trajectory's states then derivatives as little-endian
// IEEE doubles, one time sample after another (n values per sample). The
// manifest records dimensions, contexts, and per-array byte offsets so a
// reader can verify sizes before touching the payload.

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "ncae/training.hpp"

namespace ncae {

struct Trajectory {
  Eigen::MatrixXd states;   // dim x T, one column per time sample
  Eigen::MatrixXd derivs;   // dim x T, time derivative at the same samples
  Eigen::VectorXd context;  // static per-trajectory context
};

struct Dataset {
  std::string system;  // "lorenz96" | "pendulum"
  std::string regime;  // forcing regime or coupling mode
  std::string split;   // "train" | "test"
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::vector<Trajectory> trajectories;

  int state_dim() const {
    return trajectories.empty() ? 0
                                : static_cast<int>(trajectories[0].states.rows());
  }
  int context_dim() const {
    return trajectories.empty()
               ? 0
               : static_cast<int>(trajectories[0].context.size());
  }
};

/// Flattens every stride-th time sample of every trajectory into training
/// samples carrying their trajectory's context.
inline std::vector<Sample> flatten_samples(const Dataset& ds, int stride = 1) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  std::vector<Sample> out;
  for (const Trajectory& tr : ds.trajectories) {
    for (Eigen::Index t = 0; t < tr.states.cols(); t += stride) {
      out.push_back(Sample{tr.states.col(t), tr.derivs.col(t), tr.context});
    }
  }
  return out;
}

namespace detail {

inline void write_bytes(std::ofstream& out, const Eigen::MatrixXd& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
}

inline void read_bytes(std::ifstream& in, std::uint64_t offset,
                       Eigen::MatrixXd& m) {
  in.seekg(static_cast<std::streamoff>(offset));
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!in) throw std::runtime_error("dataset read: truncated data.bin");
}

}  // namespace detail

/// Writes `manifest.json` + `data.bin` into directory `dir` (must exist).
inline void dataset_write(const Dataset& ds, const std::string& dir) {
  nlohmann::json manifest;
  manifest["format"] = "trajectory-dataset-v1";
  manifest["system"] = ds.system;
  manifest["regime"] = ds.regime;
  manifest["split"] = ds.split;
  manifest["dt"] = ds.dt;
  manifest["seed"] = ds.seed;
  manifest["state_dim"] = ds.state_dim();
  manifest["context_dim"] = ds.context_dim();

  std::uint64_t offset = 0;
  nlohmann::json trajs = nlohmann::json::array();
  for (const Trajectory& tr : ds.trajectories) {
    if (tr.states.rows() != tr.derivs.rows() ||
        tr.states.cols() != tr.derivs.cols()) {
      throw std::invalid_argument("dataset write: states/derivs shape mismatch");
    }
    const std::uint64_t bytes =
        sizeof(double) * static_cast<std::uint64_t>(tr.states.size());
    nlohmann::json jt;
    jt["samples"] = tr.states.cols();
    jt["context"] = std::vector<double>(
        tr.context.data(), tr.context.data() + tr.context.size());
    jt["states_offset"] = offset;
    jt["states_bytes"] = bytes;
    jt["derivs_offset"] = offset + bytes;
    jt["derivs_bytes"] = bytes;
    trajs.push_back(jt);
    offset += 2 * bytes;
  }
  manifest["trajectories"] = trajs;
  manifest["total_bytes"] = offset;

  {
    std::ofstream mf(dir + "/manifest.json", std::ios::binary);
    if (!mf) throw std::runtime_error("cannot write " + dir + "/manifest.json");
    mf << manifest.dump(2) << "\n";
  }
  std::ofstream bf(dir + "/data.bin", std::ios::binary);
  if (!bf) throw std::runtime_error("cannot write " + dir + "/data.bin");
  for (const Trajectory& tr : ds.trajectories) {
    detail::write_bytes(bf, tr.states);
    detail::write_bytes(bf, tr.derivs);
  }
  if (!bf) throw std::runtime_error("write failure on " + dir + "/data.bin");
}

/// Reads a dataset directory written by dataset_write. Verifies the binary
/// payload size against the manifest before reading any arrays.
inline Dataset dataset_read(const std::string& dir) {
  std::ifstream mf(dir + "/manifest.json", std::ios::binary);
  if (!mf) throw std::runtime_error("cannot open " + dir + "/manifest.json");
  nlohmann::json manifest;
  try {
    mf >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed manifest.json in " + dir + ": " +
                             e.what());
  }
  if (manifest.value("format", "") != "trajectory-dataset-v1") {
    throw std::runtime_error("unrecognized dataset format in " + dir);
  }

  Dataset ds;
  ds.system = manifest.at("system").get<std::string>();
  ds.regime = manifest.at("regime").get<std::string>();
  ds.split = manifest.at("split").get<std::string>();
  ds.dt = manifest.at("dt").get<double>();
  ds.seed = manifest.at("seed").get<std::uint64_t>();
  const int dim = manifest.at("state_dim").get<int>();
  const std::uint64_t declared = manifest.at("total_bytes").get<std::uint64_t>();

  std::ifstream bf(dir + "/data.bin", std::ios::binary | std::ios::ate);
  if (!bf) throw std::runtime_error("cannot open " + dir + "/data.bin");
  const std::uint64_t actual = static_cast<std::uint64_t>(bf.tellg());
  if (actual != declared) {
    throw std::runtime_error(
        "dataset format error in " + dir + "/data.bin: expected " +
        std::to_string(declared) + " bytes, found " + std::to_string(actual));
  }

  for (const auto& jt : manifest.at("trajectories")) {
    Trajectory tr;
    const auto samples = jt.at("samples").get<Eigen::Index>();
    const auto ctx = jt.at("context").get<std::vector<double>>();
    tr.context = Eigen::Map<const Eigen::VectorXd>(
        ctx.data(), static_cast<Eigen::Index>(ctx.size()));
    tr.states.resize(dim, samples);
    tr.derivs.resize(dim, samples);
    const std::uint64_t bytes =
        sizeof(double) * static_cast<std::uint64_t>(tr.states.size());
    if (jt.at("states_bytes").get<std::uint64_t>() != bytes ||
        jt.at("derivs_bytes").get<std::uint64_t>() != bytes) {
      throw std::runtime_error(
          "dataset format error in " + dir +
          ": per-trajectory byte counts disagree with dimensions");
    }
    detail::read_bytes(bf, jt.at("states_offset").get<std::uint64_t>(),
                       tr.states);
    detail::read_bytes(bf, jt.at("derivs_offset").get<std::uint64_t>(),
                       tr.derivs);
    ds.trajectories.push_back(std::move(tr));
  }
  return ds;
}

}  // namespace ncae
