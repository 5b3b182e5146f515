// Command-line driver: dataset generation, training, evaluation, and
// analysis exports for the constrained-autoencoder experiments.
//
// Subcommands: generate, train, eval, export-latent, export-hovmoller.
// Global flags: --seed (overrides config/default seeds), --deterministic,
// --threads. Execution is sequential and bitwise deterministic for a fixed
// seed regardless of the latter two flags; they are accepted so callers can
// script a uniform interface.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ncae/ncae.hpp"

namespace {

struct GlobalFlags {
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool deterministic = false;
  int threads = 1;
};

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::string default_summary_path(const std::string& rows_path) {
  const auto dot = rows_path.find_last_of('.');
  if (dot == std::string::npos) return rows_path + "_summary";
  return rows_path.substr(0, dot) + "_summary" + rows_path.substr(dot);
}

int run_generate(const GlobalFlags& g, const std::string& system,
                 const std::string& regime, const std::string& coupling,
                 const std::string& split, int transient,
                 const std::string& out) {
  const std::uint64_t seed = g.seed_given ? g.seed : 0;
  ncae::Dataset ds;
  if (system == "lorenz96") {
    ds = ncae::build_lorenz_dataset(ncae::lorenz_regime_from_name(regime),
                                    split, seed, transient);
  } else if (system == "pendulum") {
    ds = ncae::build_pendulum_dataset(
        split, ncae::coupling_mode_from_name(coupling), seed);
  } else {
    throw std::runtime_error("unknown system: " + system);
  }
  std::filesystem::create_directories(out);
  ncae::dataset_write(ds, out);
  std::cout << "wrote " << ds.trajectories.size() << " trajectories to " << out
            << "\n";
  return 0;
}

int run_train(const GlobalFlags& g, const std::string& config_path,
              const std::string& data_dir, const std::string& out,
              int epochs_override, int stride, int limit,
              std::string history_path) {
  ncae::ExperimentConfig cfg = ncae::load_experiment_config(config_path);
  if (g.seed_given) cfg.training.seed = g.seed;
  if (epochs_override >= 0) cfg.training.epochs = epochs_override;

  ncae::Dataset ds = ncae::dataset_read(data_dir);
  const std::string system =
      cfg.experiment == "lorenz96" ? "lorenz96" : "pendulum";
  if (ds.system != system) {
    throw std::runtime_error("dataset system '" + ds.system +
                             "' does not match experiment '" + cfg.experiment +
                             "'");
  }
  if (ds.state_dim() != cfg.architecture.state_dim) {
    throw std::runtime_error(
        "dataset state dimension " + std::to_string(ds.state_dim()) +
        " does not match architecture state dimension " +
        std::to_string(cfg.architecture.state_dim));
  }
  if (cfg.architecture.variant != ncae::Variant::plain &&
      ds.context_dim() != cfg.architecture.context_dim) {
    throw std::runtime_error(
        "dataset context dimension " + std::to_string(ds.context_dim()) +
        " does not match architecture context dimension " +
        std::to_string(cfg.architecture.context_dim));
  }
  if (limit > 0 && static_cast<std::size_t>(limit) < ds.trajectories.size()) {
    ds.trajectories.resize(static_cast<std::size_t>(limit));
  }
  const std::vector<ncae::Sample> samples = ncae::flatten_samples(ds, stride);

  const std::uint64_t master = cfg.training.seed;
  ncae::Rng init_rng(ncae::derive_seed(master, 0));
  ncae::ModelParams model = ncae::init_model(cfg.architecture, init_rng);
  ncae::TrainConfig tc = cfg.training;
  tc.seed = ncae::derive_seed(master, 1);

  std::filesystem::create_directories(out);
  if (history_path.empty()) history_path = out + "/loss_history.csv";
  auto hist_out = ncae::open_output(history_path);
  hist_out << "epoch,total,recon,deriv,lr_main,lr_nmd\n";
  const auto log_epoch = [&](const ncae::EpochRecord& r) {
    hist_out << r.epoch << "," << ncae::format_full(r.total) << ","
             << ncae::format_full(r.recon) << "," << ncae::format_full(r.deriv)
             << "," << ncae::format_full(r.lr_main) << ","
             << ncae::format_full(r.lr_nmd) << "\n";
    if (r.epoch % 100 == 0 || r.epoch == tc.epochs) {
      std::cout << "epoch " << r.epoch << "/" << tc.epochs
                << " loss=" << r.total << "\n";
    }
  };
  const std::vector<ncae::EpochRecord> history =
      ncae::train_model(model, samples, tc, log_epoch);

  ncae::CheckpointMeta meta;
  meta.seed = master;
  meta.epoch = tc.epochs;
  if (!history.empty()) meta.final_loss = history.back().total;
  meta.hyperparameters = ncae::train_config_to_json(cfg.training);
  meta.hyperparameters["experiment"] = cfg.experiment;
  meta.hyperparameters["stride"] = stride;
  if (limit > 0) meta.hyperparameters["limit_trajectories"] = limit;
  ncae::checkpoint_save(model, meta, out);
  std::cout << "checkpoint written to " << out << "\n";
  return 0;
}

int run_eval(const std::string& ckpt_dir, const std::string& data_dir,
             const std::string& out, std::string summary) {
  const ncae::ModelParams model = ncae::checkpoint_load(ckpt_dir);
  const ncae::Dataset ds = ncae::dataset_read(data_dir);
  const ncae::EvalReport rep = ncae::evaluate_model(model, ds);
  ncae::write_eval_rows(rep, out);
  if (summary.empty()) summary = default_summary_path(out);
  ncae::write_eval_summary(rep, summary);
  std::cout << "state median " << rep.state.median << ", deriv median "
            << rep.deriv.median << " over " << rep.rows.size()
            << " trajectories\n";
  return 0;
}

int run_export_latent(const std::string& ckpt_dir, const std::string& data_dir,
                      const std::string& out, int traj_filter,
                      const std::string& override_csv) {
  const ncae::ModelParams model = ncae::checkpoint_load(ckpt_dir);
  const ncae::Dataset ds = ncae::dataset_read(data_dir);
  Eigen::VectorXd override_ctx;
  const bool has_override = !override_csv.empty();
  if (has_override) {
    const std::vector<double> vals = parse_double_list(override_csv);
    override_ctx = Eigen::Map<const Eigen::VectorXd>(
        vals.data(), static_cast<Eigen::Index>(vals.size()));
    if (model.spec.variant != ncae::Variant::plain &&
        override_ctx.size() != model.spec.context_dim) {
      throw std::runtime_error(
          "override context has " + std::to_string(override_ctx.size()) +
          " entries; model expects " +
          std::to_string(model.spec.context_dim));
    }
  }

  auto file = ncae::open_output(out);
  const int d = model.spec.latent_dim;
  const int cdim = ds.context_dim();
  file << "trajectory,t";
  for (int i = 1; i <= d; ++i) file << ",z" << i;
  for (int i = 1; i <= d; ++i) file << ",zdot" << i;
  for (int i = 1; i <= cdim; ++i) file << ",context" << i;
  file << "\n";

  for (std::size_t ti = 0; ti < ds.trajectories.size(); ++ti) {
    if (traj_filter >= 0 && static_cast<int>(ti) != traj_filter) continue;
    const ncae::Trajectory& tr = ds.trajectories[ti];
    const Eigen::VectorXd used = has_override ? override_ctx : tr.context;
    Eigen::MatrixXd X, V;
    ncae::assemble_trajectory(model, tr, used, X, V);
    const ncae::ResolvedParams r = ncae::resolve_params(model, used);
    ncae::ForwardTape tape;
    ncae::forward_batch(model, r, X, V, tape);
    const Eigen::MatrixXd& Z = tape.latent();
    const Eigen::MatrixXd& Zd = tape.latent_dot();
    for (Eigen::Index t = 0; t < Z.cols(); ++t) {
      file << ti << "," << ncae::format_full(static_cast<double>(t) * ds.dt);
      for (int i = 0; i < d; ++i) file << "," << ncae::format_full(Z(i, t));
      for (int i = 0; i < d; ++i) file << "," << ncae::format_full(Zd(i, t));
      for (int i = 0; i < static_cast<int>(used.size()); ++i) {
        file << "," << ncae::format_full(used[i]);
      }
      file << "\n";
    }
  }
  return 0;
}

int run_export_hovmoller(const std::string& ckpt_dir,
                         const std::string& data_dir, int traj_index,
                         const std::string& out) {
  const ncae::ModelParams model = ncae::checkpoint_load(ckpt_dir);
  const ncae::Dataset ds = ncae::dataset_read(data_dir);
  if (ds.system != "lorenz96") {
    throw std::runtime_error(
        "export-hovmoller requires a lorenz96 dataset, got '" + ds.system +
        "'");
  }
  if (traj_index < 0 ||
      static_cast<std::size_t>(traj_index) >= ds.trajectories.size()) {
    throw std::runtime_error("trajectory index out of range");
  }
  const ncae::Trajectory& tr = ds.trajectories[static_cast<std::size_t>(traj_index)];
  Eigen::MatrixXd X, V;
  ncae::assemble_trajectory(model, tr, tr.context, X, V);
  const ncae::ResolvedParams r = ncae::resolve_params(model, tr.context);
  ncae::ForwardTape tape;
  ncae::forward_batch(model, r, X, V, tape);
  const int n = model.spec.state_dim;
  const Eigen::MatrixXd err =
      (X - tape.output()).topRows(n).cwiseAbs();

  auto file = ncae::open_output(out);
  file << "t,site,abs_error,truth\n";
  for (Eigen::Index t = 0; t < err.cols(); ++t) {
    for (int k = 0; k < n; ++k) {
      file << t << "," << k + 1 << "," << ncae::format_full(err(k, t)) << ","
           << ncae::format_full(tr.states(k, t)) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained-autoencoder experiment driver"};
  app.require_subcommand(1);
  app.fallthrough(true);

  GlobalFlags g;
  auto* seed_opt = app.add_option(
      "--seed", g.seed, "Master seed (overrides config/default seeds)");
  app.add_flag("--deterministic", g.deterministic,
               "Force deterministic execution (always on; accepted for "
               "interface uniformity)");
  app.add_option("--threads", g.threads,
                 "Worker thread cap (execution is sequential; accepted for "
                 "interface uniformity)");

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a dataset directory");
  std::string gen_system, gen_regime = "context", gen_coupling = "standard";
  std::string gen_split = "train", gen_out;
  int gen_transient = 13000;
  gen->add_option("--system", gen_system, "lorenz96 | pendulum")->required();
  gen->add_option("--regime", gen_regime,
                  "Lorenz forcing regime: standard_a | standard_b | context");
  gen->add_option("--coupling", gen_coupling,
                  "Pendulum coupling: standard | context");
  gen->add_option("--split", gen_split, "train | test");
  gen->add_option("--transient", gen_transient,
                  "Lorenz warm-up steps discarded before recording");
  gen->add_option("--out", gen_out, "Output directory")->required();

  // train
  auto* tr = app.add_subcommand("train", "Train a model from a JSON config");
  std::string tr_config, tr_data, tr_out, tr_history;
  int tr_epochs = -1, tr_stride = 1, tr_limit = 0;
  tr->add_option("--config", tr_config, "JSON config path")->required();
  tr->add_option("--data", tr_data, "Training dataset directory")->required();
  tr->add_option("--out", tr_out, "Checkpoint output directory")->required();
  tr->add_option("--epochs", tr_epochs, "Override epoch count");
  tr->add_option("--stride", tr_stride, "Keep every k-th time sample");
  tr->add_option("--limit-trajectories", tr_limit,
                 "Use only the first k trajectories");
  tr->add_option("--history", tr_history,
                 "Loss history CSV path (default <out>/loss_history.csv)");

  // eval
  auto* ev = app.add_subcommand("eval", "Per-trajectory RMSE report");
  std::string ev_ckpt, ev_data, ev_out, ev_summary;
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint directory")->required();
  ev->add_option("--data", ev_data, "Dataset directory")->required();
  ev->add_option("--out", ev_out, "Per-trajectory CSV path")->required();
  ev->add_option("--summary", ev_summary,
                 "Aggregate CSV path (default derived from --out)");

  // export-latent
  auto* el = app.add_subcommand("export-latent",
                                "Latent trajectories and velocities as CSV");
  std::string el_ckpt, el_data, el_out, el_override;
  int el_traj = -1;
  el->add_option("--checkpoint", el_ckpt, "Checkpoint directory")->required();
  el->add_option("--data", el_data, "Dataset directory")->required();
  el->add_option("--out", el_out, "Output CSV path")->required();
  el->add_option("--trajectory", el_traj,
                 "Restrict to one trajectory index (default: all)");
  el->add_option("--override-context", el_override,
                 "Comma-separated context fed to the model instead of each "
                 "trajectory's own");

  // export-hovmoller
  auto* eh = app.add_subcommand(
      "export-hovmoller", "Absolute-error and truth grids for one Lorenz "
                          "trajectory (long-format CSV)");
  std::string eh_ckpt, eh_data, eh_out;
  int eh_traj = 0;
  eh->add_option("--checkpoint", eh_ckpt, "Checkpoint directory")->required();
  eh->add_option("--data", eh_data, "Dataset directory")->required();
  eh->add_option("--trajectory", eh_traj, "Trajectory index");
  eh->add_option("--out", eh_out, "Output CSV path")->required();

  CLI11_PARSE(app, argc, argv);
  g.seed_given = seed_opt->count() > 0;

  try {
    if (*gen) {
      return run_generate(g, gen_system, gen_regime, gen_coupling, gen_split,
                          gen_transient, gen_out);
    }
    if (*tr) {
      return run_train(g, tr_config, tr_data, tr_out, tr_epochs, tr_stride,
                       tr_limit, tr_history);
    }
    if (*ev) return run_eval(ev_ckpt, ev_data, ev_out, ev_summary);
    if (*el) {
      return run_export_latent(el_ckpt, el_data, el_out, el_traj, el_override);
    }
    if (*eh) return run_export_hovmoller(eh_ckpt, eh_data, eh_traj, eh_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
