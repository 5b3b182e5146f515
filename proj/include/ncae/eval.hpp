#pragma once
// Per-trajectory reconstruction metrics and their order statistics.
//
// For each trajectory: state RMSE = sqrt(mean over time and state dims of
// (x - P(x))^2), derivative RMSE likewise with the directional derivative
// dP(x)[xdot]. For the context-concat variant both metrics are computed
// over the physical state block only (the appended context rows are not
// part of the reconstruction target).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ncae/csv.hpp"
#include "ncae/dataset.hpp"
#include "ncae/network.hpp"
#include "ncae/training.hpp"

namespace ncae {

struct EvalRow {
  int trajectory = 0;
  Eigen::VectorXd context;
  double state_rmse = 0.0;
  double deriv_rmse = 0.0;
};

struct MetricStats {
  double median = 0.0, q1 = 0.0, q3 = 0.0, min = 0.0, max = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  MetricStats state, deriv;
};

/// Quantile with linear interpolation between order statistics
/// (h = (n-1)q), matching the common numerical-library default.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile of empty set");
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("quantile level must lie in [0,1]");
  }
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

inline MetricStats metric_stats(const std::vector<double>& v) {
  MetricStats s;
  s.median = quantile(v, 0.5);
  s.q1 = quantile(v, 0.25);
  s.q3 = quantile(v, 0.75);
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  return s;
}

/// Builds the model-space input/tangent blocks for a whole trajectory.
inline void assemble_trajectory(const ModelParams& p, const Trajectory& tr,
                                const Eigen::VectorXd& context,
                                Eigen::MatrixXd& X, Eigen::MatrixXd& V) {
  const int T = static_cast<int>(tr.states.cols());
  X.resize(p.spec.input_dim(), T);
  V.resize(p.spec.input_dim(), T);
  X.topRows(tr.states.rows()) = tr.states;
  V.topRows(tr.derivs.rows()) = tr.derivs;
  if (p.spec.variant == Variant::context_concat) {
    if (context.size() != p.spec.context_dim) {
      throw std::invalid_argument("context dimension mismatch");
    }
    X.bottomRows(p.spec.context_dim).colwise() = context;
    V.bottomRows(p.spec.context_dim).setZero();
  }
}

/// RMSE pair for one trajectory under the model (optionally overriding
/// the context fed to the model while keeping the reconstruction target).
inline void trajectory_rmse(const ModelParams& p, const Trajectory& tr,
                            const Eigen::VectorXd& context, double& state_rmse,
                            double& deriv_rmse) {
  if (static_cast<int>(tr.states.rows()) != p.spec.state_dim) {
    throw std::invalid_argument(
        "dataset state dimension " + std::to_string(tr.states.rows()) +
        " does not match model state dimension " +
        std::to_string(p.spec.state_dim));
  }
  Eigen::MatrixXd X, V;
  assemble_trajectory(p, tr, context, X, V);
  const ResolvedParams r = resolve_params(p, context);
  ForwardTape tape;
  forward_batch(p, r, X, V, tape);
  const int nl = loss_rows(p);
  const auto res_x = (X - tape.output()).topRows(nl);
  const auto res_v = (V - tape.output_dot()).topRows(nl);
  state_rmse = std::sqrt(res_x.squaredNorm() /
                         static_cast<double>(res_x.size()));
  deriv_rmse = std::sqrt(res_v.squaredNorm() /
                         static_cast<double>(res_v.size()));
}

inline EvalReport evaluate_model(const ModelParams& p, const Dataset& ds) {
  if (ds.trajectories.empty()) {
    throw std::invalid_argument("evaluate_model: empty dataset");
  }
  EvalReport rep;
  std::vector<double> srm, drm;
  int id = 0;
  for (const Trajectory& tr : ds.trajectories) {
    EvalRow row;
    row.trajectory = id++;
    row.context = tr.context;
    trajectory_rmse(p, tr, tr.context, row.state_rmse, row.deriv_rmse);
    srm.push_back(row.state_rmse);
    drm.push_back(row.deriv_rmse);
    rep.rows.push_back(std::move(row));
  }
  rep.state = metric_stats(srm);
  rep.deriv = metric_stats(drm);
  return rep;
}

/// Per-trajectory CSV: trajectory, context..., state_rmse, deriv_rmse.
inline void write_eval_rows(const EvalReport& rep, const std::string& path) {
  auto out = open_output(path);
  const int cdim =
      rep.rows.empty() ? 0 : static_cast<int>(rep.rows[0].context.size());
  out << "trajectory";
  for (int i = 0; i < cdim; ++i) out << ",context" << i + 1;
  out << ",state_rmse,deriv_rmse\n";
  for (const EvalRow& row : rep.rows) {
    out << row.trajectory;
    for (int i = 0; i < cdim; ++i) out << "," << format_full(row.context[i]);
    out << "," << format_full(row.state_rmse) << ","
        << format_full(row.deriv_rmse) << "\n";
  }
}

/// Aggregate CSV: one row per metric with median/quartiles/min/max.
inline void write_eval_summary(const EvalReport& rep, const std::string& path) {
  auto out = open_output(path);
  out << "metric,median,q1,q3,min,max\n";
  const auto line = [&](const char* name, const MetricStats& s) {
    out << name << "," << format_full(s.median) << "," << format_full(s.q1)
        << "," << format_full(s.q3) << "," << format_full(s.min) << ","
        << format_full(s.max) << "\n";
  };
  line("state_rmse", rep.state);
  line("deriv_rmse", rep.deriv);
}

}  // namespace ncae
