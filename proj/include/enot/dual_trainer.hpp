#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "enot/c_transform.hpp"
#include "enot/dataset.hpp"
#include "enot/elastic_cost.hpp"
#include "enot/potential_net.hpp"

namespace enot {

struct TrainConfig {
  int outer_iterations = 1000;
  int batch_size = 64;
  double step = 0.01;
  double momentum = 0.9;
  InnerConfig inner;
  std::uint64_t seed = 0;
  int hidden_layers = 4;
  int hidden_width = 50;
  /// Fraction of iterations run at the constant step before a linear decay
  /// to zero. 1.0 keeps the step constant throughout.
  double freeze_fraction = 1.0;

  void validate() const {
    require(outer_iterations >= 1, "TrainConfig: outer_iterations must be >= 1");
    require(batch_size >= 1, "TrainConfig: batch_size must be >= 1");
    require(step > 0.0, "TrainConfig: step must be positive");
    require(momentum >= 0.0 && momentum < 1.0, "TrainConfig: momentum must be in [0, 1)");
    require(hidden_layers >= 1 && hidden_width >= 1, "TrainConfig: net dims must be positive");
    require(freeze_fraction > 0.0 && freeze_fraction <= 1.0,
            "TrainConfig: freeze_fraction must be in (0, 1]");
  }
};

struct TrainLogRow {
  int iteration;
  double dual_estimate;  // batch estimate of E phi(X) - E phi^c(Y)
  double grad_norm;
  double seconds;
};

using TrainLog = std::vector<TrainLogRow>;

inline void write_train_log_csv(const std::string& path, const TrainLog& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_train_log_csv: cannot open " + path);
  out << "iteration,dual_estimate,grad_norm,seconds\n";
  for (const auto& row : log) {
    out << row.iteration << ',' << format_double(row.dual_estimate) << ','
        << format_double(row.grad_norm) << ',' << format_double(row.seconds) << "\n";
  }
}

/// Deterministic held-out estimate of the dual objective:
/// mean phi over source rows minus mean c-transform value over target rows.
inline double dual_objective_estimate(const PotentialNet& net, const Dataset& source,
                                      const Dataset& target, const EnCost& cost,
                                      const InnerConfig& inner = {}) {
  require(source.cols() == target.cols(), "dual_objective_estimate: dimension mismatch");
  require(source.rows() >= 1 && target.rows() >= 1, "dual_objective_estimate: empty dataset");
  const double mean_phi = net.forward_batch(source.transpose()).mean();
  double mean_ct = 0.0;
  for (Eigen::Index i = 0; i < target.rows(); ++i)
    mean_ct += c_transform(net, target.row(i).transpose(), cost, inner).value;
  mean_ct /= static_cast<double>(target.rows());
  return mean_phi - mean_ct;
}

/// Stochastic gradient ascent on the ENOT dual E phi(X) - E phi^c(Y).
///
/// Per batch: the c-transform maximizer delta*(y) is computed for each target
/// sample against the current parameter snapshot, and the parameter gradient
/// of the phi^c term is the envelope gradient, i.e. grad_theta phi evaluated
/// at the frozen points y + delta*(y). Updates use SGD with momentum; batches
/// are drawn with replacement from the training rows.
inline std::pair<PotentialNet, TrainLog> train_potential(const Dataset& source,
                                                         const Dataset& target,
                                                         const EnCost& cost,
                                                         const TrainConfig& cfg,
                                                         const PotentialNet* warm_start = nullptr) {
  cfg.validate();
  require(source.cols() == target.cols(), "train_potential: dimension mismatch");
  require(source.rows() >= 1 && target.rows() >= 1, "train_potential: empty dataset");
  require(source.allFinite() && target.allFinite(), "train_potential: non-finite data");
  const int d = static_cast<int>(source.cols());
  if (warm_start != nullptr) {
    require(warm_start->input_dim() == d, "train_potential: warm start dimension mismatch");
    require(warm_start->params_finite(), "train_potential: warm start has non-finite parameters");
  }

  PotentialNet net = warm_start != nullptr
                         ? *warm_start
                         : PotentialNet::init(d, cfg.hidden_layers, cfg.hidden_width,
                                              mix_seed(cfg.seed, 0x6e65740aULL));
  auto rng = make_rng(mix_seed(cfg.seed, 0x62617463ULL));
  std::uniform_int_distribution<Eigen::Index> pick_source(0, source.rows() - 1);
  std::uniform_int_distribution<Eigen::Index> pick_target(0, target.rows() - 1);

  ParamGradient velocity = net.zero_gradient();
  TrainLog log;
  log.reserve(static_cast<std::size_t>(cfg.outer_iterations));
  const int freeze_until =
      static_cast<int>(cfg.freeze_fraction * static_cast<double>(cfg.outer_iterations));

  Matrix xb(d, cfg.batch_size);
  Matrix yb(d, cfg.batch_size);
  for (int it = 0; it < cfg.outer_iterations; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int j = 0; j < cfg.batch_size; ++j) {
      xb.col(j) = source.row(pick_source(rng)).transpose();
      yb.col(j) = target.row(pick_target(rng)).transpose();
    }

    const auto ct = detail::c_transform_columns(net, yb, cost, cfg.inner);
    const double batch_dual = net.forward_batch(xb).mean() - ct.value.mean();
    if (!std::isfinite(batch_dual))
      throw numerical_error("train_potential: non-finite dual estimate at iteration " +
                            std::to_string(it));

    ParamGradient grad = net.grad_params_mean(xb);
    grad.add_scaled(net.grad_params_mean(yb + ct.delta), -1.0);

    velocity.scale(cfg.momentum);
    velocity.add_scaled(grad, 1.0);
    double lr = cfg.step;
    if (it >= freeze_until && cfg.outer_iterations > freeze_until) {
      lr = cfg.step * static_cast<double>(cfg.outer_iterations - it) /
           static_cast<double>(cfg.outer_iterations - freeze_until);
    }
    net.apply_update(velocity, lr);
    if (!net.params_finite())
      throw numerical_error("train_potential: non-finite parameter at iteration " +
                            std::to_string(it));

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log.push_back({it, batch_dual, std::sqrt(grad.squared_norm()), seconds});
  }
  return {std::move(net), std::move(log)};
}

}  // namespace enot
