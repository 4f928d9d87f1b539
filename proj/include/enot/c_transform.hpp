#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "enot/elastic_cost.hpp"
#include "enot/potential_net.hpp"

namespace enot {

/// Settings for the proximal ascent that evaluates the c-transform.
struct InnerConfig {
  int iterations = 100;
  double step = 1.0;
  bool normalize_gradient = true;
  bool keep_trace = false;
};

/// Result of one c-transform evaluation: the attained objective value and the
/// maximizing displacement found (best iterate, delta = 0 included).
struct CtResult {
  double value = 0.0;
  Vector delta;
  std::vector<double> trace;
};

namespace detail {

/// Proximal ascent on phi(y + delta) - c2 ||delta||^2 - c1 ||delta||_1 for a
/// whole batch of columns at once. Each column starts at delta = 0 and keeps
/// its best iterate by objective value. The smooth ascent direction is
/// grad phi - 2 c2 delta, optionally L2-normalized per column; the L1 term is
/// handled by soft-thresholding with threshold step * c1.
struct BatchCt {
  Eigen::RowVectorXd value;  // 1 x B, per-column best objective
  Matrix delta;              // d x B, per-column best displacement
  Matrix trace;              // iterations+1 x B when requested, else empty
};

inline BatchCt c_transform_columns(const PotentialNet& net, const Matrix& ys,
                                   const EnCost& cost, const InnerConfig& cfg) {
  require(cfg.iterations >= 1, "c_transform: iterations must be >= 1");
  require(cfg.step > 0.0, "c_transform: step must be positive");
  require(ys.rows() == net.input_dim(), "c_transform: dimension mismatch");
  const Eigen::Index d = ys.rows();
  const Eigen::Index batch = ys.cols();
  const double c1 = cost.c1();
  const double c2 = cost.c2();
  const double thresh = cfg.step * c1;

  BatchCt best;
  best.delta = Matrix::Zero(d, batch);
  best.value = Eigen::RowVectorXd::Constant(batch, -std::numeric_limits<double>::infinity());
  if (cfg.keep_trace) best.trace.resize(cfg.iterations + 1, batch);

  // One gradient evaluation per iteration: the objective at the iterate
  // visited by step t is read off at the top of step t+1.
  Matrix delta = Matrix::Zero(d, batch);
  for (int it = 0; it <= cfg.iterations; ++it) {
    auto [phi, grad] = net.value_and_grad_input_batch(ys + delta);
    if (!phi.allFinite() || !grad.allFinite())
      throw numerical_error("c_transform: potential produced non-finite values");
    for (Eigen::Index j = 0; j < batch; ++j) {
      const double obj =
          phi[j] - c2 * delta.col(j).squaredNorm() - c1 * delta.col(j).lpNorm<1>();
      if (obj > best.value[j]) {
        best.value[j] = obj;
        best.delta.col(j) = delta.col(j);
      }
      if (cfg.keep_trace) best.trace(it, j) = obj;
    }
    if (it == cfg.iterations) break;

    Matrix dir = grad - 2.0 * c2 * delta;
    if (cfg.normalize_gradient) {
      for (Eigen::Index j = 0; j < batch; ++j) {
        const double n = dir.col(j).norm();
        if (n > 0.0) dir.col(j) /= n;
      }
    }
    delta += cfg.step * dir;
    for (Eigen::Index j = 0; j < batch; ++j)
      for (Eigen::Index i = 0; i < d; ++i) delta(i, j) = soft_threshold(delta(i, j), thresh);
  }
  return best;
}

}  // namespace detail

/// Evaluates the elastic-net c-transform
///   phi^c(y) = max_delta phi(y + delta) - c2 ||delta||^2 - c1 ||delta||_1
/// by proximal ascent from delta = 0, returning the best iterate. The result
/// value always dominates phi(y).
inline CtResult c_transform(const PotentialNet& net, const Vector& y, const EnCost& cost,
                            const InnerConfig& cfg = {}) {
  auto batch = detail::c_transform_columns(net, y, cost, cfg);
  CtResult r;
  r.value = batch.value[0];
  r.delta = batch.delta.col(0);
  if (cfg.keep_trace) {
    r.trace.assign(batch.trace.col(0).data(),
                   batch.trace.col(0).data() + batch.trace.rows());
  }
  return r;
}

/// Row-wise c-transform over a dataset; results are ordered as the input rows.
inline std::vector<CtResult> c_transform_batch(const PotentialNet& net, const Dataset& ys,
                                               const EnCost& cost, const InnerConfig& cfg = {}) {
  std::vector<CtResult> out;
  out.reserve(static_cast<std::size_t>(ys.rows()));
  for (Eigen::Index i = 0; i < ys.rows(); ++i)
    out.push_back(c_transform(net, ys.row(i).transpose(), cost, cfg));
  return out;
}

}  // namespace enot
