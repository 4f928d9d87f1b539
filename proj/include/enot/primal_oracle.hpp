#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <nlohmann/json.hpp>

#include "enot/dual_trainer.hpp"
#include "enot/elastic_cost.hpp"
#include "enot/gmm.hpp"
#include "enot/transport.hpp"

namespace enot {

/// Optimal assignment between equal-size uniform-weight empirical measures.
struct Coupling {
  std::vector<int> assignment;  // source index -> target index, a bijection
  double cost = 0.0;            // mean en_cost over matched pairs
};

struct OracleOptions {
  int cap = 10;
  bool use_matching = false;  // enable the augmenting-path exact solver
};

namespace detail {

inline Matrix pairwise_cost(const Dataset& xs, const Dataset& ys, const EnCost& cost) {
  Matrix c(xs.rows(), ys.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i)
    for (Eigen::Index j = 0; j < ys.rows(); ++j)
      c(i, j) = en_cost(xs.row(i).transpose(), ys.row(j).transpose(), cost);
  return c;
}

inline std::vector<int> brute_force_assignment(const Matrix& c) {
  const int n = static_cast<int>(c.rows());
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += c(i, perm[static_cast<std::size_t>(i)]);
    if (total < best_cost) {
      best_cost = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// O(n^3) augmenting-path assignment with dual potentials.
inline std::vector<int> matching_assignment(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = p[static_cast<std::size_t>(j0)];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = a(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> result(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[static_cast<std::size_t>(j)] > 0)
      result[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return result;
}

}  // namespace detail

/// Exact primal OT between two equal-size empirical sets. Brute force over
/// all permutations for n <= 8; larger n requires the augmenting-path solver
/// to be enabled.
inline Coupling primal_ot_discrete(const Dataset& xs, const Dataset& ys, const EnCost& cost,
                                   const OracleOptions& opts = {}) {
  require(xs.rows() == ys.rows(), "primal_ot_discrete: sample count mismatch");
  require(xs.cols() == ys.cols(), "primal_ot_discrete: dimension mismatch");
  require(xs.rows() >= 1, "primal_ot_discrete: empty sets");
  const Eigen::Index n = xs.rows();
  if (!opts.use_matching) {
    require(n <= opts.cap, "primal_ot_discrete: n exceeds oracle cap");
    require(n <= 8,
            "primal_ot_discrete: n > 8 requires the exact matching solver (use_matching)");
  }
  const Matrix c = detail::pairwise_cost(xs, ys, cost);
  Coupling result;
  result.assignment = opts.use_matching ? detail::matching_assignment(c)
                                        : detail::brute_force_assignment(c);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) total += c(i, result.assignment[static_cast<std::size_t>(i)]);
  result.cost = total / static_cast<double>(n);
  return result;
}

// --- grid-verified c-transform (d <= 2) ---------------------------------

namespace detail {

/// Upper bound on the net's input-gradient norm: product of per-layer
/// Frobenius bounds with sigmoid slope 1/4 and identity skips.
inline double lipschitz_bound(const PotentialNet& net) {
  const auto& layers = net.layers();
  double bound = layers.back().w.norm();  // output layer, 1 x width
  for (int k = net.hidden_layers() - 1; k >= 1; --k)
    bound *= (net.skip_connections() ? 1.0 : 0.0) + 0.25 * layers[static_cast<std::size_t>(k)].w.norm();
  if (net.hidden_layers() >= 1) bound *= 0.25 * layers[0].w.norm();
  return bound;
}

inline Matrix ct_grid_points(Eigen::Index d, const Vector& center, double radius, int m) {
  const Eigen::Index total = (d == 1) ? m : static_cast<Eigen::Index>(m) * m;
  Matrix deltas(d, total);
  for (Eigen::Index idx = 0; idx < total; ++idx) {
    if (d == 1) {
      deltas(0, idx) = center[0] - radius + 2.0 * radius * idx / (m - 1);
    } else {
      const Eigen::Index ix = idx / m;
      const Eigen::Index iy = idx % m;
      deltas(0, idx) = center[0] - radius + 2.0 * radius * ix / (m - 1);
      deltas(1, idx) = center[1] - radius + 2.0 * radius * iy / (m - 1);
    }
  }
  return deltas;
}

inline Eigen::RowVectorXd ct_objective_at(const PotentialNet& net, const Vector& y,
                                          const EnCost& cost, const Matrix& deltas) {
  Eigen::RowVectorXd obj = net.forward_batch(deltas.colwise() + y);
  for (Eigen::Index idx = 0; idx < deltas.cols(); ++idx)
    obj[idx] -= cost.c2() * deltas.col(idx).squaredNorm() +
                cost.c1() * deltas.col(idx).lpNorm<1>();
  return obj;
}

/// Near-exact c-transform value in d <= 2: the iterative solver's result is
/// refined by a dense grid over the ball that must contain the maximizer,
/// then by local zooming around several separated coarse candidates, so the
/// supremum is not underestimated beyond ~1e-9. Keeps weak-duality checks
/// sound against inner-solver suboptimality.
inline double grid_verified_ct_value(const PotentialNet& net, const Vector& y,
                                     const EnCost& cost, const InnerConfig& inner) {
  double best = c_transform(net, y, cost, inner).value;
  if (y.size() > 2) return best;
  const Eigen::Index d = y.size();
  const double radius = std::max(1.0, lipschitz_bound(net) / cost.c2()) * 1.05;
  const int coarse_m = 129;
  const double spacing = 2.0 * radius / (coarse_m - 1);

  const Matrix coarse = ct_grid_points(d, Vector::Zero(d), radius, coarse_m);
  const Eigen::RowVectorXd coarse_obj = ct_objective_at(net, y, cost, coarse);
  if (coarse_obj.maxCoeff() > best) best = coarse_obj.maxCoeff();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(coarse.cols()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return coarse_obj[a] > coarse_obj[b]; });
  std::vector<Vector> seeds;
  for (Eigen::Index idx : order) {
    if (seeds.size() >= 5) break;
    bool near = false;
    for (const auto& s : seeds)
      if ((coarse.col(idx) - s).lpNorm<Eigen::Infinity>() < 4.0 * spacing) near = true;
    if (!near) seeds.push_back(coarse.col(idx));
  }

  for (const auto& seed : seeds) {
    Vector center = seed;
    double r = 2.0 * spacing;
    for (int level = 0; level < 24 && r > 1e-12; ++level) {
      const Matrix pts = ct_grid_points(d, center, r, 17);
      const Eigen::RowVectorXd obj = ct_objective_at(net, y, cost, pts);
      Eigen::Index arg = 0;
      const double v = obj.maxCoeff(&arg);
      if (v > best) best = v;
      center = pts.col(arg);
      r /= 4.0;
    }
  }
  return best;
}

}  // namespace detail

struct DualityReport {
  double dual = 0.0;
  double primal = 0.0;
  bool holds = false;
};

inline nlohmann::json duality_report_to_json(const DualityReport& r) {
  return {{"dual", r.dual}, {"primal", r.primal}, {"gap", r.primal - r.dual}, {"holds", r.holds}};
}

/// Weak duality on an empirical pair: the dual estimate must not exceed the
/// exact assignment cost. In d <= 2 the c-transform values are grid-verified,
/// so inner-solver suboptimality cannot inflate the dual side.
inline DualityReport weak_duality_check(const PotentialNet& net, const Dataset& xs,
                                        const Dataset& ys, const EnCost& cost,
                                        const InnerConfig& inner = {},
                                        const OracleOptions& opts = {}) {
  DualityReport report;
  report.primal = primal_ot_discrete(xs, ys, cost, opts).cost;
  const double mean_phi = net.forward_batch(xs.transpose()).mean();
  double mean_ct = 0.0;
  for (Eigen::Index i = 0; i < ys.rows(); ++i)
    mean_ct += detail::grid_verified_ct_value(net, ys.row(i).transpose(), cost, inner);
  mean_ct /= static_cast<double>(ys.rows());
  report.dual = mean_phi - mean_ct;
  report.holds = report.dual <= report.primal + 1e-6;
  return report;
}

struct TranslationReport {
  double analytic_cost = 0.0;
  double dual_estimate = 0.0;
  double rel_gap = 0.0;
  double mean_map_error = 0.0;
  bool holds = false;
};

inline nlohmann::json translation_report_to_json(const TranslationReport& r) {
  return {{"analytic_cost", r.analytic_cost},
          {"dual_estimate", r.dual_estimate},
          {"rel_gap", r.rel_gap},
          {"mean_map_error", r.mean_map_error},
          {"holds", r.holds}};
}

/// Checks a trained potential against the analytic optimum for translated
/// Gaussians: between N(mu, I) and N(mu + delta_mu, I) the shift map is
/// optimal and the OT cost is c2 ||delta_mu||^2 + c1 ||delta_mu||_1.
inline TranslationReport translation_oracle_check(const PotentialNet& net, const EnCost& cost,
                                                  const Vector& mu_source, const Vector& delta_mu,
                                                  Eigen::Index n_test, std::uint64_t seed,
                                                  const InnerConfig& inner = {},
                                                  double tolerance = 0.10) {
  require(mu_source.size() == delta_mu.size(), "translation_oracle_check: dimension mismatch");
  TranslationReport report;
  report.analytic_cost =
      cost.c2() * delta_mu.squaredNorm() + cost.c1() * delta_mu.lpNorm<1>();

  const GmmSpec src{mu_source, 1.0, 1.0};
  const GmmSpec tgt{Vector(mu_source + delta_mu), 1.0, 1.0};
  const Dataset xs = sample_gmm(src, n_test, mix_seed(seed, 21));
  const Dataset ys = sample_gmm(tgt, n_test, mix_seed(seed, 22));
  report.dual_estimate = dual_objective_estimate(net, xs, ys, cost, inner);
  report.rel_gap = report.analytic_cost > 0.0
                       ? std::abs(report.dual_estimate - report.analytic_cost) / report.analytic_cost
                       : std::abs(report.dual_estimate);

  double err = 0.0;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const Vector x = xs.row(i).transpose();
    err += (transport_map(net, x, cost) - (x + delta_mu)).norm();
  }
  report.mean_map_error = err / static_cast<double>(xs.rows());
  report.holds = report.rel_gap <= tolerance;
  return report;
}

}  // namespace enot
