#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include "enot/common.hpp"
#include "enot/elastic_cost.hpp"

namespace enot {

/// Uniform grid over a box in one or two dimensions.
struct GridSpec {
  int dim = 1;
  std::array<double, 2> lo{-1.0, -1.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::array<int, 2> nodes{256, 1};

  void validate() const {
    require(dim == 1 || dim == 2, "GridSpec: only d in {1, 2} is supported");
    for (int a = 0; a < dim; ++a) {
      require(nodes[static_cast<std::size_t>(a)] >= 16, "GridSpec: need >= 16 nodes per axis");
      require(hi[static_cast<std::size_t>(a)] > lo[static_cast<std::size_t>(a)],
              "GridSpec: empty axis range");
    }
  }
  double spacing(int axis) const {
    return (hi[static_cast<std::size_t>(axis)] - lo[static_cast<std::size_t>(axis)]) /
           (nodes[static_cast<std::size_t>(axis)] - 1);
  }
  Eigen::Index total_nodes() const {
    return dim == 1 ? nodes[0] : static_cast<Eigen::Index>(nodes[0]) * nodes[1];
  }
  Vector node(Eigen::Index idx) const {
    Vector x(dim);
    if (dim == 1) {
      x[0] = lo[0] + spacing(0) * static_cast<double>(idx);
    } else {
      x[0] = lo[0] + spacing(0) * static_cast<double>(idx / nodes[1]);
      x[1] = lo[1] + spacing(1) * static_cast<double>(idx % nodes[1]);
    }
    return x;
  }
};

inline nlohmann::json grid_spec_to_json(const GridSpec& g) {
  nlohmann::json j;
  j["dim"] = g.dim;
  j["lo"] = std::vector<double>(g.lo.begin(), g.lo.begin() + g.dim);
  j["hi"] = std::vector<double>(g.hi.begin(), g.hi.begin() + g.dim);
  j["nodes"] = std::vector<int>(g.nodes.begin(), g.nodes.begin() + g.dim);
  return j;
}

/// Function values at the nodes of a GridSpec (row-major for d = 2).
struct GridFunction {
  GridSpec grid;
  std::vector<double> values;

  void validate() const {
    grid.validate();
    require(values.size() == static_cast<std::size_t>(grid.total_nodes()),
            "GridFunction: value array does not match grid");
  }
};

/// Dense inf-type c-transform on the grid:
///   phi(x_i) = min_j { psi(y_j) + c2 ||y_j - x_i||^2 + c1 ||y_j - x_i||_1 }.
/// +infinity values in psi are treated as absent support points.
inline GridFunction grid_c_transform(const GridFunction& psi, const EnCost& cost) {
  psi.validate();
  const Eigen::Index n = psi.grid.total_nodes();
  GridFunction phi;
  phi.grid = psi.grid;
  phi.values.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

  std::vector<Vector> nodes(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) nodes[static_cast<std::size_t>(i)] = psi.grid.node(i);

  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    const Vector& x = nodes[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      const double pv = psi.values[static_cast<std::size_t>(j)];
      if (!(pv < std::numeric_limits<double>::infinity())) continue;
      const Vector& y = nodes[static_cast<std::size_t>(j)];
      double sq = 0.0, l1 = 0.0;
      for (int a = 0; a < psi.grid.dim; ++a) {
        const double diff = y[a] - x[a];
        sq += diff * diff;
        l1 += std::abs(diff);
      }
      const double v = pv + cost.c2() * sq + cost.c1() * l1;
      if (v < best) best = v;
    }
    require(std::isfinite(best), "grid_c_transform: psi has no finite support point");
    phi.values[static_cast<std::size_t>(i)] = best;
  }
  return phi;
}

struct ConcavityReport {
  int trials = 0;
  int violations = 0;
  double worst_slack = -std::numeric_limits<double>::infinity();
  GridSpec grid;
};

inline nlohmann::json concavity_report_to_json(const ConcavityReport& r) {
  return {{"trials", r.trials},
          {"violations", r.violations},
          {"worst_slack", r.worst_slack},
          {"grid_spec", grid_spec_to_json(r.grid)}};
}

/// Samples (x, y, gamma) triples with x, y grid nodes and checks
///   phi(gamma x + (1-gamma) y) >= gamma phi(x) + (1-gamma) phi(y)
///                                 - c2 gamma (1-gamma) ||x-y||^2 - c1 ||x-y||_1
/// with the convex combination snapped to the nearest node. The snapping
/// error is absorbed by a slack of (snap distance) x (grid Lipschitz
/// estimate); violations are counted beyond that slack. worst_slack reports
/// the most adverse margin RHS - LHS seen.
inline ConcavityReport weak_concavity_check(const GridFunction& phi, const EnCost& cost,
                                            int trials, std::uint64_t seed) {
  phi.validate();
  require(trials >= 1, "weak_concavity_check: trials must be >= 1");
  const GridSpec& g = phi.grid;

  // Grid Lipschitz estimate: largest per-axis finite difference.
  double lip = 0.0;
  if (g.dim == 1) {
    for (int i = 0; i + 1 < g.nodes[0]; ++i)
      lip = std::max(lip, std::abs(phi.values[static_cast<std::size_t>(i + 1)] -
                                   phi.values[static_cast<std::size_t>(i)]) /
                              g.spacing(0));
  } else {
    for (int ix = 0; ix < g.nodes[0]; ++ix) {
      for (int iy = 0; iy < g.nodes[1]; ++iy) {
        const std::size_t idx = static_cast<std::size_t>(ix) * g.nodes[1] + iy;
        if (ix + 1 < g.nodes[0]) {
          const std::size_t right = idx + static_cast<std::size_t>(g.nodes[1]);
          lip = std::max(lip, std::abs(phi.values[right] - phi.values[idx]) / g.spacing(0));
        }
        if (iy + 1 < g.nodes[1])
          lip = std::max(lip, std::abs(phi.values[idx + 1] - phi.values[idx]) / g.spacing(1));
      }
    }
  }

  auto rng = make_rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, g.total_nodes() - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  ConcavityReport report;
  report.trials = trials;
  report.grid = g;
  for (int t = 0; t < trials; ++t) {
    const Eigen::Index ix = pick(rng);
    const Eigen::Index iy = pick(rng);
    const double gamma = unif(rng);
    const Vector x = g.node(ix);
    const Vector y = g.node(iy);
    const Vector mid = gamma * x + (1.0 - gamma) * y;

    Eigen::Index snapped = 0;
    double snap_l1 = 0.0;
    if (g.dim == 1) {
      const long i0 = std::lround((mid[0] - g.lo[0]) / g.spacing(0));
      snapped = std::clamp<long>(i0, 0, g.nodes[0] - 1);
      snap_l1 = std::abs(mid[0] - g.node(snapped)[0]);
    } else {
      const long a0 = std::clamp<long>(std::lround((mid[0] - g.lo[0]) / g.spacing(0)), 0,
                                       g.nodes[0] - 1);
      const long a1 = std::clamp<long>(std::lround((mid[1] - g.lo[1]) / g.spacing(1)), 0,
                                       g.nodes[1] - 1);
      snapped = a0 * g.nodes[1] + a1;
      const Vector s = g.node(snapped);
      snap_l1 = std::abs(mid[0] - s[0]) + std::abs(mid[1] - s[1]);
    }

    const double lhs = phi.values[static_cast<std::size_t>(snapped)];
    double sq = 0.0, l1 = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      const double diff = x[a] - y[a];
      sq += diff * diff;
      l1 += std::abs(diff);
    }
    const double rhs = gamma * phi.values[static_cast<std::size_t>(ix)] +
                       (1.0 - gamma) * phi.values[static_cast<std::size_t>(iy)] -
                       cost.c2() * gamma * (1.0 - gamma) * sq - cost.c1() * l1;
    const double slack = lip * snap_l1 + 1e-9;
    const double margin = rhs - lhs;  // positive means the inequality is stressed
    if (margin > report.worst_slack) report.worst_slack = margin;
    if (margin > slack) ++report.violations;
  }
  return report;
}

}  // namespace enot
