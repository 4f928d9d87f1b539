#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "enot/c_transform.hpp"
#include "enot/elastic_cost.hpp"
#include "enot/potential_net.hpp"

namespace enot {

/// Transported samples with per-sample modification masks and sparsity stats.
struct TransportReport {
  Dataset transported;                // n x d
  Eigen::MatrixXi masks;              // n x d, 1 where a coordinate moved
  std::vector<int> sparsity;          // per-row count of modified coordinates
  std::vector<double> displacement_l1;  // per-row ||x - T(x)||_1
};

namespace detail {

/// Shared kernel: given the potential gradient at x, apply the sparse map.
/// A coordinate moves iff |grad_i| > c1; it then shifts by
/// (grad_i - sign(grad_i) * c1) / (2 c2), i.e. ST_{c1/(2c2)}(grad_i / (2 c2)).
/// Untouched coordinates are returned literally (no arithmetic), so
/// "unchanged" is exact floating-point equality.
inline void sparse_map_inplace(const Vector& grad, const EnCost& cost, Vector& x_row,
                               Eigen::Ref<Eigen::VectorXi> mask_row) {
  const double c1 = cost.c1();
  const double inv = 1.0 / (2.0 * cost.c2());
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    const double g = grad[i];
    if (g > c1) {
      x_row[i] -= (g - c1) * inv;
      mask_row[i] = 1;
    } else if (g < -c1) {
      x_row[i] -= (g + c1) * inv;
      mask_row[i] = 1;
    } else {
      mask_row[i] = 0;
    }
  }
}

}  // namespace detail

/// Sparse forward transport map T(x) = x - ST_{c1/(2c2)}(grad phi(x) / (2 c2)).
inline Vector transport_map(const PotentialNet& net, const Vector& x, const EnCost& cost) {
  Vector g = grad_input(net, x);
  if (!g.allFinite()) throw numerical_error("transport_map: non-finite gradient");
  Vector out = x;
  Eigen::VectorXi mask(x.size());
  detail::sparse_map_inplace(g, cost, out, mask);
  return out;
}

/// Feature-selection mask: 1 iff |grad phi(x)_i| > c1 (boundary counts as 0).
/// Exactly the coordinates transport_map modifies.
inline Eigen::VectorXi feature_mask(const PotentialNet& net, const Vector& x,
                                    const EnCost& cost) {
  Vector g = grad_input(net, x);
  if (!g.allFinite()) throw numerical_error("feature_mask: non-finite gradient");
  Eigen::VectorXi mask(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    mask[i] = (g[i] > cost.c1() || g[i] < -cost.c1()) ? 1 : 0;
  return mask;
}

inline TransportReport transport_batch(const PotentialNet& net, const Dataset& xs,
                                       const EnCost& cost) {
  TransportReport report;
  const Eigen::Index n = xs.rows();
  const Eigen::Index d = xs.cols();
  report.transported = xs;
  report.masks.resize(n, d);
  report.sparsity.resize(static_cast<std::size_t>(n));
  report.displacement_l1.resize(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    Vector x = xs.row(r).transpose();
    Vector g = grad_input(net, x);
    if (!g.allFinite()) throw numerical_error("transport_batch: non-finite gradient");
    Eigen::VectorXi mask(d);
    detail::sparse_map_inplace(g, cost, x, mask);
    report.transported.row(r) = x.transpose();
    report.masks.row(r) = mask.transpose();
    report.sparsity[static_cast<std::size_t>(r)] = mask.sum();
    report.displacement_l1[static_cast<std::size_t>(r)] =
        (xs.row(r) - report.transported.row(r)).lpNorm<1>();
  }
  return report;
}

/// Backward diagnostic map on target samples: y + delta*(y) from the
/// c-transform's maximizing displacement.
inline Vector transport_via_ctransform(const PotentialNet& net, const Vector& y,
                                       const EnCost& cost, const InnerConfig& cfg = {}) {
  return y + c_transform(net, y, cost, cfg).delta;
}

struct SaliencyRow {
  int feature;
  double frequency;       // fraction of rows where the feature is selected
  double mean_grad_mag;   // mean |grad phi(x)_i| over rows
};

/// Per-feature selection statistics, most frequently selected first
/// (ties broken by mean gradient magnitude, then feature index).
inline std::vector<SaliencyRow> saliency_report(const PotentialNet& net, const Dataset& xs,
                                                const EnCost& cost) {
  require(xs.rows() >= 1, "saliency_report: empty dataset");
  const Eigen::Index n = xs.rows();
  const Eigen::Index d = xs.cols();
  Vector freq = Vector::Zero(d);
  Vector mag = Vector::Zero(d);
  for (Eigen::Index r = 0; r < n; ++r) {
    Vector g = grad_input(net, xs.row(r).transpose());
    for (Eigen::Index i = 0; i < d; ++i) {
      const double a = std::abs(g[i]);
      if (a > cost.c1()) freq[i] += 1.0;
      mag[i] += a;
    }
  }
  freq /= static_cast<double>(n);
  mag /= static_cast<double>(n);
  std::vector<SaliencyRow> rows;
  for (Eigen::Index i = 0; i < d; ++i)
    rows.push_back({static_cast<int>(i), freq[i], mag[i]});
  std::sort(rows.begin(), rows.end(), [](const SaliencyRow& a, const SaliencyRow& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    if (a.mean_grad_mag != b.mean_grad_mag) return a.mean_grad_mag > b.mean_grad_mag;
    return a.feature < b.feature;
  });
  return rows;
}

/// Fraction of (row, noise-coordinate) pairs the transport left untouched.
inline double denoising_ratio(const TransportReport& report, const std::set<int>& noise_coords) {
  require(!noise_coords.empty(), "denoising_ratio: empty noise coordinate set");
  require(report.masks.rows() >= 1, "denoising_ratio: empty report");
  const int d = static_cast<int>(report.masks.cols());
  for (int j : noise_coords)
    require(j >= 0 && j < d, "denoising_ratio: noise coordinate out of range");
  long untouched = 0;
  for (Eigen::Index r = 0; r < report.masks.rows(); ++r)
    for (int j : noise_coords)
      if (report.masks(r, j) == 0) ++untouched;
  return static_cast<double>(untouched) /
         (static_cast<double>(report.masks.rows()) * static_cast<double>(noise_coords.size()));
}

}  // namespace enot
