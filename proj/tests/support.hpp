#pragma once

// Shared test helpers. The oracles here (finite differences, the straight-line
// forward re-implementation, dense grid searches) deliberately avoid the
// library's own evaluation paths.

#include <cmath>
#include <random>
#include <vector>

#include "enot/potential_net.hpp"

namespace test_support {

using enot::Matrix;
using enot::PotentialNet;
using enot::Vector;

inline double rel_err(double a, double b, double floor = 1e-8) {
  const double denom = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / denom;
}

/// Straight-line re-evaluation of the layer recurrence with plain loops.
inline double naive_forward(const PotentialNet& net, const Vector& x) {
  std::vector<double> h(x.data(), x.data() + x.size());
  for (int k = 0; k < net.hidden_layers(); ++k) {
    const auto& l = net.layers()[static_cast<std::size_t>(k)];
    std::vector<double> next(static_cast<std::size_t>(l.w.rows()));
    for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
      double z = l.b[r];
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) z += l.w(r, c) * h[static_cast<std::size_t>(c)];
      double s = 1.0 / (1.0 + std::exp(-z));
      if (net.skip_connections() && k > 0) s += h[static_cast<std::size_t>(r)];
      next[static_cast<std::size_t>(r)] = s;
    }
    h = next;
  }
  const auto& out = net.layers().back();
  double v = out.b[0];
  for (Eigen::Index c = 0; c < out.w.cols(); ++c) v += out.w(0, c) * h[static_cast<std::size_t>(c)];
  return v;
}

/// Central finite difference of forward() w.r.t. the input.
inline Vector fd_grad_input(const PotentialNet& net, const Vector& x, double h = 1e-5) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (enot::forward(net, xp) - enot::forward(net, xm)) / (2.0 * h);
  }
  return g;
}

/// Central finite difference of forward() w.r.t. every parameter.
inline enot::ParamGradient fd_grad_params(PotentialNet net, const Vector& x, double h = 1e-5) {
  enot::ParamGradient g = net.zero_gradient();
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    auto& layer = net.layers()[k];
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c) {
        const double orig = layer.w(r, c);
        layer.w(r, c) = orig + h;
        const double fp = enot::forward(net, x);
        layer.w(r, c) = orig - h;
        const double fm = enot::forward(net, x);
        layer.w(r, c) = orig;
        g.layers[k].w(r, c) = (fp - fm) / (2.0 * h);
      }
    }
    for (Eigen::Index r = 0; r < layer.b.size(); ++r) {
      const double orig = layer.b[r];
      layer.b[r] = orig + h;
      const double fp = enot::forward(net, x);
      layer.b[r] = orig - h;
      const double fm = enot::forward(net, x);
      layer.b[r] = orig;
      g.layers[k].b[r] = (fp - fm) / (2.0 * h);
    }
  }
  return g;
}

inline Vector random_vector(Eigen::Index d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = gauss(rng);
  return v;
}

inline PotentialNet random_net(int d, int depth, int width, std::uint64_t seed) {
  return PotentialNet::init(d, depth, width, seed);
}

}  // namespace test_support
