#pragma once

#include <cmath>

#include "enot/common.hpp"

namespace enot {

/// Elastic-net ground cost c(x, y) = c2 * ||x-y||_2^2 + c1 * ||x-y||_1.
///
/// Stored in the (c2, c1) parametrization; the (lambda, alpha) view with
/// c2 = lambda*(1-alpha), c1 = lambda*alpha is derived. alpha = 1 (c2 = 0)
/// is rejected: the transport map divides by 2*c2.
class EnCost {
 public:
  EnCost(double quadratic, double l1) : c2_(quadratic), c1_(l1) {
    require(std::isfinite(quadratic) && std::isfinite(l1), "EnCost: coefficients must be finite");
    require(quadratic > 0.0, "EnCost: quadratic coefficient c2 must be positive");
    require(l1 >= 0.0, "EnCost: L1 coefficient c1 must be nonnegative");
  }

  static EnCost from_lambda_alpha(double lambda, double alpha) {
    require(lambda > 0.0, "EnCost: lambda must be positive");
    require(alpha >= 0.0 && alpha < 1.0, "EnCost: alpha must lie in [0, 1)");
    return EnCost(lambda * (1.0 - alpha), lambda * alpha);
  }

  double c2() const { return c2_; }
  double c1() const { return c1_; }
  double lambda() const { return c1_ + c2_; }
  double alpha() const { return c1_ / (c1_ + c2_); }

 private:
  double c2_;
  double c1_;
};

inline double en_cost(const Vector& x, const Vector& y, const EnCost& cost) {
  require(x.size() == y.size(), "en_cost: dimension mismatch");
  const Vector d = x - y;
  return cost.c2() * d.squaredNorm() + cost.c1() * d.lpNorm<1>();
}

/// Scalar soft-thresholding: shrinks toward zero, exactly zero on |z| <= gamma.
inline double soft_threshold(double z, double gamma) {
  if (z >= gamma) return z - gamma;
  if (z <= -gamma) return z + gamma;
  return 0.0;
}

inline Vector soft_threshold(const Vector& z, double gamma) {
  require(gamma >= 0.0, "soft_threshold: gamma must be nonnegative");
  Vector out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = soft_threshold(z[i], gamma);
  return out;
}

/// Proximal update for the inner maximization: an ascent step on the smooth
/// part followed by the prox of step*c1*||.||_1. The quadratic term is part
/// of ascent_dir, supplied by the caller.
inline Vector prox_step(const Vector& delta, const Vector& ascent_dir, double step,
                        const EnCost& cost) {
  require(delta.size() == ascent_dir.size(), "prox_step: dimension mismatch");
  require(step > 0.0, "prox_step: step must be positive");
  return soft_threshold(Vector(delta + step * ascent_dir), step * cost.c1());
}

}  // namespace enot
