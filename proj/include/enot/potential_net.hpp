#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "enot/common.hpp"

namespace enot {

struct Layer {
  Matrix w;
  Vector b;
};

/// Gradient of a scalar potential with respect to every parameter;
/// shape-congruent with the net that produced it.
struct ParamGradient {
  std::vector<Layer> layers;

  void scale(double a) {
    for (auto& l : layers) {
      l.w *= a;
      l.b *= a;
    }
  }
  void add_scaled(const ParamGradient& g, double a) {
    for (std::size_t k = 0; k < layers.size(); ++k) {
      layers[k].w += a * g.layers[k].w;
      layers[k].b += a * g.layers[k].b;
    }
  }
  double squared_norm() const {
    double s = 0.0;
    for (const auto& l : layers) s += l.w.squaredNorm() + l.b.squaredNorm();
    return s;
  }
  bool all_finite() const {
    for (const auto& l : layers)
      if (!l.w.allFinite() || !l.b.allFinite()) return false;
    return true;
  }
};

/// Scalar MLP potential: sigmoid hidden layers of a common width, identity
/// skip connections between consecutive hidden layers, affine output.
///
///   h1      = sigmoid(W0 x + b0)
///   h_{k+1} = sigmoid(Wk h_k + bk) + h_k      (skip_connections = true)
///   phi(x)  = w_out . h_L + b_out
///
/// hidden_layers = 0 yields a plain affine potential phi(x) = a.x + b, used
/// throughout the oracle tests where closed forms are available.
class PotentialNet {
 public:
  PotentialNet(int input_dim, int hidden_layers, int hidden_width, bool skip_connections,
               std::vector<Layer> layers)
      : input_dim_(input_dim),
        hidden_layers_(hidden_layers),
        hidden_width_(hidden_width),
        skip_(skip_connections),
        layers_(std::move(layers)) {
    require(input_dim_ >= 1, "PotentialNet: input_dim must be positive");
    require(hidden_layers_ >= 0, "PotentialNet: hidden_layers must be nonnegative");
    check_shapes();
  }

  /// Seeded uniform initialization in [-sqrt(1/fan_in), +sqrt(1/fan_in)].
  static PotentialNet init(int input_dim, int hidden_layers, int hidden_width,
                           std::uint64_t seed, bool skip_connections = true) {
    require(input_dim >= 1 && hidden_layers >= 1 && hidden_width >= 1,
            "init_net: dimensions must be positive");
    auto rng = make_rng(seed);
    std::vector<Layer> layers;
    for (int k = 0; k <= hidden_layers; ++k) {
      const int rows = (k == hidden_layers) ? 1 : hidden_width;
      const int cols = (k == 0) ? input_dim : hidden_width;
      const double bound = std::sqrt(1.0 / cols);
      std::uniform_real_distribution<double> u(-bound, bound);
      Layer l{Matrix(rows, cols), Vector(rows)};
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) l.w(r, c) = u(rng);
      for (int r = 0; r < rows; ++r) l.b[r] = u(rng);
      layers.push_back(std::move(l));
    }
    return PotentialNet(input_dim, hidden_layers, hidden_width, skip_connections,
                        std::move(layers));
  }

  /// Affine potential phi(x) = a.x + b (no hidden layers).
  static PotentialNet affine(const Vector& a, double b) {
    require(a.size() >= 1, "affine: coefficient vector must be nonempty");
    Layer out{a.transpose(), Vector::Constant(1, b)};
    return PotentialNet(static_cast<int>(a.size()), 0, 0, false, {std::move(out)});
  }

  int input_dim() const { return input_dim_; }
  int hidden_layers() const { return hidden_layers_; }
  int hidden_width() const { return hidden_width_; }
  bool skip_connections() const { return skip_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  bool params_finite() const {
    for (const auto& l : layers_)
      if (!l.w.allFinite() || !l.b.allFinite()) return false;
    return true;
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.w.size() + l.b.size());
    return n;
  }

  ParamGradient zero_gradient() const {
    ParamGradient g;
    for (const auto& l : layers_)
      g.layers.push_back({Matrix::Zero(l.w.rows(), l.w.cols()), Vector::Zero(l.b.size())});
    return g;
  }

  void apply_update(const ParamGradient& g, double scale) {
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      layers_[k].w += scale * g.layers[k].w;
      layers_[k].b += scale * g.layers[k].b;
    }
  }

  // --- evaluation -----------------------------------------------------

  /// phi on a batch of column vectors (d x B), returned as 1 x B.
  Eigen::RowVectorXd forward_batch(const Matrix& x) const {
    check_input(x);
    Matrix h = x;
    for (int k = 0; k < hidden_layers_; ++k) {
      Matrix s = sigmoid((layers_[k].w * h).colwise() + layers_[k].b);
      h = (skip_ && k > 0) ? Matrix(s + h) : std::move(s);
    }
    const Layer& out = layers_.back();
    return (out.w * h).row(0).array() + out.b[0];
  }

  Matrix grad_input_batch(const Matrix& x) const {
    return value_and_grad_input_batch(x).second;
  }

  /// phi and d phi / dx for a batch; one shared forward cache.
  std::pair<Eigen::RowVectorXd, Matrix> value_and_grad_input_batch(const Matrix& x) const {
    check_input(x);
    const Eigen::Index batch = x.cols();
    std::vector<Matrix> sig(hidden_layers_);  // sigmoid outputs per hidden layer
    Matrix h = x;
    for (int k = 0; k < hidden_layers_; ++k) {
      sig[k] = sigmoid((layers_[k].w * h).colwise() + layers_[k].b);
      h = (skip_ && k > 0) ? Matrix(sig[k] + h) : sig[k];
    }
    const Layer& out = layers_.back();
    Eigen::RowVectorXd value = (out.w * h).row(0).array() + out.b[0];

    Matrix g = out.w.transpose() * Matrix::Ones(1, batch);  // width x B
    for (int k = hidden_layers_ - 1; k >= 1; --k) {
      Matrix u = g.array() * sig[k].array() * (1.0 - sig[k].array());
      g = skip_ ? Matrix(layers_[k].w.transpose() * u + g) : Matrix(layers_[k].w.transpose() * u);
    }
    Matrix gx;
    if (hidden_layers_ == 0) {
      gx = out.w.transpose() * Matrix::Ones(1, batch);
    } else {
      Matrix u = g.array() * sig[0].array() * (1.0 - sig[0].array());
      gx = layers_[0].w.transpose() * u;
    }
    return {std::move(value), std::move(gx)};
  }

  /// Mean over batch columns of d phi / d theta.
  ParamGradient grad_params_mean(const Matrix& x) const {
    check_input(x);
    const Eigen::Index batch = x.cols();
    const double inv_b = 1.0 / static_cast<double>(batch);
    std::vector<Matrix> sig(hidden_layers_);
    std::vector<Matrix> input(hidden_layers_ + 1);  // input to each layer
    input[0] = x;
    for (int k = 0; k < hidden_layers_; ++k) {
      sig[k] = sigmoid((layers_[k].w * input[k]).colwise() + layers_[k].b);
      input[k + 1] = (skip_ && k > 0) ? Matrix(sig[k] + input[k]) : sig[k];
    }

    ParamGradient grad = zero_gradient();
    const Layer& out = layers_.back();
    grad.layers.back().w = input[hidden_layers_].rowwise().sum().transpose() * inv_b;
    grad.layers.back().b[0] = 1.0;

    Matrix g = out.w.transpose() * Matrix::Ones(1, batch);  // dphi/dh_L per column
    for (int k = hidden_layers_ - 1; k >= 0; --k) {
      Matrix u = g.array() * sig[k].array() * (1.0 - sig[k].array());
      grad.layers[k].w = u * input[k].transpose() * inv_b;
      grad.layers[k].b = u.rowwise().sum() * inv_b;
      if (k > 0) g = (skip_ && k > 0) ? Matrix(layers_[k].w.transpose() * u + g)
                                      : Matrix(layers_[k].w.transpose() * u);
    }
    return grad;
  }

 private:
  static Matrix sigmoid(const Matrix& z) {
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
  }

  void check_input(const Matrix& x) const {
    require(x.rows() == input_dim_, "PotentialNet: input dimension mismatch");
    require(x.allFinite(), "PotentialNet: non-finite input");
  }

  void check_shapes() const {
    require(layers_.size() == static_cast<std::size_t>(hidden_layers_) + 1,
            "PotentialNet: wrong layer count");
    for (int k = 0; k <= hidden_layers_; ++k) {
      const int rows = (k == hidden_layers_) ? 1 : hidden_width_;
      const int cols = (k == 0) ? input_dim_ : hidden_width_;
      require(layers_[k].w.rows() == rows && layers_[k].w.cols() == cols &&
                  layers_[k].b.size() == rows,
              "PotentialNet: layer shape mismatch");
    }
  }

  int input_dim_;
  int hidden_layers_;
  int hidden_width_;
  bool skip_;
  std::vector<Layer> layers_;
};

inline double forward(const PotentialNet& net, const Vector& x) {
  return net.forward_batch(x)[0];
}

inline Vector grad_input(const PotentialNet& net, const Vector& x) {
  return net.grad_input_batch(x).col(0);
}

inline ParamGradient grad_params(const PotentialNet& net, const Vector& x) {
  return net.grad_params_mean(x);
}

inline PotentialNet init_net(int input_dim, int hidden_layers, int hidden_width,
                             std::uint64_t seed) {
  return PotentialNet::init(input_dim, hidden_layers, hidden_width, seed);
}

// --- serialization ----------------------------------------------------

inline nlohmann::json net_to_json(const PotentialNet& net) {
  nlohmann::json j;
  j["input_dim"] = net.input_dim();
  j["hidden_layers"] = net.hidden_layers();
  j["hidden_width"] = net.hidden_width();
  j["skip_connections"] = net.skip_connections();
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.w.size()));
    for (Eigen::Index r = 0; r < l.w.rows(); ++r)
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) w.push_back(l.w(r, c));
    std::vector<double> b(l.b.data(), l.b.data() + l.b.size());
    layers.push_back({{"w", w}, {"b", b}});
  }
  j["layers"] = layers;
  return j;
}

inline PotentialNet net_from_json(const nlohmann::json& j) {
  const int input_dim = j.at("input_dim").get<int>();
  const int hidden_layers = j.at("hidden_layers").get<int>();
  const int hidden_width = j.at("hidden_width").get<int>();
  const bool skip = j.at("skip_connections").get<bool>();
  const auto& jl = j.at("layers");
  require(jl.is_array() && jl.size() == static_cast<std::size_t>(hidden_layers) + 1,
          "net_from_json: wrong layer count");
  std::vector<Layer> layers;
  for (int k = 0; k <= hidden_layers; ++k) {
    const int rows = (k == hidden_layers) ? 1 : hidden_width;
    const int cols = (k == 0) ? input_dim : hidden_width;
    const auto w = jl[k].at("w").get<std::vector<double>>();
    const auto b = jl[k].at("b").get<std::vector<double>>();
    require(w.size() == static_cast<std::size_t>(rows) * cols &&
                b.size() == static_cast<std::size_t>(rows),
            "net_from_json: layer shape mismatch");
    Layer l{Matrix(rows, cols), Vector(rows)};
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) l.w(r, c) = w[static_cast<std::size_t>(r) * cols + c];
    for (int r = 0; r < rows; ++r) l.b[r] = b[static_cast<std::size_t>(r)];
    layers.push_back(std::move(l));
  }
  return PotentialNet(input_dim, hidden_layers, hidden_width, skip, std::move(layers));
}

}  // namespace enot
