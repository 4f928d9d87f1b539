#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "enot/dataset.hpp"
#include "enot/dual_trainer.hpp"
#include "enot/transport.hpp"

namespace enot {

/// Symmetric bimodal Gaussian mixture: weight on N(mu, sigma^2 I) and
/// 1 - weight on N(-mu, sigma^2 I).
struct GmmSpec {
  Vector mu;
  double sigma = 1.0;
  double weight = 0.5;

  void validate() const {
    require(mu.size() >= 1, "GmmSpec: empty mean");
    require(sigma > 0.0, "GmmSpec: sigma must be positive");
    require(weight >= 0.0 && weight <= 1.0, "GmmSpec: weight must be in [0, 1]");
  }
};

inline nlohmann::json gmm_spec_to_json(const GmmSpec& spec) {
  return {{"mu", std::vector<double>(spec.mu.data(), spec.mu.data() + spec.mu.size())},
          {"sigma", spec.sigma},
          {"weight", spec.weight}};
}

inline GmmSpec gmm_spec_from_json(const nlohmann::json& j) {
  const auto mu = j.at("mu").get<std::vector<double>>();
  GmmSpec spec;
  spec.mu = Eigen::Map<const Vector>(mu.data(), static_cast<Eigen::Index>(mu.size()));
  spec.sigma = j.at("sigma").get<double>();
  spec.weight = j.at("weight").get<double>();
  spec.validate();
  return spec;
}

/// The benchmark source/target pair: mu_s = [g, e, ..., e],
/// mu_t = [-g, e, ..., e] with g = 10, e = 2 / sqrt(d / 10), sigma = 1,
/// equal component weights. Chosen so that e * sqrt(d - 1) < g, which keeps
/// the sparse single-coordinate flip cheaper in L1 than the dense flip.
inline std::pair<GmmSpec, GmmSpec> paper_gmm_pair(int d) {
  require(d >= 2, "paper_gmm_pair: d must be >= 2");
  const double gamma = 10.0;
  const double eps = 2.0 / std::sqrt(static_cast<double>(d) / 10.0);
  Vector mu_s = Vector::Constant(d, eps);
  mu_s[0] = gamma;
  Vector mu_t = mu_s;
  mu_t[0] = -gamma;
  return {GmmSpec{mu_s, 1.0, 0.5}, GmmSpec{mu_t, 1.0, 0.5}};
}

inline Dataset sample_gmm(const GmmSpec& spec, Eigen::Index n, std::uint64_t seed) {
  spec.validate();
  require(n >= 1, "sample_gmm: n must be >= 1");
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::Index d = spec.mu.size();
  Dataset out(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sign = (unif(rng) < spec.weight) ? 1.0 : -1.0;
    for (Eigen::Index j = 0; j < d; ++j)
      out(i, j) = sign * spec.mu[j] + spec.sigma * gauss(rng);
  }
  return out;
}

/// Mean negative log-likelihood of rows under the mixture density,
/// log-sum-exp stabilized.
inline double gmm_nll(const GmmSpec& spec, const Dataset& samples) {
  spec.validate();
  require(samples.rows() >= 1, "gmm_nll: empty dataset");
  require(samples.cols() == spec.mu.size(), "gmm_nll: dimension mismatch");
  require(samples.allFinite(), "gmm_nll: non-finite samples");
  const double d = static_cast<double>(samples.cols());
  const double log_norm = -0.5 * d * std::log(2.0 * std::numbers::pi * spec.sigma * spec.sigma);
  const double inv_2s2 = 1.0 / (2.0 * spec.sigma * spec.sigma);
  const double log_w = spec.weight > 0.0 ? std::log(spec.weight)
                                         : -std::numeric_limits<double>::infinity();
  const double log_1mw = spec.weight < 1.0 ? std::log1p(-spec.weight)
                                           : -std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const auto row = samples.row(i).transpose();
    const double a = log_w + log_norm - (row - spec.mu).squaredNorm() * inv_2s2;
    const double b = log_1mw + log_norm - (row + spec.mu).squaredNorm() * inv_2s2;
    const double hi = std::max(a, b);
    const double log_p = hi + std::log(std::exp(a - hi) + std::exp(b - hi));
    total -= log_p;
  }
  return total / static_cast<double>(samples.rows());
}

struct PaddedPair {
  Dataset source;
  Dataset target;
  std::vector<int> noise_indices;
};

/// Benchmark pair with extra noise coordinates appended: signal coordinates
/// follow paper_gmm_pair(d_signal); the noise coordinates are i.i.d.
/// uniform[0, 1] in both domains, so the optimal transport is the identity
/// there. With d_noise = 0 this reduces to plain pair sampling.
inline PaddedPair padded_pair(int d_signal, int d_noise, Eigen::Index n, std::uint64_t seed) {
  require(d_signal >= 2, "padded_pair: d_signal must be >= 2");
  require(d_noise >= 0, "padded_pair: d_noise must be nonnegative");
  require(n >= 1, "padded_pair: n must be >= 1");
  auto [spec_s, spec_t] = paper_gmm_pair(d_signal);
  PaddedPair out;
  out.source = Dataset(n, d_signal + d_noise);
  out.target = Dataset(n, d_signal + d_noise);
  out.source.leftCols(d_signal) = sample_gmm(spec_s, n, mix_seed(seed, 1));
  out.target.leftCols(d_signal) = sample_gmm(spec_t, n, mix_seed(seed, 2));
  if (d_noise > 0) {
    auto rng = make_rng(mix_seed(seed, 3));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i)
      for (int j = 0; j < d_noise; ++j) out.source(i, d_signal + j) = unif(rng);
    for (Eigen::Index i = 0; i < n; ++i)
      for (int j = 0; j < d_noise; ++j) out.target(i, d_signal + j) = unif(rng);
  }
  for (int j = 0; j < d_noise; ++j) out.noise_indices.push_back(d_signal + j);
  return out;
}

// --- Table-style benchmark grid ----------------------------------------

struct BenchmarkGrid {
  std::vector<int> dims = {10, 100, 1000};
  std::vector<double> l1_coefficients = {0.0, 1e-3, 5e-3, 1e-2, 5e-2, 1e-1, 5e-1};
  std::vector<int> hidden_layer_counts = {22, 12, 4};
  double c2 = 1e-6;
  Eigen::Index n_samples = 2000;
  std::uint64_t seed = 0;

  void validate() const {
    require(!dims.empty() && !l1_coefficients.empty() && !hidden_layer_counts.empty(),
            "BenchmarkGrid: empty axis");
    require(c2 > 0.0, "BenchmarkGrid: c2 must be positive");
    require(n_samples >= 2, "BenchmarkGrid: need at least 2 samples");
  }
};

struct BenchmarkCell {
  int dim = 0;
  int depth = 0;
  double c1 = 0.0;
  double c2 = 0.0;
  std::uint64_t seed = 0;
  double train_nll = 0.0;
  double test_nll = 0.0;
  double mean_sparsity = 0.0;
  bool ok = false;
  std::string error;
};

namespace detail {
inline std::pair<Dataset, Dataset> shuffle_split(const Dataset& data, std::uint64_t seed) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.rows()));
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const Eigen::Index half = data.rows() / 2;
  Dataset train(half, data.cols());
  Dataset test(data.rows() - half, data.cols());
  for (Eigen::Index i = 0; i < half; ++i) train.row(i) = data.row(order[i]);
  for (Eigen::Index i = half; i < data.rows(); ++i) test.row(i - half) = data.row(order[i]);
  return {std::move(train), std::move(test)};
}
}  // namespace detail

/// Runs one grid cell: sample the pair, split, train the dual potential,
/// transport the test split, and score NLL under the target mixture.
inline BenchmarkCell run_benchmark_cell(int dim, int depth, double c1, double c2,
                                        Eigen::Index n_samples, std::uint64_t cell_seed,
                                        const TrainConfig& base_cfg) {
  BenchmarkCell cell;
  cell.dim = dim;
  cell.depth = depth;
  cell.c1 = c1;
  cell.c2 = c2;
  cell.seed = cell_seed;
  try {
    auto [spec_s, spec_t] = paper_gmm_pair(dim);
    const Dataset source = sample_gmm(spec_s, n_samples, mix_seed(cell_seed, 11));
    const Dataset target = sample_gmm(spec_t, n_samples, mix_seed(cell_seed, 12));
    auto [src_train, src_test] = detail::shuffle_split(source, mix_seed(cell_seed, 13));
    auto [tgt_train, tgt_test] = detail::shuffle_split(target, mix_seed(cell_seed, 14));

    const EnCost cost(c2, c1);
    TrainConfig cfg = base_cfg;
    cfg.hidden_layers = depth;
    cfg.seed = mix_seed(cell_seed, 15);
    auto [net, log] = train_potential(src_train, tgt_train, cost, cfg);

    const TransportReport train_report = transport_batch(net, src_train, cost);
    const TransportReport test_report = transport_batch(net, src_test, cost);
    cell.train_nll = gmm_nll(spec_t, train_report.transported);
    cell.test_nll = gmm_nll(spec_t, test_report.transported);
    cell.mean_sparsity =
        std::accumulate(test_report.sparsity.begin(), test_report.sparsity.end(), 0.0) /
        static_cast<double>(test_report.sparsity.size());
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.error = e.what();
  }
  return cell;
}

/// Full grid sweep. Per-cell failures are recorded, not propagated, so one
/// bad cell cannot abort the sweep. Cell seeds derive from the grid seed and
/// the cell coordinates.
inline std::vector<BenchmarkCell> run_benchmark(const BenchmarkGrid& grid,
                                                const TrainConfig& base_cfg = {}) {
  grid.validate();
  std::vector<BenchmarkCell> cells;
  for (std::size_t di = 0; di < grid.dims.size(); ++di) {
    for (std::size_t hi = 0; hi < grid.hidden_layer_counts.size(); ++hi) {
      for (std::size_t ci = 0; ci < grid.l1_coefficients.size(); ++ci) {
        const std::uint64_t cell_seed =
            mix_seed(grid.seed, (di << 16) ^ (hi << 8) ^ ci);
        cells.push_back(run_benchmark_cell(grid.dims[di], grid.hidden_layer_counts[hi],
                                           grid.l1_coefficients[ci], grid.c2, grid.n_samples,
                                           cell_seed, base_cfg));
      }
    }
  }
  return cells;
}

inline void write_benchmark_csv(const std::string& path, const std::vector<BenchmarkCell>& cells) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_benchmark_csv: cannot open " + path);
  out << "dim,depth,c1,c2,seed,train_nll,test_nll,mean_sparsity\n";
  for (const auto& c : cells) {
    out << c.dim << ',' << c.depth << ',' << format_double(c.c1) << ',' << format_double(c.c2)
        << ',' << c.seed << ',' << (c.ok ? format_double(c.train_nll) : "nan") << ','
        << (c.ok ? format_double(c.test_nll) : "nan") << ','
        << (c.ok ? format_double(c.mean_sparsity) : "nan") << "\n";
  }
}

inline nlohmann::json benchmark_manifest(const BenchmarkGrid& grid, const TrainConfig& cfg,
                                         const std::vector<BenchmarkCell>& cells) {
  nlohmann::json failures = nlohmann::json::array();
  int ok_count = 0;
  for (const auto& c : cells) {
    if (c.ok) {
      ++ok_count;
    } else {
      failures.push_back({{"dim", c.dim}, {"depth", c.depth}, {"c1", c.c1}, {"error", c.error}});
    }
  }
  return {{"grid",
           {{"dims", grid.dims},
            {"l1_coefficients", grid.l1_coefficients},
            {"hidden_layer_counts", grid.hidden_layer_counts},
            {"c2", grid.c2},
            {"n_samples", grid.n_samples},
            {"seed", grid.seed}}},
          {"train",
           {{"outer_iterations", cfg.outer_iterations},
            {"batch_size", cfg.batch_size},
            {"step", cfg.step},
            {"momentum", cfg.momentum},
            {"hidden_width", cfg.hidden_width},
            {"freeze_fraction", cfg.freeze_fraction},
            {"inner",
             {{"iterations", cfg.inner.iterations},
              {"step", cfg.inner.step},
              {"normalize_gradient", cfg.inner.normalize_gradient}}}}},
          {"cells_total", cells.size()},
          {"cells_ok", ok_count},
          {"failures", failures}};
}

}  // namespace enot
