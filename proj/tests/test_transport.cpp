#include <catch_amalgamated.hpp>

#include <random>

#include "enot/transport.hpp"
#include "support.hpp"

using namespace enot;

TEST_CASE("transport_map: affine potential (spec values)") {
  Vector a(2);
  a << 3.0, 0.05;
  PotentialNet net = PotentialNet::affine(a, 0.0);
  const EnCost cost(1.0, 0.1);
  Vector t = transport_map(net, Vector::Zero(2), cost);
  CHECK_THAT(t[0], Catch::Matchers::WithinAbs(-1.45, 1e-12));
  CHECK(t[1] == 0.0);
}

TEST_CASE("transport_map: c1 = 0 is the unthresholded gradient map") {
  std::mt19937_64 rng(3);
  PotentialNet net = PotentialNet::init(4, 2, 8, 12);
  const EnCost cost(0.7, 0.0);
  for (int t = 0; t < 10; ++t) {
    Vector x = test_support::random_vector(4, rng);
    Vector mapped = transport_map(net, x, cost);
    Vector expected = x - grad_input(net, x) / (2.0 * 0.7);
    CHECK((mapped - expected).lpNorm<Eigen::Infinity>() < 1e-15);
  }
}

TEST_CASE("transport_map: zero gradient is a fixed point") {
  PotentialNet net = PotentialNet::affine(Vector::Zero(3), 1.0);
  const EnCost cost(0.5, 0.0);
  Vector x(3);
  x << 1.0, -2.0, 0.25;
  Vector t = transport_map(net, x, cost);
  CHECK(t == x);
}

TEST_CASE("feature_mask examples") {
  Vector a(2);
  a << 3.0, 0.05;
  PotentialNet net = PotentialNet::affine(a, 0.0);
  SECTION("threshold between the two coefficients") {
    Eigen::VectorXi m = feature_mask(net, Vector::Zero(2), EnCost(1.0, 0.1));
    CHECK(m[0] == 1);
    CHECK(m[1] == 0);
  }
  SECTION("c1 = 0 selects every nonzero-gradient coordinate") {
    Vector b(3);
    b << 2.0, 0.0, -1e-12;
    PotentialNet net3 = PotentialNet::affine(b, 0.0);
    Eigen::VectorXi m = feature_mask(net3, Vector::Zero(3), EnCost(1.0, 0.0));
    CHECK(m[0] == 1);
    CHECK(m[1] == 0);
    CHECK(m[2] == 1);
  }
  SECTION("c1 above the gradient sup-norm masks everything and freezes x") {
    const EnCost cost(1.0, 5.0);
    Vector x(2);
    x << 0.5, -0.25;
    CHECK(feature_mask(net, x, cost).isZero());
    CHECK(transport_map(net, x, cost) == x);
  }
  SECTION("boundary |grad| == c1 is not selected") {
    Eigen::VectorXi m = feature_mask(net, Vector::Zero(2), EnCost(1.0, 3.0));
    CHECK(m[0] == 0);
  }
}

TEST_CASE("mask/map exactness: mask 0 iff coordinate bitwise unchanged") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> c1d(0.0, 0.5), c2d(1e-4, 1.0);
  for (int t = 0; t < 300; ++t) {
    const int d = 1 + static_cast<int>(rng() % 6);
    PotentialNet net = test_support::random_net(d, 1 + static_cast<int>(rng() % 3), 8, rng());
    const EnCost cost(c2d(rng), c1d(rng));
    Vector x = test_support::random_vector(d, rng, 2.0);
    Vector mapped = transport_map(net, x, cost);
    Eigen::VectorXi mask = feature_mask(net, x, cost);
    for (int i = 0; i < d; ++i) {
      if (mask[i] == 0) {
        REQUIRE(mapped[i] == x[i]);
      } else {
        REQUIRE(mapped[i] != x[i]);
      }
    }
  }
}

TEST_CASE("threshold forms identify the same zero set") {
  // ST_{c1/(2c2)}(g / (2c2)) == 0 exactly when |g| <= c1.
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> gd(-2.0, 2.0), c1d(0.0, 1.5), c2d(1e-3, 2.0);
  for (int t = 0; t < 20000; ++t) {
    const double g = gd(rng), c1 = c1d(rng), c2 = c2d(rng);
    const bool mask_form = std::abs(g) > c1;
    const bool map_form = soft_threshold(g / (2.0 * c2), c1 / (2.0 * c2)) != 0.0;
    CHECK(mask_form == map_form);
  }
}

TEST_CASE("sparsity is non-increasing in c1") {
  std::mt19937_64 rng(808);
  for (int t = 0; t < 20; ++t) {
    const int d = 6;
    PotentialNet net = test_support::random_net(d, 2, 10, rng());
    Vector x = test_support::random_vector(d, rng, 2.0);
    int prev = d + 1;
    for (double c1 : {0.0, 0.001, 0.005, 0.01, 0.05, 0.1, 0.5}) {
      const int count = feature_mask(net, x, EnCost(1e-3, c1)).sum();
      CHECK(count <= prev);
      prev = count;
    }
  }
}

TEST_CASE("transport_batch") {
  PotentialNet net = PotentialNet::init(3, 2, 8, 99);
  const EnCost cost(0.5, 0.05);
  SECTION("empty input gives empty report") {
    TransportReport r = transport_batch(net, Dataset(0, 3), cost);
    CHECK(r.transported.rows() == 0);
    CHECK(r.masks.rows() == 0);
    CHECK(r.sparsity.empty());
  }
  SECTION("singleton equals single calls; invariants hold") {
    std::mt19937_64 rng(1);
    Dataset xs(5, 3);
    for (int i = 0; i < 5; ++i) xs.row(i) = test_support::random_vector(3, rng).transpose();
    TransportReport r = transport_batch(net, xs, cost);
    for (int i = 0; i < 5; ++i) {
      Vector x = xs.row(i).transpose();
      CHECK(r.transported.row(i).transpose() == transport_map(net, x, cost));
      CHECK(r.masks.row(i).transpose() == feature_mask(net, x, cost));
      int sp = 0;
      double l1 = 0.0;
      for (int j = 0; j < 3; ++j) {
        const bool moved = r.transported(i, j) != xs(i, j);
        CHECK((r.masks(i, j) == 1) == moved);
        sp += r.masks(i, j);
        l1 += std::abs(xs(i, j) - r.transported(i, j));
      }
      CHECK(r.sparsity[static_cast<std::size_t>(i)] == sp);
      CHECK_THAT(r.displacement_l1[static_cast<std::size_t>(i)],
                 Catch::Matchers::WithinAbs(l1, 1e-12));
    }
  }
  SECTION("permutation equivariance") {
    std::mt19937_64 rng(2);
    Dataset xs(4, 3);
    for (int i = 0; i < 4; ++i) xs.row(i) = test_support::random_vector(3, rng).transpose();
    const int order[4] = {3, 1, 0, 2};
    Dataset perm(4, 3);
    for (int i = 0; i < 4; ++i) perm.row(i) = xs.row(order[i]);
    TransportReport r1 = transport_batch(net, xs, cost);
    TransportReport r2 = transport_batch(net, perm, cost);
    for (int i = 0; i < 4; ++i) {
      CHECK(r2.transported.row(i) == r1.transported.row(order[i]));
      CHECK(r2.masks.row(i) == r1.masks.row(order[i]));
    }
  }
}

TEST_CASE("transport_via_ctransform returns y plus the maximizer") {
  Vector a(2);
  a << 3.0, 0.05;
  PotentialNet net = PotentialNet::affine(a, 0.0);
  const EnCost cost(1.0, 0.1);
  InnerConfig cfg;
  cfg.normalize_gradient = false;
  cfg.step = 0.5;
  Vector y(2);
  y << -1.0, 2.0;
  Vector back = transport_via_ctransform(net, y, cost, cfg);
  CHECK_THAT(back[0], Catch::Matchers::WithinAbs(-1.0 + 1.45, 1e-9));
  CHECK_THAT(back[1], Catch::Matchers::WithinAbs(2.0, 1e-12));
}

TEST_CASE("saliency_report") {
  SECTION("zero-gradient potential has all-zero frequencies") {
    PotentialNet net = PotentialNet::affine(Vector::Zero(3), 2.0);
    Dataset xs = Dataset::Random(5, 3);
    auto rows = saliency_report(net, xs, EnCost(1.0, 0.0));
    for (const auto& r : rows) CHECK(r.frequency == 0.0);
  }
  SECTION("affine potential ranks the large coefficient first") {
    Vector a(2);
    a << 3.0, 0.05;
    PotentialNet net = PotentialNet::affine(a, 0.0);
    Dataset xs = Dataset::Random(8, 2);
    auto rows = saliency_report(net, xs, EnCost(1.0, 0.1));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].feature == 0);
    CHECK(rows[0].frequency == 1.0);
    CHECK(rows[1].feature == 1);
    CHECK(rows[1].frequency == 0.0);
    CHECK_THAT(rows[0].mean_grad_mag, Catch::Matchers::WithinAbs(3.0, 1e-12));
  }
  SECTION("selection frequency never grows with c1") {
    std::mt19937_64 rng(21);
    PotentialNet net = test_support::random_net(4, 2, 8, 77);
    Dataset xs(10, 4);
    for (int i = 0; i < 10; ++i) xs.row(i) = test_support::random_vector(4, rng).transpose();
    std::vector<double> prev(4, 2.0);
    for (double c1 : {0.0, 0.01, 0.05, 0.2, 1.0}) {
      auto rows = saliency_report(net, xs, EnCost(1e-3, c1));
      std::vector<double> freq(4);
      for (const auto& r : rows) freq[static_cast<std::size_t>(r.feature)] = r.frequency;
      for (int j = 0; j < 4; ++j) CHECK(freq[static_cast<std::size_t>(j)] <= prev[static_cast<std::size_t>(j)]);
      prev = freq;
    }
  }
  SECTION("empty dataset throws") {
    PotentialNet net = PotentialNet::affine(Vector::Ones(2), 0.0);
    CHECK_THROWS_AS(saliency_report(net, Dataset(0, 2), EnCost(1.0, 0.0)),
                    std::invalid_argument);
  }
}

TEST_CASE("denoising_ratio") {
  TransportReport r;
  r.masks = Eigen::MatrixXi::Zero(4, 6);
  r.transported = Dataset::Zero(4, 6);
  SECTION("all-zero masks give 1.0") { CHECK(denoising_ratio(r, {3, 4, 5}) == 1.0); }
  SECTION("all-one masks give 0.0") {
    r.masks.setOnes();
    CHECK(denoising_ratio(r, {0, 1}) == 0.0);
  }
  SECTION("mixed counts") {
    r.masks.setZero();
    r.masks(0, 4) = 1;
    r.masks(2, 5) = 1;
    CHECK_THAT(denoising_ratio(r, {4, 5}), Catch::Matchers::WithinAbs(6.0 / 8.0, 1e-15));
  }
  SECTION("out-of-range index throws") {
    CHECK_THROWS_AS(denoising_ratio(r, {6}), std::invalid_argument);
    CHECK_THROWS_AS(denoising_ratio(r, {-1}), std::invalid_argument);
  }
}
