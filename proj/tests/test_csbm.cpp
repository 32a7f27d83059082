#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "grassfilt/csbm.hpp"

using namespace grassfilt;
using Catch::Approx;

TEST_CASE("sample_csbm_graph") {
  SECTION("p=1, q=0 gives two disjoint cliques") {
    CsbmConfig cfg;
    cfg.n1 = 5;
    cfg.n2 = 7;
    cfg.p = 1.0;
    cfg.q = 0.0;
    Graph g = sample_csbm_graph(cfg);
    CHECK(g.m() == 5 * 4 / 2 + 7 * 6 / 2);
    for (const auto& e : g.edges) CHECK((e.i < 5) == (e.j < 5));
  }

  SECTION("deterministic given the seed") {
    CsbmConfig cfg;
    cfg.seed = 99;
    Graph a = sample_csbm_graph(cfg);
    Graph b = sample_csbm_graph(cfg);
    REQUIRE(a.m() == b.m());
    for (int i = 0; i < a.m(); ++i) {
      CHECK(a.edges[i].i == b.edges[i].i);
      CHECK(a.edges[i].j == b.edges[i].j);
    }
  }

  SECTION("inter-block edge count matches the binomial mean") {
    CsbmConfig cfg;
    cfg.n1 = 20;
    cfg.n2 = 30;
    cfg.p = 0.45;
    cfg.q = 0.4;
    const int trials = 200;
    double total = 0.0;
    for (int s = 0; s < trials; ++s) {
      cfg.seed = 1000 + s;
      Graph g = sample_csbm_graph(cfg);
      int inter = 0;
      for (const auto& e : g.edges) inter += (e.i < 20) != (e.j < 20);
      total += inter;
    }
    double mean = total / trials;
    double expected = 20.0 * 30.0 * cfg.q;
    double se = std::sqrt(20.0 * 30.0 * cfg.q * (1 - cfg.q) / trials);
    CHECK(std::abs(mean - expected) <= 3.0 * se);
  }
}

TEST_CASE("sample_features") {
  SECTION("noiseless rows equal their means") {
    CsbmConfig cfg;
    cfg.n1 = 3;
    cfg.n2 = 4;
    cfg.d = 8;
    cfg.sigma = 0.0;
    Eigen::MatrixXd x = sample_features(cfg, 0.3);
    Eigen::VectorXd m1 = csbm_mean(cfg, 0.3, 0), m2 = csbm_mean(cfg, 0.3, 1);
    for (int i = 0; i < 3; ++i) CHECK((x.row(i).transpose() - m1).norm() == 0.0);
    for (int i = 3; i < 7; ++i) CHECK((x.row(i).transpose() - m2).norm() == 0.0);
  }

  SECTION("means align exactly at t = 1") {
    CsbmConfig cfg;
    Eigen::VectorXd m1 = csbm_mean(cfg, 1.0, 0), m2 = csbm_mean(cfg, 1.0, 1);
    double cos = m1.dot(m2) / (m1.norm() * m2.norm());
    CHECK(cos == Approx(1.0).margin(1e-12));
    CHECK(m1.norm() == Approx(cfg.mu_norm).margin(1e-12));
    CHECK(m2.norm() == Approx(cfg.mu_norm).margin(1e-12));
  }

  SECTION("mean angle shrinks linearly from theta0 to zero") {
    CsbmConfig cfg;
    auto angle = [&](double t) {
      Eigen::VectorXd m1 = csbm_mean(cfg, t, 0), m2 = csbm_mean(cfg, t, 1);
      return std::acos(std::clamp(m1.dot(m2) / (m1.norm() * m2.norm()), -1.0, 1.0));
    };
    CHECK(angle(-1.0) == Approx(cfg.theta0).margin(1e-10));
    CHECK(angle(0.0) == Approx(cfg.theta0 / 2).margin(1e-10));
  }

  SECTION("sample mean estimates the configured mean") {
    CsbmConfig cfg;
    cfg.n1 = 2;
    cfg.n2 = 2;
    cfg.d = 8;
    const int draws = 10000;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(cfg.d);
    for (int s = 0; s < draws; ++s) {
      cfg.seed = s;
      acc += sample_features(cfg, 0.2).row(0).transpose();
    }
    acc /= draws;
    Eigen::VectorXd mu = csbm_mean(cfg, 0.2, 0);
    double bound = 4.0 * cfg.sigma / std::sqrt(double(draws));
    for (int j = 0; j < cfg.d; ++j) CHECK(std::abs(acc[j] - mu[j]) <= bound);
  }

  SECTION("noise is frozen across t for a fixed seed") {
    CsbmConfig cfg;
    cfg.seed = 5;
    Eigen::MatrixXd e1 = sample_features(cfg, -0.7);
    Eigen::MatrixXd e2 = sample_features(cfg, 0.9);
    Eigen::VectorXd m1a = csbm_mean(cfg, -0.7, 0), m1b = csbm_mean(cfg, 0.9, 0);
    // subtracting the mean trajectory leaves the identical noise matrix
    CHECK((e1.row(0).transpose() - m1a - (e2.row(0).transpose() - m1b)).norm() <= 1e-14);
  }
}

TEST_CASE("similarity_correction") {
  Graph g = build_graph(4, {{0, 1, 2.0}, {1, 2, 1.0}, {2, 3, 0.5}});

  SECTION("identical, orthogonal and antiparallel features") {
    Eigen::MatrixXd x(4, 2);
    x << 1, 0,  // 0
        1, 0,   // 1: same as 0 -> cos = 1
        0, 1,   // 2: orthogonal to 1 -> cos = 0
        0, -1;  // 3: antiparallel to 2 -> cos = -1
    Graph sg = similarity_correction(g, x, SimilarityMode::Signed);
    CHECK(sg.edges[0].w == Approx(2.0).margin(1e-14));
    CHECK(sg.edges[1].w == Approx(0.0).margin(1e-14));
    CHECK(sg.edges[2].w == Approx(-0.5).margin(1e-14));
    Graph cg = similarity_correction(g, x, SimilarityMode::Clamped);
    CHECK(cg.edges[2].w == 0.0);
    Graph ag = similarity_correction(g, x, SimilarityMode::Absolute);
    CHECK(ag.edges[2].w == Approx(0.5).margin(1e-14));
  }

  SECTION("sparsity pattern and weight bounds") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd x(4, 6);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 6; ++j) x(i, j) = gauss(rng);
    Graph sg = similarity_correction(g, x, SimilarityMode::Signed);
    REQUIRE(sg.m() == g.m());
    for (int i = 0; i < g.m(); ++i) {
      CHECK(sg.edges[i].i == g.edges[i].i);
      CHECK(sg.edges[i].j == g.edges[i].j);
      CHECK(std::abs(sg.edges[i].w) <= g.edges[i].w + 1e-14);
    }
  }

  SECTION("zero feature rows are rejected") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 3);
    CHECK_THROWS_MATCHES(similarity_correction(g, x), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == ErrorCode::ZeroFeatureVector;
                         }));
  }
}

TEST_CASE("cos_d") {
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  CHECK(cos_d(zero, zero, 4) == 0.0);

  // ||mu||^2 = d makes the self-similarity exactly one half
  Eigen::VectorXd mu = Eigen::VectorXd::Constant(4, 1.0);
  CHECK(cos_d(mu, mu, 4) == Approx(0.5).margin(1e-15));

  double prev = 1.0;
  for (int d : {4, 16, 64, 256}) {
    double v = cos_d(mu, mu, d);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("expected_adjacency block structure") {
  CsbmConfig cfg;
  cfg.n1 = 3;
  cfg.n2 = 4;
  cfg.d = 16;
  cfg.mu_norm = 4.0;
  Eigen::MatrixXd ea = expected_adjacency(cfg, 0.4);
  Eigen::VectorXd m1 = csbm_mean(cfg, 0.4, 0), m2 = csbm_mean(cfg, 0.4, 1);
  double k11 = cos_d(m1, m1, 16), k12 = cos_d(m1, m2, 16), k22 = cos_d(m2, m2, 16);
  for (int i = 0; i < 7; ++i) CHECK(ea(i, i) == 0.0);
  CHECK(ea(0, 1) == Approx(cfg.p * k11).margin(1e-14));
  CHECK(ea(0, 4) == Approx(cfg.q * k12).margin(1e-14));
  CHECK(ea(4, 6) == Approx(cfg.p * k22).margin(1e-14));
  CHECK((ea - ea.transpose()).norm() == 0.0);
}

TEST_CASE("monte carlo agreement improves with dimension") {
  // relative error of the block proxy, estimated from paired feature draws
  auto mc_relative_error = [](int d, std::uint64_t seed, int pairs) {
    CsbmConfig cfg;
    cfg.d = d;
    cfg.mu_norm = std::sqrt(double(d));
    cfg.seed = seed;
    double t = 0.5;
    Eigen::VectorXd m1 = csbm_mean(cfg, t, 0), m2 = csbm_mean(cfg, t, 1);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    auto draw = [&](const Eigen::VectorXd& mu) {
      Eigen::VectorXd x(d);
      for (int i = 0; i < d; ++i) x[i] = mu[i] + gauss(rng);
      return x;
    };
    double acc = 0.0;
    for (int p = 0; p < pairs; ++p) {
      Eigen::VectorXd xi = draw(m1), xj = draw(m2);
      acc += xi.dot(xj) / (xi.norm() * xj.norm());
    }
    double proxy = cos_d(m1, m2, d);
    return std::abs(acc / pairs - proxy) / std::abs(proxy);
  };

  double err64 = 0.0, err1024 = 0.0;
  for (int s = 0; s < 20; ++s) {
    err64 += mc_relative_error(64, 100 + s, 2000);
    err1024 += mc_relative_error(1024, 100 + s, 2000);
  }
  CHECK(err1024 / 20 <= err64 / 20);
}
