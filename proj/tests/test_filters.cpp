#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "grassfilt/experiments.hpp"
#include "grassfilt/filters.hpp"
#include "grassfilt/graph.hpp"

using namespace grassfilt;
using Catch::Approx;

TEST_CASE("vandermonde") {
  Eigen::VectorXd l(3);
  l << 0, 1, 2;
  Eigen::MatrixXd psi = vandermonde(l, 3);
  Eigen::MatrixXd want(3, 3);
  want << 1, 0, 0, 1, 1, 1, 1, 2, 4;
  CHECK((psi - want).norm() == 0.0);

  CHECK((vandermonde(l, 1) - Eigen::MatrixXd::Ones(3, 1)).norm() == 0.0);

  Eigen::VectorXd half(1);
  half << 0.5;
  Eigen::MatrixXd p4 = vandermonde(half, 4);
  CHECK(p4(0, 0) == 1.0);
  CHECK(p4(0, 1) == 0.5);
  CHECK(p4(0, 2) == 0.25);
  CHECK(p4(0, 3) == 0.125);
}

namespace {
SpectralPair laplacian_pair(const Graph& g, int k) {
  return extremal_eigenpairs(shift_operator(g, ShiftKind::Laplacian), k, Extremal::Smallest);
}
}  // namespace

TEST_CASE("build_lowpass and apply_filter") {
  Graph p3 = build_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  SpectralPair pair = laplacian_pair(p3, 2);

  SECTION("unit taps act as the projector onto the basis") {
    FactoredFilter f = build_lowpass(pair, FilterTaps::from({1.0}));
    Eigen::VectorXd inside = pair.vectors * Eigen::Vector2d(0.3, -1.1);
    CHECK((apply_filter(f, inside) - inside).norm() <= 1e-10);
    // complete the basis and take the leftover direction
    Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(pair.vectors);
    Eigen::VectorXd ortho = qr.matrixQ().col(2);
    CHECK(apply_filter(f, ortho).norm() <= 1e-10);
  }

  SECTION("linear taps act as the truncated shift") {
    FactoredFilter f = build_lowpass(pair, FilterTaps::from({0.0, 1.0}));
    Eigen::VectorXd x(3);
    x << 1, 0, 0;
    Eigen::VectorXd want =
        pair.vectors * pair.values.asDiagonal() * pair.vectors.transpose() * x;
    CHECK((apply_filter(f, x) - want).norm() <= 1e-12);
  }

  SECTION("halving taps realize the stated response") {
    FilterTaps t = FilterTaps::halving(5);
    Eigen::VectorXd l(2);
    l << 0.5, 2.0;
    FactoredFilter f{StiefelRep(Eigen::MatrixXd::Identity(3, 3).leftCols(2)), l, t, false};
    Eigen::VectorXd r = f.response();
    auto poly = [](double x) {
      return 1.0 + x / 2 + x * x / 4 + x * x * x / 8 + x * x * x * x / 16;
    };
    CHECK(r[0] == Approx(poly(0.5)).margin(1e-14));
    CHECK(r[1] == Approx(poly(2.0)).margin(1e-14));
  }

  SECTION("factored application matches the dense oracle") {
    FactoredFilter f = build_lowpass(pair, FilterTaps::from({1.0, 1.0}));
    Eigen::VectorXd x(3);
    x << 1, 0, 0;
    Eigen::MatrixXd dense = f.dense();
    CHECK((apply_filter(f, x) - dense * x).norm() <= 1e-12);
  }

  SECTION("dimension mismatch") {
    FactoredFilter f = build_lowpass(pair, FilterTaps::from({1.0}));
    CHECK_THROWS_AS(apply_filter(f, Eigen::VectorXd::Zero(5)), Error);
  }

  SECTION("eigengap warning propagates") {
    Eigen::VectorXd d(4);
    d << 0, 1, 1, 2;
    SpectralPair broken = extremal_eigenpairs(d.asDiagonal(), 2, Extremal::Smallest);
    FactoredFilter f = build_lowpass(broken, FilterTaps::from({1.0}));
    CHECK(f.broken_eigenspace);
  }
}

TEST_CASE("filters depend on the subspace, not the basis") {
  // repeated eigenvalue: rotations inside its eigenspace leave H unchanged
  Eigen::VectorXd d(5);
  d << 1, 1, 3, 4, 5;
  SpectralPair pair = extremal_eigenpairs(d.asDiagonal(), 3, Extremal::Smallest);
  FactoredFilter f = build_lowpass(pair, FilterTaps::halving(3));

  double c = std::cos(0.7), s = std::sin(0.7);
  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(3, 3);
  rot(0, 0) = c;
  rot(0, 1) = -s;
  rot(1, 0) = s;
  rot(1, 1) = c;
  SpectralPair rotated = pair;
  rotated.vectors = pair.vectors * rot;
  FactoredFilter g = build_lowpass(rotated, FilterTaps::halving(3));

  std::mt19937_64 rng(4);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd x(5);
  for (int i = 0; i < 5; ++i) x[i] = gauss(rng);
  CHECK((apply_filter(f, x) - apply_filter(g, x)).norm() <= 1e-10);
}

TEST_CASE("filter commutes with its shift on an exact invariant basis") {
  TrajectoryFamily fam = block_rotation_trajectory(30, 4, 3);
  Eigen::MatrixXd s = fam.shift(0.2);
  SpectralPair pair = extremal_eigenpairs(s, 4, Extremal::Smallest);
  FactoredFilter f = build_lowpass(pair, FilterTaps::halving(4));
  Eigen::MatrixXd h = f.dense();
  CHECK((h * s - s * h).norm() <= 1e-8 * s.norm() * h.norm());
}

TEST_CASE("rayleigh_ritz_align") {
  SECTION("exact basis is already aligned up to signed permutation") {
    Eigen::VectorXd d(5);
    d << 1, 2, 3, 4, 5;
    Eigen::MatrixXd s = d.asDiagonal();
    SpectralPair pair = extremal_eigenpairs(s, 3, Extremal::Smallest);
    auto [lam, o] = rayleigh_ritz_align(StiefelRep(pair.vectors), s);
    for (int i = 0; i < 3; ++i) CHECK(lam[i] == Approx(pair.values[i]).margin(1e-10 * s.norm()));
    // |O| close to a permutation matrix
    Eigen::MatrixXd abs_o = o.cwiseAbs();
    for (int c = 0; c < 3; ++c) {
      CHECK(abs_o.col(c).maxCoeff() == Approx(1.0).margin(1e-8));
      CHECK(abs_o.col(c).sum() == Approx(1.0).margin(1e-8));
    }
  }

  SECTION("rotation of the trial basis leaves the values invariant") {
    std::mt19937_64 rng(5);
    Eigen::MatrixXd a(20, 20);
    std::normal_distribution<double> gauss;
    for (int c = 0; c < 20; ++c)
      for (int r = 0; r < 20; ++r) a(r, c) = gauss(rng);
    Eigen::MatrixXd s = 0.5 * (a + a.transpose());
    SpectralPair pair = extremal_eigenpairs(s, 4, Extremal::Smallest);

    Eigen::MatrixXd g(4, 4);
    for (int c = 0; c < 4; ++c)
      for (int r = 0; r < 4; ++r) g(r, c) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    StiefelRep rotated(pair.vectors * q);
    auto [lam, o] = rayleigh_ritz_align(rotated, s);
    for (int i = 0; i < 4; ++i) CHECK(lam[i] == Approx(pair.values[i]).margin(1e-9 * s.norm()));
    Eigen::MatrixXd realigned = rotated.mat() * o;
    for (int i = 0; i < 4; ++i)
      CHECK(std::abs(realigned.col(i).dot(pair.vectors.col(i))) == Approx(1.0).margin(1e-8));
  }

  SECTION("two-by-two hand computation") {
    Eigen::VectorXd d(4);
    d << 1, 2, 3, 4;
    Eigen::MatrixXd s = d.asDiagonal();
    Eigen::MatrixXd v(4, 2);
    double r2 = 1.0 / std::sqrt(2.0);
    v << r2, r2, r2, -r2, 0, 0, 0, 0;
    auto [lam, o] = rayleigh_ritz_align(StiefelRep(v), s);
    CHECK(lam[0] == Approx(1.0).margin(1e-12));
    CHECK(lam[1] == Approx(2.0).margin(1e-12));
    Eigen::MatrixXd realigned = (v * o).cwiseAbs();
    CHECK(realigned(0, 0) == Approx(1.0).margin(1e-12));
    CHECK(realigned(1, 1) == Approx(1.0).margin(1e-12));
  }

  SECTION("asymmetric operator is rejected") {
    Eigen::MatrixXd s(3, 3);
    s << 1, 2, 0, 0, 1, 0, 0, 0, 1;
    std::mt19937_64 rng(6);
    CHECK_THROWS_AS(rayleigh_ritz_align(StiefelRep::random(3, 2, rng), s), Error);
  }
}

TEST_CASE("interpolate_filter") {
  TrajectoryFamily fam = block_rotation_trajectory(30, 3, 11);
  AnchorSet anchors = fam.anchors_at(chebyshev_nodes(5, -1.0, 1.0));
  StiefelRep base = choose_base_point(anchors, BasePolicy::middle());
  FilterTaps taps = FilterTaps::halving(4);

  SECTION("anchor times reproduce the exact filter") {
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      double t = anchors.times()[i];
      Eigen::MatrixXd s = fam.shift(t);
      FactoredFilter exact = build_lowpass(fam.exact_pair(t), taps);
      FactoredFilter interp = interpolate_filter(anchors, base, taps, t, s);
      Eigen::MatrixXd he = exact.dense(), hi = interp.dense();
      CHECK((he - hi).norm() <= 1e-7 * he.norm());
    }
  }

  SECTION("constant family gives a constant filter") {
    Eigen::MatrixXd s = fam.shift(0.0);
    std::vector<StiefelRep> reps;
    std::vector<Eigen::VectorXd> spectra;
    std::vector<double> times{-1.0, 0.0, 1.0};
    for (std::size_t i = 0; i < times.size(); ++i) {
      SpectralPair p = extremal_eigenpairs(s, 3, Extremal::Smallest);
      reps.emplace_back(p.vectors);
      spectra.push_back(p.values);
    }
    AnchorSet const_anchors(times, reps, spectra);
    StiefelRep b = choose_base_point(const_anchors, BasePolicy::middle());
    FactoredFilter h0 = interpolate_filter(const_anchors, b, taps, -0.6, s);
    FactoredFilter h1 = interpolate_filter(const_anchors, b, taps, 0.7, s);
    CHECK((h0.dense() - h1.dense()).norm() <= 1e-8);
  }

  SECTION("factored distance agrees with the dense difference") {
    // coarse anchors so the distance sits far above the trace route's
    // cancellation floor (sqrt(eps) times the response magnitude)
    AnchorSet coarse = fam.anchors_at(chebyshev_nodes(1, -1.0, 1.0));
    StiefelRep base2 = choose_base_point(coarse, BasePolicy::middle());
    Eigen::MatrixXd s0 = fam.shift(0.85);
    FactoredFilter exact = build_lowpass(fam.exact_pair(0.85), taps);
    FactoredFilter interp = interpolate_filter(coarse, base2, taps, 0.85, s0);
    double dense_dist = (exact.dense() - interp.dense()).norm();
    double floor = 1e-7 * (exact.response().norm() + interp.response().norm());
    REQUIRE(dense_dist > 100 * floor);
    CHECK(filter_distance(exact, interp) == Approx(dense_dist).margin(floor));
  }
}

TEST_CASE("response csv export") {
  Eigen::VectorXd l(2);
  l << 0.0, 1.5;
  FactoredFilter f{StiefelRep(Eigen::MatrixXd::Identity(4, 4).leftCols(2)), l,
                   FilterTaps::halving(2), false};
  std::ostringstream os;
  write_response_csv(os, f);
  std::string text = os.str();
  CHECK(text.rfind("lambda,response\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
