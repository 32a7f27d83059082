#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "grassfilt/experiments.hpp"
#include "grassfilt/interpolation.hpp"
#include "grassfilt/parallel.hpp"

using namespace grassfilt;
using Catch::Approx;

TEST_CASE("chebyshev_nodes") {
  SECTION("single node at the interval midpoint") {
    auto n = chebyshev_nodes(0, -1.0, 1.0);
    REQUIRE(n.size() == 1);
    CHECK(n[0] == Approx(0.0).margin(1e-15));
  }

  SECTION("two nodes on [-1,1]") {
    auto n = chebyshev_nodes(1, -1.0, 1.0);
    REQUIRE(n.size() == 2);
    CHECK(n[0] == Approx(-std::sqrt(2.0) / 2).margin(1e-14));
    CHECK(n[1] == Approx(std::sqrt(2.0) / 2).margin(1e-14));
  }

  SECTION("affine map to [0,1]") {
    auto n = chebyshev_nodes(1, 0.0, 1.0);
    CHECK(n[0] == Approx(0.146446609406726).margin(1e-12));
    CHECK(n[1] == Approx(0.853553390593274).margin(1e-12));
  }

  SECTION("ascending, strictly inside the interval") {
    auto n = chebyshev_nodes(9, 2.0, 5.0);
    for (std::size_t i = 1; i < n.size(); ++i) CHECK(n[i - 1] < n[i]);
    CHECK(n.front() > 2.0);
    CHECK(n.back() < 5.0);
  }
}

TEST_CASE("lagrange_basis") {
  SECTION("cardinal property at the nodes") {
    std::vector<double> nodes{-0.9, -0.1, 0.4, 0.8};
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      auto w = lagrange_basis(nodes, nodes[j]);
      for (std::size_t m = 0; m < nodes.size(); ++m)
        CHECK(w[m] == Approx(m == j ? 1.0 : 0.0).margin(1e-14));
    }
  }

  SECTION("linear midpoint") {
    auto w = lagrange_basis({-1.0, 1.0}, 0.0);
    CHECK(w[0] == Approx(0.5).margin(1e-15));
    CHECK(w[1] == Approx(0.5).margin(1e-15));
  }

  SECTION("quadratic hand computation") {
    auto w = lagrange_basis({0.0, 1.0, 2.0}, 0.5);
    CHECK(w[0] == Approx(0.375).margin(1e-14));
    CHECK(w[1] == Approx(0.75).margin(1e-14));
    CHECK(w[2] == Approx(-0.125).margin(1e-14));
  }

  SECTION("partition of unity at random points") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    auto nodes = chebyshev_nodes(11, -1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      auto w = lagrange_basis(nodes, u(rng));
      double sum = 0.0;
      for (double x : w) sum += x;
      CHECK(sum == Approx(1.0).margin(1e-12));
    }
  }

  SECTION("duplicate nodes rejected") {
    CHECK_THROWS_MATCHES(lagrange_basis({0.0, 1.0, 1.0}, 0.5), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == ErrorCode::DuplicateNodes;
                         }));
  }
}

namespace {

AnchorSet planar_anchors(const std::vector<double>& times, double omega = 0.5) {
  std::vector<StiefelRep> reps;
  std::vector<Eigen::VectorXd> spectra;
  for (double t : times) {
    reps.push_back(planar_exact(t, omega));
    spectra.push_back(Eigen::VectorXd::Constant(1, 0.5));
  }
  return AnchorSet(times, std::move(reps), std::move(spectra));
}

}  // namespace

TEST_CASE("AnchorSet validation") {
  std::mt19937_64 rng(2);
  std::vector<StiefelRep> reps{StiefelRep::random(6, 2, rng), StiefelRep::random(6, 2, rng)};
  std::vector<Eigen::VectorXd> spectra{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)};
  CHECK_THROWS_AS(AnchorSet({0.5, 0.5}, reps, spectra), Error);
  CHECK_THROWS_AS(AnchorSet({1.0, 0.0}, reps, spectra), Error);
  CHECK_THROWS_AS(AnchorSet({}, {}, {}), Error);
  std::vector<StiefelRep> mixed{StiefelRep::random(6, 2, rng), StiefelRep::random(6, 3, rng)};
  std::vector<Eigen::VectorXd> sp2{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)};
  CHECK_THROWS_AS(AnchorSet({0.0, 1.0}, mixed, sp2), Error);
}

TEST_CASE("choose_base_point") {
  AnchorSet anchors = planar_anchors({-0.5, 0.0, 0.5});

  SECTION("middle of three anchors is index 1") {
    StiefelRep b = choose_base_point(anchors, BasePolicy::middle());
    CHECK((b.mat() - anchors.reps()[1].mat()).norm() == 0.0);
  }

  SECTION("explicit index") {
    StiefelRep b = choose_base_point(anchors, BasePolicy::at(0));
    CHECK((b.mat() - anchors.reps()[0].mat()).norm() == 0.0);
    CHECK_THROWS_AS(choose_base_point(anchors, BasePolicy::at(3)), Error);
  }

  SECTION("external base flags anchors near the cut locus") {
    // nearly orthogonal to the anchor at t = 0
    Eigen::MatrixXd v(2, 1);
    v << std::cos(1.52), std::sin(1.52);
    std::vector<std::size_t> flagged;
    StiefelRep b = choose_base_point(anchors, BasePolicy::external_rep(StiefelRep(v)), &flagged);
    CHECK((b.mat() - v).norm() == 0.0);
    CHECK_FALSE(flagged.empty());
  }
}

TEST_CASE("interpolate_subspace") {
  SECTION("anchors are reproduced") {
    AnchorSet anchors = planar_anchors(chebyshev_nodes(4, -1.0, 1.0));
    StiefelRep base = choose_base_point(anchors, BasePolicy::middle());
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      StiefelRep v = interpolate_subspace(anchors, base, anchors.times()[i]);
      CHECK(projector_distance(v, anchors.reps()[i]) <= 1e-8);
    }
  }

  SECTION("constant trajectory stays put for all t") {
    std::mt19937_64 rng(3);
    StiefelRep v0 = StiefelRep::random(12, 3, rng);
    std::vector<StiefelRep> reps;
    std::vector<Eigen::VectorXd> spectra;
    std::vector<double> times{-1.0, -0.3, 0.2, 0.9};
    for (std::size_t i = 0; i < times.size(); ++i) {
      // same subspace, different representative each time
      Eigen::MatrixXd g(3, 3);
      std::normal_distribution<double> gauss;
      for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r) g(r, c) = gauss(rng);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
      reps.emplace_back(v0.mat() * Eigen::MatrixXd(qr.householderQ()));
      spectra.push_back(Eigen::VectorXd::Zero(3));
    }
    AnchorSet anchors(times, reps, spectra);
    StiefelRep base = choose_base_point(anchors, BasePolicy::middle());
    for (double t : {-0.8, -0.1, 0.55, 1.0}) {
      StiefelRep v = interpolate_subspace(anchors, base, t);
      CHECK(projector_distance(v, v0) <= 1e-8);
    }
  }

  SECTION("planar family is captured on a fine grid") {
    AnchorSet anchors = planar_anchors(chebyshev_nodes(4, -1.0, 1.0));
    StiefelRep base = choose_base_point(anchors, BasePolicy::middle());
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) {
      double t = -1.0 + 2.0 * i / 100.0;
      worst = std::max(worst,
                       projector_distance(interpolate_subspace(anchors, base, t), planar_exact(t)));
    }
    CHECK(worst <= 1e-3);
  }

  SECTION("extrapolation is flagged, in-range queries are not") {
    AnchorSet anchors = planar_anchors(chebyshev_nodes(3, -1.0, 1.0));
    StiefelRep base = choose_base_point(anchors, BasePolicy::middle());
    InterpolationInfo info;
    (void)interpolate_subspace(anchors, base, 0.0, &info);
    CHECK_FALSE(info.extrapolated);
    (void)interpolate_subspace(anchors, base, 1.5, &info);
    CHECK(info.extrapolated);
    // the base sits on an anchor, so that anchor's lift is zero and flagged
    CHECK(info.rank_deficient_anchors == std::vector<std::size_t>{anchors.size() / 2});
  }

  SECTION("output is a valid representative") {
    TrajectoryFamily fam = block_rotation_trajectory(30, 3, 5);
    AnchorSet anchors = fam.anchors_at(chebyshev_nodes(5, -1.0, 1.0));
    StiefelRep base = choose_base_point(anchors, BasePolicy::middle());
    for (double t : {-0.7, 0.1, 0.9}) {
      StiefelRep v = interpolate_subspace(anchors, base, t);
      CHECK((v.mat().transpose() * v.mat() - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-10);
    }
  }
}

TEST_CASE("error decay and base mildness on the block rotation family") {
  TrajectoryFamily fam = block_rotation_trajectory(40, 4, 17);
  std::vector<double> grid;
  for (int i = 0; i <= 60; ++i) grid.push_back(-1.0 + 2.0 * i / 60.0);
  std::vector<StiefelRep> exact;
  for (double t : grid) exact.emplace_back(fam.exact_pair(t).vectors);

  auto max_err = [&](int order, const BasePolicy& policy) {
    AnchorSet anchors = fam.anchors_at(chebyshev_nodes(order, -1.0, 1.0));
    StiefelRep base = choose_base_point(anchors, policy);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      worst = std::max(worst,
                       projector_distance(interpolate_subspace(anchors, base, grid[i]), exact[i]));
    return worst;
  };

  double e2 = max_err(2, BasePolicy::middle());
  double e4 = max_err(4, BasePolicy::middle());
  double e6 = max_err(6, BasePolicy::middle());
  double e8 = max_err(8, BasePolicy::middle());
  CHECK(e4 <= 1.05 * e2);
  CHECK(e6 <= 1.05 * e4);
  CHECK(e8 <= 1.05 * e6);
  CHECK(e8 <= 0.1 * e2);

  // a valid external base moves the error by less than an order of magnitude
  std::mt19937_64 rng(77);
  AnchorSet anchors6 = fam.anchors_at(chebyshev_nodes(6, -1.0, 1.0));
  StiefelRep mid = choose_base_point(anchors6, BasePolicy::middle());
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd g(40, 4);
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 40; ++r) g(r, c) = gauss(rng);
  g -= mid.mat() * (mid.mat().transpose() * g);
  g *= 0.3 / g.norm();
  StiefelRep external = grassmann_exp(mid, TangentVector(mid, g));
  std::vector<std::size_t> flagged;
  (void)choose_base_point(anchors6, BasePolicy::external_rep(external), &flagged);
  REQUIRE(flagged.empty());  // valid base: no anchor near the cut locus
  double e_mid = max_err(6, BasePolicy::middle());
  double e_ext = max_err(6, BasePolicy::external_rep(external));
  CHECK(e_ext < 10.0 * e_mid);
  CHECK(e_mid < 10.0 * e_ext);
}

TEST_CASE("cached tangents give identical concurrent queries") {
  TrajectoryFamily fam = block_rotation_trajectory(24, 3, 9);
  AnchorSet anchors = fam.anchors_at(chebyshev_nodes(5, -1.0, 1.0));
  StiefelRep base = choose_base_point(anchors, BasePolicy::middle());
  anchors.tangents_for(base);  // eager fill

  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(-1.0 + 2.0 * i / 40.0);
  std::vector<Eigen::MatrixXd> serial(grid.size()), concurrent(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    serial[i] = interpolate_subspace(anchors, base, grid[i]).mat();
  parallel_for(grid.size(), [&](std::size_t i) {
    concurrent[i] = interpolate_subspace(anchors, base, grid[i]).mat();
  });
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK((serial[i] - concurrent[i]).norm() == 0.0);
}
