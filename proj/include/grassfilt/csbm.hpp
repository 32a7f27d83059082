#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <string>

#include "grassfilt/error.hpp"
#include "grassfilt/graph.hpp"

namespace grassfilt {

/// Two-block contextual stochastic block model with time-varying feature
/// means. Cluster 1 keeps its mean fixed at mu_norm * u (u the normalized
/// all-ones direction); cluster 2's mean is rotated towards it in the fixed
/// (u, v) plane, with angle theta0 * (1 - t) / 2 on t in [-1, 1], so the two
/// means align exactly at t = 1.
struct CsbmConfig {
  int n1 = 50;
  int n2 = 100;
  double p = 0.45;
  double q = 0.4;
  int d = 64;
  double sigma = 1.0;
  double mu_norm = 8.0;   // base mean magnitude; 8 = sqrt(64) pairs with the default d
  double theta0 = M_PI / 2.0;
  std::uint64_t seed = 0;

  int n() const { return n1 + n2; }

  void validate() const {
    if (n1 < 1 || n2 < 1) fail(ErrorCode::ConfigInvalid, "cluster sizes must be >= 1");
    if (!(p > 0.0 && p <= 1.0) && p != 0.0)
      fail(ErrorCode::ConfigInvalid, "p must lie in (0,1] (0 allowed for degenerate tests)");
    if (!(q > 0.0 && q <= 1.0) && q != 0.0)
      fail(ErrorCode::ConfigInvalid, "q must lie in (0,1] (0 allowed for degenerate tests)");
    if (d < 1) fail(ErrorCode::ConfigInvalid, "feature dimension must be >= 1");
    if (sigma < 0.0) fail(ErrorCode::ConfigInvalid, "sigma must be nonnegative");
  }
};

enum class SimilarityMode { Signed, Absolute, Clamped };

namespace detail {

/// The fixed rotation plane: u is the normalized all-ones direction, v the
/// normalized component of e_0 orthogonal to u.
inline void csbm_plane(int d, Eigen::VectorXd& u, Eigen::VectorXd& v) {
  u = Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  v = Eigen::VectorXd::Zero(d);
  v[0] = 1.0;
  v -= v.dot(u) * u;
  double nv = v.norm();
  if (nv < 1e-12) {
    // d == 1: the plane degenerates; keep v = 0 so no rotation happens
    v.setZero();
  } else {
    v /= nv;
  }
}

}  // namespace detail

/// Mean vector of the given community (0 or 1) at time t.
inline Eigen::VectorXd csbm_mean(const CsbmConfig& cfg, double t, int community) {
  cfg.validate();
  Eigen::VectorXd u, v;
  detail::csbm_plane(cfg.d, u, v);
  if (community == 0) return cfg.mu_norm * u;
  if (community != 1) fail(ErrorCode::InvalidArgument, "community must be 0 or 1");
  double theta = cfg.theta0 * (1.0 - t) / 2.0;
  return cfg.mu_norm * (std::cos(theta) * u + std::sin(theta) * v);
}

/// Bernoulli(p) edges within blocks, Bernoulli(q) across, unit weights.
/// Deterministic given cfg.seed; the topology is meant to be drawn once per
/// trajectory and reused while only weights evolve.
inline Graph sample_csbm_graph(const CsbmConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::tuple<int, int, double>> edges;
  const int n = cfg.n();
  for (int i = 0; i < n; ++i) {
    bool ci = i >= cfg.n1;
    for (int j = i + 1; j < n; ++j) {
      bool cj = j >= cfg.n1;
      double prob = (ci == cj) ? cfg.p : cfg.q;
      if (unif(rng) < prob) edges.emplace_back(i, j, 1.0);
    }
  }
  return build_graph(n, std::move(edges));
}

/// Feature matrix at time t: row i ~ mean of its community plus sigma times
/// a Gaussian draw. The noise matrix is a function of cfg.seed alone (not
/// of t), so X(t) traces an analytic trajectory for a fixed seed; vary the
/// seed for independent draws.
inline Eigen::MatrixXd sample_features(const CsbmConfig& cfg, double t) {
  cfg.validate();
  const int n = cfg.n();
  Eigen::VectorXd m1 = csbm_mean(cfg, t, 0);
  Eigen::VectorXd m2 = csbm_mean(cfg, t, 1);
  // distinct stream from the topology draw
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd x(n, cfg.d);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd& mu = (i < cfg.n1) ? m1 : m2;
    for (int j = 0; j < cfg.d; ++j) x(i, j) = mu[j] + cfg.sigma * gauss(rng);
  }
  return x;
}

/// Multiplies each edge weight by the cosine similarity of its endpoints'
/// feature rows. Sparsity is preserved exactly; zero weights are kept.
inline Graph similarity_correction(const Graph& g, const Eigen::MatrixXd& x,
                                   SimilarityMode mode = SimilarityMode::Signed) {
  if (x.rows() != g.n)
    fail(ErrorCode::DimensionMismatch, "feature rows do not match the vertex count");
  Eigen::VectorXd norms = x.rowwise().norm();
  for (int i = 0; i < g.n; ++i)
    if (norms[i] < 1e-12)
      fail(ErrorCode::ZeroFeatureVector, "vertex " + std::to_string(i) + " has a zero feature row");
  Graph out;
  out.n = g.n;
  out.signed_ok = (mode == SimilarityMode::Signed);
  out.edges.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    double c = x.row(e.i).dot(x.row(e.j)) / (norms[e.i] * norms[e.j]);
    switch (mode) {
      case SimilarityMode::Signed: break;
      case SimilarityMode::Absolute: c = std::abs(c); break;
      case SimilarityMode::Clamped: c = std::max(c, 0.0); break;
    }
    out.edges.push_back({e.i, e.j, e.w * c});
  }
  return out;
}

/// Large-d proxy for the expected cosine similarity between draws centred at
/// mu_a and mu_b with identity covariance.
inline double cos_d(const Eigen::VectorXd& mu_a, const Eigen::VectorXd& mu_b, int d) {
  if (d < 1) fail(ErrorCode::InvalidArgument, "dimension must be >= 1");
  return mu_a.dot(mu_b) /
         (std::sqrt(mu_a.squaredNorm() + d) * std::sqrt(mu_b.squaredNorm() + d));
}

/// Expected similarity-corrected adjacency: block-constant with entries
/// p*k11, q*k12, p*k22 where k_ab = cos_d(mu_a(t), mu_b(t)); zero diagonal.
inline Eigen::MatrixXd expected_adjacency(const CsbmConfig& cfg, double t) {
  cfg.validate();
  Eigen::VectorXd m1 = csbm_mean(cfg, t, 0);
  Eigen::VectorXd m2 = csbm_mean(cfg, t, 1);
  double k11 = cos_d(m1, m1, cfg.d);
  double k12 = cos_d(m1, m2, cfg.d);
  double k22 = cos_d(m2, m2, cfg.d);
  const int n = cfg.n();
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    bool ci = i >= cfg.n1;
    for (int j = 0; j < n; ++j) {
      bool cj = j >= cfg.n1;
      if (i == j) {
        a(i, j) = 0.0;
      } else if (ci == cj) {
        a(i, j) = cfg.p * (ci ? k22 : k11);
      } else {
        a(i, j) = cfg.q * k12;
      }
    }
  }
  return a;
}

}  // namespace grassfilt
