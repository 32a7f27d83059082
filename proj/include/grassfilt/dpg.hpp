#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "grassfilt/error.hpp"
#include "grassfilt/graph.hpp"
#include "grassfilt/spectral.hpp"

namespace grassfilt {

/// Two-sided rank-d spectral embedding of an adjacency matrix: rows of f
/// and g are the left/right latent positions, and f g^T is the truncated
/// SVD reconstruction.
struct DpgEmbedding {
  Eigen::MatrixXd f;
  Eigen::MatrixXd g;
  int d = 0;
  double source_norm = 0.0;
  int negative_modes = 0;  // top-d singular triplets stemming from negative eigenvalues
};

inline DpgEmbedding spectral_embedding(const Eigen::MatrixXd& a, int d) {
  detail::check_symmetric(a, "spectral_embedding");
  const int n = static_cast<int>(a.rows());
  if (d < 1 || d > n)
    fail(ErrorCode::RankOutOfRange, "need 1 <= d <= n, got d=" + std::to_string(d));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd root = svd.singularValues().head(d).cwiseMax(0.0).cwiseSqrt();
  DpgEmbedding emb;
  emb.d = d;
  emb.source_norm = a.norm();
  emb.f = svd.matrixU().leftCols(d) * root.asDiagonal();
  emb.g = svd.matrixV().leftCols(d) * root.asDiagonal();
  for (int c = 0; c < d; ++c)
    if (svd.matrixU().col(c).dot(svd.matrixV().col(c)) < 0.0) ++emb.negative_modes;
  return emb;
}

namespace detail {
inline double pair_score(const DpgEmbedding& emb, int i, int j) {
  return std::min(emb.f.row(i).dot(emb.g.row(j)), emb.f.row(j).dot(emb.g.row(i)));
}
}  // namespace detail

/// Thresholded dot product graph: the edge [i,j] exists iff the symmetrized
/// latent score exceeds delta, with the margin as its weight (soft
/// threshold, so all emitted weights are strictly positive).
inline Graph dpg_at_threshold(const DpgEmbedding& emb, double delta) {
  const int n = static_cast<int>(emb.f.rows());
  std::vector<std::tuple<int, int, double>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double s = detail::pair_score(emb, i, j);
      if (s > delta) edges.emplace_back(i, j, s - delta);
    }
  return build_graph(n, std::move(edges));
}

struct DeltaRange {
  double delta_min = 0.0;
  double delta_max = 0.0;
  std::vector<double> scores;  // all pairwise scores, ascending
};

/// Score distribution over vertex pairs (i < j): grid construction for
/// threshold sweeps.
inline DeltaRange delta_range(const DpgEmbedding& emb) {
  const int n = static_cast<int>(emb.f.rows());
  if (n < 2) fail(ErrorCode::InvalidArgument, "need at least two vertices");
  DeltaRange r;
  r.scores.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) r.scores.push_back(detail::pair_score(emb, i, j));
  std::sort(r.scores.begin(), r.scores.end());
  r.delta_min = r.scores.front();
  r.delta_max = r.scores.back();
  return r;
}

/// Evenly spaced quantiles of the score distribution; default grid for
/// delta sweeps (uniform-in-delta grids waste points where nothing changes).
inline std::vector<double> quantile_grid(const DeltaRange& range, int points, double q_lo = 0.0,
                                         double q_hi = 1.0) {
  if (points < 1) fail(ErrorCode::InvalidArgument, "need at least one grid point");
  if (!(q_lo <= q_hi) || q_lo < 0.0 || q_hi > 1.0)
    fail(ErrorCode::InvalidArgument, "quantile band must satisfy 0 <= lo <= hi <= 1");
  const auto& s = range.scores;
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    double q = (points == 1) ? q_lo : q_lo + (q_hi - q_lo) * i / (points - 1.0);
    double pos = q * (s.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    auto hi = std::min(lo + 1, s.size() - 1);
    grid[i] = s[lo] + (pos - lo) * (s[hi] - s[lo]);
  }
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

/// Edge-set Jaccard similarity between a thresholded DPG and a reference
/// graph; diagnostic for how closely the family tracks the source topology.
inline double edge_jaccard(const Graph& a, const Graph& b) {
  if (a.n != b.n) fail(ErrorCode::DimensionMismatch, "graphs differ in vertex count");
  std::size_t ia = 0, ib = 0, inter = 0;
  while (ia < a.edges.size() && ib < b.edges.size()) {
    auto ka = std::make_pair(a.edges[ia].i, a.edges[ia].j);
    auto kb = std::make_pair(b.edges[ib].i, b.edges[ib].j);
    if (ka == kb) {
      ++inter;
      ++ia;
      ++ib;
    } else if (ka < kb) {
      ++ia;
    } else {
      ++ib;
    }
  }
  std::size_t uni = a.edges.size() + b.edges.size() - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace grassfilt
