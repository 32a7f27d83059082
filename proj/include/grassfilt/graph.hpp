#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "grassfilt/error.hpp"

namespace grassfilt {

struct Edge {
  int i = 0;
  int j = 0;  // i < j after canonicalization
  double w = 1.0;
};

/// Weighted undirected graph on a fixed vertex set. Edges are stored once
/// with i < j; matrices are assembled on demand.
struct Graph {
  int n = 0;
  std::vector<Edge> edges;
  bool signed_ok = false;

  int m() const { return static_cast<int>(edges.size()); }

  Eigen::VectorXd degrees() const {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (const auto& e : edges) {
      d[e.i] += e.w;
      d[e.j] += e.w;
    }
    return d;
  }

  Eigen::MatrixXd adjacency() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : edges) {
      a(e.i, e.j) = e.w;
      a(e.j, e.i) = e.w;
    }
    return a;
  }
};

enum class ShiftKind {
  Adjacency,
  Laplacian,
  NormalizedLaplacian,
  RandomWalkLaplacian,
  DegreeMatrix,
};

enum class KnnWeightMode {
  GaussianKernel,
  RawDistance,
  Unit,
};

/// Canonicalizes an edge list into a Graph: symmetrizes index pairs, sorts,
/// and validates. A pair listed twice (in either orientation) is an error.
inline Graph build_graph(int n, std::vector<std::tuple<int, int, double>> edge_list,
                         bool signed_ok = false) {
  if (n < 0) fail(ErrorCode::InvalidArgument, "vertex count must be nonnegative");
  Graph g;
  g.n = n;
  g.signed_ok = signed_ok;
  g.edges.reserve(edge_list.size());
  for (const auto& [i, j, w] : edge_list) {
    if (i < 0 || i >= n || j < 0 || j >= n)
      fail(ErrorCode::IndexOutOfRange,
           "edge (" + std::to_string(i) + "," + std::to_string(j) + ") outside [0," +
               std::to_string(n) + ")");
    if (i == j) fail(ErrorCode::SelfLoop, "self-loop at vertex " + std::to_string(i));
    if (!signed_ok && w < 0.0)
      fail(ErrorCode::NegativeWeight, "negative weight on edge (" + std::to_string(i) + "," +
                                          std::to_string(j) + ")");
    Edge e;
    e.i = std::min(i, j);
    e.j = std::max(i, j);
    e.w = w;
    g.edges.push_back(e);
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });
  for (std::size_t k = 1; k < g.edges.size(); ++k) {
    if (g.edges[k - 1].i == g.edges[k].i && g.edges[k - 1].j == g.edges[k].j)
      fail(ErrorCode::DuplicateEdge, "edge (" + std::to_string(g.edges[k].i) + "," +
                                         std::to_string(g.edges[k].j) + ") listed twice");
  }
  return g;
}

/// Dense shift operator. Signed graphs use the same L = D - A with
/// D = diag(A 1); normalized variants reject |degree| < 1e-12.
inline Eigen::MatrixXd shift_operator(const Graph& g, ShiftKind kind) {
  const Eigen::VectorXd deg = g.degrees();
  auto check_degrees = [&]() {
    for (int v = 0; v < g.n; ++v)
      if (std::abs(deg[v]) < 1e-12)
        fail(ErrorCode::ZeroDegree, "vertex " + std::to_string(v) + " has (near-)zero degree");
  };
  switch (kind) {
    case ShiftKind::Adjacency:
      return g.adjacency();
    case ShiftKind::DegreeMatrix:
      return deg.asDiagonal();
    case ShiftKind::Laplacian: {
      Eigen::MatrixXd l = -g.adjacency();
      l.diagonal() = deg;
      return l;
    }
    case ShiftKind::NormalizedLaplacian: {
      check_degrees();
      // |D|^{-1/2} L |D|^{-1/2}: equals the usual normalized Laplacian for
      // positive degrees and stays real-symmetric on signed graphs.
      Eigen::VectorXd dinv = deg.array().abs().sqrt().inverse();
      Eigen::MatrixXd l = -g.adjacency();
      l.diagonal() = deg;
      return dinv.asDiagonal() * l * dinv.asDiagonal();
    }
    case ShiftKind::RandomWalkLaplacian: {
      check_degrees();
      Eigen::MatrixXd out = -(deg.cwiseInverse().asDiagonal() * g.adjacency());
      out.diagonal().array() += 1.0;
      return out;
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown shift kind");
}

/// Sparse triplet export (row, col, value) of the same operator, both
/// orientations included; intended for n beyond dense desk scale.
inline std::vector<std::tuple<int, int, double>> shift_triplets(const Graph& g, ShiftKind kind) {
  std::vector<std::tuple<int, int, double>> t;
  const Eigen::VectorXd deg = g.degrees();
  switch (kind) {
    case ShiftKind::Adjacency:
      for (const auto& e : g.edges) {
        t.emplace_back(e.i, e.j, e.w);
        t.emplace_back(e.j, e.i, e.w);
      }
      return t;
    case ShiftKind::DegreeMatrix:
      for (int v = 0; v < g.n; ++v) t.emplace_back(v, v, deg[v]);
      return t;
    case ShiftKind::Laplacian:
      for (const auto& e : g.edges) {
        t.emplace_back(e.i, e.j, -e.w);
        t.emplace_back(e.j, e.i, -e.w);
      }
      for (int v = 0; v < g.n; ++v) t.emplace_back(v, v, deg[v]);
      return t;
    default:
      break;
  }
  // Normalized variants go through the dense assembly path.
  Eigen::MatrixXd s = shift_operator(g, kind);
  for (int r = 0; r < g.n; ++r)
    for (int c = 0; c < g.n; ++c)
      if (s(r, c) != 0.0) t.emplace_back(r, c, s(r, c));
  return t;
}

/// Symmetrized k-nearest-neighbour graph: an edge is present if either
/// endpoint selects the other. Ties break by ascending vertex index.
inline Graph knn_graph(const Eigen::MatrixXd& features, int kappa,
                       KnnWeightMode weight_mode = KnnWeightMode::GaussianKernel) {
  const int n = static_cast<int>(features.rows());
  if (kappa < 1) fail(ErrorCode::InvalidArgument, "kappa must be >= 1");
  if (n < kappa + 1)
    fail(ErrorCode::InvalidArgument,
         "need at least kappa+1 points, got " + std::to_string(n));

  std::vector<std::pair<int, int>> pairs;  // selected (i -> j), i != j
  std::vector<double> dist_of_pair;
  pairs.reserve(static_cast<std::size_t>(n) * kappa);
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> cand;
    cand.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      cand.emplace_back((features.row(i) - features.row(j)).norm(), j);
    }
    std::partial_sort(cand.begin(), cand.begin() + kappa, cand.end());
    for (int s = 0; s < kappa; ++s) {
      pairs.emplace_back(i, cand[s].second);
      dist_of_pair.push_back(cand[s].first);
    }
  }

  // symmetrize: unordered pair kept once with its distance
  std::vector<std::tuple<int, int, double>> sym;
  sym.reserve(pairs.size());
  for (std::size_t s = 0; s < pairs.size(); ++s) {
    int a = std::min(pairs[s].first, pairs[s].second);
    int b = std::max(pairs[s].first, pairs[s].second);
    sym.emplace_back(a, b, dist_of_pair[s]);
  }
  std::sort(sym.begin(), sym.end());
  sym.erase(std::unique(sym.begin(), sym.end(),
                        [](const auto& x, const auto& y) {
                          return std::get<0>(x) == std::get<0>(y) &&
                                 std::get<1>(x) == std::get<1>(y);
                        }),
            sym.end());

  double bandwidth = 1.0;
  if (weight_mode == KnnWeightMode::GaussianKernel) {
    std::vector<double> ds;
    ds.reserve(sym.size());
    for (const auto& [a, b, d] : sym) ds.push_back(d);
    std::nth_element(ds.begin(), ds.begin() + ds.size() / 2, ds.end());
    bandwidth = ds[ds.size() / 2];
    if (bandwidth <= 0.0) bandwidth = 1.0;  // all selected points coincide
  }

  std::vector<std::tuple<int, int, double>> edges;
  edges.reserve(sym.size());
  for (const auto& [a, b, d] : sym) {
    double w = 1.0;
    switch (weight_mode) {
      case KnnWeightMode::GaussianKernel:
        w = std::exp(-(d * d) / (2.0 * bandwidth * bandwidth));
        break;
      case KnnWeightMode::RawDistance:
        w = d;
        break;
      case KnnWeightMode::Unit:
        w = 1.0;
        break;
    }
    edges.emplace_back(a, b, w);
  }
  return build_graph(n, std::move(edges), /*signed_ok=*/false);
}

struct KarateClub {
  Graph graph;
  std::vector<int> labels;  // two factions, 0/1
};

/// Zachary's karate club: 34 vertices, 78 unweighted edges, binary split.
inline KarateClub karate_club() {
  static const int kEdges[78][2] = {
      {0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},   {0, 8},
      {0, 10},  {0, 11},  {0, 12},  {0, 13},  {0, 17},  {0, 19},  {0, 21},  {0, 31},
      {1, 2},   {1, 3},   {1, 7},   {1, 13},  {1, 17},  {1, 19},  {1, 21},  {1, 30},
      {2, 3},   {2, 7},   {2, 8},   {2, 9},   {2, 13},  {2, 27},  {2, 28},  {2, 32},
      {3, 7},   {3, 12},  {3, 13},  {4, 6},   {4, 10},  {5, 6},   {5, 10},  {5, 16},
      {6, 16},  {8, 30},  {8, 32},  {8, 33},  {9, 33},  {13, 33}, {14, 32}, {14, 33},
      {15, 32}, {15, 33}, {18, 32}, {18, 33}, {19, 33}, {20, 32}, {20, 33}, {22, 32},
      {22, 33}, {23, 25}, {23, 27}, {23, 29}, {23, 32}, {23, 33}, {24, 25}, {24, 27},
      {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31}, {28, 33}, {29, 32},
      {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33}, {32, 33}};
  static const int kLabels[34] = {0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0,
                                  0, 1, 0, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  std::vector<std::tuple<int, int, double>> edges;
  edges.reserve(78);
  for (const auto& e : kEdges) edges.emplace_back(e[0], e[1], 1.0);
  KarateClub kc;
  kc.graph = build_graph(34, std::move(edges));
  kc.labels.assign(kLabels, kLabels + 34);
  return kc;
}

}  // namespace grassfilt
