#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "grassfilt/dpg.hpp"
#include "grassfilt/error.hpp"
#include "grassfilt/filters.hpp"
#include "grassfilt/graph.hpp"
#include "grassfilt/interpolation.hpp"
#include "grassfilt/spectral.hpp"

namespace grassfilt {

/// Disjoint train / validation / evaluation masks over the vertices with
/// observed labels.
struct SplitSpec {
  std::vector<bool> known_mask;
  std::vector<bool> train_mask;
  std::vector<bool> val_mask;
  std::vector<bool> eval_mask;
  std::uint64_t seed = 0;

  void validate() const {
    const std::size_t n = known_mask.size();
    if (train_mask.size() != n || val_mask.size() != n || eval_mask.size() != n)
      fail(ErrorCode::DimensionMismatch, "split masks must share the vertex count");
    std::size_t tr = 0, va = 0, ev = 0;
    for (std::size_t i = 0; i < n; ++i) {
      int parts = int(train_mask[i]) + int(val_mask[i]) + int(eval_mask[i]);
      if (parts > 1) fail(ErrorCode::ConfigInvalid, "split masks overlap");
      if ((parts == 1) != bool(known_mask[i]))
        fail(ErrorCode::ConfigInvalid, "split masks must partition the known vertices");
      tr += train_mask[i];
      va += val_mask[i];
      ev += eval_mask[i];
    }
    if (va == 0) fail(ErrorCode::EmptyValidation, "validation mask is empty");
    if (tr == 0 || ev == 0)
      fail(ErrorCode::ConfigInvalid, "train and evaluation masks must be nonempty");
  }
};

/// Random split over the vertices marked labeled: `known_fraction` of them
/// are observed; of those, 70% train, 10% validate, and the rest evaluate
/// (at least one vertex in every part).
inline SplitSpec make_split(const std::vector<bool>& labeled, double known_fraction,
                            std::uint64_t seed) {
  const int n = static_cast<int>(labeled.size());
  std::vector<int> order;
  for (int i = 0; i < n; ++i)
    if (labeled[i]) order.push_back(i);
  if (order.size() < 3)
    fail(ErrorCode::InvalidArgument, "need at least three labeled vertices to split");
  int n_known = std::max(3, static_cast<int>(std::lround(known_fraction * order.size())));
  n_known = std::min<int>(n_known, static_cast<int>(order.size()));
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  int n_tr = std::max(1, static_cast<int>(std::lround(0.7 * n_known)));
  int n_va = std::max(1, static_cast<int>(std::lround(0.1 * n_known)));
  while (n_tr + n_va >= n_known) (n_tr > 1 ? n_tr : n_va) -= 1;
  SplitSpec s;
  s.seed = seed;
  s.known_mask.assign(n, false);
  s.train_mask.assign(n, false);
  s.val_mask.assign(n, false);
  s.eval_mask.assign(n, false);
  for (int i = 0; i < n_known; ++i) {
    s.known_mask[order[i]] = true;
    if (i < n_tr)
      s.train_mask[order[i]] = true;
    else if (i < n_tr + n_va)
      s.val_mask[order[i]] = true;
    else
      s.eval_mask[order[i]] = true;
  }
  s.validate();
  return s;
}

/// Convenience overload for fully labeled vertex sets.
inline SplitSpec make_split(int n, double known_fraction, std::uint64_t seed) {
  return make_split(std::vector<bool>(n, true), known_fraction, seed);
}

struct TapsFit {
  FilterTaps h;
  double alpha = 0.0;
  double residual = 0.0;  // final objective value (data term + ridge term)
  int m = 0;
  bool rank_warning = false;  // fewer fit rows than taps
};

/// Ridge least-squares fit of the taps: the filtered training signal should
/// carry unit margin on the fit vertices. Rows of the design are restricted
/// to vertices where x_fit is nonzero (zero rows carry no information).
inline TapsFit learn_taps(const SpectralPair& pair, const Eigen::VectorXd& x_tr,
                          const Eigen::VectorXd& x_fit, int m, double alpha) {
  if (m < 1) fail(ErrorCode::InvalidArgument, "tap count must be >= 1");
  if (alpha < 0.0) fail(ErrorCode::InvalidArgument, "ridge weight must be nonnegative");
  const auto n = pair.vectors.rows();
  if (x_tr.size() != n || x_fit.size() != n)
    fail(ErrorCode::DimensionMismatch, "signal lengths do not match the basis");

  Eigen::MatrixXd psi = vandermonde(pair.values, m);
  // design = diag(x_fit) * V * diag(V^T x_tr) * Psi, kept on the fit rows
  Eigen::MatrixXd full = pair.vectors * (pair.vectors.transpose() * x_tr).asDiagonal() * psi;
  std::vector<int> rows;
  for (int i = 0; i < n; ++i)
    if (x_fit[i] != 0.0) rows.push_back(i);
  if (rows.empty()) fail(ErrorCode::InvalidArgument, "x_fit selects no vertices");

  Eigen::MatrixXd design(rows.size(), m);
  for (std::size_t r = 0; r < rows.size(); ++r)
    design.row(r) = x_fit[rows[r]] * full.row(rows[r]);
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(static_cast<int>(rows.size()));

  TapsFit fit;
  fit.alpha = alpha;
  fit.m = m;
  fit.rank_warning = static_cast<int>(rows.size()) < m;
  if (alpha == 0.0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double smax = svd.singularValues().maxCoeff();
    if (svd.singularValues().minCoeff() <= 1e-12 * std::max(smax, 1.0))
      fail(ErrorCode::SingularNormalEquations,
           "design is rank-deficient; a positive ridge weight is required");
    fit.h.h = svd.solve(rhs);
  } else {
    Eigen::MatrixXd normal = design.transpose() * design;
    normal.diagonal().array() += alpha;
    fit.h.h = normal.ldlt().solve(design.transpose() * rhs);
  }
  fit.residual = (design * fit.h.h - rhs).squaredNorm() + alpha * fit.h.h.squaredNorm();
  return fit;
}

struct BinaryPrediction {
  Eigen::VectorXd scores;
  Eigen::VectorXi labels;  // +1 / -1; zero scores resolve to +1
};

/// Propagates the known signal through the low-pass filter and thresholds
/// at zero.
inline BinaryPrediction predict_binary(const SpectralPair& pair, const FilterTaps& taps,
                                       const Eigen::VectorXd& x_kn) {
  FactoredFilter f = build_lowpass(pair, taps);
  BinaryPrediction out;
  out.scores = apply_filter(f, x_kn);
  out.labels = Eigen::VectorXi(out.scores.size());
  for (int i = 0; i < out.scores.size(); ++i) out.labels[i] = out.scores[i] >= 0.0 ? 1 : -1;
  return out;
}

/// One-vs-all multi-class rule: per-class scores stacked, label = argmax,
/// ties resolved towards the lowest class index.
inline Eigen::VectorXi predict_multiclass(const SpectralPair& pair,
                                          const std::vector<TapsFit>& per_class_taps,
                                          const std::vector<Eigen::VectorXd>& x_kn_onevsall) {
  const std::size_t c = per_class_taps.size();
  if (c < 2) fail(ErrorCode::InvalidArgument, "need at least two classes");
  if (x_kn_onevsall.size() != c)
    fail(ErrorCode::DimensionMismatch, "one signal per class required");
  const auto n = pair.vectors.rows();
  Eigen::VectorXi labels = Eigen::VectorXi::Zero(n);
  Eigen::VectorXd best = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
  for (std::size_t cls = 0; cls < c; ++cls) {
    BinaryPrediction p = predict_binary(pair, per_class_taps[cls].h, x_kn_onevsall[cls]);
    for (int i = 0; i < n; ++i) {
      if (p.scores[i] > best[i]) {
        best[i] = p.scores[i];
        labels[i] = static_cast<int>(cls);
      }
    }
  }
  return labels;
}

inline double evaluate_accuracy(const Eigen::VectorXi& pred, const Eigen::VectorXi& truth,
                                const std::vector<bool>& mask) {
  if (pred.size() != truth.size() || static_cast<std::size_t>(pred.size()) != mask.size())
    fail(ErrorCode::DimensionMismatch, "prediction, truth and mask lengths differ");
  int total = 0, hits = 0;
  for (int i = 0; i < pred.size(); ++i) {
    if (!mask[i]) continue;
    ++total;
    hits += (pred[i] == truth[i]);
  }
  if (total == 0) fail(ErrorCode::EmptyMask, "mask selects no vertices");
  return static_cast<double>(hits) / total;
}

enum class DeltaSearch { Grid, GoldenSection };

struct SelectDeltaConfig {
  int k = 3;
  int m = 5;             // tap count
  double alpha = 1e-3;   // ridge weight
  int grid_size = 32;
  DeltaSearch search = DeltaSearch::Grid;
  bool use_interpolation = false;
  int anchors_per_sweep = 10;
  // Interpolation anchors live on this quantile band of the score
  // distribution: the extreme thresholds produce (near-)empty or complete
  // graphs whose low-frequency subspaces sit across the cut locus from any
  // mid-range base point.
  double interp_band_lo = 0.05;
  double interp_band_hi = 0.80;
};

struct DeltaCurvePoint {
  double delta = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
  int n_edges = 0;
};

struct DeltaReport {
  double delta_star = 0.0;
  std::vector<DeltaCurvePoint> curve;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
  bool golden_section_warning = false;  // derivative-free search assumes unimodality
};

namespace detail {

/// Trains the low-pass classifier on the training vertices of one family
/// member and scores it. Binary tasks propagate one +/-1 signal; more
/// classes run the one-vs-all rule.
struct LowpassClassifier {
  const SplitSpec& split;
  const Eigen::VectorXi& labels;  // class indices 0..C-1
  int n_classes;
  int m;
  double alpha;
  std::vector<Eigen::VectorXd> signals;  // per class: +1 own train, -1 other train

  LowpassClassifier(const SplitSpec& s, const Eigen::VectorXi& l, int m_, double alpha_)
      : split(s), labels(l), m(m_), alpha(alpha_) {
    const auto n = labels.size();
    n_classes = 0;
    for (int i = 0; i < n; ++i)
      if (split.known_mask[i]) n_classes = std::max(n_classes, labels[i] + 1);
    if (n_classes < 2) fail(ErrorCode::MissingLabels, "need at least two label classes");
    for (int c = 0; c < n_classes; ++c) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < n; ++i)
        if (split.train_mask[i]) x[i] = labels[i] == c ? 1.0 : -1.0;
      signals.push_back(std::move(x));
    }
  }

  Eigen::VectorXi classify(const SpectralPair& pair) const {
    if (n_classes == 2) {
      TapsFit fit = learn_taps(pair, signals[0], signals[0], m, alpha);
      BinaryPrediction pred = predict_binary(pair, fit.h, signals[0]);
      Eigen::VectorXi idx(pred.labels.size());
      for (int i = 0; i < idx.size(); ++i) idx[i] = pred.labels[i] == 1 ? 0 : 1;
      return idx;
    }
    std::vector<TapsFit> fits;
    fits.reserve(n_classes);
    for (int c = 0; c < n_classes; ++c)
      fits.push_back(learn_taps(pair, signals[c], signals[c], m, alpha));
    return predict_multiclass(pair, fits, signals);
  }
};

struct DeltaEvaluator {
  const DpgEmbedding& emb;
  const SplitSpec& split;
  const Eigen::VectorXi& labels;
  const SelectDeltaConfig& cfg;
  LowpassClassifier clf;
  std::optional<AnchorSet> anchors;
  std::optional<StiefelRep> base;

  DeltaEvaluator(const DpgEmbedding& e, const SplitSpec& s, const Eigen::VectorXi& l,
                 const SelectDeltaConfig& c)
      : emb(e), split(s), labels(l), cfg(c), clf(s, l, c.m, c.alpha) {
    int val_count = 0;
    for (std::size_t i = 0; i < split.val_mask.size(); ++i) val_count += split.val_mask[i];
    if (val_count == 0) fail(ErrorCode::EmptyValidation, "validation mask is empty");
  }

  SpectralPair basis_at(double delta, const Eigen::MatrixXd& lap) const {
    if (anchors) {
      StiefelRep vt = interpolate_subspace(*anchors, *base, delta);
      auto [lam, o] = rayleigh_ritz_align(vt, lap);
      SpectralPair pair;
      pair.values = lam;
      pair.vectors = vt.mat() * o;
      return pair;
    }
    return extremal_eigenpairs(lap, cfg.k, Extremal::Smallest);
  }

  DeltaCurvePoint eval(double delta) const {
    Graph g = dpg_at_threshold(emb, delta);
    Eigen::MatrixXd lap = shift_operator(g, ShiftKind::Laplacian);
    SpectralPair pair = basis_at(delta, lap);
    Eigen::VectorXi pred = clf.classify(pair);
    DeltaCurvePoint pt;
    pt.delta = delta;
    pt.n_edges = g.m();
    pt.val_acc = evaluate_accuracy(pred, labels, split.val_mask);
    pt.test_acc = evaluate_accuracy(pred, labels, split.eval_mask);
    return pt;
  }
};

}  // namespace detail

/// Validation-driven threshold selection over the dot-product-graph family.
/// `labels` carry class indices (0-based); two classes use the signed
/// low-pass rule, more classes go one-vs-all. Every candidate re-estimates
/// its taps on the training vertices and is scored on the validation
/// vertices; ties resolve to the smaller threshold. With `use_interpolation`
/// the per-candidate eigensolve is replaced by normal-coordinate
/// interpolation between `anchors_per_sweep` exactly solved Chebyshev
/// anchors.
inline DeltaReport select_delta(const DpgEmbedding& emb, const SplitSpec& split,
                                const Eigen::VectorXi& labels, const SelectDeltaConfig& cfg) {
  split.validate();
  if (labels.size() != emb.f.rows())
    fail(ErrorCode::DimensionMismatch, "label vector does not match the embedding");
  DeltaRange range = delta_range(emb);
  detail::DeltaEvaluator ev(emb, split, labels, cfg);

  double grid_lo = 0.0, grid_hi = 1.0;
  if (cfg.use_interpolation) {
    grid_lo = cfg.interp_band_lo;
    grid_hi = cfg.interp_band_hi;
    std::vector<double> anchor_ts;
    {
      std::vector<double> band = quantile_grid(range, 2, grid_lo, grid_hi);
      anchor_ts = chebyshev_nodes(cfg.anchors_per_sweep, band.front(), band.back());
    }
    std::vector<StiefelRep> reps;
    std::vector<Eigen::VectorXd> spectra;
    std::vector<double> resid;
    for (double a : anchor_ts) {
      Graph g = dpg_at_threshold(emb, a);
      SpectralPair p =
          extremal_eigenpairs(shift_operator(g, ShiftKind::Laplacian), cfg.k, Extremal::Smallest);
      reps.emplace_back(p.vectors);
      spectra.push_back(p.values);
      resid.push_back(p.max_residual);
    }
    ev.anchors.emplace(anchor_ts, std::move(reps), std::move(spectra), std::move(resid));
    ev.base = choose_base_point(*ev.anchors, BasePolicy::middle());
  }

  DeltaReport report;
  if (cfg.search == DeltaSearch::Grid) {
    std::vector<double> grid = quantile_grid(range, cfg.grid_size, grid_lo, grid_hi);
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      report.curve.push_back(ev.eval(grid[i]));
      if (report.curve[i].val_acc > report.curve[best].val_acc) best = i;
    }
    report.delta_star = report.curve[best].delta;
    report.val_accuracy = report.curve[best].val_acc;
    report.test_accuracy = report.curve[best].test_acc;
  } else {
    report.golden_section_warning = true;  // the validation curve is typically non-smooth
    std::vector<double> band = quantile_grid(range, 2, grid_lo, grid_hi);
    double a = band.front(), b = band.back();
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    DeltaCurvePoint pc = ev.eval(c), pd = ev.eval(d);
    report.curve.push_back(pc);
    report.curve.push_back(pd);
    for (int it = 0; it < 24 && (b - a) > 1e-9 * (range.delta_max - range.delta_min); ++it) {
      if (pc.val_acc >= pd.val_acc) {
        b = d;
        d = c;
        pd = pc;
        c = b - invphi * (b - a);
        pc = ev.eval(c);
        report.curve.push_back(pc);
      } else {
        a = c;
        c = d;
        pc = pd;
        d = a + invphi * (b - a);
        pd = ev.eval(d);
        report.curve.push_back(pd);
      }
    }
    const DeltaCurvePoint& win = (pc.val_acc >= pd.val_acc) ? pc : pd;
    report.delta_star = win.delta;
    report.val_accuracy = win.val_acc;
    report.test_accuracy = win.test_acc;
  }
  return report;
}

}  // namespace grassfilt
