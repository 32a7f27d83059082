#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <tuple>

#include "grassfilt/error.hpp"

namespace grassfilt {

/// Extremal eigenpairs of a symmetric operator. `values` are sorted per the
/// producing call (ascending for smallest, descending for largest); columns
/// of `vectors` are orthonormal. `eigengap_warning` is raised when the
/// requested invariant subspace is not separated from the rest of the
/// spectrum, i.e. the k-th and (k+1)-th eigenvalues (nearly) coincide.
struct SpectralPair {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  bool eigengap_warning = false;
  double max_residual = 0.0;
};

struct ThinSvd {
  Eigen::MatrixXd u;   // n x k, orthonormal columns
  Eigen::VectorXd s;   // length k, nonincreasing, nonnegative
  Eigen::MatrixXd w;   // k x k, orthogonal (right factor; M = u * diag(s) * w^T)
};

/// Thin SVD of a tall matrix (n >= k).
inline ThinSvd thin_svd(const Eigen::MatrixXd& m) {
  if (m.rows() < m.cols())
    fail(ErrorCode::DimensionMismatch, "thin_svd expects n >= k, got " +
                                           std::to_string(m.rows()) + "x" +
                                           std::to_string(m.cols()));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return ThinSvd{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

enum class Extremal { Smallest, Largest };

namespace detail {

/// Deterministic sign convention: flip each column so its entry of largest
/// magnitude is positive. Subspace-level code must not rely on this.
inline void fix_column_signs(Eigen::MatrixXd& v) {
  for (int c = 0; c < v.cols(); ++c) {
    int idx = 0;
    v.col(c).cwiseAbs().maxCoeff(&idx);
    if (v(idx, c) < 0) v.col(c) = -v.col(c);
  }
}

inline void check_symmetric(const Eigen::MatrixXd& s, const char* where) {
  if (s.rows() != s.cols())
    fail(ErrorCode::NotSymmetric, std::string(where) + ": matrix is not square");
  const double scale = std::max(1.0, s.norm());
  if ((s - s.transpose()).norm() > 1e-10 * scale)
    fail(ErrorCode::NotSymmetric, std::string(where) + ": asymmetry above tolerance");
}

/// Chebyshev-filtered subspace iteration for the k extremal eigenpairs of a
/// symmetric matrix. The filter amplifies the target end of the spectrum;
/// Rayleigh-Ritz extraction runs every sweep until the residual contract of
/// extremal_eigenpairs is met.
inline SpectralPair iterative_extremal(const Eigen::MatrixXd& s, int k, Extremal which) {
  const int n = static_cast<int>(s.rows());
  const double snorm = std::max(s.norm(), 1e-300);
  // work on b = s (largest) or b = -s (smallest): always chase the top end
  Eigen::MatrixXd b = (which == Extremal::Smallest) ? Eigen::MatrixXd(-s) : s;

  // certified spectral enclosure: Gershgorin can be far looser than the
  // Frobenius bound on dense matrices, so take the tighter of the two
  double gersh_lo = b(0, 0), gersh_hi = b(0, 0);
  for (int i = 0; i < n; ++i) {
    double r = b.row(i).cwiseAbs().sum() - std::abs(b(i, i));
    gersh_lo = std::min(gersh_lo, b(i, i) - r);
    gersh_hi = std::max(gersh_hi, b(i, i) + r);
  }
  const double lo = std::max(gersh_lo, -snorm);
  const double hi = std::min(gersh_hi, snorm);

  const int block = std::min(n, k + std::max(k, 10));
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd y(n, block);
  for (int c = 0; c < block; ++c)
    for (int r = 0; r < n; ++r) y(r, c) = gauss(rng);

  auto orth = [](Eigen::MatrixXd& m) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    m = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
  };
  orth(y);
  // one unfiltered sweep seeds the Ritz estimates the filter needs
  y = b * y;
  orth(y);

  const int degree = 24;
  const int max_sweeps = 300;
  const double tol = 3e-9 * snorm;  // three-fold headroom under the 1e-8 contract
  Eigen::VectorXd ritz;
  Eigen::MatrixXd ritz_vecs;
  {
    Eigen::MatrixXd small = y.transpose() * b * y;
    small = 0.5 * (small + small.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(small);
    ritz = es.eigenvalues();
    y = y * es.eigenvectors();
  }
  double last_worst = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    // Chebyshev filter on [lo, cut]: damps the unwanted part of the
    // spectrum, grows everything above the cut. The cut sits between the
    // Ritz estimates on either side of the wanted boundary.
    double cut = 0.5 * (ritz[block - k - 1] + ritz[block - k]);
    double spread = std::max(ritz[block - 1] - ritz[0], 1e-6 * snorm);
    if (cut >= ritz[block - k] - 1e-12 * snorm) cut = ritz[block - k] - 0.01 * spread;
    if (cut <= lo) cut = lo + 1e-3 * (hi - lo);
    if (cut >= hi) cut = hi - 1e-3 * (hi - lo);
    const double e = (cut - lo) / 2, c = (cut + lo) / 2;
    // near convergence the high-degree filter's own roundoff dominates;
    // plain power-RR sweeps polish the last digits
    const int deg_now = (last_worst > 1e3 * tol) ? degree : 2;
    Eigen::MatrixXd t0 = y;
    Eigen::MatrixXd t1 = (b * y - c * y) / e;
    for (int d = 2; d <= deg_now; ++d) {
      Eigen::MatrixXd t2 = 2.0 * (b * t1 - c * t1) / e - t0;
      t0.swap(t1);
      t1.swap(t2);
    }
    y = t1;
    orth(y);
    Eigen::MatrixXd small = y.transpose() * b * y;
    small = 0.5 * (small + small.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(small);
    ritz = es.eigenvalues();
    ritz_vecs = y * es.eigenvectors();
    y = ritz_vecs;

    // top-k of b live in the trailing columns (ascending order)
    Eigen::MatrixXd vk = ritz_vecs.rightCols(k);
    Eigen::VectorXd lk = ritz.tail(k);
    double worst = 0.0;
    Eigen::MatrixXd resid = b * vk - vk * lk.asDiagonal();
    for (int c2 = 0; c2 < k; ++c2) worst = std::max(worst, resid.col(c2).norm());
    last_worst = worst;
    if (worst <= tol) {
      SpectralPair out;
      out.max_residual = worst;
      out.vectors = Eigen::MatrixXd(n, k);
      out.values = Eigen::VectorXd(k);
      for (int c2 = 0; c2 < k; ++c2) {
        // reorder: smallest ascending / largest descending in the original s
        int src = k - 1 - c2;
        out.vectors.col(c2) = vk.col(src);
        out.values[c2] = (which == Extremal::Smallest) ? -lk[src] : lk[src];
      }
      fix_column_signs(out.vectors);
      // separation flag needs the (k+1)-th value: available from the block
      if (block > k) {
        double boundary_gap = std::abs(ritz[block - k] - ritz[block - k - 1]);
        out.eigengap_warning = boundary_gap < 1e-10 * snorm;
      }
      return out;
    }
  }
  fail(ErrorCode::ConvergenceFailure, "iterative eigensolver did not reach the residual contract");
}

}  // namespace detail

struct EigsOptions {
  int dense_threshold = 2000;  // above this the filtered iteration kicks in
  bool force_iterative = false;
};

/// k extremal eigenpairs of a symmetric matrix. Smallest values come back
/// ascending, largest descending. Per-pair residual is bounded by
/// 1e-8 * ||S||_F; the dense path is exact at desk scale.
inline SpectralPair extremal_eigenpairs(const Eigen::MatrixXd& s, int k, Extremal which,
                                        const EigsOptions& opts = {}) {
  detail::check_symmetric(s, "extremal_eigenpairs");
  const int n = static_cast<int>(s.rows());
  if (k < 1 || k >= n)
    fail(ErrorCode::KOutOfRange, "need 1 <= k < n, got k=" + std::to_string(k) +
                                     ", n=" + std::to_string(n));
  if (opts.force_iterative || n > opts.dense_threshold) return detail::iterative_extremal(s, k, which);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
  const Eigen::VectorXd& all = es.eigenvalues();  // ascending
  SpectralPair out;
  out.values = Eigen::VectorXd(k);
  out.vectors = Eigen::MatrixXd(n, k);
  double boundary_gap = 0.0;
  if (which == Extremal::Smallest) {
    out.values = all.head(k);
    out.vectors = es.eigenvectors().leftCols(k);
    boundary_gap = std::abs(all[k] - all[k - 1]);
  } else {
    for (int c = 0; c < k; ++c) {
      out.values[c] = all[n - 1 - c];
      out.vectors.col(c) = es.eigenvectors().col(n - 1 - c);
    }
    boundary_gap = std::abs(all[n - k] - all[n - k - 1]);
  }
  detail::fix_column_signs(out.vectors);
  out.eigengap_warning = boundary_gap < 1e-10 * std::max(s.norm(), 1e-300);
  Eigen::MatrixXd resid = s * out.vectors - out.vectors * out.values.asDiagonal();
  for (int c = 0; c < k; ++c) out.max_residual = std::max(out.max_residual, resid.col(c).norm());
  return out;
}

}  // namespace grassfilt
