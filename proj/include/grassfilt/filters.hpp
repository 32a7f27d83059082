#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <ostream>
#include <string>
#include <utility>

#include "grassfilt/error.hpp"
#include "grassfilt/grassmann.hpp"
#include "grassfilt/interpolation.hpp"
#include "grassfilt/spectral.hpp"

namespace grassfilt {

/// Polynomial filter coefficients h_0..h_{M-1} for the frequency response
/// r(lambda) = sum_i h_i lambda^i.
struct FilterTaps {
  Eigen::VectorXd h;

  int taps() const { return static_cast<int>(h.size()); }

  static FilterTaps from(std::initializer_list<double> coeffs) {
    FilterTaps t;
    t.h = Eigen::VectorXd(static_cast<int>(coeffs.size()));
    int i = 0;
    for (double c : coeffs) t.h[i++] = c;
    return t;
  }

  /// The halving profile h_i = 2^{-i}, i = 0..m-1.
  static FilterTaps halving(int m) {
    FilterTaps t;
    t.h = Eigen::VectorXd(m);
    for (int i = 0; i < m; ++i) t.h[i] = std::pow(2.0, -i);
    return t;
  }
};

/// Spectrum powers Psi_{ij} = lambda_i^{j-1}; first column all ones.
inline Eigen::MatrixXd vandermonde(const Eigen::VectorXd& lambda, int m) {
  if (m < 1) fail(ErrorCode::InvalidArgument, "need at least one column");
  Eigen::MatrixXd psi(lambda.size(), m);
  psi.col(0).setOnes();
  for (int j = 1; j < m; ++j) psi.col(j) = psi.col(j - 1).cwiseProduct(lambda);
  return psi;
}

/// Low-pass filter H = V diag(Psi(lambda) h) V^T held in factored form; the
/// dense n x n matrix is never materialized except through the test-scale
/// oracle below.
struct FactoredFilter {
  StiefelRep basis;
  Eigen::VectorXd lambda;  // ascending
  FilterTaps taps;
  bool broken_eigenspace = false;

  int n() const { return basis.n(); }
  int k() const { return basis.k(); }

  /// Per-eigenvalue response r = Psi(lambda) h.
  Eigen::VectorXd response() const { return vandermonde(lambda, taps.taps()) * taps.h; }

  /// Dense oracle, gated to tiny systems.
  Eigen::MatrixXd dense() const {
    if (n() > 64)
      fail(ErrorCode::InvalidArgument, "dense filter materialization is gated to n <= 64");
    Eigen::VectorXd r = response();
    return basis.mat() * r.asDiagonal() * basis.mat().transpose();
  }
};

inline FactoredFilter build_lowpass(const SpectralPair& pair, FilterTaps taps) {
  FactoredFilter f{StiefelRep(pair.vectors), pair.values, std::move(taps),
                   pair.eigengap_warning};
  for (int i = 1; i < f.lambda.size(); ++i)
    if (f.lambda[i] < f.lambda[i - 1])
      fail(ErrorCode::InvalidArgument, "low-pass filter expects an ascending spectrum");
  return f;
}

/// y = V (r .* (V^T x)); costs O(nk + kM).
inline Eigen::VectorXd apply_filter(const FactoredFilter& f, const Eigen::VectorXd& x) {
  if (x.size() != f.n())
    fail(ErrorCode::DimensionMismatch, "signal length " + std::to_string(x.size()) +
                                           " does not match n=" + std::to_string(f.n()));
  Eigen::VectorXd coeff = f.basis.mat().transpose() * x;
  return f.basis.mat() * f.response().cwiseProduct(coeff);
}

/// Rayleigh-Ritz on a trial basis: eigendecomposition of vtilde^T S vtilde
/// with ascending values. The orthogonal factor O realigns vtilde with the
/// eigendirections of S inside the trial subspace (column signs fixed by the
/// first nonzero entry).
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> rayleigh_ritz_align(const StiefelRep& vtilde,
                                                                       const Eigen::MatrixXd& s) {
  detail::check_symmetric(s, "rayleigh_ritz_align");
  if (s.rows() != vtilde.n())
    fail(ErrorCode::DimensionMismatch, "operator size does not match the trial basis");
  Eigen::MatrixXd small = vtilde.mat().transpose() * s * vtilde.mat();
  small = 0.5 * (small + small.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(small);
  Eigen::MatrixXd o = es.eigenvectors();
  for (int c = 0; c < o.cols(); ++c) {
    for (int r = 0; r < o.rows(); ++r) {
      if (std::abs(o(r, c)) > 1e-12) {
        if (o(r, c) < 0) o.col(c) = -o.col(c);
        break;
      }
    }
  }
  return {es.eigenvalues(), std::move(o)};
}

/// Interpolated filter at query time t: the subspace comes from the anchor
/// interpolation, the spectrum and the aligning rotation from Rayleigh-Ritz
/// against the query-time shift operator, so the result realizes
/// H = Vt O diag(Psi h) O^T Vt^T in factored form.
inline FactoredFilter interpolate_filter(const AnchorSet& anchors, const StiefelRep& base,
                                         const FilterTaps& taps, double t,
                                         const Eigen::MatrixXd& s_t,
                                         InterpolationInfo* info = nullptr) {
  StiefelRep vt = interpolate_subspace(anchors, base, t, info);
  auto [lam, o] = rayleigh_ritz_align(vt, s_t);
  return FactoredFilter{StiefelRep(vt.mat() * o), std::move(lam), taps, false};
}

/// ||H1 - H2||_F for two factored filters on the same vertex set, via
/// trace algebra on k x k blocks; no n x n matrix is formed.
inline double filter_distance(const FactoredFilter& a, const FactoredFilter& b) {
  if (a.n() != b.n()) fail(ErrorCode::DimensionMismatch, "filters act on different vertex sets");
  Eigen::VectorXd ra = a.response(), rb = b.response();
  Eigen::MatrixXd cross = a.basis.mat().transpose() * b.basis.mat();
  double sq = ra.squaredNorm() + rb.squaredNorm() -
              2.0 * (ra.asDiagonal() * cross * rb.asDiagonal() * cross.transpose()).trace();
  return std::sqrt(std::max(sq, 0.0));
}

/// Frequency-response table `lambda,response` for plotting.
inline void write_response_csv(std::ostream& os, const FactoredFilter& f) {
  Eigen::VectorXd r = f.response();
  os << "lambda,response\n";
  char buf[64];
  for (int i = 0; i < f.lambda.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", f.lambda[i], r[i]);
    os << buf;
  }
}

}  // namespace grassfilt
