#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "grassfilt/error.hpp"
#include "grassfilt/spectral.hpp"

namespace grassfilt {

/// Column-orthonormal n x k matrix: a Stiefel representative of a point on
/// Gr(n,k). The subspace it spans, not the particular basis, is the quantity
/// of interest; any V*Q with orthogonal Q represents the same point.
class StiefelRep {
 public:
  StiefelRep() = default;

  explicit StiefelRep(Eigen::MatrixXd mat) : mat_(std::move(mat)) {
    if (mat_.rows() < mat_.cols())
      fail(ErrorCode::DimensionMismatch, "Stiefel representative needs n >= k");
    const int k = static_cast<int>(mat_.cols());
    Eigen::MatrixXd gram = mat_.transpose() * mat_;
    if ((gram - Eigen::MatrixXd::Identity(k, k)).norm() > 1e-10)
      fail(ErrorCode::InvalidArgument, "columns are not orthonormal within 1e-10");
  }

  /// Orthonormalizes an arbitrary full-column-rank matrix (thin QR).
  static StiefelRep orthonormalized(const Eigen::MatrixXd& m) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
    return StiefelRep(std::move(q));
  }

  /// Haar-ish random subspace representative from a Gaussian draw.
  static StiefelRep random(int n, int k, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd g(n, k);
    for (int c = 0; c < k; ++c)
      for (int r = 0; r < n; ++r) g(r, c) = gauss(rng);
    return orthonormalized(g);
  }

  int n() const { return static_cast<int>(mat_.rows()); }
  int k() const { return static_cast<int>(mat_.cols()); }
  const Eigen::MatrixXd& mat() const { return mat_; }

 private:
  Eigen::MatrixXd mat_;
};

/// Horizontal tangent vector at a base point: an n x k matrix with
/// base^T * delta = 0. Carries a copy of its base so that mixing tangent
/// vectors across base points is caught at operation entry.
class TangentVector {
 public:
  TangentVector(StiefelRep base, Eigen::MatrixXd delta)
      : base_(std::move(base)), delta_(std::move(delta)) {
    if (delta_.rows() != base_.n() || delta_.cols() != base_.k())
      fail(ErrorCode::DimensionMismatch, "tangent vector shape must match its base");
    const double scale = std::max(1.0, delta_.norm());
    if ((base_.mat().transpose() * delta_).norm() > 1e-10 * scale)
      fail(ErrorCode::InvalidArgument, "matrix is not horizontal at the given base");
  }

  const StiefelRep& base() const { return base_; }
  const Eigen::MatrixXd& delta() const { return delta_; }
  double norm() const { return delta_.norm(); }

  /// Smallest singular value (the k-th); zero for tangent vectors with a
  /// nontrivial kernel.
  double sigma_k() const {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(delta_);
    return svd.singularValues()[base_.k() - 1];
  }

 private:
  StiefelRep base_;
  Eigen::MatrixXd delta_;
};

namespace detail {

inline void check_same_shape(const StiefelRep& a, const StiefelRep& b, const char* where) {
  if (a.n() != b.n() || a.k() != b.k())
    fail(ErrorCode::DimensionMismatch, std::string(where) + ": representatives differ in (n,k)");
}

inline void check_anchored(const StiefelRep& base, const TangentVector& tv, const char* where) {
  if (base.n() != tv.base().n() || base.k() != tv.base().k() ||
      (base.mat() - tv.base().mat()).lpNorm<Eigen::Infinity>() > 1e-12)
    fail(ErrorCode::BaseMismatch, std::string(where) + ": tangent vector anchored elsewhere");
}

inline Eigen::VectorXd clamped(const Eigen::VectorXd& v, double lo, double hi) {
  return v.cwiseMax(lo).cwiseMin(hi);
}

/// Direct logarithm via explicit inversion of base^T target. Kept internal
/// as a cross-check for the aligned variant below; the two agree on the
/// geodesic direction whenever both are defined.
inline Eigen::MatrixXd log_direct(const StiefelRep& base, const StiefelRep& target) {
  Eigen::MatrixXd c = base.mat().transpose() * target.mat();
  Eigen::JacobiSVD<Eigen::MatrixXd> csvd(c);
  if (csvd.singularValues().minCoeff() < 1e-10)
    fail(ErrorCode::CutLocus, "target subspace contains a direction orthogonal to the base");
  Eigen::MatrixXd l = target.mat() * c.inverse() - base.mat();
  ThinSvd svd = thin_svd(l);
  Eigen::VectorXd theta = svd.s.array().atan();
  return svd.u * theta.asDiagonal() * svd.w.transpose();
}

}  // namespace detail

/// Geodesic direction from `base` to `target`, Procrustes-aligned so that
/// the exponential map reproduces the aligned representative exactly.
/// Undefined (cut locus) when some principal angle reaches pi/2.
inline TangentVector grassmann_log(const StiefelRep& base, const StiefelRep& target) {
  detail::check_same_shape(base, target, "grassmann_log");
  // O, xi', W'^T = svd(target^T base); align target to the base
  Eigen::JacobiSVD<Eigen::MatrixXd> csvd(target.mat().transpose() * base.mat(),
                                         Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (csvd.singularValues().minCoeff() < 1e-10)
    fail(ErrorCode::CutLocus, "target subspace contains a direction orthogonal to the base");
  Eigen::MatrixXd aligned = target.mat() * (csvd.matrixU() * csvd.matrixV().transpose());
  // horizontal residual (I - base base^T) * aligned, then arcsin of its
  // singular values gives the principal angles
  Eigen::MatrixXd h = aligned - base.mat() * (base.mat().transpose() * aligned);
  ThinSvd svd = thin_svd(h);
  Eigen::VectorXd theta = detail::clamped(svd.s, -1.0, 1.0).array().asin();
  Eigen::MatrixXd delta = svd.u * theta.asDiagonal() * svd.w.transpose();
  // exact re-projection onto the horizontal space scrubs rounding residue
  delta -= base.mat() * (base.mat().transpose() * delta);
  return TangentVector(base, std::move(delta));
}

/// Geodesic endpoint from `base` with initial direction `delta` (unit time).
inline StiefelRep grassmann_exp(const StiefelRep& base, const TangentVector& tv) {
  detail::check_anchored(base, tv, "grassmann_exp");
  ThinSvd svd = thin_svd(tv.delta());
  Eigen::VectorXd c = svd.s.array().cos();
  Eigen::VectorXd s = svd.s.array().sin();
  // (base*W | U) * (cos xi ; sin xi) * W^T, trailing W^T retained so that
  // exp(log(.)) is the identity on aligned representatives
  Eigen::MatrixXd v = (base.mat() * svd.w) * c.asDiagonal() * svd.w.transpose() +
                      svd.u * s.asDiagonal() * svd.w.transpose();
  // orthonormality drifts at eps scale; scrub it so downstream validation
  // never trips on long exp/log chains
  Eigen::JacobiSVD<Eigen::MatrixXd> pol(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return StiefelRep(pol.matrixU() * pol.matrixV().transpose());
}

/// Geodesic (arc-length) distance on Gr(n,k): l2 norm of principal angles.
/// Cosines alone lose half the digits for tiny angles, so each angle is
/// recovered from its (cosine, sine) pair; the sines come from the
/// projection residual.
inline double geodesic_distance(const StiefelRep& a, const StiefelRep& b) {
  detail::check_same_shape(a, b, "geodesic_distance");
  Eigen::JacobiSVD<Eigen::MatrixXd> cos_svd(a.mat().transpose() * b.mat());
  Eigen::MatrixXd resid = b.mat() - a.mat() * (a.mat().transpose() * b.mat());
  Eigen::JacobiSVD<Eigen::MatrixXd> sin_svd(resid);
  const int k = a.k();
  double sq = 0.0;
  for (int i = 0; i < k; ++i) {
    // cosines descend, sines of the same angles ascend
    double c = std::clamp(cos_svd.singularValues()[i], 0.0, 1.0);
    double s = std::clamp(sin_svd.singularValues()[k - 1 - i], 0.0, 1.0);
    double theta = std::atan2(s, c);
    sq += theta * theta;
  }
  return std::sqrt(sq);
}

/// Frobenius distance between the orthogonal projectors a a^T and b b^T,
/// evaluated as sqrt(2)*||sin(principal angles)|| without forming any n x n
/// matrix. Algebraically equal to sqrt(2k - 2||a^T b||_F^2) but accurate for
/// nearby subspaces where that difference cancels.
inline double projector_distance(const StiefelRep& a, const StiefelRep& b) {
  detail::check_same_shape(a, b, "projector_distance");
  Eigen::MatrixXd r = b.mat() - a.mat() * (a.mat().transpose() * b.mat());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  return std::sqrt(2.0) * svd.singularValues().norm();
}

struct SensitivityReport {
  double max_ratio = 0.0;     // worst observed amplification of a tangent perturbation
  double bound_factor = 0.0;  // 8/sigma_k(delta) + 2, the reference scale
};

/// Empirical probe of the exponential map's local Lipschitz behaviour: for
/// `trials` random horizontal perturbations of Frobenius norm `eps`, reports
/// the worst ratio ||Exp(delta) - Exp(delta + E)|| / ||E||.
inline SensitivityReport exp_sensitivity_probe(const StiefelRep& base, const TangentVector& tv,
                                               int trials, double eps, std::uint64_t seed) {
  detail::check_anchored(base, tv, "exp_sensitivity_probe");
  if (trials < 1) fail(ErrorCode::InvalidArgument, "trials must be >= 1");
  if (!(eps > 0.0)) fail(ErrorCode::InvalidArgument, "eps must be positive");
  const double sk = tv.sigma_k();
  if (sk < 1e-10)
    fail(ErrorCode::RankDeficientTangent, "smallest singular value of delta below 1e-10");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const StiefelRep v0 = grassmann_exp(base, tv);
  SensitivityReport rep;
  rep.bound_factor = 8.0 / sk + 2.0;
  for (int t = 0; t < trials; ++t) {
    Eigen::MatrixXd g(base.n(), base.k());
    for (int c = 0; c < base.k(); ++c)
      for (int r = 0; r < base.n(); ++r) g(r, c) = gauss(rng);
    g -= base.mat() * (base.mat().transpose() * g);  // horizontal projection
    g *= eps / g.norm();
    StiefelRep v1 = grassmann_exp(base, TangentVector(base, tv.delta() + g));
    rep.max_ratio = std::max(rep.max_ratio, (v1.mat() - v0.mat()).norm() / eps);
  }
  return rep;
}

}  // namespace grassfilt
