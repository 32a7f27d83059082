#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "grassfilt/error.hpp"
#include "grassfilt/grassmann.hpp"

namespace grassfilt {

/// Chebyshev points cos((2i+1)pi/(2N+2)), i = 0..N, mapped affinely from
/// [-1,1] to [a,b] and returned ascending. N+1 nodes in total.
inline std::vector<double> chebyshev_nodes(int n, double a, double b) {
  if (n < 0) fail(ErrorCode::InvalidArgument, "node order must be >= 0");
  if (!(a < b)) fail(ErrorCode::InvalidArgument, "need a < b");
  std::vector<double> nodes(n + 1);
  for (int i = 0; i <= n; ++i) {
    double x = std::cos((2.0 * i + 1.0) / (2.0 * n + 2.0) * M_PI);
    nodes[n - i] = a + (x + 1.0) * 0.5 * (b - a);  // cos is decreasing in i
  }
  return nodes;
}

/// Cardinal Lagrange weights l_j(t), evaluated in the barycentric form.
/// Sums to one; returns the indicator when t hits a node.
inline std::vector<double> lagrange_basis(const std::vector<double>& nodes, double t) {
  const std::size_t n = nodes.size();
  if (n == 0) fail(ErrorCode::InvalidArgument, "empty node set");
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (nodes[a] == nodes[b]) fail(ErrorCode::DuplicateNodes, "interpolation nodes coincide");

  std::vector<double> out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (t == nodes[j]) {
      out[j] = 1.0;
      return out;
    }
  }
  std::vector<double> w(n, 1.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t m = 0; m < n; ++m)
      if (m != j) w[j] /= (nodes[j] - nodes[m]);
  double denom = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = w[j] / (t - nodes[j]);
    denom += out[j];
  }
  for (std::size_t j = 0; j < n; ++j) out[j] /= denom;
  return out;
}

namespace detail {
struct TangentCache {
  Eigen::MatrixXd base;
  std::vector<Eigen::MatrixXd> deltas;
  std::vector<std::size_t> rank_deficient;  // anchors with sigma_k(delta) < 1e-10
};
}  // namespace detail

/// Parameter values with exactly computed subspace representatives and
/// spectra. Tangent lifts towards a base point are cached after the first
/// query; the fill is internally synchronized, after which concurrent
/// queries only read.
class AnchorSet {
 public:
  AnchorSet(std::vector<double> times, std::vector<StiefelRep> reps,
            std::vector<Eigen::VectorXd> spectra, std::vector<double> residuals = {})
      : times_(std::move(times)),
        reps_(std::move(reps)),
        spectra_(std::move(spectra)),
        residuals_(std::move(residuals)) {
    if (times_.empty() || times_.size() != reps_.size() || spectra_.size() != reps_.size())
      fail(ErrorCode::InvalidArgument, "anchor arrays must be nonempty and of equal length");
    for (std::size_t i = 1; i < times_.size(); ++i)
      if (!(times_[i - 1] < times_[i]))
        fail(ErrorCode::InvalidArgument, "anchor times must be strictly increasing");
    for (std::size_t i = 1; i < reps_.size(); ++i)
      if (reps_[i].n() != reps_[0].n() || reps_[i].k() != reps_[0].k())
        fail(ErrorCode::DimensionMismatch, "anchor representatives must share (n,k)");
  }

  std::size_t size() const { return times_.size(); }
  int n() const { return reps_[0].n(); }
  int k() const { return reps_[0].k(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<StiefelRep>& reps() const { return reps_; }
  const std::vector<Eigen::VectorXd>& spectra() const { return spectra_; }
  const std::vector<double>& residuals() const { return residuals_; }

  /// Geodesic directions from `base` to every anchor, computed once.
  std::shared_ptr<const detail::TangentCache> tangents_for(const StiefelRep& base) const {
    std::lock_guard<std::mutex> lock(*mutex_);
    if (cache_ && cache_->base.rows() == base.mat().rows() &&
        cache_->base.cols() == base.mat().cols() && cache_->base == base.mat())
      return cache_;
    auto fresh = std::make_shared<detail::TangentCache>();
    fresh->base = base.mat();
    fresh->deltas.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) {
      TangentVector tv = grassmann_log(base, reps_[i]);
      if (tv.sigma_k() < 1e-10) fresh->rank_deficient.push_back(i);
      fresh->deltas.push_back(tv.delta());
    }
    cache_ = fresh;
    return fresh;
  }

 private:
  std::vector<double> times_;
  std::vector<StiefelRep> reps_;
  std::vector<Eigen::VectorXd> spectra_;
  std::vector<double> residuals_;
  std::shared_ptr<std::mutex> mutex_ = std::make_shared<std::mutex>();
  mutable std::shared_ptr<const detail::TangentCache> cache_;
};

struct BasePolicy {
  enum class Kind { MiddleAnchor, Index, External };
  Kind kind = Kind::MiddleAnchor;
  std::size_t index = 0;
  std::optional<StiefelRep> external;

  static BasePolicy middle() { return {}; }
  static BasePolicy at(std::size_t i) { return {Kind::Index, i, std::nullopt}; }
  static BasePolicy external_rep(StiefelRep v) {
    return {Kind::External, 0, std::move(v)};
  }
};

/// Picks the interpolation base point. For an external representative the
/// anchors within sigma_min < 0.1 of the cut locus are reported through
/// `near_cut_locus` (the choice itself is not rejected).
inline StiefelRep choose_base_point(const AnchorSet& anchors, const BasePolicy& policy,
                                    std::vector<std::size_t>* near_cut_locus = nullptr) {
  switch (policy.kind) {
    case BasePolicy::Kind::MiddleAnchor:
      return anchors.reps()[anchors.size() / 2];
    case BasePolicy::Kind::Index:
      if (policy.index >= anchors.size())
        fail(ErrorCode::IndexOutOfRange, "base anchor index " + std::to_string(policy.index) +
                                             " out of range");
      return anchors.reps()[policy.index];
    case BasePolicy::Kind::External: {
      if (!policy.external) fail(ErrorCode::InvalidArgument, "external policy without a representative");
      const StiefelRep& v = *policy.external;
      if (near_cut_locus) {
        for (std::size_t i = 0; i < anchors.size(); ++i) {
          Eigen::JacobiSVD<Eigen::MatrixXd> svd(v.mat().transpose() * anchors.reps()[i].mat());
          if (svd.singularValues().minCoeff() < 0.1) near_cut_locus->push_back(i);
        }
      }
      return v;
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown base policy");
}

struct InterpolationInfo {
  bool extrapolated = false;
  std::vector<std::size_t> rank_deficient_anchors;
};

/// Normal-coordinate subspace interpolation: lift all anchors to the tangent
/// space at `base`, combine them with the Lagrange weights at `t`, map back.
/// Queries outside the anchor range are permitted but flagged.
inline StiefelRep interpolate_subspace(const AnchorSet& anchors, const StiefelRep& base, double t,
                                       InterpolationInfo* info = nullptr) {
  auto cache = anchors.tangents_for(base);
  if (info) {
    info->extrapolated = (t < anchors.times().front() || t > anchors.times().back());
    info->rank_deficient_anchors = cache->rank_deficient;
  }
  std::vector<double> ell = lagrange_basis(anchors.times(), t);
  Eigen::MatrixXd combined = Eigen::MatrixXd::Zero(anchors.n(), anchors.k());
  for (std::size_t j = 0; j < anchors.size(); ++j)
    if (ell[j] != 0.0) combined.noalias() += ell[j] * cache->deltas[j];
  return grassmann_exp(base, TangentVector(base, std::move(combined)));
}

}  // namespace grassfilt
