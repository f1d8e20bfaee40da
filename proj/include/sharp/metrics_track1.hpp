#pragma once

// Parametric-edge scoring: normalized unidirectional Chamfer distances mapped
// through exp(-k d), the total-length ratio score, and the nearest-sample
// sharpness accuracy.

#include <cmath>
#include <span>

#include "sharp/errors.hpp"
#include "sharp/geometry.hpp"
#include "sharp/kdtree.hpp"

namespace sharp {

struct Track1Config {
  double k = 100.0;
  double sharp_threshold = kDefaultSharpThreshold;
  std::size_t budget = 8192;
  std::size_t min_per_edge = 4;
  std::size_t spline_samples = kDefaultSplineSamples;
  /// Scale both sample sets by 1 / (ground-truth sample diagonal) before scoring.
  bool pre_normalize = false;

  void validate() const {
    if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("k must be positive");
    if (!(sharp_threshold >= 0.0 && sharp_threshold <= kTwoPi)) throw DomainError("sharp threshold outside [0, 2*pi]");
    if (budget == 0 || min_per_edge == 0) throw DomainError("sampling budget and min_per_edge must be positive");
    if (spline_samples < 2) throw DomainError("spline_samples must be >= 2");
  }

  /// Sampling parameters for an edge set of `n_edges` edges. The budget is
  /// raised to n_edges * min_per_edge when the configured one cannot cover it.
  SamplingConfig sampling(std::size_t n_edges) const {
    SamplingConfig s;
    s.budget = std::max(budget, n_edges * min_per_edge);
    s.min_per_edge = min_per_edge;
    s.spline_samples = spline_samples;
    s.sharp_threshold = sharp_threshold;
    return s;
  }
};

struct Track1Score {
  double edge_recovery = 0.0;  // S_e
  double length = 0.0;         // S_l
  double sharpness = 0.0;      // S_s
  double final = 0.0;          // S_track1

  static Track1Score from_subscores(double se, double sl, double ss) {
    return {se, sl, ss, (se + sl + ss) / 3.0};
  }
};

/// d_CD(A, B) = 1/(|A| D_A) * sum_i min_j |a_i - b_j|^2, with D_A the
/// bounding-box diagonal of A (clamped to kMinDiagonal).
inline double chamfer_unidirectional(std::span<const Point3> a, std::span<const Point3> b) {
  if (a.empty() || b.empty()) throw DomainError("chamfer distance of an empty point set");
  const KdTree3 tree(b);
  double sum = 0.0;
  for (const Point3& p : a) sum += tree.nearest(p).sq_dist;
  const double diag = std::max(bbox_diagonal(a), kMinDiagonal);
  return sum / (static_cast<double>(a.size()) * diag);
}

inline double chamfer_unidirectional(const SampledEdgePoints& a, const SampledEdgePoints& b) {
  return chamfer_unidirectional(std::span<const Point3>(a.points), std::span<const Point3>(b.points));
}

/// exp(-k d): maps a non-negative distance to (0, 1].
inline double phi_k(double d, double k) {
  if (!(d >= 0.0)) throw DomainError("phi_k: distance must be non-negative");
  if (!(k > 0.0)) throw DomainError("phi_k: k must be positive");
  return std::exp(-k * d);
}

/// Edge-length score 1 - |(1 - r) / (1 + r)| with r = pred_length / gt_length.
inline double length_score_from_totals(double pred_length, double gt_length) {
  if (!(gt_length > 0.0)) throw DegenerateGeometryError("ground-truth total edge length is zero");
  if (!(pred_length >= 0.0)) throw DomainError("negative predicted length");
  const double r = pred_length / gt_length;
  return 1.0 - std::abs((1.0 - r) / (1.0 + r));
}

namespace detail {

inline void validate_edges(const EdgeSet& edges) {
  for (std::size_t i = 0; i < edges.size(); ++i) {
    try {
      validate_edge(edges[i]);
    } catch (const MalformedEdgeError& e) {
      throw ValidationError("edge " + std::to_string(i) + ": " + e.what());
    }
  }
}

struct Track1Samples {
  SampledEdgePoints pred;
  SampledEdgePoints gt;
};

inline Track1Samples sample_pair(const EdgeSet& pred, const EdgeSet& gt, const Track1Config& cfg) {
  Track1Samples s;
  s.gt = sample_edge_set(gt, cfg.sampling(gt.size()));
  s.pred = sample_edge_set(pred, cfg.sampling(pred.size()));
  if (cfg.pre_normalize && !s.gt.empty()) {
    const double scale = 1.0 / std::max(bbox_diagonal(s.gt.points), kMinDiagonal);
    for (auto& p : s.gt.points) p *= scale;
    for (auto& p : s.pred.points) p *= scale;
  }
  return s;
}

inline double recovery_from_samples(const Track1Samples& s, double k) {
  if (s.pred.empty()) return 0.0;
  return 0.5 * (phi_k(chamfer_unidirectional(s.pred, s.gt), k) + phi_k(chamfer_unidirectional(s.gt, s.pred), k));
}

inline double sharpness_from_samples(const Track1Samples& s, double k) {
  if (s.pred.empty()) return 0.0;
  const KdTree3 tree(s.gt.points);
  double sum = 0.0;
  for (std::size_t i = 0; i < s.pred.size(); ++i) {
    const auto nn = tree.nearest(s.pred.points[i]);
    if (s.pred.sharp[i] == s.gt.sharp[nn.index]) sum += phi_k(nn.sq_dist, k);
  }
  return sum / static_cast<double>(s.pred.size());
}

inline void check_inputs(const EdgeSet& pred, const EdgeSet& gt, const Track1Config& cfg) {
  cfg.validate();
  if (gt.empty()) throw DomainError("ground-truth edge set is empty");
  validate_edges(gt);
  validate_edges(pred);
}

}  // namespace detail

/// S_e = (Phi_k(d_CD(pred, gt)) + Phi_k(d_CD(gt, pred))) / 2; 0 for an empty prediction.
inline double edge_recovery_score(const EdgeSet& pred, const EdgeSet& gt, const Track1Config& cfg = {}) {
  detail::check_inputs(pred, gt, cfg);
  if (pred.empty()) return 0.0;
  return detail::recovery_from_samples(detail::sample_pair(pred, gt, cfg), cfg.k);
}

inline double edge_length_score(const EdgeSet& pred, const EdgeSet& gt, const Track1Config& cfg = {}) {
  detail::check_inputs(pred, gt, cfg);
  return length_score_from_totals(total_length(pred, cfg.spline_samples), total_length(gt, cfg.spline_samples));
}

/// Mean over predicted samples of Phi_k(squared distance to the nearest gt
/// sample) where the sharp flags agree, 0 where they disagree. The squared
/// distance is not normalized.
inline double sharpness_score(const EdgeSet& pred, const EdgeSet& gt, const Track1Config& cfg = {}) {
  detail::check_inputs(pred, gt, cfg);
  if (pred.empty()) return 0.0;
  return detail::sharpness_from_samples(detail::sample_pair(pred, gt, cfg), cfg.k);
}

inline Track1Score score_track1(const EdgeSet& pred, const EdgeSet& gt, const Track1Config& cfg = {}) {
  detail::check_inputs(pred, gt, cfg);
  const double sl =
      length_score_from_totals(total_length(pred, cfg.spline_samples), total_length(gt, cfg.spline_samples));
  if (pred.empty()) return Track1Score::from_subscores(0.0, sl, 0.0);
  const auto samples = detail::sample_pair(pred, gt, cfg);
  return Track1Score::from_subscores(detail::recovery_from_samples(samples, cfg.k), sl,
                                     detail::sharpness_from_samples(samples, cfg.k));
}

}  // namespace sharp
