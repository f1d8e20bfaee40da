#pragma once

// Per-point segmentation scoring: Hungarian-matched membership IoU, ordered
// step IoU, per-type IoU, and the membership/type consistency ratio.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "sharp/errors.hpp"
#include "sharp/labels.hpp"
#include "sharp/matching.hpp"
#include "sharp/vocabulary.hpp"

namespace sharp {

struct SegScore {
  double membership_score = 0.0;  // S_m (track 2) or S_st (track 3)
  double type_score = 0.0;        // S_t or S_ot
  double final = 0.0;

  static SegScore from_subscores(double membership, double type) {
    return {membership, type, (membership + type) / 2.0};
  }
};

struct SegOptions {
  /// Average type IoU over the whole vocabulary instead of the types present
  /// in prediction or ground truth. Absent types then count as IoU 1.
  bool average_all_types = false;
};

namespace detail {

inline void check_aligned(const LabelTable& pred, const LabelTable& gt) {
  if (pred.size() != gt.size())
    throw ValidationError("point-count mismatch: prediction has " + std::to_string(pred.size()) +
                          " labels, ground truth " + std::to_string(gt.size()));
  if (gt.size() == 0) throw ValidationError("empty label table");
  for (const LabelTable* t : {&pred, &gt}) {
    if (t->type_id.size() != t->membership.size()) throw ValidationError("membership and type columns differ in length");
    for (auto m : t->membership)
      if (m < 0) throw ValidationError("negative membership id");
  }
}

// Maps arbitrary ids to 0..n-1 preserving order.
inline std::vector<std::size_t> dense_ids(std::span<const std::int64_t> ids, std::size_t& n_classes) {
  std::vector<std::int64_t> uniq(ids.begin(), ids.end());
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  n_classes = uniq.size();
  std::vector<std::size_t> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i)
    out[i] = static_cast<std::size_t>(std::lower_bound(uniq.begin(), uniq.end(), ids[i]) - uniq.begin());
  return out;
}

}  // namespace detail

/// IoU matrix between predicted classes (rows) and gt classes (columns).
struct MembershipOverlap {
  CostMatrix iou;
  std::size_t n_pred = 0;
  std::size_t n_gt = 0;
};

inline MembershipOverlap membership_overlap(const LabelTable& pred, const LabelTable& gt) {
  detail::check_aligned(pred, gt);
  MembershipOverlap out;
  const auto p = detail::dense_ids(pred.membership, out.n_pred);
  const auto g = detail::dense_ids(gt.membership, out.n_gt);

  std::vector<std::size_t> pred_size(out.n_pred, 0), gt_size(out.n_gt, 0);
  std::vector<std::uint64_t> keys(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    ++pred_size[p[i]];
    ++gt_size[g[i]];
    keys[i] = static_cast<std::uint64_t>(p[i]) * out.n_gt + g[i];
  }
  std::sort(keys.begin(), keys.end());

  out.iou = CostMatrix(out.n_pred, out.n_gt, 0.0);
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    const std::size_t r = keys[i] / out.n_gt, c = keys[i] % out.n_gt;
    out.iou(r, c) = iou_from_counts(pred_size[r], gt_size[c], j - i);
    i = j;
  }
  return out;
}

/// S_m: mean over gt classes of the IoU with their Hungarian-matched
/// predicted class; unmatched gt classes contribute 0.
inline double face_membership_score(const LabelTable& pred, const LabelTable& gt) {
  const auto ov = membership_overlap(pred, gt);
  const auto match = hungarian(ov.iou, MatchMode::maximize);
  // Summed in sorted order so relabelling either side cannot change the result.
  std::vector<double> matched;
  matched.reserve(match.pairs.size());
  for (const auto& [r, c] : match.pairs) matched.push_back(ov.iou(r, c));
  std::sort(matched.begin(), matched.end());
  return std::accumulate(matched.begin(), matched.end(), 0.0) / static_cast<double>(ov.n_gt);
}

/// Mean one-vs-rest IoU over type classes.
inline double per_type_iou_score(const LabelTable& pred, const LabelTable& gt, const SegOptions& opts = {}) {
  detail::check_aligned(pred, gt);
  if (pred.vocabulary != gt.vocabulary) throw ValidationError("prediction and ground truth use different type vocabularies");
  const std::size_t V = gt.vocabulary.size();
  std::vector<std::size_t> ps(V, 0), gs(V, 0), inter(V, 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const int a = pred.type_id[i], b = gt.type_id[i];
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= V || static_cast<std::size_t>(b) >= V)
      throw ValidationError("type id outside the vocabulary");
    ++ps[static_cast<std::size_t>(a)];
    ++gs[static_cast<std::size_t>(b)];
    if (a == b) ++inter[static_cast<std::size_t>(a)];
  }
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t t = 0; t < V; ++t) {
    const bool present = ps[t] + gs[t] > 0;
    if (!present && !opts.average_all_types) continue;
    sum += iou_from_counts(ps[t], gs[t], inter[t]);
    ++counted;
  }
  return counted ? sum / static_cast<double>(counted) : 1.0;
}

/// S_st: step i of the prediction is compared with step i of the ground
/// truth; no matching. Columns run over 0..max gt step id, and columns empty
/// on both sides are skipped.
inline double step_score(const LabelTable& pred, const LabelTable& gt) {
  detail::check_aligned(pred, gt);
  const std::int64_t n_steps = *std::max_element(gt.membership.begin(), gt.membership.end()) + 1;
  std::vector<std::size_t> ps(static_cast<std::size_t>(n_steps), 0), gs(ps.size(), 0), inter(ps.size(), 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto g = static_cast<std::size_t>(gt.membership[i]);
    ++gs[g];
    if (pred.membership[i] < n_steps) {
      const auto p = static_cast<std::size_t>(pred.membership[i]);
      ++ps[p];
      if (p == g) ++inter[g];
    }
  }
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t s = 0; s < ps.size(); ++s) {
    if (ps[s] + gs[s] == 0) continue;
    sum += iou_from_counts(ps[s], gs[s], inter[s]);
    ++counted;
  }
  return sum / static_cast<double>(counted);
}

inline SegScore score_track2(const LabelTable& pred, const LabelTable& gt, const SegOptions& opts = {}) {
  return SegScore::from_subscores(face_membership_score(pred, gt), per_type_iou_score(pred, gt, opts));
}

inline SegScore score_track3(const LabelTable& pred, const LabelTable& gt, const SegOptions& opts = {}) {
  return SegScore::from_subscores(step_score(pred, gt), per_type_iou_score(pred, gt, opts));
}

/// Fraction of points whose merged type equals the majority merged type of
/// their membership group (ties go to the lowest merged id).
inline double consistency(std::span<const std::int64_t> membership, std::span<const int> type_id,
                          std::span<const int> grouping) {
  if (membership.empty()) throw DomainError("consistency of an empty label set");
  if (membership.size() != type_id.size()) throw DomainError("membership and type arrays differ in length");
  std::vector<std::pair<std::int64_t, int>> keys(membership.size());
  for (std::size_t i = 0; i < membership.size(); ++i) {
    const int t = type_id[i];
    if (t < 0 || static_cast<std::size_t>(t) >= grouping.size()) throw DomainError("type id outside the grouping map");
    keys[i] = {membership[i], grouping[static_cast<std::size_t>(t)]};
  }
  std::sort(keys.begin(), keys.end());

  std::size_t consistent = 0;
  for (std::size_t i = 0; i < keys.size();) {
    // One membership group. The majority size is the same whichever tied
    // type wins, so the lowest-id rule never changes the count.
    std::size_t best = 0;
    std::size_t j = i;
    while (j < keys.size() && keys[j].first == keys[i].first) {
      std::size_t k = j;
      while (k < keys.size() && keys[k] == keys[j]) ++k;
      best = std::max(best, k - j);
      j = k;
    }
    consistent += best;
    i = j;
  }
  return static_cast<double>(consistent) / static_cast<double>(keys.size());
}

inline double consistency(const LabelTable& labels, std::span<const int> grouping) {
  return consistency(labels.membership, labels.type_id, grouping);
}

}  // namespace sharp
