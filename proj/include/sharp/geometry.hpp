#pragma once

// Parametric edges (line, circular arc, clamped B-spline), their lengths and
// length-proportional sampling, plus the point-cloud utilities the metrics
// and the fitting baseline share.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sharp/errors.hpp"
#include "sharp/kdtree.hpp"
#include "sharp/labels.hpp"
#include "sharp/point.hpp"

namespace sharp {

inline constexpr double kGeomTol = 1e-6;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
/// Smallest bounding-box diagonal a metric may divide by.
inline constexpr double kMinDiagonal = 1e-12;
inline constexpr double kDefaultSharpThreshold = 1.5;

struct LineEdge {
  Point3 start;
  Point3 end;
};

struct CircleEdge {
  Point3 start;
  Point3 end;
  Point3 center;
  Vec3 normal;
  double radius = 0.0;
};

/// Clamped B-spline with uniform interior knots; `keypoints` are its control points.
struct SplineEdge {
  int degree = 1;
  std::vector<Point3> keypoints;
};

enum class EdgeKind { line, circle, spline };

inline const char* to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::line: return "line";
    case EdgeKind::circle: return "circle";
    case EdgeKind::spline: return "spline";
  }
  return "?";
}

/// One edge plus its sharpness. Predictions set `sharp`; ground truth sets
/// `sharpness_angle` (radians, angle between the adjacent face normals).
struct ParametricEdge {
  std::variant<LineEdge, CircleEdge, SplineEdge> geometry;
  std::optional<bool> sharp;
  std::optional<double> sharpness_angle;

  EdgeKind kind() const { return static_cast<EdgeKind>(geometry.index()); }

  /// Boolean label for predictions, `angle > threshold` for ground truth.
  bool is_sharp(double threshold = kDefaultSharpThreshold) const {
    if (sharp) return *sharp;
    if (sharpness_angle) return *sharpness_angle > threshold;
    return false;
  }
};

using EdgeSet = std::vector<ParametricEdge>;

/// Points sampled on an EdgeSet, with the originating edge and its sharp flag.
struct SampledEdgePoints {
  std::vector<Point3> points;
  std::vector<std::size_t> edge_index;
  std::vector<std::uint8_t> sharp;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// ---------------------------------------------------------------------------
// Validation

/// Throws MalformedEdgeError when the payload breaks its type invariants.
inline void validate_edge(const ParametricEdge& edge, double tol = kGeomTol) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw MalformedEdgeError(msg);
  };
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, LineEdge>) {
          require(is_finite(g.start) && is_finite(g.end), "line: non-finite coordinate");
          require(squared_distance(g.start, g.end) > 0.0, "line: zero length");
        } else if constexpr (std::is_same_v<T, CircleEdge>) {
          require(is_finite(g.start) && is_finite(g.end) && is_finite(g.center) && is_finite(g.normal),
                  "circle: non-finite coordinate");
          require(std::isfinite(g.radius) && g.radius > 0.0, "circle: radius must be positive");
          require(std::abs(norm(g.normal) - 1.0) <= 1e-6, "circle: normal is not unit length");
          for (const Point3& p : {g.start, g.end}) {
            const Vec3 d = p - g.center;
            require(std::abs(norm(d) - g.radius) <= tol * g.radius, "circle: endpoint not at radius");
            require(std::abs(dot(d, g.normal)) <= tol * g.radius, "circle: endpoint off the circle plane");
          }
        } else {
          require(g.degree >= 1, "spline: degree must be >= 1");
          require(g.keypoints.size() >= static_cast<std::size_t>(g.degree) + 1,
                  "spline: needs at least degree+1 keypoints");
          for (const Point3& p : g.keypoints) require(is_finite(p), "spline: non-finite keypoint");
        }
      },
      edge.geometry);
  if (edge.sharpness_angle) {
    const double a = *edge.sharpness_angle;
    if (!std::isfinite(a) || a < 0.0 || a > kTwoPi)
      throw MalformedEdgeError("sharpness angle outside [0, 2*pi]");
  }
}

// ---------------------------------------------------------------------------
// Circles

namespace detail {

inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  return n > 0 ? v / n : v;
}

// In-plane orthonormal frame (u, v) with u toward the start point and
// v = n x u, so increasing angle runs counterclockwise about n.
inline std::pair<Vec3, Vec3> circle_frame(const CircleEdge& c) {
  const Vec3 n = normalized(c.normal);
  Vec3 d = c.start - c.center;
  d -= n * dot(d, n);
  const Vec3 u = normalized(d);
  return {u, cross(n, u)};
}

}  // namespace detail

/// Counterclockwise angle about the normal from start to end, in (0, 2*pi].
inline double arc_sweep(const CircleEdge& c) {
  if (!(c.radius > 0.0) || !std::isfinite(c.radius)) throw MalformedEdgeError("circle: radius must be positive");
  if (distance(c.start, c.end) <= kGeomTol * c.radius) return kTwoPi;
  const auto [u, v] = detail::circle_frame(c);
  const Vec3 w = c.end - c.center;
  double angle = std::atan2(dot(w, v), dot(w, u));
  if (angle <= 0.0) angle += kTwoPi;
  return angle;
}

inline Point3 circle_point(const CircleEdge& c, double angle) {
  const auto [u, v] = detail::circle_frame(c);
  return c.center + u * (c.radius * std::cos(angle)) + v * (c.radius * std::sin(angle));
}

// ---------------------------------------------------------------------------
// B-splines

/// Clamped knot vector with uniform interior knots:
/// degree+1 zeros, n_ctrl-degree-1 interior knots j/(n_ctrl-degree), degree+1 ones.
inline std::vector<double> clamped_uniform_knots(std::size_t n_ctrl, int degree) {
  const auto k = static_cast<std::size_t>(degree);
  std::vector<double> knots(n_ctrl + k + 1, 0.0);
  const std::size_t spans = n_ctrl - k;
  for (std::size_t j = 1; j < spans; ++j) knots[k + j] = static_cast<double>(j) / static_cast<double>(spans);
  for (std::size_t i = n_ctrl; i < knots.size(); ++i) knots[i] = 1.0;
  return knots;
}

namespace detail {

inline void check_spline(const SplineEdge& s) {
  if (s.degree < 1 || s.keypoints.size() < static_cast<std::size_t>(s.degree) + 1)
    throw MalformedEdgeError("spline: needs degree >= 1 and at least degree+1 keypoints");
}

// Index s with knots[s] <= t < knots[s+1], clamped to the last non-empty span.
inline std::size_t find_span(const std::vector<double>& knots, std::size_t n_ctrl, int degree, double t) {
  const auto k = static_cast<std::size_t>(degree);
  if (t >= knots[n_ctrl]) return n_ctrl - 1;
  auto it = std::upper_bound(knots.begin() + static_cast<std::ptrdiff_t>(k),
                             knots.begin() + static_cast<std::ptrdiff_t>(n_ctrl + 1), t);
  return static_cast<std::size_t>(it - knots.begin()) - 1;
}

}  // namespace detail

/// Non-zero basis values N_{span-degree..span}(t).
inline std::vector<double> bspline_basis(const std::vector<double>& knots, std::size_t span, int degree, double t) {
  const auto k = static_cast<std::size_t>(degree);
  std::vector<double> n(k + 1, 0.0), left(k + 1, 0.0), right(k + 1, 0.0);
  n[0] = 1.0;
  for (std::size_t j = 1; j <= k; ++j) {
    left[j] = t - knots[span + 1 - j];
    right[j] = knots[span + j] - t;
    double saved = 0.0;
    for (std::size_t r = 0; r < j; ++r) {
      const double temp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }
  return n;
}

/// Span index for parameter t (exposed for least-squares assembly).
inline std::size_t bspline_span(const std::vector<double>& knots, std::size_t n_ctrl, int degree, double t) {
  return detail::find_span(knots, n_ctrl, degree, t);
}

namespace detail {

// de Boor's recurrence on the clamped uniform knot vector; degree 0 allowed.
inline Point3 de_boor(const std::vector<Point3>& ctrl, int degree, double t) {
  const std::size_t m = ctrl.size();
  const auto k = static_cast<std::size_t>(degree);
  const auto knots = clamped_uniform_knots(m, degree);
  const std::size_t span = find_span(knots, m, degree, t);

  std::vector<Point3> d(k + 1);
  for (std::size_t j = 0; j <= k; ++j) d[j] = ctrl[j + span - k];
  for (std::size_t r = 1; r <= k; ++r) {
    for (std::size_t j = k; j >= r; --j) {
      const double lo = knots[j + span - k];
      const double hi = knots[j + 1 + span - r];
      const double alpha = hi > lo ? (t - lo) / (hi - lo) : 0.0;
      d[j] = d[j - 1] * (1.0 - alpha) + d[j] * alpha;
    }
  }
  return d[k];
}

}  // namespace detail

/// Evaluates the clamped uniform B-spline at t in [0, 1] by de Boor's recurrence.
inline Point3 eval_spline(const SplineEdge& s, double t) {
  detail::check_spline(s);
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("spline parameter outside [0, 1]");
  return detail::de_boor(s.keypoints, s.degree, t);
}

/// Greville abscissae of the clamped uniform knot vector: the mean of each
/// control point's `degree` interior support knots.
inline std::vector<double> greville_abscissae(std::size_t n_ctrl, int degree) {
  const auto knots = clamped_uniform_knots(n_ctrl, degree);
  std::vector<double> g(n_ctrl, 0.0);
  for (std::size_t i = 0; i < n_ctrl; ++i) {
    for (int j = 1; j <= degree; ++j) g[i] += knots[i + static_cast<std::size_t>(j)];
    g[i] /= degree;
  }
  return g;
}

/// Conversion for sources whose spline keypoints are points on the curve
/// rather than control points. Returns the spline of the same degree that
/// passes through point i at the i-th Greville abscissa.
inline SplineEdge spline_from_interpolation_points(std::span<const Point3> pts, int degree) {
  SplineEdge out;
  out.degree = degree;
  out.keypoints.assign(pts.begin(), pts.end());
  detail::check_spline(out);
  const std::size_t m = pts.size();
  const auto knots = clamped_uniform_knots(m, degree);
  const auto params = greville_abscissae(m, degree);
  const auto M = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(M, M), P(M, 3);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t span = detail::find_span(knots, m, degree, params[i]);
    const auto n = bspline_basis(knots, span, degree, params[i]);
    for (std::size_t j = 0; j < n.size(); ++j)
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(span - static_cast<std::size_t>(degree) + j)) = n[j];
    P.row(static_cast<Eigen::Index>(i)) << pts[i].x, pts[i].y, pts[i].z;
  }
  const Eigen::MatrixXd C = A.partialPivLu().solve(P);
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.keypoints[i] = {C(r, 0), C(r, 1), C(r, 2)};
  }
  return out;
}

/// Control points of the derivative curve (degree one lower, same interior knots).
inline std::vector<Point3> spline_derivative_points(const SplineEdge& s) {
  detail::check_spline(s);
  const std::size_t m = s.keypoints.size();
  const auto knots = clamped_uniform_knots(m, s.degree);
  const auto k = static_cast<std::size_t>(s.degree);
  std::vector<Point3> d(m - 1);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double dt = knots[i + k + 1] - knots[i + 1];
    d[i] = (s.keypoints[i + 1] - s.keypoints[i]) * (dt > 0 ? s.degree / dt : 0.0);
  }
  return d;
}

/// dC/dt at t.
inline Point3 spline_tangent(const SplineEdge& s, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("spline parameter outside [0, 1]");
  return detail::de_boor(spline_derivative_points(s), s.degree - 1, t);
}

/// Uniform parameter grid whose segment count is a multiple of the number of
/// knot spans, so every knot is hit exactly (a degree-1 spline measures as its
/// control polygon).
inline std::vector<double> spline_parameter_grid(const SplineEdge& s, std::size_t spline_samples) {
  if (spline_samples < 2) throw DomainError("spline_samples must be >= 2");
  const std::size_t spans = s.keypoints.size() - static_cast<std::size_t>(s.degree);
  const std::size_t per_span = std::max<std::size_t>(1, (spline_samples - 1 + spans - 1) / spans);
  const std::size_t segments = spans * per_span;
  std::vector<double> t(segments + 1);
  for (std::size_t i = 0; i <= segments; ++i) t[i] = static_cast<double>(i) / static_cast<double>(segments);
  t.back() = 1.0;
  return t;
}

// ---------------------------------------------------------------------------
// Lengths and sampling

inline constexpr std::size_t kDefaultSplineSamples = 1024;

inline double edge_length(const ParametricEdge& edge, std::size_t spline_samples = kDefaultSplineSamples) {
  return std::visit(
      [&](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, LineEdge>) {
          if (!is_finite(g.start) || !is_finite(g.end)) throw MalformedEdgeError("line: non-finite coordinate");
          return distance(g.start, g.end);
        } else if constexpr (std::is_same_v<T, CircleEdge>) {
          return g.radius * arc_sweep(g);
        } else {
          detail::check_spline(g);
          const auto grid = spline_parameter_grid(g, spline_samples);
          double len = 0.0;
          Point3 prev = eval_spline(g, grid[0]);
          for (std::size_t i = 1; i < grid.size(); ++i) {
            const Point3 cur = eval_spline(g, grid[i]);
            len += distance(prev, cur);
            prev = cur;
          }
          return len;
        }
      },
      edge.geometry);
}

inline double total_length(const EdgeSet& edges, std::size_t spline_samples = kDefaultSplineSamples) {
  double sum = 0.0;
  for (const auto& e : edges) sum += edge_length(e, spline_samples);
  return sum;
}

struct SamplingConfig {
  std::size_t budget = 8192;
  std::size_t min_per_edge = 4;
  std::size_t spline_samples = kDefaultSplineSamples;
  double sharp_threshold = kDefaultSharpThreshold;
};

namespace detail {

// n points uniformly spaced in arc length; both ends included unless the
// curve is a closed circle, where the n points split the full turn evenly.
inline void sample_one(const ParametricEdge& edge, std::size_t n, std::size_t spline_samples,
                       std::vector<Point3>& out) {
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, LineEdge>) {
          const Vec3 d = g.end - g.start;
          for (std::size_t i = 0; i < n; ++i) out.push_back(g.start + d * (static_cast<double>(i) / denom));
        } else if constexpr (std::is_same_v<T, CircleEdge>) {
          const double sweep = arc_sweep(g);
          const bool closed = sweep == kTwoPi;
          const double step = closed ? sweep / static_cast<double>(n) : sweep / denom;
          for (std::size_t i = 0; i < n; ++i) out.push_back(circle_point(g, step * static_cast<double>(i)));
        } else {
          const auto grid = spline_parameter_grid(g, spline_samples);
          std::vector<double> cum(grid.size(), 0.0);
          Point3 prev = eval_spline(g, grid[0]);
          for (std::size_t i = 1; i < grid.size(); ++i) {
            const Point3 cur = eval_spline(g, grid[i]);
            cum[i] = cum[i - 1] + distance(prev, cur);
            prev = cur;
          }
          const double len = cum.back();
          for (std::size_t i = 0; i < n; ++i) {
            const double target = len * (static_cast<double>(i) / denom);
            auto it = std::upper_bound(cum.begin(), cum.end(), target);
            std::size_t seg = it == cum.begin() ? 0 : static_cast<std::size_t>(it - cum.begin()) - 1;
            seg = std::min(seg, grid.size() - 2);
            const double span_len = cum[seg + 1] - cum[seg];
            const double frac = span_len > 0 ? std::clamp((target - cum[seg]) / span_len, 0.0, 1.0) : 0.0;
            const double t = std::clamp(grid[seg] + frac * (grid[seg + 1] - grid[seg]), 0.0, 1.0);
            out.push_back(eval_spline(g, t));
          }
        }
      },
      edge.geometry);
}

}  // namespace detail

/// Number of samples each edge receives: max(min_per_edge, round(budget * len_j / total)).
inline std::vector<std::size_t> allocate_samples(const std::vector<double>& lengths, std::size_t budget,
                                                 std::size_t min_per_edge) {
  double total = 0.0;
  for (double l : lengths) total += l;
  if (!(total > 0.0)) throw DegenerateGeometryError("edge set has zero total length");
  std::vector<std::size_t> counts(lengths.size());
  for (std::size_t j = 0; j < lengths.size(); ++j) {
    const auto share = static_cast<std::size_t>(std::llround(static_cast<double>(budget) * lengths[j] / total));
    counts[j] = std::max(min_per_edge, share);
  }
  return counts;
}

/// Samples every edge proportionally to its length. Deterministic.
inline SampledEdgePoints sample_edge_set(const EdgeSet& edges, const SamplingConfig& cfg = {}) {
  SampledEdgePoints out;
  if (edges.empty()) return out;
  if (cfg.budget == 0 || cfg.min_per_edge == 0) throw DomainError("sampling budget and min_per_edge must be positive");
  if (cfg.budget < edges.size() * cfg.min_per_edge)
    throw DomainError("sampling budget smaller than edges * min_per_edge");

  std::vector<double> lengths(edges.size());
  for (std::size_t j = 0; j < edges.size(); ++j) lengths[j] = edge_length(edges[j], cfg.spline_samples);
  const auto counts = allocate_samples(lengths, cfg.budget, cfg.min_per_edge);

  for (std::size_t j = 0; j < edges.size(); ++j) {
    const std::size_t before = out.points.size();
    detail::sample_one(edges[j], counts[j], cfg.spline_samples, out.points);
    const std::size_t added = out.points.size() - before;
    out.edge_index.insert(out.edge_index.end(), added, j);
    out.sharp.insert(out.sharp.end(), added, edges[j].is_sharp(cfg.sharp_threshold) ? 1 : 0);
  }
  return out;
}

inline SampledEdgePoints sample_edge_set(const EdgeSet& edges, std::size_t budget, std::size_t min_per_edge) {
  SamplingConfig cfg;
  cfg.budget = budget;
  cfg.min_per_edge = min_per_edge;
  return sample_edge_set(edges, cfg);
}

// ---------------------------------------------------------------------------
// Point-cloud utilities

/// Diagonal length of the axis-aligned bounding box. Zero for a single point;
/// metric callers clamp to kMinDiagonal before dividing.
inline double bbox_diagonal(std::span<const Point3> points) {
  if (points.empty()) throw DomainError("bounding box of an empty point set");
  Point3 lo = points[0], hi = points[0];
  for (const Point3& p : points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  return norm(hi - lo);
}

struct DownsampleResult {
  PointCloud cloud;
  std::vector<std::size_t> indices;  // ascending, into the source cloud
};

namespace detail {

// Unbiased integer in [0, n) from a 64-bit engine; independent of the
// standard library's distribution implementation.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

}  // namespace detail

/// Seeded uniform random selection of `target` points without replacement.
/// Selected points keep their original relative order.
inline DownsampleResult downsample(const PointCloud& cloud, std::size_t target, std::uint64_t seed) {
  if (target == 0 || target > cloud.size()) throw DomainError("downsample target must be in [1, N]");
  std::vector<std::size_t> idx(cloud.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  if (target < cloud.size()) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < target; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(detail::uniform_below(rng, idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(target);
    std::sort(idx.begin(), idx.end());
  }
  DownsampleResult out;
  out.indices = std::move(idx);
  out.cloud.reserve(out.indices.size());
  for (std::size_t i : out.indices) out.cloud.push_back(cloud[i]);
  return out;
}

/// Gives each target point the labels of its nearest source point
/// (lowest source index on ties).
inline LabelTable transfer_labels_nn(const PointCloud& source, const LabelTable& source_labels,
                                     const PointCloud& target) {
  if (source.empty()) throw DomainError("label transfer from an empty source cloud");
  if (source_labels.membership.size() != source.size() || source_labels.type_id.size() != source.size())
    throw ValidationError("source labels are not aligned with the source cloud");
  const KdTree3 tree(source);
  LabelTable out;
  out.vocabulary = source_labels.vocabulary;
  out.membership.resize(target.size());
  out.type_id.resize(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) {
    const auto nn = tree.nearest(target[i]);
    out.membership[i] = source_labels.membership[nn.index];
    out.type_id[i] = source_labels.type_id[nn.index];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rigid motions (used by fixtures and invariance checks)

struct RigidTransform {
  std::array<Vec3, 3> rows{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
  Vec3 translation{};

  Vec3 rotate(const Vec3& v) const { return {dot(rows[0], v), dot(rows[1], v), dot(rows[2], v)}; }
  Point3 operator()(const Point3& p) const { return rotate(p) + translation; }

  /// Rotation by `angle` about unit `axis` (Rodrigues), then translation.
  static RigidTransform from_axis_angle(Vec3 axis, double angle, Vec3 translation = {}) {
    axis = detail::normalized(axis);
    const double c = std::cos(angle), s = std::sin(angle), C = 1.0 - c;
    const double x = axis.x, y = axis.y, z = axis.z;
    RigidTransform t;
    t.rows = {Vec3{c + x * x * C, x * y * C - z * s, x * z * C + y * s},
              Vec3{y * x * C + z * s, c + y * y * C, y * z * C - x * s},
              Vec3{z * x * C - y * s, z * y * C + x * s, c + z * z * C}};
    t.translation = translation;
    return t;
  }
};

inline ParametricEdge transform_edge(const ParametricEdge& e, const RigidTransform& t) {
  ParametricEdge out = e;
  std::visit(
      [&](auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, LineEdge>) {
          g.start = t(g.start);
          g.end = t(g.end);
        } else if constexpr (std::is_same_v<T, CircleEdge>) {
          g.start = t(g.start);
          g.end = t(g.end);
          g.center = t(g.center);
          g.normal = t.rotate(g.normal);
        } else {
          for (auto& p : g.keypoints) p = t(p);
        }
      },
      out.geometry);
  return out;
}

inline EdgeSet transform_edges(const EdgeSet& edges, const RigidTransform& t) {
  EdgeSet out;
  out.reserve(edges.size());
  for (const auto& e : edges) out.push_back(transform_edge(e, t));
  return out;
}

inline PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t) {
  PointCloud out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) out.push_back(t(p));
  return out;
}

}  // namespace sharp
