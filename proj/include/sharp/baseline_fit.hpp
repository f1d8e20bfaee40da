#pragma once

// Classical edge-extraction baseline: covariance-based edge-point detection,
// offset consolidation toward the crease, mean-shift grouping, and
// least-squares line / circle / B-spline fitting with residual-based type
// selection.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "sharp/errors.hpp"
#include "sharp/geometry.hpp"
#include "sharp/kdtree.hpp"

namespace sharp::fit {

/// Points of a cloud flagged as lying near an edge.
struct EdgePointSet {
  std::vector<std::size_t> source_index;  // into the input cloud
  std::vector<Point3> points;
  std::vector<Vec3> offsets;              // displacement toward the crease
  std::vector<double> variation;          // lambda_min / trace of the local covariance
  std::vector<std::uint8_t> junction;     // local edge neighbourhood is not curve-like
  std::vector<Vec3> tangents;             // unit, sign arbitrary
  std::vector<double> thickness;          // RMS spread of the consolidated neighbourhood across its tangent
  std::vector<double> features;           // row-major, feature_dim per point
  std::size_t feature_dim = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  Point3 consolidated(std::size_t i) const { return points[i] + offsets[i]; }
  std::span<const double> feature(std::size_t i) const {
    return {features.data() + i * feature_dim, feature_dim};
  }
};

namespace detail {

inline Eigen::Vector3d to_eigen(const Point3& p) { return {p.x, p.y, p.z}; }
inline Point3 from_eigen(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

// Flips v so its largest-magnitude component is positive.
inline Eigen::Vector3d canonical_sign(Eigen::Vector3d v) {
  Eigen::Index i = 0;
  v.cwiseAbs().maxCoeff(&i);
  return v(i) < 0 ? Eigen::Vector3d(-v) : v;
}

struct LocalShape {
  Eigen::Vector3d eigenvalues;   // ascending
  Eigen::Matrix3d eigenvectors;  // columns match eigenvalues
  bool ok = false;
};

inline LocalShape local_shape(std::span<const Point3> pts) {
  LocalShape s;
  if (pts.size() < 2) return s;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : pts) mean += to_eigen(p);
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector3d d = to_eigen(p) - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(pts.size());
  if (!cov.allFinite()) return s;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  if (es.info() != Eigen::Success) return s;
  s.eigenvalues = es.eigenvalues().cwiseMax(0.0);
  s.eigenvectors = es.eigenvectors();
  s.ok = s.eigenvalues.sum() > 0.0 && std::isfinite(s.eigenvalues.sum());
  return s;
}

}  // namespace detail

struct DetectOptions {
  std::size_t neighborhood = 30;
  double threshold = 0.05;
  /// Weight of the tangent block in the clustering features; <= 0 means
  /// 0.04 x the cloud's bounding-box diagonal.
  double tangent_scale = -1.0;
  /// Points whose edge neighbourhood has lambda_max / trace below this are junctions.
  double junction_linearity = 0.95;
  /// Exponent on the variation weights of the crease centroid; larger values
  /// pull the estimate onto the highest-variation (crease) points.
  double offset_power = 8.0;
};

/// Flags points whose surface variation lambda_min / (l1 + l2 + l3) exceeds the
/// threshold over their k-neighbourhood, then estimates the offset toward the
/// crease and the clustering features (consolidated position plus the
/// sign-free tangent t t^T).
inline EdgePointSet detect_edge_points(const PointCloud& cloud, const DetectOptions& opt) {
  if (opt.neighborhood < 3) throw DomainError("neighborhood must be >= 3");
  if (cloud.size() < opt.neighborhood) throw DomainError("cloud has fewer points than the neighborhood size");

  const KdTree3 tree(cloud);
  const std::size_t n = cloud.size();
  std::vector<std::vector<std::size_t>> nbrs(n);
  std::vector<double> variation(n, 0.0);
  std::vector<Point3> local;
  for (std::size_t i = 0; i < n; ++i) {
    const auto knn = tree.knn(cloud[i], opt.neighborhood);
    nbrs[i].reserve(knn.size());
    local.clear();
    for (const auto& nb : knn) {
      nbrs[i].push_back(nb.index);
      local.push_back(cloud[nb.index]);
    }
    const auto shape = detail::local_shape(local);
    if (!shape.ok) continue;  // degenerate neighbourhood: never an edge point
    variation[i] = shape.eigenvalues(0) / shape.eigenvalues.sum();
  }

  EdgePointSet out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(variation[i] > opt.threshold)) continue;
    Point3 centroid{};
    double wsum = 0.0;
    for (std::size_t j : nbrs[i]) {
      if (!(variation[j] > opt.threshold)) continue;
      const double w = std::pow(variation[j], opt.offset_power);
      centroid += cloud[j] * w;
      wsum += w;
    }
    out.source_index.push_back(i);
    out.points.push_back(cloud[i]);
    out.offsets.push_back(centroid / wsum - cloud[i]);
    out.variation.push_back(variation[i]);
  }
  if (out.empty()) {
    out.feature_dim = 9;
    return out;
  }

  const double tangent_scale = opt.tangent_scale > 0 ? opt.tangent_scale : 0.04 * bbox_diagonal(cloud);
  std::vector<Point3> cons(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) cons[i] = out.consolidated(i);
  const KdTree3 ctree(cons);
  const std::size_t kt = std::min<std::size_t>(std::max<std::size_t>(opt.neighborhood / 2, 3), cons.size());

  out.feature_dim = 9;
  out.features.resize(out.size() * 9);
  out.junction.assign(out.size(), 0);
  out.tangents.resize(out.size());
  out.thickness.assign(out.size(), 0.0);
  const double r2 = std::sqrt(2.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    local.clear();
    for (const auto& nb : ctree.knn(cons[i], kt)) local.push_back(cons[nb.index]);
    const auto shape = detail::local_shape(local);
    Eigen::Vector3d t = Eigen::Vector3d::UnitX();
    if (shape.ok) {
      t = shape.eigenvectors.col(2);
      out.junction[i] = shape.eigenvalues(2) / shape.eigenvalues.sum() < opt.junction_linearity;
      out.thickness[i] = std::sqrt(shape.eigenvalues(0) + shape.eigenvalues(1));
    }
    out.tangents[i] = detail::from_eigen(t);
    double* f = out.features.data() + i * 9;
    f[0] = cons[i].x;
    f[1] = cons[i].y;
    f[2] = cons[i].z;
    f[3] = tangent_scale * t.x() * t.x();
    f[4] = tangent_scale * t.y() * t.y();
    f[5] = tangent_scale * t.z() * t.z();
    f[6] = tangent_scale * r2 * t.x() * t.y();
    f[7] = tangent_scale * r2 * t.x() * t.z();
    f[8] = tangent_scale * r2 * t.y() * t.z();
  }
  return out;
}

inline EdgePointSet detect_edge_points(const PointCloud& cloud, std::size_t neighborhood, double threshold) {
  DetectOptions opt;
  opt.neighborhood = neighborhood;
  opt.threshold = threshold;
  return detect_edge_points(cloud, opt);
}

// ---------------------------------------------------------------------------
// Mean shift

/// Gaussian-kernel mean shift over row-major feature vectors (dim >= 3; the
/// first three components must be spatial, they drive the neighbour search).
/// Each point climbs to a mode; modes closer than `merge_radius` (default
/// bandwidth/2) are merged transitively. Returns clusters ordered by their smallest member, members
/// ascending. Every point belongs to exactly one cluster.
inline std::vector<std::vector<std::size_t>> meanshift_cluster(std::span<const double> features, std::size_t dim,
                                                               double bandwidth, std::size_t max_iter = 50,
                                                               double tol = 1e-6, double merge_radius = -1.0) {
  if (dim < 3) throw DomainError("mean shift needs at least 3 feature dimensions");
  if (!(bandwidth > 0.0)) throw DomainError("bandwidth must be positive");
  if (features.size() % dim != 0) throw DomainError("feature array is not a multiple of dim");
  const std::size_t n = features.size() / dim;
  if (n == 0) throw DomainError("mean shift of an empty set");

  std::vector<Point3> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[i] = {features[i * dim], features[i * dim + 1], features[i * dim + 2]};
  const KdTree3 tree(pos);
  const double cutoff = 3.0 * bandwidth;
  const double inv2h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  const double tol2 = tol * tol;

  std::vector<double> modes(features.begin(), features.end());
  std::vector<double> next(dim);
  for (std::size_t i = 0; i < n; ++i) {
    double* y = modes.data() + i * dim;
    for (std::size_t it = 0; it < max_iter; ++it) {
      std::fill(next.begin(), next.end(), 0.0);
      double wsum = 0.0;
      for (std::size_t j : tree.radius_search({y[0], y[1], y[2]}, cutoff)) {
        const double* x = features.data() + j * dim;
        double d2 = 0.0;
        for (std::size_t c = 0; c < dim; ++c) d2 += (x[c] - y[c]) * (x[c] - y[c]);
        if (d2 > cutoff * cutoff) continue;
        const double w = std::exp(-d2 * inv2h2);
        for (std::size_t c = 0; c < dim; ++c) next[c] += w * x[c];
        wsum += w;
      }
      if (!(wsum > 0.0)) break;
      double shift2 = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double v = next[c] / wsum;
        shift2 += (v - y[c]) * (v - y[c]);
        y[c] = v;
      }
      if (shift2 < tol2) break;
    }
  }

  // Union-find over modes within the merge radius.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::vector<Point3> mode_pos(n);
  for (std::size_t i = 0; i < n; ++i) mode_pos[i] = {modes[i * dim], modes[i * dim + 1], modes[i * dim + 2]};
  const KdTree3 mode_tree(mode_pos);
  const double merge = merge_radius > 0.0 ? merge_radius : 0.5 * bandwidth;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : mode_tree.radius_search(mode_pos[i], merge)) {
      if (j <= i) continue;
      double d2 = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double d = modes[i * dim + c] - modes[j * dim + c];
        d2 += d * d;
      }
      if (d2 < merge * merge) {
        const std::size_t a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }

  std::vector<std::vector<std::size_t>> clusters;
  std::vector<std::size_t> slot(n, SIZE_MAX);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] == SIZE_MAX) {
      slot[r] = clusters.size();
      clusters.emplace_back();
    }
    clusters[slot[r]].push_back(i);
  }
  return clusters;
}

inline std::vector<std::vector<std::size_t>> meanshift_cluster(const EdgePointSet& pts, double bandwidth,
                                                               std::size_t max_iter = 50, double tol = 1e-6) {
  if (pts.empty()) throw DomainError("mean shift of an empty edge-point set");
  return meanshift_cluster(pts.features, pts.feature_dim, bandwidth, max_iter, tol);
}

// ---------------------------------------------------------------------------
// Curve fits

struct LineFit {
  LineEdge edge;
  double residual = 0.0;  // RMS orthogonal distance
};

struct CircleFit {
  CircleEdge edge;
  double residual = 0.0;  // RMS of radial and out-of-plane distance
  bool closed = false;
};

struct SplineFit {
  SplineEdge edge;
  double residual = 0.0;  // RMS distance to the fitted parameters' curve points
  bool regularized = false;
  std::vector<double> parameters;
};

namespace detail {

struct PrincipalFrame {
  Eigen::Vector3d centroid;
  Eigen::Matrix3d axes;        // columns: principal directions, descending
  Eigen::Vector3d singular;    // descending
};

inline PrincipalFrame principal_frame(std::span<const Point3> pts) {
  PrincipalFrame f;
  f.centroid = Eigen::Vector3d::Zero();
  for (const auto& p : pts) f.centroid += to_eigen(p);
  f.centroid /= static_cast<double>(pts.size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = (to_eigen(pts[i]) - f.centroid).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
  f.axes = svd.matrixV();
  f.singular = svd.singularValues();
  return f;
}

}  // namespace detail

/// Total-least-squares line: principal axis through the centroid, clipped to
/// the extreme projections of the data.
inline LineFit fit_line(std::span<const Point3> pts) {
  if (pts.size() < 2) throw DomainError("fit_line needs at least 2 points");
  const auto f = detail::principal_frame(pts);
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, (detail::to_eigen(p) - f.centroid).norm());
  if (!(f.singular(0) > 0.0) || scale <= 1e-300) throw DegenerateGeometryError("fit_line: all points coincide");

  const Eigen::Vector3d d = detail::canonical_sign(f.axes.col(0));
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, ss = 0.0;
  for (const auto& p : pts) {
    const Eigen::Vector3d q = detail::to_eigen(p) - f.centroid;
    const double t = q.dot(d);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
    ss += (q - t * d).squaredNorm();
  }
  LineFit out;
  out.edge.start = detail::from_eigen(f.centroid + lo * d);
  out.edge.end = detail::from_eigen(f.centroid + hi * d);
  out.residual = std::sqrt(ss / static_cast<double>(pts.size()));
  return out;
}

/// Largest angular gap (radians) that still counts as a sampling hole in a full circle.
inline double full_circle_gap_limit(std::size_t n_points) {
  return std::max(0.5, 6.0 * kTwoPi / static_cast<double>(n_points));
}

/// Plane by SVD, algebraic (Kasa) circle in the plane, arc extent from the
/// largest angular gap between samples.
inline CircleFit fit_circle(std::span<const Point3> pts) {
  if (pts.size() < 3) throw DomainError("fit_circle needs at least 3 points");
  const auto f = detail::principal_frame(pts);
  if (!(f.singular(0) > 0.0) || f.singular(1) <= 1e-9 * f.singular(0))
    throw DegenerateGeometryError("fit_circle: points are collinear");

  const Eigen::Vector3d normal = detail::canonical_sign(f.axes.col(2));
  const Eigen::Vector3d e1 = f.axes.col(0);
  const Eigen::Vector3d e2 = normal.cross(e1);

  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  std::vector<Eigen::Vector2d> uv(pts.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d q = detail::to_eigen(pts[static_cast<std::size_t>(i)]) - f.centroid;
    const double x = q.dot(e1), y = q.dot(e2);
    uv[static_cast<std::size_t>(i)] = {x, y};
    a(i, 0) = x;
    a(i, 1) = y;
    a(i, 2) = 1.0;
    b(i) = -(x * x + y * y);
  }
  const Eigen::Vector3d abc = a.colPivHouseholderQr().solve(b);
  const double cx = -abc(0) / 2.0, cy = -abc(1) / 2.0;
  const double r2 = cx * cx + cy * cy - abc(2);
  if (!(r2 > 0.0) || !std::isfinite(r2)) throw DegenerateGeometryError("fit_circle: no real circle fits the points");
  const double r = std::sqrt(r2);
  const Eigen::Vector3d center = f.centroid + cx * e1 + cy * e2;

  std::vector<double> ang(pts.size());
  double ss = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double dx = uv[i].x() - cx, dy = uv[i].y() - cy;
    ang[i] = std::atan2(dy, dx);
    const double radial = std::hypot(dx, dy) - r;
    const double off = (detail::to_eigen(pts[i]) - f.centroid).dot(normal);
    ss += radial * radial + off * off;
  }
  std::vector<double> sorted = ang;
  std::sort(sorted.begin(), sorted.end());
  double gap = sorted.front() + kTwoPi - sorted.back();
  double after_gap = sorted.front();
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] - sorted[i - 1] > gap) {
      gap = sorted[i] - sorted[i - 1];
      after_gap = sorted[i];
    }
  }

  auto on_circle = [&](double t) {
    return detail::from_eigen(center + r * (std::cos(t) * e1 + std::sin(t) * e2));
  };
  CircleFit out;
  out.edge.center = detail::from_eigen(center);
  out.edge.normal = detail::from_eigen(normal);
  out.edge.radius = r;
  out.closed = gap <= full_circle_gap_limit(pts.size());
  if (out.closed) {
    out.edge.start = on_circle(ang[0]);
    out.edge.end = out.edge.start;
  } else {
    out.edge.start = on_circle(after_gap);
    out.edge.end = on_circle(after_gap + (kTwoPi - gap));
  }
  out.residual = std::sqrt(ss / static_cast<double>(pts.size()));
  return out;
}

namespace detail {

// Dense basis matrix row for parameter t.
template <class Row>
void basis_row(const std::vector<double>& knots, std::size_t n_ctrl, int degree, double t, Row&& row) {
  row.setZero();
  const std::size_t span = bspline_span(knots, n_ctrl, degree, t);
  const auto vals = bspline_basis(knots, span, degree, t);
  for (std::size_t j = 0; j < vals.size(); ++j) row(static_cast<Eigen::Index>(span - static_cast<std::size_t>(degree) + j)) = vals[j];
}

inline double rms_residual(const SplineEdge& s, std::span<const Point3> pts, const std::vector<double>& t) {
  double ss = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) ss += squared_distance(eval_spline(s, t[i]), pts[i]);
  return std::sqrt(ss / static_cast<double>(pts.size()));
}

}  // namespace detail

/// Least-squares clamped uniform B-spline through ordered points.
///
/// Starts from chord-length and from uniform parameters, then refines control
/// points and interior parameters jointly with damped Gauss-Newton (the
/// parameter block is eliminated through its Schur complement). When that
/// stalls, points are re-projected onto their nearest curve parameter and the
/// refinement resumes. End parameters stay at 0 and 1. The better start wins.
inline SplineFit fit_spline(std::span<const Point3> pts, int degree, std::size_t n_ctrl, std::size_t max_iter = 100) {
  if (degree < 1) throw DomainError("spline degree must be >= 1");
  if (n_ctrl < static_cast<std::size_t>(degree) + 1) throw DomainError("n_ctrl must be >= degree + 1");
  if (pts.size() < n_ctrl) throw DomainError("fit_spline needs at least n_ctrl points");

  const std::size_t n = pts.size();
  const auto M = static_cast<Eigen::Index>(n_ctrl);
  const auto knots = clamped_uniform_knots(n_ctrl, degree);

  std::vector<double> chord(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) chord[i] = chord[i - 1] + distance(pts[i - 1], pts[i]);
  if (!(chord.back() > 0.0)) throw DegenerateGeometryError("fit_spline: all points coincide");
  for (double& v : chord) v /= chord.back();
  chord.back() = 1.0;
  std::vector<double> uniform(n);
  for (std::size_t i = 0; i < n; ++i) uniform[i] = static_cast<double>(i) / static_cast<double>(n - 1);

  Eigen::MatrixXd P(static_cast<Eigen::Index>(n), 3);
  for (std::size_t i = 0; i < n; ++i) P.row(static_cast<Eigen::Index>(i)) = detail::to_eigen(pts[i]).transpose();

  bool regularized = false;
  auto solve_ctrl = [&](const std::vector<double>& params) {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(n), M);
    for (std::size_t i = 0; i < n; ++i) detail::basis_row(knots, n_ctrl, degree, params[i], A.row(static_cast<Eigen::Index>(i)));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::MatrixXd C;
    if (qr.rank() < M) {
      const Eigen::MatrixXd AtA = A.transpose() * A;
      const double lambda = 1e-8 * std::max(AtA.trace() / static_cast<double>(M), 1e-300);
      C = (AtA + lambda * Eigen::MatrixXd::Identity(M, M)).ldlt().solve(A.transpose() * P);
      regularized = true;
    } else {
      C = qr.solve(P);
    }
    SplineEdge s;
    s.degree = degree;
    s.keypoints.resize(n_ctrl);
    for (Eigen::Index j = 0; j < M; ++j) s.keypoints[static_cast<std::size_t>(j)] = detail::from_eigen(C.row(j).transpose());
    return s;
  };

  // Damped Gauss-Newton on control points and interior parameters.
  auto refine = [&](SplineEdge& curve, std::vector<double>& t, double& res) {
    double lambda = 1e-6;
    Eigen::RowVectorXd row(M);
    for (std::size_t it = 0; it < max_iter && res > 1e-13; ++it) {
      const auto D = 3 * M;
      Eigen::MatrixXd S = Eigen::MatrixXd::Zero(D, D);
      Eigen::VectorXd g = Eigen::VectorXd::Zero(D);
      std::vector<Eigen::Vector3d> tang(n), resid(n);
      for (std::size_t i = 0; i < n; ++i) {
        detail::basis_row(knots, n_ctrl, degree, t[i], row);
        resid[i] = detail::to_eigen(eval_spline(curve, t[i])) - P.row(static_cast<Eigen::Index>(i)).transpose();
        tang[i] = detail::to_eigen(spline_tangent(curve, t[i]));
        const bool free_param = i != 0 && i + 1 != n && tang[i].squaredNorm() > 0.0;
        const double dinv = free_param ? 1.0 / tang[i].squaredNorm() : 0.0;
        const Eigen::Matrix3d proj = Eigen::Matrix3d::Identity() - dinv * tang[i] * tang[i].transpose();
        const Eigen::Vector3d pr = proj * resid[i];
        for (Eigen::Index a = 0; a < M; ++a) {
          if (row(a) == 0.0) continue;
          g.segment<3>(3 * a) += row(a) * pr;
          for (Eigen::Index b = 0; b < M; ++b) {
            if (row(b) == 0.0) continue;
            S.block<3, 3>(3 * a, 3 * b) += row(a) * row(b) * proj;
          }
        }
      }

      bool improved = false;
      for (int attempt = 0; attempt < 10 && !improved; ++attempt) {
        Eigen::MatrixXd Sd = S;
        Sd.diagonal().array() += lambda * (S.diagonal().array() + 1e-12);
        const Eigen::VectorXd dc = Sd.ldlt().solve(-g);
        if (!dc.allFinite()) {
          lambda *= 10;
          continue;
        }
        SplineEdge trial = curve;
        for (Eigen::Index j = 0; j < M; ++j) trial.keypoints[static_cast<std::size_t>(j)] += detail::from_eigen(dc.segment<3>(3 * j));
        std::vector<double> tt = t;
        for (std::size_t i = 1; i + 1 < n; ++i) {
          const double d2 = tang[i].squaredNorm();
          if (d2 <= 0.0) continue;
          detail::basis_row(knots, n_ctrl, degree, t[i], row);
          Eigen::Vector3d moved = Eigen::Vector3d::Zero();
          for (Eigen::Index a = 0; a < M; ++a)
            if (row(a) != 0.0) moved += row(a) * dc.segment<3>(3 * a);
          tt[i] = std::clamp(t[i] - tang[i].dot(resid[i] + moved) / d2, 0.0, 1.0);
        }
        const double trial_res = detail::rms_residual(trial, pts, tt);
        if (trial_res < res) {
          curve = std::move(trial);
          t = std::move(tt);
          const double gain = res - trial_res;
          res = trial_res;
          lambda = std::max(lambda / 10, 1e-15);
          improved = true;
          if (gain < 1e-15 * std::max(1.0, res)) it = max_iter;
        } else {
          lambda *= 10;
        }
      }
      if (!improved) break;
    }
  };

  // Nearest parameter of every interior point: grid scan, then golden section.
  auto project = [&](const SplineEdge& curve, std::vector<double>& t) {
    const std::size_t grid = 16 * n_ctrl;
    std::vector<Point3> samples(grid + 1);
    for (std::size_t j = 0; j <= grid; ++j) samples[j] = eval_spline(curve, static_cast<double>(j) / static_cast<double>(grid));
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j <= grid; ++j)
        if (squared_distance(samples[j], pts[i]) < squared_distance(samples[best], pts[i])) best = j;
      double lo = static_cast<double>(best == 0 ? 0 : best - 1) / static_cast<double>(grid);
      double hi = static_cast<double>(std::min(best + 1, grid)) / static_cast<double>(grid);
      for (int k = 0; k < 60; ++k) {
        const double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        if (squared_distance(eval_spline(curve, x1), pts[i]) < squared_distance(eval_spline(curve, x2), pts[i]))
          hi = x2;
        else
          lo = x1;
      }
      const double cand = 0.5 * (lo + hi);
      if (squared_distance(eval_spline(curve, cand), pts[i]) < squared_distance(eval_spline(curve, t[i]), pts[i])) t[i] = cand;
    }
  };

  SplineFit out;
  out.residual = std::numeric_limits<double>::infinity();
  for (const auto* init : {&chord, &uniform}) {
    std::vector<double> t = *init;
    SplineEdge curve = solve_ctrl(t);
    double res = detail::rms_residual(curve, pts, t);
    refine(curve, t, res);
    for (int round = 0; round < 8 && res > 1e-13; ++round) {
      std::vector<double> tp = t;
      project(curve, tp);
      SplineEdge c2 = solve_ctrl(tp);
      double r2 = detail::rms_residual(c2, pts, tp);
      refine(c2, tp, r2);
      if (!(r2 < 0.999 * res)) break;
      curve = std::move(c2);
      t = std::move(tp);
      res = r2;
    }
    if (res < out.residual) {
      out.edge = std::move(curve);
      out.residual = res;
      out.parameters = std::move(t);
    }
  }
  out.regularized = regularized;
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

struct FitConfig {
  std::size_t neighborhood = 30;
  double variation_threshold = 0.05;
  /// Mean-shift bandwidth as a fraction of the cloud's bounding-box diagonal.
  double bandwidth_fraction = 0.02;
  std::size_t meanshift_max_iter = 50;
  double meanshift_tol = 1e-7;
  std::size_t min_cluster_size = 8;
  /// Modes are linked within max(bandwidth / 2, this * mean point spacing).
  double link_spacing_factor = 1.5;
  int spline_degree = 3;
  std::size_t spline_ctrl = 6;
  double spline_penalty = 1.1;
  /// Circles larger than this multiple of the cloud diagonal are treated as lines.
  double max_radius_factor = 2.0;
  /// Adjacent fragments merge when their union fits within this factor of
  /// the worse fragment's residual.
  double merge_ratio = 1.5;
  /// Fragments merge only if their tangents at the closest contact agree to
  /// within this cosine.
  double merge_min_cos = 0.866;
  /// Largest gap between mergeable fragments, in bandwidths.
  double merge_reach = 3.0;
  /// Residual floor for type voting, as a fraction of the mean point spacing.
  double noise_floor_fraction = 0.1;
  /// The floor is also at least this multiple of the RMS local crease thickness
  /// of the cluster, so scan noise does not favour splines.
  double noise_thickness_factor = 2.0;
  /// ... and at least this fraction of the cluster's bounding-box diagonal.
  double extent_floor_fraction = 0.01;
  /// Share of the worst-fitting points ignored when ranking curve types.
  double vote_trim = 0.2;
  /// Clouds larger than this are uniformly downsampled first; 0 disables.
  std::size_t max_points = 10000;
  std::uint64_t seed = 0;
};

struct Segment {
  std::vector<std::size_t> members;  // indices into the (downsampled) cloud
  ParametricEdge edge;
  double residual = 0.0;
  /// Candidate residuals: line, circle, spline (infinity when the fit failed).
  std::array<double, 3> type_residuals{};
  std::size_t sharp_votes = 0;
  std::size_t smooth_votes = 0;
};

struct FitResult {
  EdgeSet edges;
  std::vector<Segment> segments;
  std::size_t edge_points = 0;
  std::size_t dropped_clusters = 0;
};

namespace detail {

// Greedy nearest-neighbour chain from the point farthest from the centroid.
inline std::vector<Point3> order_along_curve(std::span<const Point3> pts) {
  Point3 c{};
  for (const auto& p : pts) c += p;
  c = c / static_cast<double>(pts.size());
  std::size_t start = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (squared_distance(pts[i], c) > squared_distance(pts[start], c)) start = i;
  std::vector<std::uint8_t> used(pts.size(), 0);
  std::vector<Point3> out;
  out.reserve(pts.size());
  std::size_t cur = start;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    used[cur] = 1;
    out.push_back(pts[cur]);
    std::size_t best = SIZE_MAX;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (used[j]) continue;
      const double d = squared_distance(pts[cur], pts[j]);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    if (best == SIZE_MAX) break;
    cur = best;
  }
  return out;
}

struct TypedFit {
  ParametricEdge edge;
  double residual = std::numeric_limits<double>::infinity();
  std::array<double, 3> residuals{};
};

// RMS over the best-fitting (1 - trim) share of the per-point distances.
inline double trimmed_rms(std::vector<double> d, double trim) {
  std::sort(d.begin(), d.end());
  const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((1.0 - trim) * static_cast<double>(d.size()))));
  double ss = 0.0;
  for (std::size_t i = 0; i < keep; ++i) ss += d[i] * d[i];
  return std::sqrt(ss / static_cast<double>(keep));
}

inline double distance_to_edge(const ParametricEdge& e, const Point3& p, double reach);

// Types are ranked by trimmed residual, so a few hooked points at the ends of
// a crease do not buy a spline. Residuals below `floor` (never less than a
// round-off level of 1e-9 * diag) count as equal and ties fall to the simpler
// type.
inline TypedFit fit_best(std::span<const Point3> pts, const FitConfig& cfg, double diag, double floor,
                         std::optional<EdgeKind> force = std::nullopt) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  floor = std::max(floor, 1e-9 * diag);
  TypedFit best;
  best.residuals = {inf, inf, inf};
  double best_score = inf;
  std::vector<double> dist;
  auto consider = [&](EdgeKind kind, auto&& make) {
    if (force && *force != kind) return;
    try {
      dist.clear();
      auto [edge, residual] = make();
      best.residuals[static_cast<std::size_t>(kind)] = residual;
      const double base = std::max(trimmed_rms(dist, cfg.vote_trim), floor);
      const double score = kind == EdgeKind::spline ? base * cfg.spline_penalty : base;
      if (score < best_score) {
        best_score = score;
        best.edge = std::move(edge);
        best.residual = residual;
      }
    } catch (const Error&) {
      // this model class cannot represent the cluster
    }
  };
  consider(EdgeKind::line, [&] {
    auto f = fit_line(pts);
    ParametricEdge e{f.edge, {}, {}};
    for (const auto& p : pts) dist.push_back(distance_to_edge(e, p, 0.0));
    return std::pair{std::move(e), f.residual};
  });
  consider(EdgeKind::circle, [&] {
    auto f = fit_circle(pts);
    if (f.edge.radius > cfg.max_radius_factor * diag) throw DegenerateGeometryError("radius too large");
    ParametricEdge e{f.edge, {}, {}};
    for (const auto& p : pts) dist.push_back(distance_to_edge(e, p, 0.0));
    return std::pair{std::move(e), f.residual};
  });
  const std::size_t ctrl = std::min(cfg.spline_ctrl, pts.size() / 3);
  if (ctrl >= static_cast<std::size_t>(cfg.spline_degree) + 1) {
    consider(EdgeKind::spline, [&] {
      const auto ordered = order_along_curve(pts);
      auto f = fit_spline(ordered, cfg.spline_degree, ctrl, 30);
      for (std::size_t i = 0; i < ordered.size(); ++i) dist.push_back(distance(eval_spline(f.edge, f.parameters[i]), ordered[i]));
      return std::pair{ParametricEdge{f.edge, {}, {}}, f.residual};
    });
  }
  return best;
}

// Distance to the curve; lines count as extended by `reach` past both ends.
inline double distance_to_edge(const ParametricEdge& e, const Point3& p, double reach = 0.0) {
  return std::visit(
      [&](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, LineEdge>) {
          const Vec3 d = g.end - g.start;
          const double len2 = dot(d, d);
          const double ext = len2 > 0 ? reach / std::sqrt(len2) : 0.0;
          const double t = len2 > 0 ? std::clamp(dot(p - g.start, d) / len2, -ext, 1.0 + ext) : 0.0;
          return distance(p, g.start + d * t);
        } else if constexpr (std::is_same_v<T, CircleEdge>) {
          const Vec3 q = p - g.center;
          const double h = dot(q, g.normal);
          const double radial = norm(q - g.normal * h) - g.radius;
          return std::sqrt(radial * radial + h * h);
        } else {
          double best = std::numeric_limits<double>::infinity();
          for (int i = 0; i <= 200; ++i) best = std::min(best, distance(p, eval_spline(g, i / 200.0)));
          return best;
        }
      },
      e.geometry);
}

}  // namespace detail

/// Full classical pipeline: detect, consolidate, cluster, fit, vote.
///
/// Junction points (edge points whose neighbourhood is not curve-like, i.e.
/// near corners) are held out of clustering and afterwards attached to every
/// fitted segment they lie on, which restores the segment extents.
inline FitResult fit_segments(const PointCloud& input, const std::optional<std::vector<bool>>& sharp_labels,
                              const FitConfig& cfg = {}) {
  if (input.empty()) throw DomainError("fit_segments on an empty cloud");
  if (sharp_labels && sharp_labels->size() != input.size())
    throw ValidationError("sharp labels are not aligned with the cloud");

  PointCloud cloud = input;
  std::vector<std::size_t> original(input.size());
  std::iota(original.begin(), original.end(), 0);
  if (cfg.max_points > 0 && input.size() > cfg.max_points) {
    auto ds = downsample(input, cfg.max_points, cfg.seed);
    cloud = std::move(ds.cloud);
    original = std::move(ds.indices);
  }

  FitResult result;
  if (cloud.size() < cfg.neighborhood) return result;
  const double diag = bbox_diagonal(cloud);
  const double bandwidth = cfg.bandwidth_fraction * diag;
  double spacing = 0.0;
  {
    const KdTree3 tree(cloud);
    for (const auto& p : cloud) spacing += std::sqrt(tree.knn(p, 2).back().sq_dist);
    spacing /= static_cast<double>(cloud.size());
  }
  const double spacing_floor = cfg.noise_floor_fraction * spacing;

  DetectOptions det;
  det.neighborhood = cfg.neighborhood;
  det.threshold = cfg.variation_threshold;
  det.tangent_scale = 2.0 * bandwidth;
  const auto pts = detect_edge_points(cloud, det);
  result.edge_points = pts.size();
  if (pts.empty()) return result;

  std::vector<std::size_t> core, junctions;
  for (std::size_t i = 0; i < pts.size(); ++i) (pts.junction[i] ? junctions : core).push_back(i);
  if (core.empty()) return result;
  // Noise floor from sampling and crease thickness; type voting also gets a
  // floor relative to the cluster extent.
  auto noise_floor = [&](const std::vector<std::size_t>& members) {
    double ss = 0.0;
    for (std::size_t m : members) ss += pts.thickness[m] * pts.thickness[m];
    const double rms = members.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(members.size()));
    return std::max(spacing_floor, cfg.noise_thickness_factor * rms);
  };
  auto floor_for = [&](const std::vector<std::size_t>& members) {
    std::vector<Point3> cons;
    for (std::size_t m : members) cons.push_back(pts.consolidated(m));
    const double extent = cons.empty() ? 0.0 : bbox_diagonal(cons);
    return std::max(noise_floor(members), cfg.extent_floor_fraction * extent);
  };


  std::vector<double> feats;
  feats.reserve(core.size() * pts.feature_dim);
  for (std::size_t i : core) {
    const auto f = pts.feature(i);
    feats.insert(feats.end(), f.begin(), f.end());
  }
  // Interior points of a uniformly sampled straight crease hardly move under
  // mean shift, so their modes must be linked across at least one sample gap.
  const double link = std::max(0.5 * bandwidth, cfg.link_spacing_factor * spacing);
  const auto clusters =
      meanshift_cluster(feats, pts.feature_dim, bandwidth, cfg.meanshift_max_iter, cfg.meanshift_tol * diag, link);

  struct Pending {
    std::vector<std::size_t> members;  // edge-point indices
    detail::TypedFit fit;
  };
  std::vector<Pending> kept;
  std::vector<Point3> buf;
  for (const auto& cl : clusters) {
    if (cl.size() < cfg.min_cluster_size) {
      ++result.dropped_clusters;
      for (std::size_t c : cl) junctions.push_back(core[c]);
      continue;
    }
    Pending p;
    buf.clear();
    for (std::size_t c : cl) {
      p.members.push_back(core[c]);
      buf.push_back(pts.consolidated(core[c]));
    }
    p.fit = detail::fit_best(buf, cfg, diag, floor_for(p.members));
    if (!std::isfinite(p.fit.residual)) {
      ++result.dropped_clusters;
      continue;
    }
    kept.push_back(std::move(p));
  }

  // Mean shift leaves long creases in several fragments; merge neighbours
  // whose union is still one curve, best union first.
  {
    std::vector<Point3> all;
    std::vector<std::size_t> owner;
    for (std::size_t k = 0; k < kept.size(); ++k)
      for (std::size_t m : kept[k].members) {
        all.push_back(pts.consolidated(m));
        owner.push_back(k);
      }
    // Closest contact between each pair of fragments and the tangent agreement there.
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> contact_d2(kept.size(), std::vector<double>(kept.size(), inf));
    std::vector<std::vector<double>> contact_cos(kept.size(), std::vector<double>(kept.size(), 0.0));
    std::vector<std::size_t> member;
    for (const auto& k : kept) member.insert(member.end(), k.members.begin(), k.members.end());
    if (!all.empty()) {
      const KdTree3 tree(all);
      for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j : tree.radius_search(all[i], cfg.merge_reach * bandwidth)) {
          const std::size_t a = owner[i], b = owner[j];
          const double d2 = squared_distance(all[i], all[j]);
          if (a == b || d2 >= contact_d2[a][b]) continue;
          contact_d2[a][b] = contact_d2[b][a] = d2;
          contact_cos[a][b] = contact_cos[b][a] = std::abs(dot(pts.tangents[member[i]], pts.tangents[member[j]]));
        }
    }
    auto adjacent = [&](std::size_t a, std::size_t b) {
      return contact_d2[a][b] < inf && contact_cos[a][b] >= cfg.merge_min_cos;
    };
    std::vector<std::uint8_t> alive(kept.size(), 1);
    std::vector<std::vector<double>> union_res(kept.size(), std::vector<double>(kept.size(), -1.0));
    // Fragments of one type merge only into that type; mixed pairs get the
    // best free fit but only the noise floor as slack.
    auto union_fit = [&](std::size_t a, std::size_t b) {
      buf.clear();
      std::vector<std::size_t> m = kept[a].members;
      m.insert(m.end(), kept[b].members.begin(), kept[b].members.end());
      std::sort(m.begin(), m.end());
      for (std::size_t x : m) buf.push_back(pts.consolidated(x));
      const EdgeKind ka = kept[a].fit.edge.kind(), kb = kept[b].fit.edge.kind();
      const bool same = ka == kb;
      auto fit = detail::fit_best(buf, cfg, diag, floor_for(m), same ? std::optional<EdgeKind>(ka) : std::nullopt);
      const double slack = same ? floor_for(m) : noise_floor(m);
      return std::tuple{std::move(m), std::move(fit), slack};
    };
    while (true) {
      double best = inf;
      std::size_t ba = 0, bb = 0;
      for (std::size_t a = 0; a < kept.size(); ++a) {
        if (!alive[a]) continue;
        for (std::size_t b = a + 1; b < kept.size(); ++b) {
          if (!alive[b] || !adjacent(a, b)) continue;
          if (union_res[a][b] < 0) {
            auto [m, fit, slack] = union_fit(a, b);
            const double r = fit.residual;
            const double limit = cfg.merge_ratio * std::max({kept[a].fit.residual, kept[b].fit.residual, slack});
            union_res[a][b] = r <= limit ? r : inf;
          }
          if (union_res[a][b] < best) {
            best = union_res[a][b];
            ba = a;
            bb = b;
          }
        }
      }
      if (best == inf) break;
      auto [members, fit, slack] = union_fit(ba, bb);
      kept[ba].members = std::move(members);
      kept[ba].fit = std::move(fit);
      alive[bb] = 0;
      for (std::size_t c = 0; c < kept.size(); ++c) {
        if (contact_d2[bb][c] < contact_d2[ba][c]) {
          contact_d2[ba][c] = contact_d2[c][ba] = contact_d2[bb][c];
          contact_cos[ba][c] = contact_cos[c][ba] = contact_cos[bb][c];
        }
        union_res[std::min(ba, c)][std::max(ba, c)] = -1.0;
      }
    }
    std::vector<Pending> merged;
    for (std::size_t k = 0; k < kept.size(); ++k)
      if (alive[k]) merged.push_back(std::move(kept[k]));
    kept = std::move(merged);
  }

  const double attach = 0.5 * bandwidth;
  for (auto& p : kept) {
    bool grew = false;
    for (std::size_t j : junctions) {
      if (detail::distance_to_edge(p.fit.edge, pts.consolidated(j), 3.0 * bandwidth) < attach) {
        p.members.push_back(j);
        grew = true;
      }
    }
    if (!grew) continue;
    std::sort(p.members.begin(), p.members.end());
    buf.clear();
    for (std::size_t m : p.members) buf.push_back(pts.consolidated(m));
    auto refit = detail::fit_best(buf, cfg, diag, floor_for(p.members), p.fit.edge.kind());
    if (std::isfinite(refit.residual)) {
      refit.residuals = p.fit.residuals;
      p.fit = std::move(refit);
    }
  }

  for (auto& p : kept) {
    Segment seg;
    for (std::size_t m : p.members) {
      const std::size_t src = original[pts.source_index[m]];
      seg.members.push_back(pts.source_index[m]);
      const bool s = sharp_labels ? static_cast<bool>((*sharp_labels)[src]) : true;
      (s ? seg.sharp_votes : seg.smooth_votes)++;
    }
    seg.edge = p.fit.edge;
    seg.edge.sharp = seg.sharp_votes > seg.smooth_votes;
    seg.residual = p.fit.residual;
    seg.type_residuals = p.fit.residuals;
    result.edges.push_back(seg.edge);
    result.segments.push_back(std::move(seg));
  }
  return result;
}

}  // namespace sharp::fit
