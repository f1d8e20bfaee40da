#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "sharp/baseline_fit.hpp"
#include "sharp/metrics_track1.hpp"
#include "sharp/synthetic.hpp"
#include "test_support.hpp"

using namespace sharp;
using sharp::test::Rng;

namespace {

// Two unit squares meeting at a right angle along the z axis.
PointCloud crease_fixture(double step) {
  PointCloud c;
  const int n = static_cast<int>(std::lround(1.0 / step));
  for (int i = 0; i <= n; ++i)
    for (int k = 0; k <= n; ++k) {
      c.push_back({i * step, 0.0, k * step});
      if (i > 0) c.push_back({0.0, i * step, k * step});
    }
  return c;
}

// Total least squares direction by power iteration on the scatter matrix.
Vec3 tls_direction(const std::vector<Point3>& pts) {
  Point3 c{};
  for (const auto& p : pts) c += p;
  c = c / static_cast<double>(pts.size());
  double m[3][3] = {};
  for (const auto& p : pts)
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) m[a][b] += (p[a] - c[a]) * (p[b] - c[b]);
  Vec3 v{1, 0.3, 0.1};
  for (int it = 0; it < 500; ++it) {
    Vec3 w{};
    for (std::size_t a = 0; a < 3; ++a) w[a] = m[a][0] * v.x + m[a][1] * v.y + m[a][2] * v.z;
    v = w / norm(w);
  }
  return v;
}

double angle_between_lines(const Vec3& a, const Vec3& b) {
  return std::acos(std::min(1.0, std::abs(dot(a, b)) / (norm(a) * norm(b))));
}

std::vector<Point3> circle_points(const Point3& c, const Vec3& n, double r, double t0, double t1, std::size_t count) {
  const Vec3 u = test::any_perpendicular(n), v = cross(n, u);
  std::vector<Point3> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(c + (u * std::cos(t) + v * std::sin(t)) * r);
  }
  return out;
}

// Largest distance between corresponding defining points, with lines and
// splines allowed to run in either direction and circle normals either sign.
double edge_gap(const ParametricEdge& a, const ParametricEdge& b) {
  if (a.kind() != b.kind()) return 1e300;
  if (const auto* la = std::get_if<LineEdge>(&a.geometry)) {
    const auto& lb = std::get<LineEdge>(b.geometry);
    return std::min(std::max(distance(la->start, lb.start), distance(la->end, lb.end)),
                    std::max(distance(la->start, lb.end), distance(la->end, lb.start)));
  }
  if (const auto* ca = std::get_if<CircleEdge>(&a.geometry)) {
    const auto& cb = std::get<CircleEdge>(b.geometry);
    const double nd = std::min(norm(ca->normal - cb.normal), norm(ca->normal + cb.normal));
    const double ends = std::min(std::max(distance(ca->start, cb.start), distance(ca->end, cb.end)),
                                 std::max(distance(ca->start, cb.end), distance(ca->end, cb.start)));
    return std::max({distance(ca->center, cb.center), std::abs(ca->radius - cb.radius), nd, ends});
  }
  const auto& sa = std::get<SplineEdge>(a.geometry).keypoints;
  const auto& sb = std::get<SplineEdge>(b.geometry).keypoints;
  if (sa.size() != sb.size()) return 1e300;
  double fwd = 0, bwd = 0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    fwd = std::max(fwd, distance(sa[i], sb[i]));
    bwd = std::max(bwd, distance(sa[i], sb[sb.size() - 1 - i]));
  }
  return std::min(fwd, bwd);
}

PointCloud jittered_cube(std::uint64_t seed, double amount) {
  auto f = synthetic::cube(30);
  Rng rng(seed);
  for (auto& p : f.cloud)
    for (std::size_t d = 0; d < 3; ++d)
      if (p[d] > 1e-9 && p[d] < 1 - 1e-9) p[d] += rng.uniform(-amount, amount);
  return f.cloud;
}

}  // namespace

// Edge point detection

TEST(DetectEdgePoints, PlaneHasNone) {
  PointCloud plane;
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 30; ++j) plane.push_back({i * 0.1, j * 0.1, 0.0});
  EXPECT_TRUE(fit::detect_edge_points(plane, 30, 0.05).empty());
}

TEST(DetectEdgePoints, FindsRightAngleCrease) {
  const double step = 0.02;
  const auto cloud = crease_fixture(step);
  const auto pts = fit::detect_edge_points(cloud, 30, 0.05);
  std::set<std::size_t> flagged(pts.source_index.begin(), pts.source_index.end());

  // Neighbourhood radius on a flat part of the fixture.
  std::vector<double> d;
  for (const auto& p : cloud) d.push_back(distance(p, Point3{0.5, 0, 0.5}));
  std::nth_element(d.begin(), d.begin() + 30, d.end());
  const double radius = d[30];

  // Points within half a radius see both faces in their neighbourhood.
  std::size_t adjacent = 0, hit = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud[i];
    const double off = std::max(p.x, p.y);
    if (p.z < 0.1 || p.z > 0.9) continue;
    if (off <= 0.5 * radius) {
      ++adjacent;
      hit += flagged.count(i);
    }
    if (off > radius) {
      EXPECT_FALSE(flagged.count(i)) << "far point flagged at " << off;
    }
  }
  ASSERT_GT(adjacent, 0u);
  EXPECT_GT(static_cast<double>(hit) / static_cast<double>(adjacent), 0.95);

  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_TRUE(std::isfinite(pts.offsets[i].x) && std::isfinite(pts.offsets[i].y) && std::isfinite(pts.offsets[i].z));
    EXPECT_GT(pts.variation[i], 0.05);
    EXPECT_LE(pts.variation[i], 1.0 / 3.0 + 1e-12);
    EXPECT_EQ(pts.feature(i).size(), pts.feature_dim);
  }
  // Consolidation pulls points onto the crease line.
  double before = 0, after = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts.points[i];
    const auto q = pts.consolidated(i);
    before += p.x * p.x + p.y * p.y;
    after += q.x * q.x + q.y * q.y;
  }
  EXPECT_LT(after, 0.5 * before);
}

TEST(DetectEdgePoints, ThresholdOneIsEmpty) {
  EXPECT_TRUE(fit::detect_edge_points(crease_fixture(0.05), 30, 1.0).empty());
  EXPECT_TRUE(fit::detect_edge_points(synthetic::cube(10).cloud, 20, 1.0).empty());
}

TEST(DetectEdgePoints, RejectsTooFewPoints) {
  PointCloud tiny{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  EXPECT_THROW(fit::detect_edge_points(tiny, 30, 0.05), DomainError);
}

TEST(DetectEdgePoints, DegenerateNeighbourhoodsAreSkipped) {
  PointCloud c(40, Point3{1, 2, 3});
  EXPECT_NO_THROW({
    const auto pts = fit::detect_edge_points(c, 10, 0.05);
    EXPECT_TRUE(pts.empty());
  });
}

// Mean shift

TEST(MeanShift, SeparatesThreeBlobs) {
  Rng rng(201);
  const double bw = 0.1;
  std::vector<double> feats;
  std::vector<int> truth;
  const Point3 centres[3] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  for (int b = 0; b < 3; ++b)
    for (int i = 0; i < 40; ++i) {
      const Point3 p = centres[b] + rng.unit() * rng.uniform(0, 0.03);
      feats.insert(feats.end(), {p.x, p.y, p.z});
      truth.push_back(b);
    }
  const auto clusters = fit::meanshift_cluster(feats, 3, bw);
  ASSERT_EQ(clusters.size(), 3u);
  for (const auto& c : clusters) {
    ASSERT_EQ(c.size(), 40u);
    for (std::size_t i : c) EXPECT_EQ(truth[i], truth[c.front()]);
  }
}

TEST(MeanShift, IdenticalPointsFormOneCluster) {
  std::vector<double> feats;
  for (int i = 0; i < 25; ++i) feats.insert(feats.end(), {0.5, -1.0, 2.0, 0.1});
  EXPECT_EQ(fit::meanshift_cluster(feats, 4, 0.01).size(), 1u);
}

TEST(MeanShift, WideBandwidthFormsOneCluster) {
  Rng rng(203);
  std::vector<double> feats;
  for (int i = 0; i < 200; ++i) {
    const Point3 p = rng.point(0, 1);
    feats.insert(feats.end(), {p.x, p.y, p.z});
  }
  EXPECT_EQ(fit::meanshift_cluster(feats, 3, 2.0).size(), 1u);
}

TEST(MeanShift, OutputIsADeterministicPartition) {
  Rng rng(205);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(150), dim = 3 + rng.below(4);
    std::vector<double> feats(n * dim);
    for (double& f : feats) f = rng.uniform(-1, 1);
    const double bw = rng.uniform(0.05, 0.8);
    const auto clusters = fit::meanshift_cluster(feats, dim, bw);
    std::vector<int> seen(n, 0);
    for (const auto& c : clusters) {
      EXPECT_FALSE(c.empty());
      for (std::size_t i : c) ++seen[i];
    }
    for (int s : seen) EXPECT_EQ(s, 1);
    EXPECT_EQ(clusters, fit::meanshift_cluster(feats, dim, bw));
  }
}

TEST(MeanShift, Errors) {
  EXPECT_THROW(fit::meanshift_cluster(std::vector<double>{}, 3, 0.1), DomainError);
  EXPECT_THROW(fit::meanshift_cluster(std::vector<double>{0, 0, 0}, 3, 0.0), DomainError);
}

// Line fitting

TEST(FitLine, AxisExample) {
  std::vector<Point3> pts{{1, 0, 0}, {0, 0, 0}, {3, 0, 0}, {2, 0, 0}};
  const auto f = fit::fit_line(pts);
  const bool forward = f.edge.start.x < f.edge.end.x;
  EXPECT_EQ(forward ? f.edge.start : f.edge.end, (Point3{0, 0, 0}));
  EXPECT_EQ(forward ? f.edge.end : f.edge.start, (Point3{3, 0, 0}));
  EXPECT_LT(f.residual, 1e-12);
}

TEST(FitLine, RotatedExactLine) {
  Rng rng(211);
  for (int trial = 0; trial < 100; ++trial) {
    const Point3 a = rng.point(-5, 5);
    const Point3 b = a + rng.unit() * rng.uniform(0.1, 4.0);
    std::vector<Point3> pts;
    for (int i = 0; i < 50; ++i) pts.push_back(a + (b - a) * rng.uniform(0, 1));
    pts.push_back(b);
    pts.push_back(a);
    const auto f = fit::fit_line(pts);
    EXPECT_LT(edge_gap(ParametricEdge{f.edge, std::nullopt, std::nullopt}, ParametricEdge{LineEdge{a, b}, std::nullopt, std::nullopt}), 1e-9);
    EXPECT_LT(f.residual, 1e-9);
  }
}

TEST(FitLine, NoisyDirectionMatchesTotalLeastSquares) {
  Rng rng(213);
  std::normal_distribution<double> g(0.0, 0.01);
  for (int trial = 0; trial < 30; ++trial) {
    const Point3 a = rng.point(-1, 1);
    const Vec3 d = rng.unit();
    std::vector<Point3> pts;
    for (int i = 0; i < 200; ++i) pts.push_back(a + d * rng.uniform(0, 2) + Vec3{g(rng.engine), g(rng.engine), g(rng.engine)});
    const auto f = fit::fit_line(pts);
    EXPECT_LT(angle_between_lines(f.edge.end - f.edge.start, tls_direction(pts)), 1e-3);
  }
}

TEST(FitLine, CoincidentPointsAreDegenerate) {
  std::vector<Point3> pts(5, Point3{1, 1, 1});
  EXPECT_THROW(fit::fit_line(pts), DegenerateGeometryError);
  EXPECT_THROW(fit::fit_line(std::vector<Point3>{{0, 0, 0}}), DomainError);
}

// Circle fitting

TEST(FitCircle, ExactUnitCircle) {
  std::vector<Point3> pts;
  for (int i = 0; i < 100; ++i) {
    const double t = kTwoPi * i / 100;
    pts.push_back({std::cos(t), std::sin(t), 0});
  }
  const auto f = fit::fit_circle(pts);
  EXPECT_LT(norm(f.edge.center - Point3{0, 0, 0}), 1e-9);
  EXPECT_NEAR(f.edge.radius, 1.0, 1e-9);
  EXPECT_NEAR(std::abs(f.edge.normal.z) / norm(f.edge.normal), 1.0, 1e-12);
  EXPECT_LT(f.residual, 1e-9);
  EXPECT_TRUE(f.closed);
  EXPECT_EQ(f.edge.start, f.edge.end);
}

TEST(FitCircle, QuarterArcSweep) {
  const auto pts = circle_points({1, 2, 3}, Vec3{1, 1, 0} / std::sqrt(2.0), 0.7, 0.3, 0.3 + std::numbers::pi / 2, 60);
  const auto f = fit::fit_circle(pts);
  EXPECT_FALSE(f.closed);
  EXPECT_NEAR(arc_sweep(f.edge), std::numbers::pi / 2, 1e-6);
}

TEST(FitCircle, RandomExactCircles) {
  Rng rng(217);
  for (int trial = 0; trial < 100; ++trial) {
    const Point3 c = rng.point(-3, 3);
    const Vec3 n = rng.unit();
    const double r = rng.uniform(0.1, 3.0);
    const double t0 = rng.uniform(0, kTwoPi);
    const auto pts = circle_points(c, n, r, t0, t0 + rng.uniform(0.5, 5.5), 3 + rng.below(80));
    const auto f = fit::fit_circle(pts);
    EXPECT_LT(distance(f.edge.center, c), 1e-9);
    EXPECT_NEAR(f.edge.radius, r, 1e-9);
    EXPECT_LT(f.residual, 1e-9);
  }
}

TEST(FitCircle, NoisyRadius) {
  Rng rng(219);
  std::normal_distribution<double> g(0.0, 1e-3);
  for (int trial = 0; trial < 20; ++trial) {
    const double r = rng.uniform(0.5, 2.0);
    auto pts = circle_points(rng.point(-1, 1), rng.unit(), r, 0, kTwoPi * 0.99, 200);
    for (auto& p : pts) p += Vec3{g(rng.engine), g(rng.engine), g(rng.engine)};
    EXPECT_NEAR(fit::fit_circle(pts).edge.radius, r, 1e-2);
  }
}

TEST(FitCircle, CollinearIsDegenerate) {
  std::vector<Point3> pts{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
  EXPECT_THROW(fit::fit_circle(pts), DegenerateGeometryError);
  EXPECT_THROW(fit::fit_circle(std::vector<Point3>{{0, 0, 0}, {1, 0, 0}}), DomainError);
}

// Spline fitting

TEST(FitSpline, ExactQuadratic) {
  Rng rng(223);
  for (int trial = 0; trial < 20; ++trial) {
    SplineEdge s;
    s.degree = 2;
    Point3 p = rng.point(-1, 1);
    for (int i = 0; i < 5; ++i) {
      s.keypoints.push_back(p);
      p += rng.unit() * rng.uniform(0.4, 1.0);
    }
    std::vector<Point3> pts;
    for (int i = 0; i <= 120; ++i) pts.push_back(eval_spline(s, i / 120.0));
    const auto f = fit::fit_spline(pts, 2, 5);
    EXPECT_LT(f.residual, 1e-9) << "trial " << trial;
  }
}

TEST(FitSpline, DegreeOneReproducesPolyline) {
  const std::vector<Point3> corners{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {1, 1, 1}, {2, 1, 1}};
  std::vector<Point3> pts;
  for (std::size_t s = 0; s + 1 < corners.size(); ++s)
    for (int i = 0; i < 20; ++i) pts.push_back(corners[s] + (corners[s + 1] - corners[s]) * (i / 20.0));
  pts.push_back(corners.back());
  const auto f = fit::fit_spline(pts, 1, corners.size());
  ASSERT_EQ(f.edge.keypoints.size(), corners.size());
  for (std::size_t i = 0; i < corners.size(); ++i) EXPECT_LT(distance(f.edge.keypoints[i], corners[i]), 1e-9);
  EXPECT_LT(f.residual, 1e-9);
}

TEST(FitSpline, NoisyHelixBelowNoise) {
  Rng rng(227);
  std::normal_distribution<double> g(0.0, 0.01);
  std::vector<Point3> pts;
  double noise_ss = 0.0;
  for (int i = 0; i < 300; ++i) {
    const double t = 1.5 * std::numbers::pi * i / 299.0;
    const Vec3 e{g(rng.engine), g(rng.engine), g(rng.engine)};
    noise_ss += dot(e, e);
    pts.push_back(Point3{std::cos(t), std::sin(t), 0.2 * t} + e);
  }
  const auto f = fit::fit_spline(pts, 3, 8);
  EXPECT_LT(f.residual, std::sqrt(noise_ss / 300.0));
}

TEST(FitSpline, Errors) {
  std::vector<Point3> pts{{0, 0, 0}, {1, 0, 0}, {2, 1, 0}};
  EXPECT_THROW(fit::fit_spline(pts, 0, 3), DomainError);
  EXPECT_THROW(fit::fit_spline(pts, 3, 3), DomainError);
  EXPECT_THROW(fit::fit_spline(pts, 2, 4), DomainError);
}

// Type selection

TEST(TypeSelection, ExactLinesAndCirclesAreNotSplines) {
  Rng rng(229);
  fit::FitConfig cfg;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Point3> pts;
    const bool line = trial % 2 == 0;
    if (line) {
      const Point3 a = rng.point(-2, 2);
      const Vec3 d = rng.unit() * rng.uniform(0.2, 3.0);
      const std::size_t n = 10 + rng.below(200);
      for (std::size_t i = 0; i < n; ++i) pts.push_back(a + d * (static_cast<double>(i) / static_cast<double>(n - 1)));
    } else {
      const double t0 = rng.uniform(0, kTwoPi);
      pts = circle_points(rng.point(-2, 2), rng.unit(), rng.uniform(0.2, 2.0), t0, t0 + rng.uniform(1.0, kTwoPi * 0.95),
                          20 + rng.below(200));
    }
    const auto best = fit::detail::fit_best(pts, cfg, 4.0, 0.0);
    EXPECT_EQ(best.edge.kind(), line ? EdgeKind::line : EdgeKind::circle) << "trial " << trial;
  }
}

// Full pipeline

TEST(FitSegments, CubeGivesTwelveLines) {
  const auto f = synthetic::cube(40);
  const auto r = fit::fit_segments(f.cloud, std::nullopt);
  ASSERT_EQ(r.edges.size(), 12u);
  std::set<std::size_t> matched;
  for (const auto& e : r.edges) {
    ASSERT_EQ(e.kind(), EdgeKind::line);
    const auto& l = std::get<LineEdge>(e.geometry);
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t g = 0; g < f.edges.size(); ++g) {
      const double dist = std::max(test::distance_to_edge(f.edges[g], l.start), test::distance_to_edge(f.edges[g], l.end));
      if (dist < best_d) best_d = dist, best = g;
    }
    EXPECT_LT(best_d, 1e-2);
    EXPECT_GT(edge_length(e), 0.95);
    matched.insert(best);
    EXPECT_EQ(e.sharp, std::optional<bool>(true));
  }
  EXPECT_EQ(matched.size(), 12u);
  EXPECT_GT(edge_recovery_score(r.edges, f.edges), 0.95);
}

TEST(FitSegments, JitteredCubeStillRecovered) {
  for (std::uint64_t seed : {1u, 2u}) {
    const auto f = synthetic::cube(30);
    const auto r = fit::fit_segments(jittered_cube(seed, 0.004), std::nullopt);
    for (const auto& e : r.edges) EXPECT_EQ(e.kind(), EdgeKind::line);
    EXPECT_GE(r.edges.size(), 12u);
    EXPECT_LE(r.edges.size(), 13u);
    auto pred = r.edges;
    EXPECT_GT(edge_recovery_score(pred, f.edges), 0.95);
  }
}

TEST(FitSegments, DiskRimIsOneCircle) {
  const auto f = synthetic::capped_tube();
  const auto r = fit::fit_segments(f.cloud, std::nullopt);
  ASSERT_EQ(r.edges.size(), 1u);
  ASSERT_EQ(r.edges[0].kind(), EdgeKind::circle);
  EXPECT_NEAR(std::get<CircleEdge>(r.edges[0].geometry).radius, 1.0, 1e-2);
}

TEST(FitSegments, SmoothSphereHasNoEdges) {
  const auto r = fit::fit_segments(synthetic::sphere().cloud, std::nullopt);
  EXPECT_TRUE(r.edges.empty());
  EXPECT_EQ(r.edge_points, 0u);
}

TEST(FitSegments, SharpnessFollowsMajorityOfLabels) {
  const auto f = synthetic::cube(20);
  const std::vector<bool> none(f.cloud.size(), false), all(f.cloud.size(), true);
  const auto smooth = fit::fit_segments(f.cloud, none);
  const auto sharp = fit::fit_segments(f.cloud, all);
  ASSERT_FALSE(smooth.edges.empty());
  for (const auto& e : smooth.edges) EXPECT_EQ(e.sharp, std::optional<bool>(false));
  for (const auto& e : sharp.edges) EXPECT_EQ(e.sharp, std::optional<bool>(true));
  for (const auto& s : sharp.segments) EXPECT_EQ(s.smooth_votes, 0u);

  // Label only the points at the top face: edges there are sharp.
  std::vector<bool> top(f.cloud.size());
  for (std::size_t i = 0; i < f.cloud.size(); ++i) top[i] = f.cloud[i].z > 0.9;
  const auto mixed = fit::fit_segments(f.cloud, top);
  for (const auto& e : mixed.edges) {
    const auto& l = std::get<LineEdge>(e.geometry);
    const bool on_top = l.start.z > 0.9 && l.end.z > 0.9;
    const bool on_bottom = l.start.z < 0.1 && l.end.z < 0.1;
    if (on_top) {
      EXPECT_EQ(e.sharp, std::optional<bool>(true));
    }
    if (on_bottom) {
      EXPECT_EQ(e.sharp, std::optional<bool>(false));
    }
  }

  EXPECT_THROW(fit::fit_segments(f.cloud, std::vector<bool>(3, true)), ValidationError);
}

TEST(FitSegments, Deterministic) {
  const auto cloud = jittered_cube(5, 0.004);
  const auto a = fit::fit_segments(cloud, std::nullopt);
  const auto b = fit::fit_segments(cloud, std::nullopt);
  ASSERT_EQ(a.edges.size(), b.edges.size());
  for (std::size_t i = 0; i < a.edges.size(); ++i) EXPECT_EQ(edge_gap(a.edges[i], b.edges[i]), 0.0);
}

// Transforms that keep the axis-aligned box similar commute with the pipeline.
// The bandwidth follows the box diagonal, so arbitrary rotations are only
// approximately equivariant.
TEST(FitSegments, EquivariantUnderBoxRotationsAndTranslation) {
  const auto cloud = jittered_cube(7, 0.004);
  const auto base = fit::fit_segments(cloud, std::nullopt);
  ASSERT_GE(base.edges.size(), 12u);
  const auto rots = test::box_rotations();
  Rng rng(231);
  for (std::size_t k = 0; k < rots.size(); k += 5) {
    auto t = rots[k];
    t.translation = rng.point(-3, 3);
    PointCloud moved;
    for (const auto& p : cloud) moved.push_back(t(p));
    const auto r = fit::fit_segments(moved, std::nullopt);
    ASSERT_EQ(r.edges.size(), base.edges.size()) << "rotation " << k;
    for (const auto& e : base.edges) {
      const auto expected = transform_edge(e, t);
      double best = 1e300;
      for (const auto& g : r.edges) best = std::min(best, edge_gap(expected, g));
      EXPECT_LT(best, 1e-6) << "rotation " << k;
    }
  }
}
