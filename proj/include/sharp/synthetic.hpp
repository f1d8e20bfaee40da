#pragma once

// Synthetic scans with exact ground truth: unit cube, capped tube (disk rim),
// smooth sphere, and a mixed-primitive edge scene.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <tuple>
#include <vector>

#include "sharp/geometry.hpp"
#include "sharp/labels.hpp"
#include "sharp/vocabulary.hpp"

namespace sharp::synthetic {

struct Fixture {
  PointCloud cloud;
  EdgeSet edges;        // ground truth, angles in radians
  LabelTable faces;     // face membership + face type
  LabelTable steps;     // operation step + operation type
};

namespace detail {

inline int face_type(const char* name) { return *find_type(face_type_vocabulary(), name); }
inline int op_type(const char* name) { return *find_type(operation_type_vocabulary(), name); }

inline ParametricEdge gt_line(Point3 a, Point3 b, double angle) {
  return ParametricEdge{LineEdge{a, b}, std::nullopt, angle};
}

}  // namespace detail

/// Unit cube [0,1]^3 sampled on a regular grid of `per_side` intervals per
/// face edge, boundaries included, shared points kept once (owned by the
/// lowest face id). Faces: x=0, x=1, y=0, y=1, z=0, z=1.
inline Fixture cube(int per_side = 40) {
  Fixture f;
  const double h = 1.0 / per_side;
  f.faces.vocabulary = face_type_vocabulary();
  f.steps.vocabulary = operation_type_vocabulary();
  const int plane = detail::face_type("Plane");
  const int side = detail::op_type("ExtrudeSide"), end = detail::op_type("ExtrudeEnd");

  auto owner = [&](int i, int j, int k) {
    if (i == 0) return 0;
    if (i == per_side) return 1;
    if (j == 0) return 2;
    if (j == per_side) return 3;
    if (k == 0) return 4;
    if (k == per_side) return 5;
    return -1;
  };
  for (int i = 0; i <= per_side; ++i)
    for (int j = 0; j <= per_side; ++j)
      for (int k = 0; k <= per_side; ++k) {
        const int face = owner(i, j, k);
        if (face < 0) continue;
        f.cloud.push_back({i * h, j * h, k * h});
        f.faces.membership.push_back(face);
        f.faces.type_id.push_back(plane);
        f.steps.membership.push_back(0);
        f.steps.type_id.push_back(face >= 4 ? end : side);
      }

  const double a = std::numbers::pi / 2;
  for (double u : {0.0, 1.0})
    for (double v : {0.0, 1.0}) {
      f.edges.push_back(detail::gt_line({0, u, v}, {1, u, v}, a));
      f.edges.push_back(detail::gt_line({u, 0, v}, {u, 1, v}, a));
      f.edges.push_back(detail::gt_line({u, v, 0}, {u, v, 1}, a));
    }
  return f;
}

/// Disk of radius `radius` in z=0 with a cylindrical wall hanging down to
/// z=-height; the rim is the only crease. Ring spacing is `spacing`.
inline Fixture capped_tube(double radius = 1.0, double height = 0.5, double spacing = 0.025) {
  Fixture f;
  f.faces.vocabulary = face_type_vocabulary();
  f.steps.vocabulary = operation_type_vocabulary();
  auto add = [&](Point3 p, int face, const char* ftype, const char* otype) {
    f.cloud.push_back(p);
    f.faces.membership.push_back(face);
    f.faces.type_id.push_back(detail::face_type(ftype));
    f.steps.membership.push_back(0);
    f.steps.type_id.push_back(detail::op_type(otype));
  };
  add({0, 0, 0}, 0, "Plane", "ExtrudeEnd");
  const int rings = static_cast<int>(std::lround(radius / spacing));
  for (int r = 1; r <= rings; ++r) {
    const double rr = radius * r / rings;
    const int n = static_cast<int>(std::lround(kTwoPi * rr / spacing));
    for (int i = 0; i < n; ++i) {
      const double t = kTwoPi * i / n;
      add({rr * std::cos(t), rr * std::sin(t), 0.0}, 0, "Plane", "ExtrudeEnd");
    }
  }
  const int around = static_cast<int>(std::lround(kTwoPi * radius / spacing));
  const int levels = static_cast<int>(std::lround(height / spacing));
  for (int l = 1; l <= levels; ++l) {
    const double z = -height * l / levels;
    for (int i = 0; i < around; ++i) {
      const double t = kTwoPi * i / around;
      add({radius * std::cos(t), radius * std::sin(t), z}, 1, "Cylinder", "ExtrudeSide");
    }
  }
  const Point3 s{radius, 0, 0};
  f.edges.push_back(ParametricEdge{CircleEdge{s, s, {0, 0, 0}, {0, 0, 1}, radius}, std::nullopt, std::numbers::pi / 2});
  return f;
}

/// Fibonacci-lattice sphere: smooth everywhere, no edges.
inline Fixture sphere(std::size_t n = 4000, double radius = 1.0) {
  Fixture f;
  f.faces.vocabulary = face_type_vocabulary();
  f.steps.vocabulary = operation_type_vocabulary();
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double y = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double r = std::sqrt(1.0 - y * y);
    const double t = golden * static_cast<double>(i);
    f.cloud.push_back({radius * r * std::cos(t), radius * y, radius * r * std::sin(t)});
    f.faces.membership.push_back(0);
    f.faces.type_id.push_back(detail::face_type("Sphere"));
    f.steps.membership.push_back(0);
    f.steps.type_id.push_back(detail::op_type("RevolveSide"));
  }
  return f;
}

/// Mixed scene: a line, a half arc, a full circle and a cubic spline with
/// varied sharpness, plus a labelled cloud of three patches (plane, cylinder
/// and sphere cap) whose face ids are deliberately non-contiguous.
inline Fixture primitive_scene(std::uint64_t seed = 7) {
  Fixture f;
  f.edges.push_back(detail::gt_line({0, 0, 0}, {2, 0.5, 0}, 2.1));
  f.edges.push_back(ParametricEdge{CircleEdge{{1, 0, 1}, {-1, 0, 1}, {0, 0, 1}, {0, 0, 1}, 1.0}, std::nullopt, 1.2});
  const double c = std::cos(0.3), s = std::sin(0.3);
  f.edges.push_back(ParametricEdge{CircleEdge{{2.5, 2, 0}, {2.5, 2, 0}, {2, 2, 0}, {0, -s, c}, 0.5}, std::nullopt, 1.6});
  f.edges.push_back(ParametricEdge{SplineEdge{3, {{0, 3, 0}, {0.5, 3.5, 0.2}, {1, 3, 0.4}, {1.5, 3.6, 0.1}, {2, 3, 0}}},
                                   std::nullopt, 0.4});

  f.faces.vocabulary = face_type_vocabulary();
  f.steps.vocabulary = operation_type_vocabulary();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::tuple<std::int64_t, const char*, std::int64_t, const char*> patches[] = {
      {3, "Plane", 0, "ExtrudeEnd"}, {10, "Cylinder", 0, "ExtrudeSide"}, {42, "Sphere", 1, "Fillet"}};
  for (int i = 0; i < 600; ++i) {
    const auto& [face, ftype, step, otype] = patches[i % 3];
    const double a = u(rng), b = u(rng);
    Point3 p;
    if (face == 3) {
      p = {a, b, 0};
    } else if (face == 10) {
      p = {std::cos(a * std::numbers::pi), std::sin(a * std::numbers::pi), b};
    } else {
      const double th = a * 0.5, ph = b * kTwoPi;
      p = {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), 2.0 + std::cos(th)};
    }
    f.cloud.push_back(p);
    f.faces.membership.push_back(face);
    f.faces.type_id.push_back(detail::face_type(ftype));
    f.steps.membership.push_back(step);
    f.steps.type_id.push_back(detail::op_type(otype));
  }
  return f;
}

}  // namespace sharp::synthetic
