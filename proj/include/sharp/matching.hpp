#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "sharp/errors.hpp"

namespace sharp {

/// Dense row-major R x C matrix of finite reals.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  CostMatrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    for (const auto& row : init) {
      if (row.size() != cols_) throw DomainError("ragged cost matrix");
      values_.insert(values_.end(), row.begin(), row.end());
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

enum class MatchMode { maximize, minimize };

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, col), ascending by row
  MatchMode mode = MatchMode::minimize;
  double total = 0.0;
};

/// Optimal one-to-one assignment of min(R, C) pairs (Kuhn-Munkres with
/// potentials, O(n^3)). Rectangular inputs are padded to square with zeros;
/// pairs that land on padding are dropped.
inline Assignment hungarian(const CostMatrix& cost, MatchMode mode) {
  const std::size_t R = cost.rows(), C = cost.cols();
  if (R == 0 || C == 0) throw DomainError("hungarian: empty cost matrix");
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c)
      if (!std::isfinite(cost(r, c))) throw DomainError("hungarian: non-finite cost entry");

  const std::size_t n = std::max(R, C);
  const double sign = mode == MatchMode::maximize ? -1.0 : 1.0;
  auto a = [&](std::size_t i, std::size_t j) -> double {  // 1-based, padded
    return (i <= R && j <= C) ? sign * cost(i - 1, j - 1) : 0.0;
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<double> minv(n + 1);
  std::vector<std::uint8_t> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment out;
  out.mode = mode;
  std::vector<std::size_t> col_of_row(n + 1, 0);
  for (std::size_t j = 1; j <= n; ++j) col_of_row[p[j]] = j;
  for (std::size_t i = 1; i <= R; ++i) {
    const std::size_t j = col_of_row[i];
    if (j >= 1 && j <= C) {
      out.pairs.emplace_back(i - 1, j - 1);
      out.total += cost(i - 1, j - 1);
    }
  }
  return out;
}

/// |a AND b| / |a OR b|, with IoU of two empty sets defined as 1.
inline double iou_binary(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw DomainError("iou: length mismatch");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] != 0, y = b[i] != 0;
    inter += (x && y);
    uni += (x || y);
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// IoU from set sizes and intersection size.
inline double iou_from_counts(std::size_t size_a, std::size_t size_b, std::size_t inter) {
  const std::size_t uni = size_a + size_b - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Relaxed IoU: sum(p*g) / (sum(p) + sum(g) - sum(p*g)).
inline double riou(std::span<const double> p, std::span<const std::uint8_t> g) {
  if (p.size() != g.size()) throw DomainError("riou: length mismatch");
  double pg = 0.0, ps = 0.0, gs = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) throw DomainError("riou: probability outside [0, 1]");
    const double gi = g[i] != 0 ? 1.0 : 0.0;
    pg += p[i] * gi;
    ps += p[i];
    gs += gi;
  }
  const double denom = ps + gs - pg;
  return denom > 0.0 ? pg / denom : 1.0;
}

}  // namespace sharp
