#include "hbat/geometry.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hbat::geometry {

namespace {

bool within_box(GridPoint a, GridPoint b, GridPoint p) {
  return std::min(a.col, b.col) <= p.col && p.col <= std::max(a.col, b.col) &&
         std::min(a.row, b.row) <= p.row && p.row <= std::max(a.row, b.row);
}

bool on_closed_segment(GridPoint a, GridPoint b, GridPoint p) {
  return cross(a, b, p) == 0 && within_box(a, b, p);
}

}  // namespace

bool on_grid(GridPoint p, int width, int height) {
  return p.col >= 0 && p.row >= 0 && p.col < width && p.row < height;
}

bool triangle_contains(const Triangle& t, GridPoint p, Containment rule) {
  const auto& [a, b, c] = t.v;
  if (p == a || p == b || p == c) return true;

  const std::int64_t area = cross(a, b, c);
  if (area == 0) {
    if (rule == Containment::kOpenWithVertices) return false;
    // Collinear: the triangle is the segment spanned by its extreme vertices.
    return on_closed_segment(a, b, p) || on_closed_segment(b, c, p) ||
           on_closed_segment(a, c, p);
  }

  std::int64_t d1 = cross(a, b, p);
  std::int64_t d2 = cross(b, c, p);
  std::int64_t d3 = cross(c, a, p);
  if (area < 0) {
    d1 = -d1;
    d2 = -d2;
    d3 = -d3;
  }
  if (rule == Containment::kOpenWithVertices) return d1 > 0 && d2 > 0 && d3 > 0;
  return d1 >= 0 && d2 >= 0 && d3 >= 0;
}

std::vector<GridPoint> cells_in_triangle(const Triangle& t, int width, int height,
                                         Containment rule) {
  for (const auto& v : t.v) {
    if (!on_grid(v, width, height)) throw std::invalid_argument("triangle vertex off grid");
  }
  int min_col = t.v[0].col, max_col = t.v[0].col;
  int min_row = t.v[0].row, max_row = t.v[0].row;
  for (const auto& v : t.v) {
    min_col = std::min(min_col, v.col);
    max_col = std::max(max_col, v.col);
    min_row = std::min(min_row, v.row);
    max_row = std::max(max_row, v.row);
  }
  std::vector<GridPoint> out;
  for (int row = min_row; row <= max_row; ++row) {
    for (int col = min_col; col <= max_col; ++col) {
      if (triangle_contains(t, {col, row}, rule)) out.push_back({col, row});
    }
  }
  return out;
}

bool triangles_disjoint(const Triangle& a, const Triangle& b, int width, int height,
                        Containment rule) {
  const auto cells_a = cells_in_triangle(a, width, height, rule);
  const auto cells_b = cells_in_triangle(b, width, height, rule);
  // Both lists are row-major sorted; compare as (row, col).
  auto row_major = [](GridPoint x, GridPoint y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  };
  auto ia = cells_a.begin();
  auto ib = cells_b.begin();
  while (ia != cells_a.end() && ib != cells_b.end()) {
    if (*ia == *ib) return false;
    if (row_major(*ia, *ib)) {
      ++ia;
    } else {
      ++ib;
    }
  }
  return true;
}

std::vector<GridPoint> cells_on_segment(GridPoint p, GridPoint q) {
  if (p == q) throw std::invalid_argument("degenerate segment");
  const int dc = q.col - p.col;
  const int dr = q.row - p.row;
  const int steps = std::gcd(std::abs(dc), std::abs(dr));
  std::vector<GridPoint> out;
  out.reserve(static_cast<std::size_t>(steps > 0 ? steps - 1 : 0));
  for (int s = 1; s < steps; ++s) {
    out.push_back({p.col + dc / steps * s, p.row + dr / steps * s});
  }
  return out;
}

ConvexHull ConvexHull::of(std::span<const GridPoint> points) {
  std::vector<GridPoint> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  ConvexHull hull;
  if (pts.size() <= 2) {
    hull.vertices_ = std::move(pts);
    return hull;
  }
  // Andrew's monotone chain.
  std::vector<GridPoint> h(2 * pts.size());
  std::size_t n = 0;
  for (const auto& p : pts) {
    while (n >= 2 && cross(h[n - 2], h[n - 1], p) <= 0) --n;
    h[n++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = n + 1; i-- > 0;) {
    while (n >= lower && cross(h[n - 2], h[n - 1], pts[i]) <= 0) --n;
    h[n++] = pts[i];
  }
  h.resize(n - 1);
  hull.vertices_ = std::move(h);
  return hull;
}

bool ConvexHull::contains(GridPoint p) const {
  const auto& v = vertices_;
  switch (v.size()) {
    case 0:
      return false;
    case 1:
      return p == v[0];
    case 2:
      return on_closed_segment(v[0], v[1], p);
    default:
      break;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (cross(v[i], v[(i + 1) % v.size()], p) < 0) return false;
  }
  return true;
}

bool hulls_disjoint(const ConvexHull& a, const ConvexHull& b,
                    std::span<const GridPoint> placement) {
  return std::none_of(placement.begin(), placement.end(),
                      [&](GridPoint p) { return a.contains(p) && b.contains(p); });
}

}  // namespace hbat::geometry
