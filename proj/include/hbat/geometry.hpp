#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace hbat::geometry {

/// A cell on a width x height display grid, addressed by column and row.
struct GridPoint {
  int col = 0;
  int row = 0;

  auto operator<=>(const GridPoint&) const = default;
};

/// Twice the signed area of (o, a, b); positive when b lies left of o->a.
constexpr std::int64_t cross(GridPoint o, GridPoint a, GridPoint b) {
  return static_cast<std::int64_t>(a.col - o.col) * (b.row - o.row) -
         static_cast<std::int64_t>(a.row - o.row) * (b.col - o.col);
}

/// Three grid points; collinear (degenerate) triangles are allowed.
struct Triangle {
  std::array<GridPoint, 3> v;
};

/// Which cells a triangle or hull owns.
///
/// kClosed counts every cell whose center lies inside or on the boundary.
/// kOpenWithVertices counts the vertex cells plus cells strictly inside,
/// so cells lying on an edge between two vertices are excluded. A
/// degenerate triangle owns only its vertices under kOpenWithVertices.
enum class Containment { kClosed, kOpenWithVertices };

bool on_grid(GridPoint p, int width, int height);

/// Point-in-triangle at cell centers, exact integer arithmetic.
bool triangle_contains(const Triangle& t, GridPoint p,
                       Containment rule = Containment::kClosed);

/// Cells of a width x height grid owned by `t`, in row-major order.
/// Throws std::invalid_argument if a vertex is off-grid.
std::vector<GridPoint> cells_in_triangle(const Triangle& t, int width, int height,
                                         Containment rule = Containment::kClosed);

/// True iff the two triangles own no common cell.
bool triangles_disjoint(const Triangle& a, const Triangle& b, int width, int height,
                        Containment rule = Containment::kClosed);

/// Lattice cells strictly between p and q whose centers lie on the segment,
/// ordered from p towards q. Throws std::invalid_argument("degenerate segment")
/// when p == q.
std::vector<GridPoint> cells_on_segment(GridPoint p, GridPoint q);

/// Convex hull of a point set, vertices in counter-clockwise order with no
/// collinear vertices. One or two vertices remain when the input is a single
/// point or collinear; containment then degenerates to the point or segment.
class ConvexHull {
 public:
  static ConvexHull of(std::span<const GridPoint> points);

  std::span<const GridPoint> vertices() const { return vertices_; }

  /// Boundary-inclusive containment.
  bool contains(GridPoint p) const;

 private:
  std::vector<GridPoint> vertices_;
};

/// True iff no position in `placement` lies inside or on both hulls.
bool hulls_disjoint(const ConvexHull& a, const ConvexHull& b,
                    std::span<const GridPoint> placement);

}  // namespace hbat::geometry
