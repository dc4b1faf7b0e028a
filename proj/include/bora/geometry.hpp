#pragma once

#include <cstddef>
#include <vector>

#include "bora/errors.hpp"

namespace bora {

struct Location {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Location& a, const Location& b) {
    return a.x == b.x && a.y == b.y;
  }
};

double distance(const Location& a, const Location& b);

// Sign of the cross product (b-a) x (c-a): +1 left turn, -1 right turn,
// 0 collinear within a 1e-12 band relative to the operand magnitudes.
int orient(const Location& a, const Location& b, const Location& c);

// c collinear with [a,b] and inside its closed bounding box.
bool on_segment(const Location& a, const Location& b, const Location& c);

// A ring is stored without the closing duplicate vertex.
using Ring = std::vector<Location>;

struct Polygon {
  Ring outer;
  std::vector<Ring> holes;
};

using Polyline = std::vector<Location>;

enum class PointSite { outside, boundary, inside };

// Position of p relative to a single ring (strict interior via even-odd rule).
PointSite locate_in_ring(const Location& p, const Ring& ring);

// Position relative to a polygon with holes; "inside" is the open interior.
PointSite locate_in_polygon(const Location& p, const Polygon& poly);

class BarrierSet {
 public:
  BarrierSet() = default;
  BarrierSet(std::vector<Polygon> polygons, std::vector<Polyline> polylines);

  bool empty() const { return edges_.empty(); }
  const std::vector<Polygon>& polygons() const { return polygons_; }
  const std::vector<Polyline>& polylines() const { return polylines_; }
  std::size_t edge_count() const { return edges_.size(); }

  struct Edge {
    Location a, b;
    int polygon = -1;  // owning polygon index, -1 for polyline edges
  };
  const std::vector<Edge>& edges() const { return edges_; }

  // Indices of edges whose bounding box may intersect the query box; a
  // superset of the exact answer, never a subset.
  void query_box(double xmin, double ymin, double xmax, double ymax,
                 std::vector<int>& out) const;

  struct Bounds {
    double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
  };
  Bounds bounds() const { return bounds_; }

 private:
  std::vector<Polygon> polygons_;
  std::vector<Polyline> polylines_;
  std::vector<Edge> edges_;
  Bounds bounds_;

  // Uniform grid over the edge bounding box.
  int grid_nx_ = 0, grid_ny_ = 0;
  double cell_w_ = 0, cell_h_ = 0;
  std::vector<std::vector<int>> cells_;

  void build_index();
};

// True when [p,q] properly crosses [a,b] or overlaps it collinearly over
// positive length. Single-point tangency returns false.
bool segments_cross_or_overlap(const Location& p, const Location& q,
                               const Location& a, const Location& b);

// True when the open segment (p,q) cannot carry a neighbor edge: it properly
// crosses a barrier edge, overlaps one collinearly over positive length, or
// its midpoint lies strictly inside a barrier polygon. Endpoint tangency
// alone does not block.
bool segment_blocked(const Location& p, const Location& q, const BarrierSet& b);

// p lies in the closed barrier region (polygon interior or boundary, or on a
// polyline).
bool point_in_barrier(const Location& p, const BarrierSet& b);

// Total length of (p,q) inside closed barrier polygons. Polylines have zero
// width and contribute nothing.
double overlap_length(const Location& p, const Location& q, const BarrierSet& b);

struct EscapeGrid {
  Location center;
  double half_width = 0;   // r_l, longest distance to a crossing neighbor
  double step = 0;         // d_l, shortest positive barrier overlap
  std::vector<Location> points;  // full lattice, sorted by distance to center
};

// Lattice of spacing `step` on the square of half-width `half_width` centered
// at `center`, sorted nondecreasing by distance to center (ties: row-major).
EscapeGrid build_escape_grid(const Location& center, double half_width,
                             double step);

}  // namespace bora
