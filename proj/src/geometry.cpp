#include "bora/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bora {

namespace {

constexpr double kOrientEps = 1e-12;

bool finite(const Location& p) {
  return std::isfinite(p.x) && std::isfinite(p.y);
}

void require_finite(const Location& p, const char* what) {
  if (!finite(p)) throw NonFinite(std::string(what) + ": non-finite coordinate");
}

struct Box {
  double xmin, ymin, xmax, ymax;
};

Box box_of(const Location& a, const Location& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x),
          std::max(a.y, b.y)};
}

bool boxes_overlap(const Box& u, const Box& v) {
  return u.xmin <= v.xmax && v.xmin <= u.xmax && u.ymin <= v.ymax &&
         v.ymin <= u.ymax;
}

}  // namespace

double distance(const Location& a, const Location& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

int orient(const Location& a, const Location& b, const Location& c) {
  const double d1x = b.x - a.x, d1y = b.y - a.y;
  const double d2x = c.x - a.x, d2y = c.y - a.y;
  const double t1 = d1x * d2y, t2 = d1y * d2x;
  const double det = t1 - t2;
  const double mag = std::abs(t1) + std::abs(t2);
  if (std::abs(det) <= kOrientEps * mag) return 0;
  return det > 0 ? 1 : -1;
}

bool on_segment(const Location& a, const Location& b, const Location& c) {
  if (orient(a, b, c) != 0) return false;
  return c.x >= std::min(a.x, b.x) && c.x <= std::max(a.x, b.x) &&
         c.y >= std::min(a.y, b.y) && c.y <= std::max(a.y, b.y);
}

PointSite locate_in_ring(const Location& p, const Ring& ring) {
  const std::size_t n = ring.size();
  bool inside = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Location& a = ring[i];
    const Location& b = ring[(i + 1) % n];
    if (on_segment(a, b, p)) return PointSite::boundary;
    if ((a.y > p.y) != (b.y > p.y)) {
      const int s = orient(a, b, p);
      if (s == 0) return PointSite::boundary;  // degenerate straddle
      if ((b.y > a.y) == (s > 0)) inside = !inside;
    }
  }
  return inside ? PointSite::inside : PointSite::outside;
}

PointSite locate_in_polygon(const Location& p, const Polygon& poly) {
  const PointSite outer = locate_in_ring(p, poly.outer);
  if (outer != PointSite::inside) return outer;
  for (const Ring& h : poly.holes) {
    const PointSite s = locate_in_ring(p, h);
    if (s == PointSite::boundary) return PointSite::boundary;
    if (s == PointSite::inside) return PointSite::outside;
  }
  return PointSite::inside;
}

BarrierSet::BarrierSet(std::vector<Polygon> polygons,
                       std::vector<Polyline> polylines)
    : polygons_(std::move(polygons)), polylines_(std::move(polylines)) {
  for (std::size_t pi = 0; pi < polygons_.size(); ++pi) {
    const Polygon& poly = polygons_[pi];
    auto add_ring = [&](const Ring& r) {
      if (r.size() < 3) throw InvalidRing("ring with fewer than 3 vertices");
      for (std::size_t i = 0; i < r.size(); ++i) {
        require_finite(r[i], "barrier vertex");
        edges_.push_back({r[i], r[(i + 1) % r.size()], static_cast<int>(pi)});
      }
    };
    add_ring(poly.outer);
    for (const Ring& h : poly.holes) add_ring(h);
  }
  for (const Polyline& line : polylines_) {
    if (line.size() < 2) throw InvalidRing("polyline with fewer than 2 vertices");
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      require_finite(line[i], "barrier vertex");
      require_finite(line[i + 1], "barrier vertex");
      if (line[i] == line[i + 1])
        throw InvalidRing("zero-length polyline edge");
      edges_.push_back({line[i], line[i + 1], -1});
    }
  }
  build_index();
}

void BarrierSet::build_index() {
  if (edges_.empty()) return;
  bounds_ = {std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};
  for (const Edge& e : edges_) {
    bounds_.xmin = std::min({bounds_.xmin, e.a.x, e.b.x});
    bounds_.ymin = std::min({bounds_.ymin, e.a.y, e.b.y});
    bounds_.xmax = std::max({bounds_.xmax, e.a.x, e.b.x});
    bounds_.ymax = std::max({bounds_.ymax, e.a.y, e.b.y});
  }
  const int target = static_cast<int>(std::sqrt(double(edges_.size()))) + 1;
  grid_nx_ = std::clamp(target, 1, 256);
  grid_ny_ = grid_nx_;
  const double w = bounds_.xmax - bounds_.xmin;
  const double h = bounds_.ymax - bounds_.ymin;
  cell_w_ = w > 0 ? w / grid_nx_ : 1.0;
  cell_h_ = h > 0 ? h / grid_ny_ : 1.0;
  cells_.assign(static_cast<std::size_t>(grid_nx_) * grid_ny_, {});
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const Box b = box_of(edges_[k].a, edges_[k].b);
    const int ix0 = std::clamp(int((b.xmin - bounds_.xmin) / cell_w_), 0, grid_nx_ - 1);
    const int ix1 = std::clamp(int((b.xmax - bounds_.xmin) / cell_w_), 0, grid_nx_ - 1);
    const int iy0 = std::clamp(int((b.ymin - bounds_.ymin) / cell_h_), 0, grid_ny_ - 1);
    const int iy1 = std::clamp(int((b.ymax - bounds_.ymin) / cell_h_), 0, grid_ny_ - 1);
    for (int ix = ix0; ix <= ix1; ++ix)
      for (int iy = iy0; iy <= iy1; ++iy)
        cells_[std::size_t(ix) * grid_ny_ + iy].push_back(static_cast<int>(k));
  }
}

void BarrierSet::query_box(double xmin, double ymin, double xmax, double ymax,
                           std::vector<int>& out) const {
  out.clear();
  if (edges_.empty()) return;
  if (xmax < bounds_.xmin || xmin > bounds_.xmax || ymax < bounds_.ymin ||
      ymin > bounds_.ymax)
    return;
  const int ix0 = std::clamp(int((xmin - bounds_.xmin) / cell_w_), 0, grid_nx_ - 1);
  const int ix1 = std::clamp(int((xmax - bounds_.xmin) / cell_w_), 0, grid_nx_ - 1);
  const int iy0 = std::clamp(int((ymin - bounds_.ymin) / cell_h_), 0, grid_ny_ - 1);
  const int iy1 = std::clamp(int((ymax - bounds_.ymin) / cell_h_), 0, grid_ny_ - 1);
  for (int ix = ix0; ix <= ix1; ++ix)
    for (int iy = iy0; iy <= iy1; ++iy)
      for (int k : cells_[std::size_t(ix) * grid_ny_ + iy]) out.push_back(k);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

namespace {

// Collinear segments: positive-length 1-D overlap along the dominant axis.
bool collinear_positive_overlap(const Location& p, const Location& q,
                                const Location& a, const Location& b) {
  const bool use_x =
      std::abs(q.x - p.x) + std::abs(b.x - a.x) >=
      std::abs(q.y - p.y) + std::abs(b.y - a.y);
  const double p0 = use_x ? p.x : p.y, q0 = use_x ? q.x : q.y;
  const double a0 = use_x ? a.x : a.y, b0 = use_x ? b.x : b.y;
  const double lo = std::max(std::min(p0, q0), std::min(a0, b0));
  const double hi = std::min(std::max(p0, q0), std::max(a0, b0));
  return hi > lo;
}

}  // namespace

bool segments_cross_or_overlap(const Location& p, const Location& q,
                               const Location& a, const Location& b) {
  const int d1 = orient(p, q, a);
  const int d2 = orient(p, q, b);
  const int d3 = orient(a, b, p);
  const int d4 = orient(a, b, q);
  if (d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0 && d1 != d2 && d3 != d4)
    return true;  // proper crossing
  if (d1 == 0 && d2 == 0) return collinear_positive_overlap(p, q, a, b);
  return false;
}

bool segment_blocked(const Location& p, const Location& q,
                     const BarrierSet& b) {
  require_finite(p, "segment endpoint");
  require_finite(q, "segment endpoint");
  if (b.empty() || p == q) return false;

  const Box qbox = box_of(p, q);
  static thread_local std::vector<int> cand;
  b.query_box(qbox.xmin, qbox.ymin, qbox.xmax, qbox.ymax, cand);
  for (int k : cand) {
    const BarrierSet::Edge& e = b.edges()[k];
    if (!boxes_overlap(qbox, box_of(e.a, e.b))) continue;
    if (segments_cross_or_overlap(p, q, e.a, e.b)) return true;
  }

  if (!b.polygons().empty()) {
    const Location mid{0.5 * (p.x + q.x), 0.5 * (p.y + q.y)};
    for (const Polygon& poly : b.polygons())
      if (locate_in_polygon(mid, poly) == PointSite::inside) return true;
  }
  return false;
}

bool point_in_barrier(const Location& p, const BarrierSet& b) {
  require_finite(p, "point");
  if (b.empty()) return false;
  for (const Polygon& poly : b.polygons())
    if (locate_in_polygon(p, poly) != PointSite::outside) return true;
  for (const Polyline& line : b.polylines())
    for (std::size_t i = 0; i + 1 < line.size(); ++i)
      if (on_segment(line[i], line[i + 1], p)) return true;
  return false;
}

double overlap_length(const Location& p, const Location& q,
                      const BarrierSet& b) {
  require_finite(p, "segment endpoint");
  require_finite(q, "segment endpoint");
  if (b.polygons().empty() || p == q) return 0.0;
  const double len = distance(p, q);
  const double dx = q.x - p.x, dy = q.y - p.y;

  double total = 0.0;
  std::vector<double> cuts;
  for (const Polygon& poly : b.polygons()) {
    cuts.assign({0.0, 1.0});
    auto cut_ring = [&](const Ring& r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        const Location& a = r[i];
        const Location& c = r[(i + 1) % r.size()];
        const int d1 = orient(p, q, a);
        const int d2 = orient(p, q, c);
        if (d1 == 0 && d2 == 0) {
          // collinear edge: cut at both endpoint parameters
          for (const Location& v : {a, c}) {
            const double t = std::abs(dx) >= std::abs(dy)
                                 ? (v.x - p.x) / dx
                                 : (v.y - p.y) / dy;
            if (t > 0.0 && t < 1.0) cuts.push_back(t);
          }
          continue;
        }
        if (d1 == d2) continue;
        // line(p,q) separates a from c; parameter of the intersection point
        const double denom =
            (c.y - a.y) * dx - (c.x - a.x) * dy;
        if (denom == 0.0) continue;
        const double t =
            ((c.x - a.x) * (p.y - a.y) - (c.y - a.y) * (p.x - a.x)) / denom;
        if (t > 0.0 && t < 1.0) {
          // only keep cuts that actually lie on the edge span
          const double u = std::abs(c.x - a.x) >= std::abs(c.y - a.y)
                               ? (p.x + t * dx - a.x) / (c.x - a.x)
                               : (p.y + t * dy - a.y) / (c.y - a.y);
          if (u >= 0.0 && u <= 1.0) cuts.push_back(t);
        }
      }
    };
    cut_ring(poly.outer);
    for (const Ring& h : poly.holes) cut_ring(h);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double t0 = cuts[i], t1 = cuts[i + 1];
      if (t1 <= t0) continue;
      const Location mid{p.x + 0.5 * (t0 + t1) * dx,
                         p.y + 0.5 * (t0 + t1) * dy};
      if (locate_in_polygon(mid, poly) == PointSite::inside)
        total += (t1 - t0) * len;
    }
  }
  return total;
}

EscapeGrid build_escape_grid(const Location& center, double half_width,
                             double step) {
  require_finite(center, "escape grid center");
  if (!(half_width > 0) || !std::isfinite(half_width))
    throw InvalidSpec("escape grid: half_width must be positive");
  if (!(step > 0) || !std::isfinite(step))
    throw InvalidSpec("escape grid: step must be positive");

  EscapeGrid g;
  g.center = center;
  g.half_width = half_width;
  g.step = step;
  const long long reach = static_cast<long long>(half_width / step + 1e-12);
  const long long side = 2 * reach + 1;
  g.points.reserve(static_cast<std::size_t>(side * side));
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(g.points.capacity());
  for (long long j = -reach; j <= reach; ++j) {
    for (long long i = -reach; i <= reach; ++i) {
      const Location pt{center.x + double(i) * step, center.y + double(j) * step};
      order.emplace_back(distance(pt, center), g.points.size());
      g.points.push_back(pt);
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Location> sorted;
  sorted.reserve(g.points.size());
  for (const auto& [d, idx] : order) sorted.push_back(g.points[idx]);
  g.points = std::move(sorted);
  return g;
}

}  // namespace bora
