#include "bora/wkt.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bora {

namespace {

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;
  int line;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("line " + std::to_string(line) + ": " + msg);
  }
  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
  }
  bool accept(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }
  double number() {
    skip_ws();
    const char* begin = s.c_str() + pos;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos += static_cast<std::size_t>(end - begin);
    if (!std::isfinite(v)) fail("non-finite coordinate");
    return v;
  }
  bool at_end() {
    skip_ws();
    return pos >= s.size();
  }
};

std::vector<Location> parse_point_list(Cursor& c) {
  std::vector<Location> pts;
  c.expect('(');
  do {
    const double x = c.number();
    const double y = c.number();
    pts.push_back({x, y});
  } while (c.accept(','));
  c.expect(')');
  return pts;
}

Ring close_ring(std::vector<Location> pts, const Cursor& c) {
  if (pts.size() >= 2 && pts.front() == pts.back()) pts.pop_back();
  // drop consecutive duplicates
  Ring r;
  for (const Location& p : pts)
    if (r.empty() || !(r.back() == p)) r.push_back(p);
  while (r.size() > 1 && r.front() == r.back()) r.pop_back();
  if (r.size() < 3)
    throw InvalidRing("line " + std::to_string(c.line) +
                      ": ring needs at least 3 distinct vertices");
  // reject self-intersecting rings: any non-adjacent edge pair touching
  const std::size_t n = r.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Location& a = r[i];
    const Location& b = r[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Location& u = r[j];
      const Location& v = r[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // shared endpoint is fine; a spike folding back over the edge is not
        if (segments_cross_or_overlap(a, b, u, v))
          throw InvalidRing("line " + std::to_string(c.line) +
                            ": ring has collinear overlapping edges");
        continue;
      }
      const bool touch = on_segment(a, b, u) || on_segment(a, b, v) ||
                         on_segment(u, v, a) || on_segment(u, v, b);
      if (segments_cross_or_overlap(a, b, u, v) || touch)
        throw InvalidRing("line " + std::to_string(c.line) +
                          ": self-intersecting ring");
    }
  }
  return r;
}

Polygon parse_polygon_body(Cursor& c) {
  Polygon poly;
  c.expect('(');
  poly.outer = close_ring(parse_point_list(c), c);
  while (c.accept(',')) poly.holes.push_back(close_ring(parse_point_list(c), c));
  c.expect(')');
  return poly;
}

std::string read_tag(Cursor& c) {
  c.skip_ws();
  std::string tag;
  while (c.pos < c.s.size() &&
         std::isalpha(static_cast<unsigned char>(c.s[c.pos])))
    tag.push_back(static_cast<char>(
        std::toupper(static_cast<unsigned char>(c.s[c.pos++]))));
  return tag;
}

}  // namespace

BarrierSet parse_barriers_wkt(const std::string& text) {
  std::vector<Polygon> polygons;
  std::vector<Polyline> polylines;
  std::istringstream in(text);
  std::string linebuf;
  int lineno = 0;
  while (std::getline(in, linebuf)) {
    ++lineno;
    Cursor c{linebuf, 0, lineno};
    if (c.at_end()) continue;
    if (linebuf[c.pos] == '#') continue;
    const std::string tag = read_tag(c);
    if (tag == "POLYGON") {
      polygons.push_back(parse_polygon_body(c));
    } else if (tag == "MULTIPOLYGON") {
      c.expect('(');
      do {
        polygons.push_back(parse_polygon_body(c));
      } while (c.accept(','));
      c.expect(')');
    } else if (tag == "LINESTRING") {
      std::vector<Location> pts = parse_point_list(c);
      Polyline line;
      for (const Location& p : pts)
        if (line.empty() || !(line.back() == p)) line.push_back(p);
      if (line.size() < 2)
        c.fail("linestring needs at least 2 distinct vertices");
      polylines.push_back(std::move(line));
    } else {
      c.fail("unsupported geometry tag '" + tag + "'");
    }
    if (!c.at_end()) c.fail("trailing characters after geometry");
  }
  return BarrierSet(std::move(polygons), std::move(polylines));
}

BarrierSet load_barriers_wkt(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open barrier file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_barriers_wkt(ss.str());
}

}  // namespace bora
