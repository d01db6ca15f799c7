#include "geokge/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "geokge/error.hpp"
#include "geokge/text_io.hpp"

namespace geokge {

namespace {

constexpr double kEps = kGeomEpsilon;

Point operator-(const Point& a, const Point& b) { return {a.x - b.x, a.y - b.y}; }
Point operator+(const Point& a, const Point& b) { return {a.x + b.x, a.y + b.y}; }
Point operator*(double s, const Point& a) { return {s * a.x, s * a.y}; }
double cross(const Point& a, const Point& b) { return a.x * b.y - a.y * b.x; }
double dot(const Point& a, const Point& b) { return a.x * b.x + a.y * b.y; }
double norm(const Point& a) { return std::hypot(a.x, a.y); }
bool near(const Point& a, const Point& b) { return norm(a - b) <= kEps; }

Point snap(const Point& p) {
  return {std::round(p.x / kEps) * kEps, std::round(p.y / kEps) * kEps};
}

double dist_to_segment(const Point& p, const Point& a, const Point& b) {
  Point ab = b - a;
  double len2 = dot(ab, ab);
  if (len2 == 0.0) return norm(p - a);
  double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

bool on_segment(const Point& p, const Point& a, const Point& b) {
  return dist_to_segment(p, a, b) <= kEps;
}

int sign_of(double v) { return (v > 0) - (v < 0); }

void push_unique(std::vector<Point>& pts, const Point& p) {
  for (const auto& q : pts) {
    if (near(p, q)) return;
  }
  pts.push_back(p);
}

/// Intersection points of closed segments ab and cd (0, 1 or 2 for collinear overlap).
std::vector<Point> segment_intersections(const Point& a, const Point& b, const Point& c,
                                         const Point& d) {
  std::vector<Point> pts;
  if (on_segment(a, c, d)) push_unique(pts, a);
  if (on_segment(b, c, d)) push_unique(pts, b);
  if (on_segment(c, a, b)) push_unique(pts, c);
  if (on_segment(d, a, b)) push_unique(pts, d);
  if (!pts.empty()) return pts;

  int o1 = sign_of(cross(b - a, c - a));
  int o2 = sign_of(cross(b - a, d - a));
  int o3 = sign_of(cross(d - c, a - c));
  int o4 = sign_of(cross(d - c, b - c));
  if (o1 * o2 < 0 && o3 * o4 < 0) {
    Point r = b - a;
    Point s = d - c;
    double t = cross(c - a, s) / cross(r, s);
    pts.push_back(a + t * r);
  }
  return pts;
}

struct Segment {
  Point p;
  Point q;
};

std::vector<Segment> segments_of(const Geometry& g) {
  std::vector<Segment> out;
  const auto& c = g.coords();
  for (std::size_t i = 0; i + 1 < c.size(); ++i) out.push_back({c[i], c[i + 1]});
  return out;
}

/// OGC mod-2 boundary of a polyline: endpoints that occur an odd number of times.
std::vector<Point> polyline_boundary(const std::vector<Point>& c) {
  std::vector<Point> out;
  if (near(c.front(), c.back())) return out;
  out.push_back(c.front());
  out.push_back(c.back());
  return out;
}

bool point_in_ring(const Point& p, const std::vector<Point>& ring) {
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 2; i + 1 < ring.size(); j = i++) {
    const Point& a = ring[i];
    const Point& b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

void validate(GeometryKind kind, const std::vector<Point>& c) {
  for (const auto& p : c) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DataError("non-finite coordinate");
  }
  switch (kind) {
    case GeometryKind::Point:
      if (c.size() != 1) throw DataError("point needs exactly 1 coordinate");
      return;
    case GeometryKind::Polyline:
      if (c.size() < 2) throw DataError("polyline needs at least 2 coordinates");
      for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        if (near(c[i], c[i + 1])) throw DataError("polyline has a zero-length segment");
      }
      return;
    case GeometryKind::Polygon: {
      if (c.size() < 4) throw DataError("polygon ring needs at least 4 coordinates");
      if (!(c.front() == c.back())) throw DataError("polygon ring is not closed");
      const std::size_t n = c.size() - 1;
      for (std::size_t i = 0; i < n; ++i) {
        if (near(c[i], c[i + 1])) throw DataError("polygon ring has a zero-length edge");
      }
      if (std::abs(ring_signed_area(c)) <= kEps * kEps) throw DataError("polygon has zero area");
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
          auto pts = segment_intersections(c[i], c[i + 1], c[j], c[j + 1]);
          if (!adjacent) {
            if (!pts.empty()) throw DataError("polygon ring is self-intersecting");
          } else if (pts.size() > 1) {
            throw DataError("polygon ring is self-intersecting (overlapping edges)");
          }
        }
      }
      return;
    }
  }
}

}  // namespace

Geometry::Geometry(GeometryKind kind, std::vector<Point> coords)
    : kind_(kind), coords_(std::move(coords)) {
  validate(kind_, coords_);
}

Geometry Geometry::translated(double dx, double dy) const {
  std::vector<Point> c = coords_;
  for (auto& p : c) {
    p.x += dx;
    p.y += dy;
  }
  return Geometry(kind_, std::move(c));
}

// ---- WKT --------------------------------------------------------------------

namespace {

class WktReader {
 public:
  explicit WktReader(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ == s_.size();
  }
  std::string keyword() {
    skip_ws();
    std::string out;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(s_[pos_++]))));
    }
    return out;
  }
  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  double number() {
    skip_ws();
    double v = 0.0;
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    if (first != last && *first == '+') ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{}) fail("expected a number");
    pos_ = static_cast<std::size_t>(res.ptr - s_.data());
    return v;
  }
  std::vector<Point> coord_list() {
    expect('(');
    std::vector<Point> pts;
    do {
      double x = number();
      double y = number();
      pts.push_back({x, y});
    } while (accept(','));
    expect(')');
    return pts;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("WKT syntax error at offset " + std::to_string(pos_) + ": " + what);
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Geometry parse_geometry(std::string_view wkt) {
  WktReader rd(wkt);
  std::string kw = rd.keyword();
  std::vector<Point> pts;
  GeometryKind kind;
  if (kw == "POINT") {
    kind = GeometryKind::Point;
    pts = rd.coord_list();
  } else if (kw == "LINESTRING") {
    kind = GeometryKind::Polyline;
    pts = rd.coord_list();
  } else if (kw == "POLYGON") {
    kind = GeometryKind::Polygon;
    rd.expect('(');
    pts = rd.coord_list();
    if (rd.accept(',')) rd.fail("polygon holes are not supported");
    rd.expect(')');
  } else {
    rd.fail("unknown geometry type '" + kw + "'");
  }
  if (!rd.at_end()) rd.fail("trailing characters");
  return Geometry(kind, std::move(pts));
}

std::string to_wkt(const Geometry& g) {
  std::string out;
  auto coords = [&out](const std::vector<Point>& c) {
    out += '(';
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i) out += ", ";
      out += format_exact(c[i].x);
      out += ' ';
      out += format_exact(c[i].y);
    }
    out += ')';
  };
  switch (g.kind()) {
    case GeometryKind::Point:
      out = "POINT ";
      coords(g.coords());
      break;
    case GeometryKind::Polyline:
      out = "LINESTRING ";
      coords(g.coords());
      break;
    case GeometryKind::Polygon:
      out = "POLYGON (";
      coords(g.coords());
      out += ')';
      break;
  }
  return out;
}

// ---- metric operations --------------------------------------------------------

double ring_signed_area(std::span<const Point> ring) {
  if (ring.size() < 2) return 0.0;
  const Point o = ring[0];
  double a = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) a += cross(ring[i] - o, ring[i + 1] - o);
  return 0.5 * a;
}

Point centroid(const Geometry& g) {
  const auto& c = g.coords();
  switch (g.kind()) {
    case GeometryKind::Point:
      return c[0];
    case GeometryKind::Polyline: {
      double total = 0.0;
      Point acc{0.0, 0.0};
      const Point o = c[0];
      for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        double w = norm(c[i + 1] - c[i]);
        Point mid = 0.5 * ((c[i] - o) + (c[i + 1] - o));
        acc = acc + w * mid;
        total += w;
      }
      return o + (1.0 / total) * acc;
    }
    case GeometryKind::Polygon: {
      // Moments about the first vertex keep the sums small for far-from-origin rings.
      const Point o = c[0];
      double a2 = 0.0;
      Point m{0.0, 0.0};
      for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        Point p = c[i] - o;
        Point q = c[i + 1] - o;
        double w = cross(p, q);
        a2 += w;
        m = m + w * (p + q);
      }
      return o + (1.0 / (3.0 * a2)) * m;
    }
  }
  return c[0];
}

double centroid_distance(const Geometry& a, const Geometry& b) {
  return norm(centroid(a) - centroid(b));
}

std::vector<Point> project_equirect(std::span<const Point> lon_lat_deg, double ref_lat_deg) {
  if (!(std::abs(ref_lat_deg) <= 90.0)) throw InvalidArgument("reference latitude out of range");
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double kx = kEarthRadiusMeters * std::cos(ref_lat_deg * kDeg);
  std::vector<Point> out;
  out.reserve(lon_lat_deg.size());
  for (const auto& p : lon_lat_deg) {
    if (!(std::abs(p.y) <= 90.0)) {
      throw InvalidArgument("latitude " + format_exact(p.y) + " out of range");
    }
    out.push_back({kx * p.x * kDeg, kEarthRadiusMeters * p.y * kDeg});
  }
  return out;
}

Geometry project(const Geometry& g, const Projection& p) {
  if (p.mode == ProjectionMode::PassThrough) return g;
  return Geometry(g.kind(), project_equirect(g.coords(), p.ref_lat_deg));
}

double mean_latitude(std::span<const Geometry> lon_lat_geoms) {
  if (lon_lat_geoms.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& g : lon_lat_geoms) sum += centroid(g).y;
  return sum / static_cast<double>(lon_lat_geoms.size());
}

// ---- direction ------------------------------------------------------------------

double bearing_deg(const Point& from, const Point& to) {
  double theta = std::atan2(to.x - from.x, to.y - from.y) * 180.0 / std::numbers::pi;
  if (theta < 0.0) theta += 360.0;
  if (theta >= 360.0) theta -= 360.0;
  return theta;
}

Octant octant_for_bearing(double bearing) {
  double b = std::fmod(bearing, 360.0);
  if (b < 0.0) b += 360.0;
  int k = static_cast<int>(std::floor((b + 22.5) / 45.0)) % 8;
  return static_cast<Octant>(k);
}

std::optional<Octant> compass_octant(const Point& from, const Point& to) {
  if (near(from, to)) return std::nullopt;
  return octant_for_bearing(bearing_deg(from, to));
}

// ---- topology -------------------------------------------------------------------

De9im::De9im(std::string_view pattern) {
  if (pattern.size() != 9) throw DataError("DE-9IM pattern must have 9 cells");
  for (std::size_t i = 0; i < 9; ++i) {
    char c = pattern[i];
    if (c != 'F' && c != '0' && c != '1' && c != '2') {
      throw DataError("invalid DE-9IM cell '" + std::string(1, c) + "'");
    }
    cells_[i] = c;
  }
}

void De9im::raise(Location row, Location col, int dim) {
  char& c = cells_[static_cast<int>(row) * 3 + static_cast<int>(col)];
  int cur = c == 'F' ? -1 : c - '0';
  if (dim > cur) c = static_cast<char>('0' + dim);
}

De9im De9im::transposed() const {
  De9im t;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) t.cells_[c * 3 + r] = cells_[r * 3 + c];
  }
  return t;
}

Location locate(const Point& p, const Geometry& g) {
  const auto& c = g.coords();
  switch (g.kind()) {
    case GeometryKind::Point:
      return near(p, c[0]) ? Location::Interior : Location::Exterior;
    case GeometryKind::Polyline: {
      for (const auto& b : polyline_boundary(c)) {
        if (near(p, b)) return Location::Boundary;
      }
      for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        if (on_segment(p, c[i], c[i + 1])) return Location::Interior;
      }
      return Location::Exterior;
    }
    case GeometryKind::Polygon: {
      for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        if (on_segment(p, c[i], c[i + 1])) return Location::Boundary;
      }
      return point_in_ring(p, c) ? Location::Interior : Location::Exterior;
    }
  }
  return Location::Exterior;
}

namespace {

/// Snapped copy with polygon rings normalized to counter-clockwise order.
Geometry prepared(const Geometry& g) {
  std::vector<Point> c;
  c.reserve(g.coords().size());
  for (const auto& p : g.coords()) c.push_back(snap(p));
  if (g.kind() == GeometryKind::Polygon && ring_signed_area(c) < 0.0) {
    std::reverse(c.begin(), c.end());
  }
  return Geometry(g.kind(), std::move(c));
}

/// Location of the open half-plane strip immediately left (or right) of `mid`,
/// which lies on edge direction `dir`, relative to `other`.
Location side_location(const Point& mid, const Point& dir, bool left, const Geometry& other,
                       Location mid_loc) {
  if (other.kind() != GeometryKind::Polygon) return Location::Exterior;
  if (mid_loc != Location::Boundary) return mid_loc;
  const auto& c = other.coords();
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    if (!on_segment(mid, c[i], c[i + 1])) continue;
    const bool same_direction = dot(dir, c[i + 1] - c[i]) > 0.0;
    // Counter-clockwise ring: interior lies to the left of every edge.
    return (same_direction == left) ? Location::Interior : Location::Exterior;
  }
  return Location::Exterior;
}

/// Adds every piece of `self` (vertices, noded sub-segments, polygon sides) to the
/// matrix; `self_is_a` selects whether self indexes rows or columns.
void add_pieces(const Geometry& self, const Geometry& other, bool self_is_a, De9im& m) {
  auto put = [&](Location ls, Location lo, int dim) {
    if (self_is_a) {
      m.raise(ls, lo, dim);
    } else {
      m.raise(lo, ls, dim);
    }
  };

  if (self.kind() == GeometryKind::Point) {
    const Point& p = self.coords()[0];
    put(Location::Interior, locate(p, other), 0);
    return;
  }

  const auto own = segments_of(self);
  const auto foreign = segments_of(other);
  for (std::size_t i = 0; i < own.size(); ++i) {
    const auto& s = own[i];
    Point dir = s.q - s.p;
    double len2 = dot(dir, dir);

    std::vector<Point> cuts{s.p, s.q};
    if (other.kind() == GeometryKind::Point) {
      const Point& op = other.coords()[0];
      if (on_segment(op, s.p, s.q)) push_unique(cuts, op);
    }
    for (const auto& f : foreign) {
      for (const auto& x : segment_intersections(s.p, s.q, f.p, f.q)) push_unique(cuts, x);
    }
    std::sort(cuts.begin(), cuts.end(), [&](const Point& u, const Point& v) {
      return dot(u - s.p, dir) / len2 < dot(v - s.p, dir) / len2;
    });

    for (const auto& v : cuts) put(locate(v, self), locate(v, other), 0);

    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      if (norm(cuts[k + 1] - cuts[k]) <= kEps) continue;
      Point mid = 0.5 * (cuts[k] + cuts[k + 1]);
      Location own_loc = self.kind() == GeometryKind::Polygon ? Location::Boundary
                                                              : locate(mid, self);
      Location other_loc = locate(mid, other);
      put(own_loc, other_loc, 1);
      if (self.kind() == GeometryKind::Polygon) {
        put(Location::Interior, side_location(mid, dir, true, other, other_loc), 2);
        put(Location::Exterior, side_location(mid, dir, false, other, other_loc), 2);
      }
    }
  }
}

}  // namespace

De9im de9im(const Geometry& a_in, const Geometry& b_in) {
  const Geometry a = prepared(a_in);
  const Geometry b = prepared(b_in);
  De9im m;
  m.raise(Location::Exterior, Location::Exterior, 2);
  add_pieces(a, b, true, m);
  add_pieces(b, a, false, m);
  return m;
}

// ---- files ----------------------------------------------------------------------

std::vector<NamedGeometry> parse_geometry_text(std::string_view text, std::string_view source) {
  std::vector<NamedGeometry> out;
  std::size_t line_no = 0;
  for_each_line(text, [&](std::string_view line) {
    ++line_no;
    if (is_blank_or_comment(line)) return;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw ParseError(std::string(source), line_no, "expected 'name<TAB>WKT'");
    }
    try {
      out.push_back({std::string(line.substr(0, tab)), parse_geometry(line.substr(tab + 1))});
    } catch (const ParseError&) {
      throw;
    } catch (const DataError& e) {
      throw ParseError(std::string(source), line_no, e.what());
    }
  });
  return out;
}

std::vector<NamedGeometry> read_geometry_file(const std::filesystem::path& path) {
  return parse_geometry_text(read_file(path), path.string());
}

void write_geometry_file(const std::filesystem::path& path, std::span<const NamedGeometry> geoms) {
  std::ostringstream os;
  for (const auto& g : geoms) os << g.name << '\t' << to_wkt(g.geometry) << '\n';
  write_file(path, os.str());
}

}  // namespace geokge
