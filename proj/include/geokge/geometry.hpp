#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace geokge {

/// Absolute tolerance, in frame units, for every orientation / on-segment predicate.
inline constexpr double kGeomEpsilon = 1e-9;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

enum class GeometryKind : std::uint8_t { Point, Polyline, Polygon };

/// A validated footprint. Polygons are single closed simple rings without holes.
class Geometry {
 public:
  /// Validates and throws geokge::DataError on violation.
  Geometry(GeometryKind kind, std::vector<Point> coords);

  static Geometry point(double x, double y) { return Geometry(GeometryKind::Point, {{x, y}}); }

  GeometryKind kind() const noexcept { return kind_; }
  const std::vector<Point>& coords() const noexcept { return coords_; }

  /// Same geometry shifted by (dx, dy).
  Geometry translated(double dx, double dy) const;

 private:
  GeometryKind kind_;
  std::vector<Point> coords_;
};

Geometry parse_geometry(std::string_view wkt);
std::string to_wkt(const Geometry& g);

Point centroid(const Geometry& g);
double centroid_distance(const Geometry& a, const Geometry& b);
/// Signed shoelace area of a closed ring (positive for counter-clockwise).
double ring_signed_area(std::span<const Point> ring);

inline constexpr double kEarthRadiusMeters = 6371000.0;

/// x = R cos(ref_lat) lon, y = R lat (radians). Throws InvalidArgument for |lat| > 90.
std::vector<Point> project_equirect(std::span<const Point> lon_lat_deg, double ref_lat_deg);

enum class ProjectionMode : std::uint8_t { PassThrough, Equirectangular };

struct Projection {
  ProjectionMode mode = ProjectionMode::PassThrough;
  double ref_lat_deg = 0.0;
};

Geometry project(const Geometry& g, const Projection& p);

/// Mean latitude of the geometries' centroids, read as (lon, lat) degrees.
double mean_latitude(std::span<const Geometry> lon_lat_geoms);

enum class Location : std::uint8_t { Interior = 0, Boundary = 1, Exterior = 2 };

/// OGC point-set location of `p` relative to `g` under the epsilon policy.
Location locate(const Point& p, const Geometry& g);

/// Dimensionally extended nine-intersection matrix, row-major (I, B, E) x (I, B, E).
class De9im {
 public:
  De9im() { cells_.fill('F'); }
  explicit De9im(std::string_view pattern);

  char at(Location row, Location col) const {
    return cells_[static_cast<int>(row) * 3 + static_cast<int>(col)];
  }
  /// Raises the cell to dimension `dim` (0, 1 or 2) if it is currently lower.
  void raise(Location row, Location col, int dim);
  De9im transposed() const;
  std::string str() const { return std::string(cells_.begin(), cells_.end()); }

  friend bool operator==(const De9im&, const De9im&) = default;

 private:
  std::array<char, 9> cells_;
};

De9im de9im(const Geometry& a, const Geometry& b);

enum class Octant : std::uint8_t { N = 0, NE, E, SE, S, SW, W, NW };

inline constexpr std::array<std::string_view, 8> kOctantNames = {"N", "NE", "E", "SE",
                                                                 "S", "SW", "W", "NW"};

/// Octant of a bearing in degrees clockwise from north; sector k is [45k-22.5, 45k+22.5).
Octant octant_for_bearing(double bearing_deg);
/// Bearing from `from` to `to`, in [0, 360) degrees clockwise from north.
double bearing_deg(const Point& from, const Point& to);
/// nullopt when the two points coincide within kGeomEpsilon (direction undefined).
std::optional<Octant> compass_octant(const Point& from, const Point& to);

struct NamedGeometry {
  std::string name;
  Geometry geometry;
};

/// Reads `entity_name<TAB>WKT` lines; '#' comments skipped. Errors carry the line number.
std::vector<NamedGeometry> read_geometry_file(const std::filesystem::path& path);
std::vector<NamedGeometry> parse_geometry_text(std::string_view text, std::string_view source);
void write_geometry_file(const std::filesystem::path& path, std::span<const NamedGeometry> geoms);

}  // namespace geokge
