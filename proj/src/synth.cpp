#include "geokge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <sstream>
#include <tuple>

#include "geokge/error.hpp"
#include "geokge/rng.hpp"
#include "geokge/text_io.hpp"

namespace geokge {

namespace {

constexpr std::array<std::string_view, kNumArchetypes> kArchetypeNames = {
    "contains", "within", "crosses", "touches", "north", "east", "south", "west", "near", "far"};

constexpr std::array<std::array<std::string_view, 3>, kNumArchetypes> kSynonyms = {{
    {"contains", "encloses", "surrounds"},
    {"within", "inside", "located in"},
    {"crosses", "intersects", "flows through"},
    {"adjacent to", "borders", "touches"},
    {"north of", "above", "northward of"},
    {"east of", "eastward of", "right of"},
    {"south of", "below", "southward of"},
    {"west of", "westward of", "left of"},
    {"near", "close to", "proximity"},
    {"far from", "distant from", "remote from"},
}};

Geometry random_polygon(Rng& rng, double extent) {
  for (;;) {
    const double cx = rng.uniform(0.0, extent);
    const double cy = rng.uniform(0.0, extent);
    const double radius = rng.uniform(0.015, 0.05) * extent;
    const std::size_t n = 5 + rng.below(4);
    std::vector<double> angles(n);
    for (auto& a : angles) a = rng.uniform(0.0, 2.0 * std::numbers::pi);
    std::sort(angles.begin(), angles.end());
    std::vector<Point> ring;
    for (double a : angles) {
      double r = radius * rng.uniform(0.6, 1.0);
      ring.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
    }
    ring.push_back(ring.front());
    // Star-shaped rings with sorted angles are simple unless two angles nearly coincide.
    try {
      return Geometry(GeometryKind::Polygon, std::move(ring));
    } catch (const DataError&) {
    }
  }
}

Geometry random_polyline(Rng& rng, double extent) {
  for (;;) {
    Point p{rng.uniform(0.0, extent), rng.uniform(0.0, extent)};
    double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const std::size_t segs = 2 + rng.below(3);
    std::vector<Point> pts{p};
    for (std::size_t i = 0; i < segs; ++i) {
      heading += rng.uniform(-0.5, 0.5);
      double len = rng.uniform(0.03, 0.12) * extent;
      p = {p.x + len * std::cos(heading), p.y + len * std::sin(heading)};
      pts.push_back(p);
    }
    try {
      return Geometry(GeometryKind::Polyline, std::move(pts));
    } catch (const DataError&) {
    }
  }
}

std::string entity_name(GeometryKind kind, std::size_t i) {
  const char* prefix = kind == GeometryKind::Point ? "place" : kind == GeometryKind::Polyline ? "route" : "region";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s_%04zu", prefix, i);
  return buf;
}

bool empty_cell(const De9im& m, Location a, Location b) { return m.at(a, b) == 'F'; }

}  // namespace

std::string_view archetype_name(Archetype a) { return kArchetypeNames[static_cast<std::size_t>(a)]; }

void GenConfig::validate() const {
  const double sum = frac_points + frac_polylines + frac_polygons;
  if (frac_points < 0 || frac_polylines < 0 || frac_polygons < 0 || std::abs(sum - 1.0) > 1e-9) {
    throw InvalidArgument("geometry mix fractions must be nonnegative and sum to 1");
  }
  if (family_weights[0] < 0 || family_weights[1] < 0 || family_weights[2] < 0 ||
      family_weights[0] + family_weights[1] + family_weights[2] <= 0) {
    throw InvalidArgument("archetype family weights must be nonnegative with a positive sum");
  }
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw InvalidArgument("noise_rate must be in [0, 1]");
  if (n_entities < 2) throw InvalidArgument("need at least 2 entities");
  if (n_relation_terms < kNumArchetypes) {
    throw InvalidArgument("need at least one relation term per archetype (" +
                          std::to_string(kNumArchetypes) + ")");
  }
  if (n_triples < 1) throw InvalidArgument("need at least one triple");
  if (!(extent > 0.0)) throw InvalidArgument("extent must be positive");
  if (!(locality >= 0.0 && locality <= 1.0)) throw InvalidArgument("locality must be in [0, 1]");
  if (neighbours < 1) throw InvalidArgument("neighbours must be >= 1");
}

std::optional<Archetype> pair_archetype(const Geometry& head, const Geometry& tail, double near_max,
                                       double far_min) {
  using L = Location;
  const De9im m = de9im(head, tail);
  const bool interiors_meet = !empty_cell(m, L::Interior, L::Interior);
  const bool disjoint = !interiors_meet && empty_cell(m, L::Interior, L::Boundary) &&
                        empty_cell(m, L::Boundary, L::Interior) &&
                        empty_cell(m, L::Boundary, L::Boundary);
  if (interiors_meet) {
    if (empty_cell(m, L::Exterior, L::Interior) && empty_cell(m, L::Exterior, L::Boundary)) {
      return Archetype::Contains;
    }
    if (empty_cell(m, L::Interior, L::Exterior) && empty_cell(m, L::Boundary, L::Exterior)) {
      return Archetype::Within;
    }
    return Archetype::Crosses;
  }
  if (!disjoint) return Archetype::Touches;

  // Disjoint pairs: the near and far terciles are distance archetypes, the middle
  // band is read by compass direction.
  const Point ch = centroid(head);
  const Point ct = centroid(tail);
  const double d = std::hypot(ct.x - ch.x, ct.y - ch.y);
  if (d <= near_max) return Archetype::Near;
  if (d >= far_min) return Archetype::Far;
  // Direction terms read "head is <dir> of tail", i.e. the bearing from tail to head.
  auto oct = compass_octant(ct, ch);
  if (!oct) return std::nullopt;
  switch (*oct) {
    case Octant::N:
    case Octant::NE: return Archetype::NorthOf;
    case Octant::E:
    case Octant::SE: return Archetype::EastOf;
    case Octant::S:
    case Octant::SW: return Archetype::SouthOf;
    case Octant::W:
    case Octant::NW: return Archetype::WestOf;
  }
  return std::nullopt;
}

SynthDataset generate(const GenConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  SynthDataset ds;

  const auto n_pts = static_cast<std::size_t>(std::llround(cfg.frac_points * static_cast<double>(cfg.n_entities)));
  const auto n_lines = static_cast<std::size_t>(std::llround(cfg.frac_polylines * static_cast<double>(cfg.n_entities)));
  const std::size_t n_polys = cfg.n_entities - std::min(cfg.n_entities, n_pts + n_lines);
  // Polygons first so points and polylines can be anchored to them: some points sit
  // inside a region or on its boundary, some routes start on a region's boundary.
  std::vector<NamedGeometry> polys, lines, pts;
  for (std::size_t i = 0; i < n_polys; ++i) {
    polys.push_back({"", random_polygon(rng, cfg.extent)});
  }
  auto pick_region = [&]() -> const Geometry& { return polys[rng.below(polys.size())].geometry; };
  for (std::size_t i = 0; i < n_lines; ++i) {
    if (!polys.empty() && rng.unit() < cfg.anchored_fraction) {
      const Geometry& reg = pick_region();
      const auto& ring = reg.coords();
      const Point v = ring[rng.below(ring.size() - 1)];
      const Point c = centroid(reg);
      const double heading = std::atan2(v.y - c.y, v.x - c.x);
      const double len = rng.uniform(0.03, 0.12) * cfg.extent;
      std::vector<Point> line{v, {v.x + len * std::cos(heading), v.y + len * std::sin(heading)}};
      Geometry g(GeometryKind::Polyline, std::move(line));
      if (pair_archetype(g, reg, 0.0, 0.0) == Archetype::Touches) {
        lines.push_back({"", std::move(g)});
        continue;
      }
    }
    lines.push_back({"", random_polyline(rng, cfg.extent)});
  }
  for (std::size_t i = 0; i < n_pts; ++i) {
    if (!polys.empty() && rng.unit() < cfg.anchored_fraction) {
      const Geometry& reg = pick_region();
      const auto& ring = reg.coords();
      if (rng.coin()) {
        pts.push_back({"", Geometry::point(ring[0].x, ring[0].y)});
      } else {
        // Interior point: blend of the centroid and a vertex stays inside a star-shaped ring.
        const Point c = centroid(reg);
        const Point v = ring[rng.below(ring.size() - 1)];
        const double w = rng.uniform(0.0, 0.5);
        pts.push_back({"", Geometry::point(c.x + w * (v.x - c.x), c.y + w * (v.y - c.y))});
      }
      continue;
    }
    pts.push_back({"", Geometry::point(rng.uniform(0.0, cfg.extent), rng.uniform(0.0, cfg.extent))});
  }
  std::size_t idx = 0;
  for (auto* group : {&pts, &lines, &polys}) {
    for (auto& g : *group) {
      g.name = entity_name(g.geometry.kind(), idx++);
      ds.geometries.push_back(std::move(g));
    }
  }
  const std::size_t n = ds.geometries.size();

  std::vector<std::vector<std::string>> group_terms(kNumArchetypes);
  for (std::size_t i = 0; i < cfg.n_relation_terms; ++i) {
    const std::size_t a = i % kNumArchetypes;
    const std::size_t slot = i / kNumArchetypes;
    std::string term = slot < 3 ? std::string(kSynonyms[a][slot])
                                : std::string(kArchetypeNames[a]) + "_" + std::to_string(slot);
    group_terms[a].push_back(term);
    ds.terms.emplace_back(term, static_cast<Archetype>(a));
  }

  // Nearest neighbours by centroid distance give the spatial locality of real GeoKGs.
  std::vector<Point> cents;
  for (const auto& g : ds.geometries) cents.push_back(centroid(g.geometry));
  std::vector<std::vector<std::size_t>> nbrs(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) d.emplace_back(std::hypot(cents[i].x - cents[j].x, cents[i].y - cents[j].y), j);
    }
    const std::size_t k = std::min(cfg.neighbours, d.size());
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    for (std::size_t j = 0; j < k; ++j) nbrs[i].push_back(d[j].second);
  }
  auto draw_pair = [&]() {
    std::size_t h = static_cast<std::size_t>(rng.below(n));
    std::size_t t = rng.unit() < cfg.locality ? nbrs[h][rng.below(nbrs[h].size())]
                                              : static_cast<std::size_t>(rng.below(n));
    if (t == h) t = (h + 1) % n;
    return std::pair{h, t};
  };

  // Distance terciles over the pair-drawing distribution.
  std::vector<double> sample;
  for (int i = 0; i < 4000; ++i) {
    auto [h, t] = draw_pair();
    sample.push_back(std::hypot(cents[h].x - cents[t].x, cents[h].y - cents[t].y));
  }
  std::sort(sample.begin(), sample.end());
  const double near_max = sample[sample.size() / 3];
  const double far_min = sample[2 * sample.size() / 3];

  std::array<double, kNumArchetypes> archetype_weight{};
  for (std::size_t a = 0; a < kNumArchetypes; ++a) {
    const std::size_t family = a < 4 ? 0 : a < 8 ? 1 : 2;
    const double members = family == 2 ? 2.0 : 4.0;
    archetype_weight[a] = cfg.family_weights[family] / members;
  }
  constexpr int kMaxAttempts = 400;
  std::array<bool, kNumArchetypes> satisfiable;
  satisfiable.fill(true);
  std::array<int, kNumArchetypes> misses{};
  std::set<std::tuple<std::size_t, std::string, std::size_t>> emitted;

  while (ds.triples.size() < cfg.n_triples) {
    std::vector<std::size_t> open;
    for (std::size_t a = 0; a < kNumArchetypes; ++a) {
      if (satisfiable[a]) open.push_back(a);
    }
    if (open.empty()) break;
    double total = 0.0;
    for (auto a : open) total += archetype_weight[a];
    double u = rng.unit() * total;
    std::size_t pick = open.back();
    for (auto a : open) {
      if (u < archetype_weight[a]) {
        pick = a;
        break;
      }
      u -= archetype_weight[a];
    }
    const auto want = static_cast<Archetype>(pick);
    bool found = false;
    for (int attempt = 0; attempt < kMaxAttempts && !found; ++attempt) {
      auto [h, t] = draw_pair();
      if (pair_archetype(ds.geometries[h].geometry, ds.geometries[t].geometry, near_max,
                         far_min) != want) {
        continue;
      }
      const bool noisy = rng.unit() < cfg.noise_rate;
      const auto& group = group_terms[static_cast<std::size_t>(want)];
      std::string term = noisy ? ds.terms[rng.below(ds.terms.size())].first
                               : group[rng.below(group.size())];
      if (!emitted.emplace(h, term, t).second) continue;
      ds.triples.push_back({ds.geometries[h].name, term, ds.geometries[t].name, want, noisy});
      ++ds.archetype_counts[static_cast<std::size_t>(want)];
      found = true;
    }
    if (found) {
      misses[static_cast<std::size_t>(want)] = 0;
    } else if (++misses[static_cast<std::size_t>(want)] >= 3) {
      satisfiable[static_cast<std::size_t>(want)] = false;
    }
  }
  return ds;
}

void write_synth_dataset(const std::filesystem::path& dir, const SynthDataset& ds) {
  std::filesystem::create_directories(dir);
  write_geometry_file(dir / "geometries.tsv", ds.geometries);
  std::ostringstream tr;
  for (const auto& t : ds.triples) tr << t.head << '\t' << t.term << '\t' << t.tail << '\n';
  write_file(dir / "triples.tsv", tr.str());
  std::ostringstream terms;
  for (const auto& [term, a] : ds.terms) terms << term << '\t' << archetype_name(a) << '\n';
  write_file(dir / "terms.tsv", terms.str());
}

double term_archetype_mutual_information(const SynthDataset& ds) {
  std::map<std::string, double> pt;
  std::array<double, kNumArchetypes> pa{};
  std::map<std::pair<std::string, std::size_t>, double> joint;
  const double n = static_cast<double>(ds.triples.size());
  for (const auto& t : ds.triples) {
    auto a = static_cast<std::size_t>(t.archetype);
    pt[t.term] += 1.0 / n;
    pa[a] += 1.0 / n;
    joint[{t.term, a}] += 1.0 / n;
  }
  double mi = 0.0;
  for (const auto& [key, p] : joint) {
    mi += p * std::log(p / (pt[key.first] * pa[key.second]));
  }
  return mi;
}

}  // namespace geokge
