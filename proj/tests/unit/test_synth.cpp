#include <filesystem>

#include "doctest.h"
#include "geokge/error.hpp"
#include "geokge/features.hpp"
#include "geokge/synth.hpp"
#include "geokge/text_io.hpp"
#include "support.hpp"

using namespace geokge;

namespace {

GenConfig small_config(std::uint64_t seed) {
  GenConfig c;
  c.n_entities = 200;
  c.n_triples = 800;
  c.seed = seed;
  return c;
}

Geometry square(double x0, double y0, double side) {
  return Geometry(GeometryKind::Polygon, {{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side},
                                          {x0, y0 + side}, {x0, y0}});
}

}  // namespace

TEST_CASE("pair archetypes") {
  const auto big = square(0, 0, 10);
  const auto small = square(2, 2, 2);
  CHECK(pair_archetype(big, small, 1, 100) == Archetype::Contains);
  CHECK(pair_archetype(small, big, 1, 100) == Archetype::Within);
  CHECK(pair_archetype(big, square(5, 5, 10), 1, 100) == Archetype::Crosses);
  CHECK(pair_archetype(parse_geometry("LINESTRING (-5 5, 15 5)"), big, 1, 100) == Archetype::Crosses);
  CHECK(pair_archetype(big, square(10, 0, 10), 1, 100) == Archetype::Touches);
  CHECK(pair_archetype(Geometry::point(0, 5), big, 1, 100) == Archetype::Touches);
  CHECK(pair_archetype(Geometry::point(5, 5), big, 1, 100) == Archetype::Within);

  const auto origin = Geometry::point(0, 0);
  CHECK(pair_archetype(Geometry::point(0, 50), origin, 10, 100) == Archetype::NorthOf);
  CHECK(pair_archetype(Geometry::point(30, 30), origin, 10, 100) == Archetype::NorthOf);
  CHECK(pair_archetype(Geometry::point(50, 0), origin, 10, 100) == Archetype::EastOf);
  CHECK(pair_archetype(Geometry::point(30, -30), origin, 10, 100) == Archetype::EastOf);
  CHECK(pair_archetype(Geometry::point(0, -50), origin, 10, 100) == Archetype::SouthOf);
  CHECK(pair_archetype(Geometry::point(-50, 0), origin, 10, 100) == Archetype::WestOf);
  CHECK(pair_archetype(Geometry::point(-30, 30), origin, 10, 100) == Archetype::WestOf);
  CHECK(pair_archetype(Geometry::point(3, 4), origin, 10, 100) == Archetype::Near);
  CHECK(pair_archetype(Geometry::point(300, 400), origin, 10, 100) == Archetype::Far);
}

TEST_CASE("generation is deterministic") {
  auto a = generate(small_config(4));
  auto b = generate(small_config(4));
  REQUIRE(a.triples.size() == b.triples.size());
  for (std::size_t i = 0; i < a.triples.size(); ++i) {
    CHECK(a.triples[i].head == b.triples[i].head);
    CHECK(a.triples[i].term == b.triples[i].term);
    CHECK(a.triples[i].tail == b.triples[i].tail);
  }
  CHECK(a.archetype_counts == b.archetype_counts);
  auto c = generate(small_config(5));
  bool differs = false;
  for (std::size_t i = 0; i < std::min(a.triples.size(), c.triples.size()); ++i) {
    differs = differs || a.triples[i].head != c.triples[i].head;
  }
  CHECK(differs);
}

TEST_CASE("generated dataset shape") {
  auto cfg = small_config(6);
  auto ds = generate(cfg);
  CHECK(ds.geometries.size() == cfg.n_entities);
  CHECK(ds.triples.size() == cfg.n_triples);
  CHECK(ds.terms.size() == cfg.n_relation_terms);
  std::size_t total = 0;
  for (auto c : ds.archetype_counts) total += c;
  CHECK(total == cfg.n_triples);
  // Topological archetypes dominate under the default family weights.
  const std::size_t topo = ds.archetype_counts[0] + ds.archetype_counts[1] + ds.archetype_counts[2] +
                           ds.archetype_counts[3];
  CHECK(topo > cfg.n_triples / 2);

  std::map<std::string, Archetype> group(ds.terms.begin(), ds.terms.end());
  std::size_t noisy = 0;
  for (const auto& t : ds.triples) {
    CHECK(t.head != t.tail);
    REQUIRE(group.contains(t.term));
    if (t.noisy) {
      ++noisy;
    } else {
      CHECK(group[t.term] == t.archetype);
    }
  }
  CHECK(static_cast<double>(noisy) == doctest::Approx(0.1 * cfg.n_triples).epsilon(0.35));
}

TEST_CASE("true archetypes hold for the emitted pairs") {
  auto ds = generate(small_config(8));
  std::map<std::string, const Geometry*> by_name;
  for (const auto& g : ds.geometries) by_name[g.name] = &g.geometry;
  for (const auto& t : ds.triples) {
    const auto arch = pair_archetype(*by_name[t.head], *by_name[t.tail], 0.0, 0.0);
    const auto a = static_cast<int>(t.archetype);
    if (a < 4) {
      CHECK(arch == t.archetype);
    } else {
      // Disjoint pairs; with zero cut points every disjoint pair reads as far.
      CHECK(arch == Archetype::Far);
    }
  }
}

TEST_CASE("pure noise carries no term information") {
  auto cfg = small_config(9);
  cfg.n_triples = 3000;
  cfg.noise_rate = 1.0;
  auto ds = generate(cfg);
  CHECK(term_archetype_mutual_information(ds) < 0.1);
  cfg.noise_rate = 0.0;
  CHECK(term_archetype_mutual_information(generate(cfg)) > 1.0);
}

TEST_CASE("generator config checks") {
  auto c = small_config(1);
  c.frac_points = 0.9;
  CHECK_THROWS_AS(generate(c), InvalidArgument);
  c = small_config(1);
  c.n_relation_terms = 9;
  CHECK_THROWS_AS(generate(c), InvalidArgument);
  c = small_config(1);
  c.noise_rate = 1.5;
  CHECK_THROWS_AS(generate(c), InvalidArgument);
  c = small_config(1);
  c.family_weights = {0, 0, 0};
  CHECK_THROWS_AS(generate(c), InvalidArgument);
  c = small_config(1);
  c.family_weights = {1, -1, 1};
  CHECK_THROWS_AS(generate(c), InvalidArgument);
}

TEST_CASE("written dataset ingests cleanly") {
  testing_support::TempDir dir("synth");
  auto ds = generate(small_config(10));
  write_synth_dataset(dir.path(), ds);
  auto kg = ingest_triples(dir / "triples.tsv");
  CHECK(kg.triples.size() == ds.triples.size());
  auto geoms = read_geometry_file(dir / "geometries.tsv");
  CHECK(geoms.size() == ds.geometries.size());
  auto by_id = geometries_by_id(kg.entities, geoms);
  for (const auto& g : by_id) CHECK(g.has_value());
  auto terms = read_file(dir / "terms.tsv");
  CHECK(terms.find("\tcontains\n") != std::string::npos);
}
