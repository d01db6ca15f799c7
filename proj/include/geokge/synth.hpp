#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geokge/geometry.hpp"
#include "geokge/kg.hpp"

namespace geokge {

/// Geometric configurations that relation terms describe.
enum class Archetype : std::uint8_t {
  Contains = 0,
  Within,
  Crosses,
  Touches,
  NorthOf,
  EastOf,
  SouthOf,
  WestOf,
  Near,
  Far,
};
inline constexpr std::size_t kNumArchetypes = 10;

std::string_view archetype_name(Archetype a);

struct GenConfig {
  std::size_t n_entities = 500;
  double frac_points = 0.4;
  double frac_polylines = 0.3;
  double frac_polygons = 0.3;
  std::size_t n_relation_terms = 30;
  /// Terms are dealt round-robin to the archetypes; 30 terms gives 3 synonyms each.
  std::size_t n_triples = 3000;
  double noise_rate = 0.1;
  std::uint64_t seed = 1;
  double extent = 10000.0;
  /// Tails are drawn from the head's nearest neighbours with this probability.
  double locality = 0.8;
  std::size_t neighbours = 12;
  /// Relative emission weight of the topological, directional and distance archetype
  /// families; each family's weight is split evenly over its archetypes.
  std::array<double, 3> family_weights = {69.0, 17.0, 14.0};
  /// Share of points and polylines placed inside or on the boundary of a region.
  double anchored_fraction = 0.5;

  void validate() const;
};

struct SynthTriple {
  std::string head;
  std::string term;
  std::string tail;
  /// Archetype the pair actually satisfies (the term may be noise).
  Archetype archetype = Archetype::Contains;
  bool noisy = false;
};

struct SynthDataset {
  std::vector<NamedGeometry> geometries;
  std::vector<SynthTriple> triples;
  /// term -> archetype group.
  std::vector<std::pair<std::string, Archetype>> terms;
  /// Triples emitted per archetype; zero marks an archetype no pair could satisfy.
  std::array<std::size_t, kNumArchetypes> archetype_counts{};
};

/// The archetype of the ordered pair (head, tail). Intersecting pairs are topological;
/// disjoint pairs are near or far by tercile, or directional in the middle band.
/// `near_max` / `far_min` are the distance tercile cut points.
std::optional<Archetype> pair_archetype(const Geometry& head, const Geometry& tail,
                                       double near_max, double far_min);

SynthDataset generate(const GenConfig& cfg);

/// Writes geometries.tsv, triples.tsv and terms.tsv (`term<TAB>archetype`) into `dir`.
void write_synth_dataset(const std::filesystem::path& dir, const SynthDataset& ds);

/// Empirical mutual information (nats) between emitted term and true archetype.
double term_archetype_mutual_information(const SynthDataset& ds);

}  // namespace geokge
