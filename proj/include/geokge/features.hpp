#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geokge/exec.hpp"
#include "geokge/geometry.hpp"
#include "geokge/kg.hpp"

namespace geokge {

enum class FeatureKind : std::uint8_t { Topo = 0, Dir = 1, Dis = 2 };
inline constexpr std::size_t kNumFeatureKinds = 3;
inline constexpr std::array<FeatureKind, 3> kAllFeatureKinds = {FeatureKind::Topo, FeatureKind::Dir,
                                                                 FeatureKind::Dis};

std::string_view feature_kind_name(FeatureKind k);

/// Subset of {TOPO, DIR, DIS}.
class FeatureKindSet {
 public:
  FeatureKindSet() = default;
  static FeatureKindSet all() { return FeatureKindSet(0b111); }

  /// Parses a comma list such as "topo,dir" (case-insensitive); "" is the empty set.
  static FeatureKindSet parse(std::string_view text);

  void insert(FeatureKind k) { bits_ |= bit(k); }
  bool contains(FeatureKind k) const { return (bits_ & bit(k)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  std::string str() const;

  friend bool operator==(const FeatureKindSet&, const FeatureKindSet&) = default;

 private:
  explicit FeatureKindSet(std::uint8_t bits) : bits_(bits) {}
  static std::uint8_t bit(FeatureKind k) { return static_cast<std::uint8_t>(1u << static_cast<int>(k)); }
  std::uint8_t bits_ = 0;
};

inline constexpr std::string_view kDirNoneName = "DIR_NONE";
inline constexpr std::uint32_t kDirNone = 8;

// ---- natural breaks ---------------------------------------------------------------

struct JenksBreaks {
  /// K-1 strictly increasing class boundaries; a boundary belongs to the lower class.
  std::vector<double> boundaries;
  int classes = 1;
  /// Set when fewer distinct values than requested classes forced a smaller K.
  bool reduced = false;
};

/// Exact Fisher-Jenks classification minimizing within-class squared deviation.
/// Boundaries sit midway between adjacent class-edge values. Among equal-cost
/// partitions the one whose last class starts earliest wins, applied recursively.
JenksBreaks jenks_breaks(std::span<const double> values, int classes);

/// Total within-class squared deviation of `values` classified by `breaks`.
double within_class_deviation(std::span<const double> values, const JenksBreaks& breaks);

/// Number of boundaries strictly below d.
int assign_bin(double d, const JenksBreaks& breaks);

std::string bin_label(int bin);

// ---- pair features ----------------------------------------------------------------

struct PairFeature {
  std::uint32_t topo = 0;
  std::uint32_t dir = 0;
  std::uint32_t dis = 0;

  std::uint32_t of(FeatureKind k) const {
    switch (k) {
      case FeatureKind::Topo: return topo;
      case FeatureKind::Dir: return dir;
      case FeatureKind::Dis: return dis;
    }
    return 0;
  }
  friend bool operator==(const PairFeature&, const PairFeature&) = default;
};

using EntityPair = std::pair<EntityId, EntityId>;

struct PairFeatures {
  std::map<EntityPair, PairFeature> pairs;
  /// Category vocabularies indexed by FeatureKind.
  std::array<Vocabulary, 3> vocab;
  JenksBreaks breaks;
  /// Names of referenced entities that had no geometry.
  std::vector<std::string> missing_entities;

  const Vocabulary& categories(FeatureKind k) const { return vocab[static_cast<int>(k)]; }
  const PairFeature* find(EntityId h, EntityId t) const {
    auto it = pairs.find({h, t});
    return it == pairs.end() ? nullptr : &it->second;
  }
};

/// Direction vocabulary: the eight octants followed by DIR_NONE.
Vocabulary direction_vocabulary();

struct RawPairMeasure {
  std::string topo;
  std::optional<Octant> dir;
  double distance = 0.0;
};

/// Geometry measurements for each pair (the data-parallel part of feature extraction).
std::vector<RawPairMeasure> measure_pairs(std::span<const EntityPair> pairs,
                                          std::span<const std::optional<Geometry>> geoms,
                                          Exec exec);

/// `geoms` is indexed by entity id; entries may be empty for entities without footprints.
PairFeatures extract_pair_features(std::span<const Triple> triples, const Vocabulary& entities,
                                   std::span<const std::optional<Geometry>> geoms, int dis_classes,
                                   Exec exec = Exec::Parallel);

/// Maps a name-keyed geometry list onto entity ids; unknown names are ignored.
std::vector<std::optional<Geometry>> geometries_by_id(const Vocabulary& entities,
                                                      std::span<const NamedGeometry> geoms);

struct AlignmentPair {
  RelationId r = 0;
  FeatureKind kind = FeatureKind::Topo;
  std::uint32_t g = 0;
  double weight = 0.0;

  friend bool operator==(const AlignmentPair&, const AlignmentPair&) = default;
};

/// One (relation, kind, category) entry per distinct combination seen in `train`,
/// weighted by occurrence count. Triples whose pair has no features are counted in `skipped`.
std::vector<AlignmentPair> build_alignment_pairs(std::span<const Triple> train,
                                                 const PairFeatures& pf, FeatureKindSet enabled,
                                                 std::size_t* skipped = nullptr);

/// Features file `head<TAB>tail<TAB>topo<TAB>octant<TAB>bin` plus `<path>.jenks` sidecar.
void write_features(const std::filesystem::path& path, const PairFeatures& pf,
                    const Vocabulary& entities);
/// Entities named in the file must exist in `entities`.
PairFeatures read_features(const std::filesystem::path& path, const Vocabulary& entities);
std::filesystem::path jenks_sidecar_path(const std::filesystem::path& features_path);

}  // namespace geokge
