#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace geokge {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

/// Dense, insertion-ordered string <-> id mapping.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> names);

  /// Returns the id of `name`, appending it if unseen.
  std::uint32_t intern(std::string_view name);
  /// Returns the id of `name`; throws DataError if unknown.
  std::uint32_t at(std::string_view name) const;
  bool contains(std::string_view name) const;
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  /// FNV-1a over the names in id order; used to detect vocab mismatches across files.
  std::uint64_t digest() const noexcept;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct Triple {
  EntityId h = 0;
  RelationId r = 0;
  EntityId t = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& x) const noexcept {
    std::uint64_t k = (std::uint64_t{x.h} << 40) ^ (std::uint64_t{x.r} << 20) ^ x.t;
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    return static_cast<std::size_t>(k);
  }
};

struct IngestResult {
  Vocabulary entities;
  Vocabulary relations;
  std::vector<Triple> triples;
};

struct IngestOptions {
  bool dedup = false;
  /// When set, names absent from the supplied vocabularies are a DataError instead of being appended.
  bool frozen_vocab = false;
};

/// Reads `head<TAB>relation<TAB>tail` lines; '#' lines and blank lines are skipped.
IngestResult ingest_triples(const std::filesystem::path& path, Vocabulary entities = {},
                            Vocabulary relations = {}, IngestOptions opts = {});
IngestResult ingest_triples_text(std::string_view text, std::string_view source_name,
                                 Vocabulary entities = {}, Vocabulary relations = {},
                                 IngestOptions opts = {});

void write_triples(const std::filesystem::path& path, const std::vector<Triple>& triples,
                   const Vocabulary& entities, const Vocabulary& relations);

std::vector<Triple> dedup_triples(const std::vector<Triple>& triples);

struct SplitRatio {
  int train = 87;
  int valid = 3;
  int test = 10;
};

struct SplitDataset {
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
  std::uint64_t split_seed = 0;
};

/// Seeded shuffle then contiguous cut; valid/test get floor(n*p/100), train the remainder.
SplitDataset split_dataset(const std::vector<Triple>& triples, SplitRatio ratio, std::uint64_t seed);

/// Writes train.tsv / valid.tsv / test.tsv and split.meta into `dir`.
void write_split_manifest(const std::filesystem::path& dir, const SplitDataset& split,
                          const Vocabulary& entities, const Vocabulary& relations);

struct SplitManifest {
  Vocabulary entities;
  Vocabulary relations;
  SplitDataset split;
};

/// Reads a directory produced by write_split_manifest. Vocabularies are rebuilt in
/// train, valid, test file order, which is the order the manifest metadata hashes.
SplitManifest read_split_manifest(const std::filesystem::path& dir);

/// Known-true triples with the three projections used by filtered ranking.
class FilterIndex {
 public:
  FilterIndex() = default;

  bool contains(const Triple& x) const { return known_.contains(x); }
  std::size_t size() const noexcept { return known_.size(); }

  /// Empty set when the key is absent.
  const std::unordered_set<EntityId>& tails(EntityId h, RelationId r) const;
  const std::unordered_set<EntityId>& heads(RelationId r, EntityId t) const;
  const std::unordered_set<RelationId>& relations(EntityId h, EntityId t) const;

  friend FilterIndex build_filter_index(const std::vector<const std::vector<Triple>*>& splits);

 private:
  static std::uint64_t key(std::uint32_t a, std::uint32_t b) noexcept {
    return (std::uint64_t{a} << 32) | b;
  }

  std::unordered_set<Triple, TripleHash> known_;
  std::unordered_map<std::uint64_t, std::unordered_set<EntityId>> by_hr_;
  std::unordered_map<std::uint64_t, std::unordered_set<EntityId>> by_rt_;
  std::unordered_map<std::uint64_t, std::unordered_set<RelationId>> by_ht_;
};

FilterIndex build_filter_index(const std::vector<const std::vector<Triple>*>& splits);

}  // namespace geokge
