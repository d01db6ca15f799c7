#include "geokge/kg.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "geokge/error.hpp"
#include "geokge/text_io.hpp"

namespace geokge {

Vocabulary::Vocabulary(std::vector<std::string> names) {
  for (auto& n : names) {
    if (index_.contains(n)) throw DataError("duplicate vocabulary entry '" + n + "'");
    intern(n);
  }
}

std::uint32_t Vocabulary::intern(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it != index_.end()) return it->second;
  auto id = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

std::uint32_t Vocabulary::at(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw DataError("unknown name '" + std::string(name) + "'");
  return it->second;
}

bool Vocabulary::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

std::uint64_t Vocabulary::digest() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& n : names_) {
    for (unsigned char c : n) mix(c);
    mix(0);
  }
  return h;
}

IngestResult ingest_triples_text(std::string_view text, std::string_view source_name,
                                 Vocabulary entities, Vocabulary relations, IngestOptions opts) {
  IngestResult out{std::move(entities), std::move(relations), {}};
  std::string src(source_name);
  std::size_t line_no = 0;
  bool any_line = false;
  for_each_line(text, [&](std::string_view line) {
    ++line_no;
    if (is_blank_or_comment(line)) return;
    any_line = true;
    auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw ParseError(src, line_no, "expected 3 tab-separated fields, got " +
                                         std::to_string(fields.size()));
    }
    for (auto f : fields) {
      if (f.empty()) throw ParseError(src, line_no, "empty field");
    }
    auto resolve = [&](Vocabulary& v, std::string_view name) {
      if (opts.frozen_vocab && !v.contains(name)) {
        throw ParseError(src, line_no, "name '" + std::string(name) + "' not in vocabulary");
      }
      return v.intern(name);
    };
    Triple t;
    t.h = resolve(out.entities, fields[0]);
    t.r = resolve(out.relations, fields[1]);
    t.t = resolve(out.entities, fields[2]);
    out.triples.push_back(t);
  });
  if (!any_line) throw DataError(src + ": no triples");
  if (opts.dedup) out.triples = dedup_triples(out.triples);
  return out;
}

IngestResult ingest_triples(const std::filesystem::path& path, Vocabulary entities,
                            Vocabulary relations, IngestOptions opts) {
  return ingest_triples_text(read_file(path), path.string(), std::move(entities),
                             std::move(relations), opts);
}

void write_triples(const std::filesystem::path& path, const std::vector<Triple>& triples,
                   const Vocabulary& entities, const Vocabulary& relations) {
  std::ostringstream os;
  for (const auto& t : triples) {
    os << entities.name(t.h) << '\t' << relations.name(t.r) << '\t' << entities.name(t.t) << '\n';
  }
  write_file(path, os.str());
}

std::vector<Triple> dedup_triples(const std::vector<Triple>& triples) {
  std::unordered_set<Triple, TripleHash> seen;
  std::vector<Triple> out;
  out.reserve(triples.size());
  for (const auto& t : triples) {
    if (seen.insert(t).second) out.push_back(t);
  }
  return out;
}

SplitDataset split_dataset(const std::vector<Triple>& triples, SplitRatio ratio,
                           std::uint64_t seed) {
  if (ratio.train <= 0 || ratio.valid <= 0 || ratio.test <= 0) {
    throw InvalidArgument("split percentages must be positive");
  }
  if (ratio.train + ratio.valid + ratio.test != 100) {
    throw InvalidArgument("split percentages must sum to 100");
  }
  const std::size_t n = triples.size();
  const std::size_t n_valid = n * static_cast<std::size_t>(ratio.valid) / 100;
  const std::size_t n_test = n * static_cast<std::size_t>(ratio.test) / 100;
  if (n < 3 || n_valid == 0 || n_test == 0 || n_valid + n_test >= n) {
    throw InvalidArgument("too few triples (" + std::to_string(n) +
                          ") to give every split at least one");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Fisher-Yates with an explicit engine draw; std::shuffle's algorithm is
  // implementation-defined and would make splits library-dependent.
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }

  SplitDataset out;
  out.split_seed = seed;
  const std::size_t n_train = n - n_valid - n_test;
  out.train.reserve(n_train);
  out.valid.reserve(n_valid);
  out.test.reserve(n_test);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = triples[order[i]];
    if (i < n_train) {
      out.train.push_back(t);
    } else if (i < n_train + n_valid) {
      out.valid.push_back(t);
    } else {
      out.test.push_back(t);
    }
  }
  return out;
}

namespace {

void write_names(const std::filesystem::path& path, const Vocabulary& v) {
  std::ostringstream os;
  for (const auto& n : v.names()) os << n << '\n';
  write_file(path, os.str());
}

Vocabulary read_names(const std::filesystem::path& path) {
  std::vector<std::string> names;
  std::string text = read_file(path);
  for_each_line(text, [&](std::string_view line) {
    if (!line.empty()) names.emplace_back(line);
  });
  return Vocabulary(std::move(names));
}

}  // namespace

void write_split_manifest(const std::filesystem::path& dir, const SplitDataset& split,
                          const Vocabulary& entities, const Vocabulary& relations) {
  std::filesystem::create_directories(dir);
  write_triples(dir / "train.tsv", split.train, entities, relations);
  write_triples(dir / "valid.tsv", split.valid, entities, relations);
  write_triples(dir / "test.tsv", split.test, entities, relations);
  write_names(dir / "entities.txt", entities);
  write_names(dir / "relations.txt", relations);
  std::ostringstream meta;
  meta << "seed = " << split.split_seed << '\n'
       << "train = " << split.train.size() << '\n'
       << "valid = " << split.valid.size() << '\n'
       << "test = " << split.test.size() << '\n'
       << "entities = " << entities.size() << '\n'
       << "relations = " << relations.size() << '\n'
       << "vocab_digest = " << hex64(entities.digest() ^ (relations.digest() * 31)) << '\n';
  write_file(dir / "split.meta", meta.str());
}

SplitManifest read_split_manifest(const std::filesystem::path& dir) {
  SplitManifest m;
  m.entities = read_names(dir / "entities.txt");
  m.relations = read_names(dir / "relations.txt");
  IngestOptions frozen{.dedup = false, .frozen_vocab = true};
  auto load = [&](const char* name) {
    auto r = ingest_triples(dir / name, m.entities, m.relations, frozen);
    return std::move(r.triples);
  };
  m.split.train = load("train.tsv");
  m.split.valid = load("valid.tsv");
  m.split.test = load("test.tsv");
  auto meta = read_key_values(dir / "split.meta");
  if (auto it = meta.find("seed"); it != meta.end()) m.split.split_seed = std::stoull(it->second);
  if (auto it = meta.find("vocab_digest"); it != meta.end()) {
    if (it->second != hex64(m.entities.digest() ^ (m.relations.digest() * 31))) {
      throw DataError((dir / "split.meta").string() + ": vocabulary digest mismatch");
    }
  }
  return m;
}

const std::unordered_set<EntityId>& FilterIndex::tails(EntityId h, RelationId r) const {
  static const std::unordered_set<EntityId> kEmpty;
  auto it = by_hr_.find(key(h, r));
  return it == by_hr_.end() ? kEmpty : it->second;
}

const std::unordered_set<EntityId>& FilterIndex::heads(RelationId r, EntityId t) const {
  static const std::unordered_set<EntityId> kEmpty;
  auto it = by_rt_.find(key(r, t));
  return it == by_rt_.end() ? kEmpty : it->second;
}

const std::unordered_set<RelationId>& FilterIndex::relations(EntityId h, EntityId t) const {
  static const std::unordered_set<RelationId> kEmpty;
  auto it = by_ht_.find(key(h, t));
  return it == by_ht_.end() ? kEmpty : it->second;
}

FilterIndex build_filter_index(const std::vector<const std::vector<Triple>*>& splits) {
  FilterIndex idx;
  for (const auto* split : splits) {
    for (const auto& t : *split) {
      if (!idx.known_.insert(t).second) continue;
      idx.by_hr_[FilterIndex::key(t.h, t.r)].insert(t.t);
      idx.by_rt_[FilterIndex::key(t.r, t.t)].insert(t.h);
      idx.by_ht_[FilterIndex::key(t.h, t.t)].insert(t.r);
    }
  }
  return idx;
}

}  // namespace geokge
