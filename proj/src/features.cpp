#include "geokge/features.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "geokge/error.hpp"
#include "geokge/text_io.hpp"

namespace geokge {

std::string_view feature_kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::Topo: return "topo";
    case FeatureKind::Dir: return "dir";
    case FeatureKind::Dis: return "dis";
  }
  return "?";
}

FeatureKindSet FeatureKindSet::parse(std::string_view text) {
  FeatureKindSet set;
  text = trim(text);
  if (text.empty() || text == "none") return set;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string item(trim(text.substr(pos, comma - pos)));
    for (auto& c : item) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (item == "topo") {
      set.insert(FeatureKind::Topo);
    } else if (item == "dir") {
      set.insert(FeatureKind::Dir);
    } else if (item == "dis") {
      set.insert(FeatureKind::Dis);
    } else {
      throw InvalidArgument("unknown feature kind '" + item + "' (expected topo, dir, dis)");
    }
    pos = comma + 1;
  }
  return set;
}

std::size_t FeatureKindSet::size() const {
  return static_cast<std::size_t>(std::popcount(bits_));
}

std::string FeatureKindSet::str() const {
  std::string out;
  for (auto k : kAllFeatureKinds) {
    if (!contains(k)) continue;
    if (!out.empty()) out += ',';
    out += feature_kind_name(k);
  }
  return out;
}

// ---- natural breaks ---------------------------------------------------------------

JenksBreaks jenks_breaks(std::span<const double> values, int classes) {
  if (classes < 1) throw InvalidArgument("class count must be >= 1");
  if (values.empty()) throw InvalidArgument("natural breaks need at least one value");
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("natural breaks need finite values");
  }

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  // Distinct values with multiplicities; classes never split a run of equal values.
  std::vector<double> u;
  std::vector<double> w;
  for (double v : sorted) {
    if (!u.empty() && u.back() == v) {
      w.back() += 1.0;
    } else {
      u.push_back(v);
      w.push_back(1.0);
    }
  }
  const std::size_t m = u.size();

  JenksBreaks out;
  int k = classes;
  if (m < static_cast<std::size_t>(k)) {
    k = static_cast<int>(m);
    out.reduced = true;
  }
  out.classes = k;
  if (k == 1) return out;

  // Prefix sums about the mean keep the cost differences well conditioned.
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
                      static_cast<double>(sorted.size());
  std::vector<double> pw(m + 1, 0.0), ps(m + 1, 0.0), pss(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double x = u[i] - mean;
    pw[i + 1] = pw[i] + w[i];
    ps[i + 1] = ps[i] + w[i] * x;
    pss[i + 1] = pss[i] + w[i] * x * x;
  }
  // Within-class deviation of distinct values [i, j).
  auto cost = [&](std::size_t i, std::size_t j) {
    double W = pw[j] - pw[i];
    double S = ps[j] - ps[i];
    double c = (pss[j] - pss[i]) - S * S / W;
    return c > 0.0 ? c : 0.0;
  };
  const double tol = 1e-12 * std::max(1.0, cost(0, m));

  constexpr double kInf = std::numeric_limits<double>::infinity();
  const std::size_t K = static_cast<std::size_t>(k);
  // best[c][j]: optimal cost of the first j distinct values split into c+1 classes.
  std::vector<std::vector<double>> best(K, std::vector<double>(m + 1, kInf));
  std::vector<std::vector<std::size_t>> start(K, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t j = 1; j <= m; ++j) best[0][j] = cost(0, j);
  for (std::size_t c = 1; c < K; ++c) {
    for (std::size_t j = c + 1; j <= m; ++j) {
      double b = kInf;
      std::size_t arg = c;
      for (std::size_t i = c; i < j; ++i) {
        double cand = best[c - 1][i] + cost(i, j);
        if (cand < b - tol) {
          b = cand;
          arg = i;
        }
      }
      best[c][j] = b;
      start[c][j] = arg;
    }
  }

  std::vector<std::size_t> starts(K, 0);
  std::size_t j = m;
  for (std::size_t c = K - 1; c > 0; --c) {
    starts[c] = start[c][j];
    j = starts[c];
  }
  for (std::size_t c = 1; c < K; ++c) {
    std::size_t s = starts[c];
    out.boundaries.push_back(0.5 * (u[s - 1] + u[s]));
  }
  return out;
}

int assign_bin(double d, const JenksBreaks& breaks) {
  auto it = std::lower_bound(breaks.boundaries.begin(), breaks.boundaries.end(), d);
  return static_cast<int>(it - breaks.boundaries.begin());
}

double within_class_deviation(std::span<const double> values, const JenksBreaks& breaks) {
  std::vector<double> sum(static_cast<std::size_t>(breaks.classes), 0.0);
  std::vector<double> cnt(sum.size(), 0.0);
  for (double v : values) {
    auto b = static_cast<std::size_t>(assign_bin(v, breaks));
    sum[b] += v;
    cnt[b] += 1.0;
  }
  double total = 0.0;
  for (double v : values) {
    auto b = static_cast<std::size_t>(assign_bin(v, breaks));
    double d = v - sum[b] / cnt[b];
    total += d * d;
  }
  return total;
}

std::string bin_label(int bin) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "bin%02d", bin);
  return buf;
}

// ---- pair features ----------------------------------------------------------------

Vocabulary direction_vocabulary() {
  std::vector<std::string> names(kOctantNames.begin(), kOctantNames.end());
  names.emplace_back(kDirNoneName);
  return Vocabulary(std::move(names));
}

std::vector<RawPairMeasure> measure_pairs(std::span<const EntityPair> pairs,
                                          std::span<const std::optional<Geometry>> geoms,
                                          Exec exec) {
  std::vector<RawPairMeasure> out(pairs.size());
  const auto n = static_cast<std::int64_t>(pairs.size());
  auto body = [&](std::int64_t i) {
    const auto& [h, t] = pairs[static_cast<std::size_t>(i)];
    const Geometry& gh = *geoms[h];
    const Geometry& gt = *geoms[t];
    auto& m = out[static_cast<std::size_t>(i)];
    m.topo = de9im(gh, gt).str();
    Point ch = centroid(gh);
    Point ct = centroid(gt);
    m.dir = compass_octant(ch, ct);
    m.distance = std::hypot(ct.x - ch.x, ct.y - ch.y);
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) body(i);
  } else {
    for (std::int64_t i = 0; i < n; ++i) body(i);
  }
  return out;
}

PairFeatures extract_pair_features(std::span<const Triple> triples, const Vocabulary& entities,
                                   std::span<const std::optional<Geometry>> geoms, int dis_classes,
                                   Exec exec) {
  if (dis_classes < 1) throw InvalidArgument("distance class count must be >= 1");
  if (geoms.size() != entities.size()) {
    throw InvalidArgument("geometry table size does not match the entity vocabulary");
  }
  PairFeatures pf;
  pf.vocab[static_cast<int>(FeatureKind::Dir)] = direction_vocabulary();

  std::set<EntityPair> distinct;
  std::set<EntityId> missing;
  for (const auto& t : triples) {
    bool ok = true;
    if (!geoms[t.h]) {
      missing.insert(t.h);
      ok = false;
    }
    if (!geoms[t.t]) {
      missing.insert(t.t);
      ok = false;
    }
    if (ok) distinct.insert({t.h, t.t});
  }
  for (auto id : missing) pf.missing_entities.push_back(entities.name(id));

  std::vector<EntityPair> pairs(distinct.begin(), distinct.end());
  auto measures = measure_pairs(pairs, geoms, exec);

  std::vector<double> dists;
  dists.reserve(measures.size());
  for (const auto& m : measures) dists.push_back(m.distance);
  if (!dists.empty()) pf.breaks = jenks_breaks(dists, dis_classes);
  for (int b = 0; b < pf.breaks.classes; ++b) {
    pf.vocab[static_cast<int>(FeatureKind::Dis)].intern(bin_label(b));
  }

  auto& topo_vocab = pf.vocab[static_cast<int>(FeatureKind::Topo)];
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& m = measures[i];
    PairFeature f;
    f.topo = topo_vocab.intern(m.topo);
    f.dir = m.dir ? static_cast<std::uint32_t>(*m.dir) : kDirNone;
    f.dis = static_cast<std::uint32_t>(assign_bin(m.distance, pf.breaks));
    pf.pairs.emplace(pairs[i], f);
  }
  return pf;
}

std::vector<std::optional<Geometry>> geometries_by_id(const Vocabulary& entities,
                                                      std::span<const NamedGeometry> geoms) {
  std::vector<std::optional<Geometry>> out(entities.size());
  for (const auto& g : geoms) {
    if (entities.contains(g.name)) out[entities.at(g.name)] = g.geometry;
  }
  return out;
}

std::vector<AlignmentPair> build_alignment_pairs(std::span<const Triple> train,
                                                 const PairFeatures& pf, FeatureKindSet enabled,
                                                 std::size_t* skipped) {
  std::map<std::tuple<RelationId, int, std::uint32_t>, double> counts;
  std::size_t miss = 0;
  if (!enabled.empty()) {
    for (const auto& t : train) {
      const PairFeature* f = pf.find(t.h, t.t);
      if (!f) {
        ++miss;
        continue;
      }
      for (auto k : kAllFeatureKinds) {
        if (enabled.contains(k)) counts[{t.r, static_cast<int>(k), f->of(k)}] += 1.0;
      }
    }
  }
  if (skipped) *skipped = miss;
  std::vector<AlignmentPair> out;
  out.reserve(counts.size());
  for (const auto& [key, w] : counts) {
    out.push_back({std::get<0>(key), static_cast<FeatureKind>(std::get<1>(key)), std::get<2>(key), w});
  }
  return out;
}

// ---- files ----------------------------------------------------------------------

std::filesystem::path jenks_sidecar_path(const std::filesystem::path& features_path) {
  auto p = features_path;
  p += ".jenks";
  return p;
}

void write_features(const std::filesystem::path& path, const PairFeatures& pf,
                    const Vocabulary& entities) {
  std::ostringstream os;
  const auto& topo = pf.categories(FeatureKind::Topo);
  const auto& dir = pf.categories(FeatureKind::Dir);
  const auto& dis = pf.categories(FeatureKind::Dis);
  for (const auto& [key, f] : pf.pairs) {
    os << entities.name(key.first) << '\t' << entities.name(key.second) << '\t'
       << topo.name(f.topo) << '\t' << dir.name(f.dir) << '\t' << dis.name(f.dis) << '\n';
  }
  write_file(path, os.str());

  std::ostringstream side;
  side << "classes = " << pf.breaks.classes << '\n';
  side << "reduced = " << (pf.breaks.reduced ? 1 : 0) << '\n';
  side << "topo_categories = ";
  for (std::size_t i = 0; i < topo.size(); ++i) side << (i ? "," : "") << topo.name(static_cast<std::uint32_t>(i));
  side << '\n';
  for (std::size_t i = 0; i < pf.breaks.boundaries.size(); ++i) {
    side << "boundary" << i << " = " << format_exact(pf.breaks.boundaries[i]) << '\n';
  }
  write_file(jenks_sidecar_path(path), side.str());
}

PairFeatures read_features(const std::filesystem::path& path, const Vocabulary& entities) {
  PairFeatures pf;
  auto side = read_key_values(jenks_sidecar_path(path));
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = side.find(key);
    if (it == side.end()) throw DataError(jenks_sidecar_path(path).string() + ": missing '" + key + "'");
    return it->second;
  };
  pf.breaks.classes = std::stoi(need("classes"));
  if (pf.breaks.classes < 1) throw DataError("invalid class count in Jenks sidecar");
  pf.breaks.reduced = need("reduced") == "1";
  for (int i = 0; i + 1 < pf.breaks.classes; ++i) {
    pf.breaks.boundaries.push_back(parse_double(need("boundary" + std::to_string(i))));
  }
  for (std::size_t i = 1; i < pf.breaks.boundaries.size(); ++i) {
    if (!(pf.breaks.boundaries[i - 1] < pf.breaks.boundaries[i])) {
      throw DataError("Jenks boundaries are not strictly increasing");
    }
  }

  auto& topo = pf.vocab[static_cast<int>(FeatureKind::Topo)];
  auto topo_list = need("topo_categories");
  std::size_t pos = 0;
  while (!topo_list.empty() && pos <= topo_list.size()) {
    auto comma = topo_list.find(',', pos);
    if (comma == std::string::npos) comma = topo_list.size();
    De9im check(topo_list.substr(pos, comma - pos));
    topo.intern(check.str());
    pos = comma + 1;
  }
  pf.vocab[static_cast<int>(FeatureKind::Dir)] = direction_vocabulary();
  for (int b = 0; b < pf.breaks.classes; ++b) pf.vocab[static_cast<int>(FeatureKind::Dis)].intern(bin_label(b));

  const std::string src = path.string();
  std::size_t line_no = 0;
  for_each_line(read_file(path), [&](std::string_view line) {
    ++line_no;
    if (is_blank_or_comment(line)) return;
    auto f = split_tabs(line);
    if (f.size() != 5) throw ParseError(src, line_no, "expected 5 tab-separated fields");
    try {
      EntityPair key{entities.at(f[0]), entities.at(f[1])};
      PairFeature pfe{topo.at(f[2]), pf.categories(FeatureKind::Dir).at(f[3]),
                      pf.categories(FeatureKind::Dis).at(f[4])};
      if (!pf.pairs.emplace(key, pfe).second) throw DataError("duplicate pair");
    } catch (const ParseError&) {
      throw;
    } catch (const DataError& e) {
      throw ParseError(src, line_no, e.what());
    }
  });
  return pf;
}

}  // namespace geokge
