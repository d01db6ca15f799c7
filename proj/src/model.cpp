#include "geokge/model.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "geokge/error.hpp"

namespace geokge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sgn(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

ModelShape checked(const ModelShape& s) {
  if (s.k < 1) throw InvalidArgument("embedding dimension must be >= 1");
  if (s.entities < 1 || s.relations < 1) throw InvalidArgument("vocabulary sizes must be >= 1");
  for (auto f : s.features) {
    if (f < 1) throw InvalidArgument("feature vocabulary sizes must be >= 1");
  }
  return s;
}

}  // namespace

EmbeddingSpace init_params(const ModelShape& shape_in, std::uint64_t seed) {
  const ModelShape shape = checked(shape_in);
  EmbeddingSpace es;
  es.shape = shape;
  auto rows_of = [&](TableId id) -> std::size_t {
    switch (id) {
      case TableId::EntityPhase:
      case TableId::EntityMod: return shape.entities;
      case TableId::RelPhase:
      case TableId::RelModRaw: return shape.relations;
      case TableId::TopoPhase:
      case TableId::TopoModRaw: return shape.features[0];
      case TableId::DirPhase:
      case TableId::DirModRaw: return shape.features[1];
      case TableId::DisPhase:
      case TableId::DisModRaw: return shape.features[2];
    }
    return 0;
  };

  std::mt19937_64 rng(seed);
  // Explicit transforms of raw engine output keep parameters identical across
  // standard libraries (std::uniform_real_distribution is not portable).
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (std::size_t i = 0; i < kNumTables; ++i) {
    auto id = static_cast<TableId>(i);
    Table t(rows_of(id), shape.k);
    const bool phase = (i % 2 == 0);
    for (auto& v : t.data()) v = phase ? kTwoPi * unit() : 0.1 * unit() - 0.05;
    es.tables[i] = std::move(t);
  }
  return es;
}

ScoreBreakdown triplet_distance(const EmbeddingSpace& es, EntityId h, RelationId r, EntityId t) {
  const auto hp = es.table(TableId::EntityPhase).row(h);
  const auto hm = es.table(TableId::EntityMod).row(h);
  const auto rp = es.table(TableId::RelPhase).row(r);
  const auto rm = es.table(TableId::RelModRaw).row(r);
  const auto tp = es.table(TableId::EntityPhase).row(t);
  const auto tm = es.table(TableId::EntityMod).row(t);
  double sq = 0.0;
  double ph = 0.0;
  for (std::size_t i = 0; i < es.k(); ++i) {
    double dm = hm[i] * std::abs(rm[i]) - tm[i];
    sq += dm * dm;
    ph += std::abs(std::sin((hp[i] + rp[i] - tp[i]) * 0.5));
  }
  ScoreBreakdown s;
  s.modulus_part = std::sqrt(sq);
  s.phase_part = ph;
  s.total = s.modulus_part + es.lambda_triplet * s.phase_part;
  return s;
}

ScoreBreakdown alignment_distance(const EmbeddingSpace& es, RelationId r, FeatureKind kind,
                                  std::uint32_t g) {
  const auto rp = es.table(TableId::RelPhase).row(r);
  const auto rm = es.table(TableId::RelModRaw).row(r);
  const auto gp = es.table(feature_phase_table(kind)).row(g);
  const auto gm = es.table(feature_mod_table(kind)).row(g);
  double sq = 0.0;
  double ph = 0.0;
  for (std::size_t i = 0; i < es.k(); ++i) {
    double dm = std::abs(rm[i]) - std::abs(gm[i]);
    sq += dm * dm;
    ph += std::abs(std::sin((rp[i] - gp[i]) * 0.5));
  }
  ScoreBreakdown s;
  s.modulus_part = std::sqrt(sq);
  s.phase_part = ph;
  s.total = s.modulus_part + es.lambda_align * s.phase_part;
  return s;
}

std::span<double> SparseGrad::row(TableId table, std::uint32_t row) {
  for (const auto& r : rows_) {
    if (r.table == table && r.row == row) return {values_.data() + r.offset, k_};
  }
  rows_.push_back({table, row, values_.size()});
  values_.resize(values_.size() + k_, 0.0);
  return {values_.data() + rows_.back().offset, k_};
}

std::span<const double> SparseGrad::find(TableId table, std::uint32_t row) const {
  for (const auto& r : rows_) {
    if (r.table == table && r.row == row) return {values_.data() + r.offset, k_};
  }
  return {};
}

void accumulate_grad_triplet(const EmbeddingSpace& es, EntityId h, RelationId r, EntityId t,
                             double scale, SparseGrad& out) {
  const std::size_t k = es.k();
  const auto hp = es.table(TableId::EntityPhase).row(h);
  const auto hm = es.table(TableId::EntityMod).row(h);
  const auto rp = es.table(TableId::RelPhase).row(r);
  const auto rm = es.table(TableId::RelModRaw).row(r);
  const auto tp = es.table(TableId::EntityPhase).row(t);
  const auto tm = es.table(TableId::EntityMod).row(t);

  std::vector<double> dm(k), dphase(k);
  double sq = 0.0;
  double ph = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    dm[i] = hm[i] * std::abs(rm[i]) - tm[i];
    sq += dm[i] * dm[i];
    double half = (hp[i] + rp[i] - tp[i]) * 0.5;
    double s = std::sin(half);
    ph += std::abs(s);
    dphase[i] = 0.5 * std::cos(half) * sgn(s);
  }
  const double norm = std::sqrt(sq);
  const double lam = es.lambda_triplet;

  {
    auto g = out.row(TableId::EntityMod, h);
    if (norm > 0.0) {
      for (std::size_t i = 0; i < k; ++i) g[i] += scale * dm[i] * std::abs(rm[i]) / norm;
    }
  }
  {
    auto g = out.row(TableId::RelModRaw, r);
    if (norm > 0.0) {
      for (std::size_t i = 0; i < k; ++i) g[i] += scale * dm[i] * hm[i] * sgn(rm[i]) / norm;
    }
  }
  {
    auto g = out.row(TableId::EntityMod, t);
    if (norm > 0.0) {
      for (std::size_t i = 0; i < k; ++i) g[i] -= scale * dm[i] / norm;
    }
  }
  {
    auto g = out.row(TableId::EntityPhase, h);
    for (std::size_t i = 0; i < k; ++i) g[i] += scale * lam * dphase[i];
  }
  {
    auto g = out.row(TableId::RelPhase, r);
    for (std::size_t i = 0; i < k; ++i) g[i] += scale * lam * dphase[i];
  }
  {
    auto g = out.row(TableId::EntityPhase, t);
    for (std::size_t i = 0; i < k; ++i) g[i] -= scale * lam * dphase[i];
  }
  out.d_lambda_triplet += scale * ph;
}

void accumulate_grad_alignment(const EmbeddingSpace& es, RelationId r, FeatureKind kind,
                               std::uint32_t gid, double scale, SparseGrad& out) {
  const std::size_t k = es.k();
  const TableId gp_id = feature_phase_table(kind);
  const TableId gm_id = feature_mod_table(kind);
  const auto rp = es.table(TableId::RelPhase).row(r);
  const auto rm = es.table(TableId::RelModRaw).row(r);
  const auto gp = es.table(gp_id).row(gid);
  const auto gm = es.table(gm_id).row(gid);

  std::vector<double> dm(k), dphase(k);
  double sq = 0.0;
  double ph = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    dm[i] = std::abs(rm[i]) - std::abs(gm[i]);
    sq += dm[i] * dm[i];
    double half = (rp[i] - gp[i]) * 0.5;
    double s = std::sin(half);
    ph += std::abs(s);
    dphase[i] = 0.5 * std::cos(half) * sgn(s);
  }
  const double norm = std::sqrt(sq);
  const double lam = es.lambda_align;

  {
    auto g = out.row(TableId::RelModRaw, r);
    if (norm > 0.0) {
      for (std::size_t i = 0; i < k; ++i) g[i] += scale * dm[i] * sgn(rm[i]) / norm;
    }
  }
  {
    auto g = out.row(gm_id, gid);
    if (norm > 0.0) {
      for (std::size_t i = 0; i < k; ++i) g[i] -= scale * dm[i] * sgn(gm[i]) / norm;
    }
  }
  {
    auto g = out.row(TableId::RelPhase, r);
    for (std::size_t i = 0; i < k; ++i) g[i] += scale * lam * dphase[i];
  }
  {
    auto g = out.row(gp_id, gid);
    for (std::size_t i = 0; i < k; ++i) g[i] -= scale * lam * dphase[i];
  }
  out.d_lambda_align += scale * ph;
}

SparseGrad grad_triplet(const EmbeddingSpace& es, EntityId h, RelationId r, EntityId t) {
  SparseGrad g(es.k());
  accumulate_grad_triplet(es, h, r, t, 1.0, g);
  return g;
}

SparseGrad grad_alignment(const EmbeddingSpace& es, RelationId r, FeatureKind kind,
                          std::uint32_t gid) {
  SparseGrad g(es.k());
  accumulate_grad_alignment(es, r, kind, gid, 1.0, g);
  return g;
}

}  // namespace geokge
