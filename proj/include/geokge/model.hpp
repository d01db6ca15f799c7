#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "geokge/features.hpp"
#include "geokge/kg.hpp"

namespace geokge {

/// Row-major real matrix.
class Table {
 public:
  Table() = default;
  Table(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const Table&, const Table&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Parameter tables in checkpoint order.
enum class TableId : std::uint8_t {
  EntityPhase = 0,
  EntityMod,
  RelPhase,
  RelModRaw,
  TopoPhase,
  TopoModRaw,
  DirPhase,
  DirModRaw,
  DisPhase,
  DisModRaw,
};
inline constexpr std::size_t kNumTables = 10;

inline TableId feature_phase_table(FeatureKind k) {
  return static_cast<TableId>(4 + 2 * static_cast<int>(k));
}
inline TableId feature_mod_table(FeatureKind k) {
  return static_cast<TableId>(5 + 2 * static_cast<int>(k));
}

struct ModelShape {
  std::size_t entities = 1;
  std::size_t relations = 1;
  std::array<std::size_t, 3> features = {1, 1, 1};
  std::size_t k = 1;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// Phase/modulus embeddings for entities, relation terms and feature categories.
/// Phases are stored unwrapped; relation and feature moduli are |raw|.
struct EmbeddingSpace {
  ModelShape shape;
  std::array<Table, kNumTables> tables;
  double lambda_triplet = 1.0;
  double lambda_align = 1.0;

  std::size_t k() const noexcept { return shape.k; }
  Table& table(TableId id) { return tables[static_cast<std::size_t>(id)]; }
  const Table& table(TableId id) const { return tables[static_cast<std::size_t>(id)]; }

  friend bool operator==(const EmbeddingSpace&, const EmbeddingSpace&) = default;
};

/// Phases uniform in [0, 2pi), modulus values uniform in [-0.05, 0.05], both lambdas 1.
EmbeddingSpace init_params(const ModelShape& shape, std::uint64_t seed);

struct ScoreBreakdown {
  double modulus_part = 0.0;
  double phase_part = 0.0;
  double total = 0.0;
};

/// ||h_m o |r_m| - t_m||_2 + lambda_triplet * ||sin((h_p + r_p - t_p) / 2)||_1
ScoreBreakdown triplet_distance(const EmbeddingSpace& es, EntityId h, RelationId r, EntityId t);

/// || |R_t,m| - |R_g,m| ||_2 + lambda_align * ||sin((R_t,p - R_g,p) / 2)||_1
ScoreBreakdown alignment_distance(const EmbeddingSpace& es, RelationId r, FeatureKind kind,
                                  std::uint32_t g);

/// Gradient restricted to the rows a distance touches, plus the two lambda scalars.
class SparseGrad {
 public:
  struct Row {
    TableId table;
    std::uint32_t row;
    std::size_t offset;
  };

  explicit SparseGrad(std::size_t k = 0) : k_(k) {}

  /// Zero-initialized slot for (table, row), created on first use.
  std::span<double> row(TableId table, std::uint32_t row);
  /// nullptr-equivalent empty span when the row was never touched.
  std::span<const double> find(TableId table, std::uint32_t row) const;

  const std::vector<Row>& rows() const noexcept { return rows_; }
  std::span<const double> values(const Row& r) const { return {values_.data() + r.offset, k_}; }
  std::size_t k() const noexcept { return k_; }

  double d_lambda_triplet = 0.0;
  double d_lambda_align = 0.0;

  void clear() {
    rows_.clear();
    values_.clear();
    d_lambda_triplet = d_lambda_align = 0.0;
  }

 private:
  std::size_t k_;
  std::vector<Row> rows_;
  std::vector<double> values_;
};

/// Adds scale * d(total)/d(params) into `out`. Subgradient 0 at ||.||=0 and sign(0)=0.
void accumulate_grad_triplet(const EmbeddingSpace& es, EntityId h, RelationId r, EntityId t,
                             double scale, SparseGrad& out);
void accumulate_grad_alignment(const EmbeddingSpace& es, RelationId r, FeatureKind kind,
                               std::uint32_t g, double scale, SparseGrad& out);

SparseGrad grad_triplet(const EmbeddingSpace& es, EntityId h, RelationId r, EntityId t);
SparseGrad grad_alignment(const EmbeddingSpace& es, RelationId r, FeatureKind kind, std::uint32_t g);

}  // namespace geokge
