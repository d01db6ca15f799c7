#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geokge/exec.hpp"
#include "geokge/kernels.hpp"
#include "geokge/kg.hpp"
#include "geokge/model.hpp"

namespace geokge {

struct Query {
  Triple triple;
  Slot slot = Slot::Tail;
};

struct Candidate {
  std::uint32_t id = 0;
  double distance = 0.0;
};

struct RankingResult {
  Query query;
  std::uint32_t target = 0;
  /// 1 + strictly closer survivors + half the exact ties (so may end in .5).
  double filtered_rank = 1.0;
  std::vector<Candidate> top_k;
};

/// Candidates forming a known-true triple (other than the target) are removed before ranking.
RankingResult rank_query(const EmbeddingSpace& es, const Query& q, const FilterIndex& filter,
                         std::size_t top_k = 10, Exec exec = Exec::Serial);

struct TaskMetrics {
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits5 = 0.0;
  double hits10 = 0.0;
  std::size_t queries = 0;

  std::array<double, 5> values() const { return {mrr, hits1, hits3, hits5, hits10}; }
  friend bool operator==(const TaskMetrics&, const TaskMetrics&) = default;
};

struct MetricsTable {
  TaskMetrics entity;
  TaskMetrics relation;
  TaskMetrics overall;

  friend bool operator==(const MetricsTable&, const MetricsTable&) = default;
};

TaskMetrics metrics_from_ranks(std::span<const double> ranks);

/// Query-weighted pool of the entity and relation tasks.
TaskMetrics pool_overall(const TaskMetrics& entity, const TaskMetrics& relation);

/// HEAD, TAIL and RELATION queries for every triple; queries run in parallel when
/// requested and are merged in query order.
MetricsTable evaluate_split(const EmbeddingSpace& es, std::span<const Triple> split,
                            const FilterIndex& filter, Exec exec = Exec::Parallel);

/// `task<TAB>MRR<TAB>H@1<TAB>H@3<TAB>H@5<TAB>H@10`; 3 decimals unless `full_precision`.
std::string format_metrics_tsv(const MetricsTable& m, bool full_precision = false);

/// Top-k surviving candidates for the open slot of `partial`, ascending by distance.
std::vector<Candidate> predict_topk(const EmbeddingSpace& es, Slot slot, const Triple& partial,
                                    std::size_t k, const FilterIndex& filter);

/// `rank<TAB>name<TAB>distance` rows.
std::string format_prediction_tsv(std::span<const Candidate> preds, const Vocabulary& names);

}  // namespace geokge
