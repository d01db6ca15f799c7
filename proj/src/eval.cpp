#include "geokge/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "geokge/error.hpp"
#include "geokge/text_io.hpp"

namespace geokge {

namespace {

std::size_t candidate_count(const EmbeddingSpace& es, Slot slot) {
  return slot == Slot::Relation ? es.shape.relations : es.shape.entities;
}

std::uint32_t target_of(const Triple& t, Slot slot) {
  switch (slot) {
    case Slot::Head: return t.h;
    case Slot::Tail: return t.t;
    case Slot::Relation: return t.r;
  }
  return 0;
}

/// Marks candidates that form a known-true triple with the fixed pair of `t`.
void mark_filtered(const FilterIndex& filter, Slot slot, const Triple& t,
                   std::vector<std::uint8_t>& removed) {
  auto mark = [&removed](const auto& ids) {
    for (auto id : ids) {
      if (id < removed.size()) removed[id] = 1;
    }
  };
  switch (slot) {
    case Slot::Head: mark(filter.heads(t.r, t.t)); break;
    case Slot::Tail: mark(filter.tails(t.h, t.r)); break;
    case Slot::Relation: mark(filter.relations(t.h, t.t)); break;
  }
}

std::vector<Candidate> survivors_sorted(std::span<const double> dist,
                                        const std::vector<std::uint8_t>& removed,
                                        std::size_t k) {
  std::vector<Candidate> all;
  all.reserve(dist.size());
  for (std::uint32_t c = 0; c < dist.size(); ++c) {
    if (!removed[c]) all.push_back({c, dist[c]});
  }
  auto less = [](const Candidate& a, const Candidate& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  };
  const std::size_t n = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), less);
  all.resize(n);
  return all;
}

}  // namespace

RankingResult rank_query(const EmbeddingSpace& es, const Query& q, const FilterIndex& filter,
                         std::size_t top_k, Exec exec) {
  const std::size_t n = candidate_count(es, q.slot);
  std::vector<double> dist(n);
  score_candidates(es, q.slot, q.triple, dist, exec);

  const std::uint32_t target = target_of(q.triple, q.slot);
  std::vector<std::uint8_t> removed(n, 0);
  mark_filtered(filter, q.slot, q.triple, removed);
  removed[target] = 0;

  const double dt = dist[target];
  std::size_t better = 0;
  std::size_t ties = 0;
  for (std::uint32_t c = 0; c < n; ++c) {
    if (removed[c] || c == target) continue;
    if (dist[c] < dt) {
      ++better;
    } else if (dist[c] == dt) {
      ++ties;
    }
  }
  RankingResult r;
  r.query = q;
  r.target = target;
  r.filtered_rank = 1.0 + static_cast<double>(better) + 0.5 * static_cast<double>(ties);
  if (top_k > 0) r.top_k = survivors_sorted(dist, removed, top_k);
  return r;
}

TaskMetrics metrics_from_ranks(std::span<const double> ranks) {
  TaskMetrics m;
  m.queries = ranks.size();
  if (ranks.empty()) return m;
  for (double r : ranks) {
    m.mrr += 1.0 / r;
    m.hits1 += r <= 1.0 ? 1.0 : 0.0;
    m.hits3 += r <= 3.0 ? 1.0 : 0.0;
    m.hits5 += r <= 5.0 ? 1.0 : 0.0;
    m.hits10 += r <= 10.0 ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(ranks.size());
  m.mrr /= n;
  m.hits1 /= n;
  m.hits3 /= n;
  m.hits5 /= n;
  m.hits10 /= n;
  return m;
}

TaskMetrics pool_overall(const TaskMetrics& e, const TaskMetrics& r) {
  TaskMetrics o;
  o.queries = e.queries + r.queries;
  if (o.queries == 0) return o;
  const double we = static_cast<double>(e.queries);
  const double wr = static_cast<double>(r.queries);
  const double n = we + wr;
  auto pool = [&](double a, double b) { return (we * a + wr * b) / n; };
  o.mrr = pool(e.mrr, r.mrr);
  o.hits1 = pool(e.hits1, r.hits1);
  o.hits3 = pool(e.hits3, r.hits3);
  o.hits5 = pool(e.hits5, r.hits5);
  o.hits10 = pool(e.hits10, r.hits10);
  return o;
}

MetricsTable evaluate_split(const EmbeddingSpace& es, std::span<const Triple> split,
                            const FilterIndex& filter, Exec exec) {
  if (split.empty()) throw InvalidArgument("cannot evaluate an empty split");
  const auto n = static_cast<std::int64_t>(split.size());
  std::vector<double> head(split.size()), tail(split.size()), rel(split.size());
  auto body = [&](std::int64_t i) {
    const auto& t = split[static_cast<std::size_t>(i)];
    auto idx = static_cast<std::size_t>(i);
    head[idx] = rank_query(es, {t, Slot::Head}, filter, 0, Exec::Serial).filtered_rank;
    tail[idx] = rank_query(es, {t, Slot::Tail}, filter, 0, Exec::Serial).filtered_rank;
    rel[idx] = rank_query(es, {t, Slot::Relation}, filter, 0, Exec::Serial).filtered_rank;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < n; ++i) body(i);
  } else {
    for (std::int64_t i = 0; i < n; ++i) body(i);
  }

  std::vector<double> entity_ranks;
  entity_ranks.reserve(2 * split.size());
  for (std::size_t i = 0; i < split.size(); ++i) {
    entity_ranks.push_back(head[i]);
    entity_ranks.push_back(tail[i]);
  }
  MetricsTable m;
  m.entity = metrics_from_ranks(entity_ranks);
  m.relation = metrics_from_ranks(rel);
  m.overall = pool_overall(m.entity, m.relation);
  return m;
}

std::string format_metrics_tsv(const MetricsTable& m, bool full_precision) {
  std::ostringstream os;
  os << "task\tMRR\tH@1\tH@3\tH@5\tH@10\n";
  auto row = [&](const char* name, const TaskMetrics& t) {
    os << name;
    for (double v : t.values()) {
      if (full_precision) {
        os << '\t' << format_exact(v);
      } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        os << '\t' << buf;
      }
    }
    os << '\n';
  };
  row("entity", m.entity);
  row("relation", m.relation);
  row("overall", m.overall);
  return os.str();
}

std::vector<Candidate> predict_topk(const EmbeddingSpace& es, Slot slot, const Triple& partial,
                                    std::size_t k, const FilterIndex& filter) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  const std::size_t n = candidate_count(es, slot);
  std::vector<double> dist(n);
  score_candidates(es, slot, partial, dist, Exec::Serial);
  std::vector<std::uint8_t> removed(n, 0);
  mark_filtered(filter, slot, partial, removed);
  return survivors_sorted(dist, removed, k);
}

std::string format_prediction_tsv(std::span<const Candidate> preds, const Vocabulary& names) {
  std::ostringstream os;
  os << "rank\tname\tdistance\n";
  for (std::size_t i = 0; i < preds.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", preds[i].distance);
    os << (i + 1) << '\t' << names.name(preds[i].id) << '\t' << buf << '\n';
  }
  return os.str();
}

}  // namespace geokge
