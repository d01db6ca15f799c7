#include "geokge/kernels.hpp"

#include "geokge/train.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace geokge {

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void score_candidates(const EmbeddingSpace& es, Slot slot, const Triple& query,
                      std::span<double> out, Exec exec) {
  const auto n = static_cast<std::int64_t>(out.size());
  auto body = [&](std::int64_t i) {
    const auto c = static_cast<std::uint32_t>(i);
    switch (slot) {
      case Slot::Head: out[c] = triplet_distance(es, c, query.r, query.t).total; break;
      case Slot::Tail: out[c] = triplet_distance(es, query.h, query.r, c).total; break;
      case Slot::Relation: out[c] = triplet_distance(es, query.h, c, query.t).total; break;
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) body(i);
  } else {
    for (std::int64_t i = 0; i < n; ++i) body(i);
  }
}

namespace {

ExampleGrad triplet_example(const EmbeddingSpace& es, const TripletExample& ex, double gamma,
                            double temperature, double scale) {
  const double dpos = triplet_distance(es, ex.positive.h, ex.positive.r, ex.positive.t).total;
  std::vector<double> dneg;
  dneg.reserve(ex.negatives.size());
  for (const auto& n : ex.negatives) dneg.push_back(triplet_distance(es, n.h, n.r, n.t).total);
  ExampleGrad out{0.0, SparseGrad(es.k())};
  if (dneg.empty()) return out;
  NsaLoss l = nsa_loss(dpos, dneg, gamma, temperature);
  out.loss = l.loss;
  accumulate_grad_triplet(es, ex.positive.h, ex.positive.r, ex.positive.t, scale * l.d_positive,
                          out.grad);
  for (std::size_t j = 0; j < ex.negatives.size(); ++j) {
    const auto& n = ex.negatives[j];
    accumulate_grad_triplet(es, n.h, n.r, n.t, scale * l.d_negatives[j], out.grad);
  }
  return out;
}

ExampleGrad alignment_example(const EmbeddingSpace& es, const AlignmentExample& ex, double gamma,
                              double temperature, double scale) {
  const double dpos = alignment_distance(es, ex.r, ex.kind, ex.g).total;
  std::vector<double> dneg;
  dneg.reserve(ex.negatives.size());
  for (auto g : ex.negatives) dneg.push_back(alignment_distance(es, ex.r, ex.kind, g).total);
  ExampleGrad out{0.0, SparseGrad(es.k())};
  if (dneg.empty()) return out;
  NsaLoss l = nsa_loss(dpos, dneg, gamma, temperature);
  out.loss = l.loss;
  accumulate_grad_alignment(es, ex.r, ex.kind, ex.g, scale * l.d_positive, out.grad);
  for (std::size_t j = 0; j < ex.negatives.size(); ++j) {
    accumulate_grad_alignment(es, ex.r, ex.kind, ex.negatives[j], scale * l.d_negatives[j],
                              out.grad);
  }
  return out;
}

template <class Example, class Fn>
std::vector<ExampleGrad> run_examples(std::span<const Example> batch, Exec exec, Fn&& fn) {
  std::vector<ExampleGrad> out(batch.size());
  const auto n = static_cast<std::int64_t>(batch.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(batch[static_cast<std::size_t>(i)]);
  } else {
    for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(batch[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace

std::vector<ExampleGrad> triplet_example_grads(const EmbeddingSpace& es,
                                               std::span<const TripletExample> batch, double gamma,
                                               double temperature, double scale, Exec exec) {
  return run_examples(batch, exec, [&](const TripletExample& ex) {
    return triplet_example(es, ex, gamma, temperature, scale);
  });
}

std::vector<ExampleGrad> alignment_example_grads(const EmbeddingSpace& es,
                                                 std::span<const AlignmentExample> batch,
                                                 double gamma, double temperature, double scale,
                                                 Exec exec) {
  return run_examples(batch, exec, [&](const AlignmentExample& ex) {
    return alignment_example(es, ex, gamma, temperature, scale);
  });
}

}  // namespace geokge
