#pragma once

// Data-parallel inner loops. Each kernel has a serial reference path and an
// OpenMP path selected by Exec; results are bit-identical between the two.

#include <cstdint>
#include <span>
#include <vector>

#include "geokge/exec.hpp"
#include "geokge/features.hpp"
#include "geokge/kg.hpp"
#include "geokge/model.hpp"

namespace geokge {

enum class Slot : std::uint8_t { Head, Tail, Relation };

/// Triplet distance of every candidate for the open slot of `query`; `out` has one
/// entry per entity (Head/Tail) or relation (Relation).
void score_candidates(const EmbeddingSpace& es, Slot slot, const Triple& query,
                      std::span<double> out, Exec exec);

struct TripletExample {
  Triple positive;
  std::vector<Triple> negatives;
};

struct AlignmentExample {
  RelationId r = 0;
  FeatureKind kind = FeatureKind::Topo;
  std::uint32_t g = 0;
  std::vector<std::uint32_t> negatives;
};

struct ExampleGrad {
  double loss = 0.0;
  SparseGrad grad;
};

/// Self-adversarial loss and its gradient (scaled by `scale`) for each example.
std::vector<ExampleGrad> triplet_example_grads(const EmbeddingSpace& es,
                                               std::span<const TripletExample> batch, double gamma,
                                               double temperature, double scale, Exec exec);
std::vector<ExampleGrad> alignment_example_grads(const EmbeddingSpace& es,
                                                 std::span<const AlignmentExample> batch,
                                                 double gamma, double temperature, double scale,
                                                 Exec exec);

}  // namespace geokge
