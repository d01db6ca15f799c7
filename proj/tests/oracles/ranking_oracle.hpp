#pragma once

// Brute-force filtered rank: scores every candidate with the oracle distance and
// filters against a flat list of known triples.

#include <algorithm>
#include <vector>

#include "distance_oracle.hpp"
#include "geokge/kernels.hpp"
#include "geokge/kg.hpp"

namespace oracle {

inline double filtered_rank(const geokge::EmbeddingSpace& es, const geokge::Triple& target,
                            geokge::Slot slot, const std::vector<geokge::Triple>& known) {
  using geokge::Slot;
  using geokge::Triple;
  const std::size_t n = slot == Slot::Relation ? es.shape.relations : es.shape.entities;
  const double d_target = oracle::triplet_distance(es, target.h, target.r, target.t);
  double better = 0.0;
  double ties = 0.0;
  for (std::uint32_t c = 0; c < n; ++c) {
    Triple cand = target;
    if (slot == Slot::Head) cand.h = c;
    if (slot == Slot::Tail) cand.t = c;
    if (slot == Slot::Relation) cand.r = c;
    if (cand == target) continue;
    if (std::find(known.begin(), known.end(), cand) != known.end()) continue;
    const double d = oracle::triplet_distance(es, cand.h, cand.r, cand.t);
    if (d < d_target) better += 1.0;
    if (d == d_target) ties += 1.0;
  }
  return 1.0 + better + ties / 2.0;
}

}  // namespace oracle
