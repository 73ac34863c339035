#pragma once

#include <cstddef>

#include "fuseprf/types.hpp"

namespace fuseprf {

enum class Normalization { NONE, MINMAX };

// What to do with a passage that appears in only one of the two lists:
// MIN_SUBSTITUTE gives it the other list's post-normalization minimum
// (union semantics), SKIP keeps the intersection only.
enum class MissingPolicy { MIN_SUBSTITUTE, SKIP };

struct FusionConfig {
  double lambda = 0.5;
  Normalization normalization = Normalization::MINMAX;
  MissingPolicy missing_policy = MissingPolicy::MIN_SUBSTITUTE;
  std::size_t output_depth = 1000;
};

// MINMAX maps scores affinely onto [0,1] per query (max -> 1, min -> 0);
// a list whose scores are all equal maps to 1.0. NONE is the identity.
// Entry order is preserved as-is.
ScoredList normalize(const ScoredList& list, Normalization mode);

// Per-passage linear interpolation over the union of both candidate sets:
//   fused(p) = lambda * sparse_norm(p) + (1 - lambda) * dense_norm(p)
// after per-list normalization. Result re-ranked and truncated to
// output_depth. Throws if the lists carry different query ids or lambda
// is outside [0,1].
ScoredList interpolate(const ScoredList& sparse, const ScoredList& dense,
                       const FusionConfig& config);

}  // namespace fuseprf
