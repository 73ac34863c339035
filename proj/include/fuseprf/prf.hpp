#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fuseprf/types.hpp"

namespace fuseprf {

// MEAN keeps beta comparable across feedback depths; SUM kept for ablation.
enum class FeedbackAggregation { MEAN, SUM };

struct PrfConfig {
  double alpha = 0.4;  // weight of the original query vector
  double beta = 0.6;   // weight of the feedback aggregate
  std::size_t depth_k = 3;
  FeedbackAggregation aggregation = FeedbackAggregation::MEAN;
};

// Rocchio update in embedding space, element-wise:
//   q' = alpha * q + beta * aggregate(feedback)
// with aggregate = arithmetic mean by default. Throws on empty feedback or
// any dimension mismatch. No negative-feedback term.
DenseVector rocchio_update(const DenseVector& query, std::span<const DenseVector> feedback,
                           double alpha, double beta,
                           FeedbackAggregation aggregation = FeedbackAggregation::MEAN);

// First min(k, |ranked|) passage ids in rank order. Throws on an empty list;
// feedback over nothing is undefined.
std::vector<std::string> select_feedback(const ScoredList& ranked, std::size_t k);

}  // namespace fuseprf
