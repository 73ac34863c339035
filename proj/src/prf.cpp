#include "fuseprf/prf.hpp"

#include <stdexcept>

namespace fuseprf {

DenseVector rocchio_update(const DenseVector& query, std::span<const DenseVector> feedback,
                           double alpha, double beta, FeedbackAggregation aggregation) {
  if (feedback.empty()) throw std::invalid_argument("feedback must be non-empty");
  for (const auto& v : feedback)
    if (v.size() != query.size())
      throw std::invalid_argument("feedback vector dimension " + std::to_string(v.size()) +
                                  " does not match query dimension " +
                                  std::to_string(query.size()));

  double scale = aggregation == FeedbackAggregation::MEAN
                     ? 1.0 / static_cast<double>(feedback.size())
                     : 1.0;
  DenseVector updated(query.size());
  for (std::size_t i = 0; i < query.size(); ++i) {
    double sum = 0.0;
    for (const auto& v : feedback) sum += v[i];
    updated[i] = alpha * query[i] + beta * scale * sum;
  }
  return updated;
}

std::vector<std::string> select_feedback(const ScoredList& ranked, std::size_t k) {
  if (ranked.entries.empty())
    throw std::invalid_argument("cannot select feedback from an empty result list");
  std::size_t n = std::min(k, ranked.entries.size());
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(ranked.entries[i].passage_id);
  return ids;
}

}  // namespace fuseprf
