#include "fuseprf/fusion.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>

namespace fuseprf {

ScoredList normalize(const ScoredList& list, Normalization mode) {
  if (mode == Normalization::NONE || list.entries.empty()) return list;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& e : list.entries) {
    lo = std::min(lo, e.score);
    hi = std::max(hi, e.score);
  }
  ScoredList out{list.query_id, {}};
  out.entries.reserve(list.entries.size());
  double range = hi - lo;
  for (const auto& e : list.entries) {
    double s = range > 0.0 ? (e.score - lo) / range : 1.0;
    out.entries.push_back(ScoredEntry{e.passage_id, s});
  }
  return out;
}

ScoredList interpolate(const ScoredList& sparse, const ScoredList& dense,
                       const FusionConfig& config) {
  if (config.lambda < 0.0 || config.lambda > 1.0)
    throw std::invalid_argument("lambda must be in [0,1]");
  if (config.output_depth == 0) throw std::invalid_argument("output_depth must be positive");
  if (sparse.query_id != dense.query_id)
    throw std::invalid_argument("cannot fuse lists for different queries ('" + sparse.query_id +
                                "' vs '" + dense.query_id + "')");

  ScoredList sparse_n = normalize(sparse, config.normalization);
  ScoredList dense_n = normalize(dense, config.normalization);

  auto list_min = [](const ScoredList& list) {
    double lo = 0.0;
    for (std::size_t i = 0; i < list.entries.size(); ++i)
      lo = i == 0 ? list.entries[i].score : std::min(lo, list.entries[i].score);
    return lo;  // 0.0 for an empty list
  };
  double sparse_sub = list_min(sparse_n);
  double dense_sub = list_min(dense_n);

  std::map<std::string, std::pair<std::optional<double>, std::optional<double>>> candidates;
  for (const auto& e : sparse_n.entries) candidates[e.passage_id].first = e.score;
  for (const auto& e : dense_n.entries) candidates[e.passage_id].second = e.score;

  std::vector<ScoredEntry> fused;
  fused.reserve(candidates.size());
  for (const auto& [id, scores] : candidates) {
    const auto& [s_sparse, s_dense] = scores;
    if (config.missing_policy == MissingPolicy::SKIP && (!s_sparse || !s_dense)) continue;
    double s = s_sparse.value_or(sparse_sub);
    double d = s_dense.value_or(dense_sub);
    fused.push_back(ScoredEntry{id, config.lambda * s + (1.0 - config.lambda) * d});
  }
  return make_scored_list(sparse.query_id, std::move(fused), config.output_depth);
}

}  // namespace fuseprf
