#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fuseprf/types.hpp"

namespace fuseprf {

// Binary metrics (MAP, recall) treat grade 1 as not relevant: grades at or
// above the threshold map to 1, everything else to 0.
Qrels binarize(const Qrels& qrels, int threshold = 2);

// Average precision over the full ranked list, divided by the total number
// of relevant documents in the judgments (retrieved or not). Returns 0 when
// there are none; callers exclude such queries from means.
double average_precision(std::span<const std::string> ranked_ids,
                         const std::map<std::string, int>& binary_judgments);

enum class GainFunction { LINEAR, EXPONENTIAL };

// nDCG with gain(g) = g (or 2^g - 1 behind the flag) and log2(rank + 1)
// discount; IDCG ranks all judged documents by grade. Returns 0 when
// IDCG = 0; callers exclude such queries from means.
double ndcg_at(std::span<const std::string> ranked_ids,
               const std::map<std::string, int>& graded_judgments, std::size_t cutoff,
               GainFunction gain = GainFunction::LINEAR);

// |relevant in the top `cutoff`| / |relevant|, over binarized judgments.
double recall_at(std::span<const std::string> ranked_ids,
                 const std::map<std::string, int>& binary_judgments, std::size_t cutoff);

struct MetricReport {
  std::string metric_name;
  std::optional<std::size_t> cutoff;
  // Per-query values for every judged query eligible for the metric; queries
  // with no relevant documents (or zero IDCG) are omitted, matching the TREC
  // convention, because including them as zeros would deflate means.
  std::map<std::string, double> per_query;
  double mean = 0.0;
};

struct MetricSpec {
  std::string name;  // "map", "ndcg", "recall"
  std::optional<std::size_t> cutoff;
};

// Parses "map", "ndcg@10", "recall@1000".
MetricSpec parse_metric(const std::string& text);

MetricReport evaluate_metric(const MetricSpec& spec, const std::vector<RunEntry>& run,
                             const Qrels& qrels, int binarize_threshold = 2,
                             GainFunction gain = GainFunction::LINEAR);

// Ranked ids per query, ordered by the run's rank field (metrics read ranks,
// never scores).
std::map<std::string, std::vector<std::string>> ranked_ids_by_query(
    const std::vector<RunEntry>& run);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  // Zero-variance nonzero-mean differences: t is unbounded, p reported as 0.
  bool degenerate = false;
};

// Two-tailed paired t-test over per-query values aligned by query id.
// Throws if the query sets differ or fewer than two pairs exist.
TTestResult paired_t_test(const std::map<std::string, double>& a,
                          const std::map<std::string, double>& b);

}  // namespace fuseprf
