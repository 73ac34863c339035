#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fuseprf/dense_store.hpp"
#include "fuseprf/fusion.hpp"
#include "fuseprf/prf.hpp"
#include "fuseprf/sparse_index.hpp"
#include "fuseprf/types.hpp"

namespace fuseprf {

// Where score interpolation happens relative to the PRF rounds. With
// use_prf=false, PRE/POST/BOTH all collapse to a single round-1
// interpolation (the interpolation-without-feedback baseline).
enum class InterpolationStage { NO_INTERP, PRE, POST, BOTH };

enum class SparseBackend { BM25, IMPACT };

struct PipelineConfig {
  InterpolationStage stage = InterpolationStage::NO_INTERP;
  bool use_prf = false;
  bool dense_enabled = true;
  FusionConfig fusion;
  PrfConfig prf;
  Bm25Params bm25;
  std::size_t retrieval_depth = 1000;
  SparseBackend sparse_backend = SparseBackend::BM25;

  // Throws std::invalid_argument on any violated invariant. Called by
  // run_query before any retrieval.
  void validate() const;
};

// Full per-query trace. Which optional fields are populated is a function of
// the config alone:
//   round1_sparse  non-empty iff the stage fuses or dense retrieval is off
//   round1_fused   present iff a round-1 interpolation happened
//   prf_query, round2_dense  present iff use_prf
struct PipelineResult {
  ScoredList final_list;
  ScoredList round1_dense;
  ScoredList round1_sparse;
  std::optional<ScoredList> round1_fused;
  std::optional<DenseVector> prf_query;
  std::optional<ScoredList> round2_dense;
};

struct PipelineIndexes {
  const InvertedIndex* bm25 = nullptr;
  const ImpactIndex* impact = nullptr;
  const DenseStore* store = nullptr;
  // Precomputed query term weights for the IMPACT backend; when a query is
  // missing here its token counts are used instead (reflected in the tag).
  const std::map<std::string, std::map<std::string, double>>* query_term_weights = nullptr;
};

// Executes one query through the configured flow. `query_vector` may be null
// only when the config needs no dense retrieval. All retrievals run at
// retrieval_depth; fusion output depth is forced to retrieval_depth too.
PipelineResult run_query(const Query& query, const DenseVector* query_vector,
                         const PipelineConfig& config, const PipelineIndexes& indexes);

// Compact single-token description of the effective configuration, used as
// the run tag.
std::string run_tag(const PipelineConfig& config, const PipelineIndexes& indexes);

std::string to_string(InterpolationStage stage);
std::string to_string(SparseBackend backend);
std::string to_string(Normalization mode);
std::string to_string(MissingPolicy policy);
InterpolationStage parse_stage(const std::string& text);
SparseBackend parse_backend(const std::string& text);
Normalization parse_normalization(const std::string& text);
MissingPolicy parse_missing_policy(const std::string& text);

// Batch over all queries, parallel up to `threads`, results emitted in input
// query order regardless of scheduling. Ranks are 1..n per query.
std::vector<RunEntry> run_batch(std::span<const Query> queries,
                                const std::map<std::string, DenseVector>& query_vectors,
                                const PipelineConfig& config, const PipelineIndexes& indexes,
                                unsigned threads = 0, const std::string& tag_override = "");

}  // namespace fuseprf
