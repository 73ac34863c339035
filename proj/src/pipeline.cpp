#include "fuseprf/pipeline.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace fuseprf {

namespace {

const char* stage_name(InterpolationStage stage) {
  switch (stage) {
    case InterpolationStage::NO_INTERP: return "none";
    case InterpolationStage::PRE: return "pre";
    case InterpolationStage::POST: return "post";
    case InterpolationStage::BOTH: return "both";
  }
  return "?";
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::map<std::string, double> tf_weights(const std::string& text) {
  std::map<std::string, double> weights;
  for (auto& term : tokenize(text)) weights[term] += 1.0;
  return weights;
}

ScoredList sparse_search(const Query& query, const PipelineConfig& config,
                         const PipelineIndexes& indexes) {
  if (config.sparse_backend == SparseBackend::BM25) {
    if (!indexes.bm25) throw std::invalid_argument("BM25 backend selected but no sparse index");
    return search_bm25(*indexes.bm25, config.bm25, query, config.retrieval_depth);
  }
  if (!indexes.impact) throw std::invalid_argument("impact backend selected but no impact index");
  const std::map<std::string, double>* weights = nullptr;
  if (indexes.query_term_weights) {
    auto it = indexes.query_term_weights->find(query.id);
    if (it != indexes.query_term_weights->end()) weights = &it->second;
  }
  // Fallback: raw token counts as query weights.
  auto counted = weights ? std::map<std::string, double>{} : tf_weights(query.text);
  ScoredList list = search_impact(*indexes.impact, weights ? *weights : counted,
                                  config.retrieval_depth);
  list.query_id = query.id;
  return list;
}

}  // namespace

void PipelineConfig::validate() const {
  if (fusion.lambda < 0.0 || fusion.lambda > 1.0)
    throw std::invalid_argument("lambda must be in [0,1]");
  if (retrieval_depth == 0) throw std::invalid_argument("retrieval depth must be positive");
  if (prf.depth_k == 0) throw std::invalid_argument("PRF depth must be positive");
  if (use_prf && retrieval_depth < prf.depth_k)
    throw std::invalid_argument("retrieval depth must be at least the PRF depth");
  if (!dense_enabled && (use_prf || stage != InterpolationStage::NO_INTERP))
    throw std::invalid_argument("PRF and interpolation both require dense retrieval");
  if (bm25.k1 < 0.0) throw std::invalid_argument("k1 must be non-negative");
  if (bm25.b < 0.0 || bm25.b > 1.0) throw std::invalid_argument("b must be in [0,1]");
}

PipelineResult run_query(const Query& query, const DenseVector* query_vector,
                         const PipelineConfig& config, const PipelineIndexes& indexes) {
  config.validate();

  PipelineResult result;
  result.final_list.query_id = query.id;
  result.round1_dense.query_id = query.id;
  result.round1_sparse.query_id = query.id;

  const bool needs_sparse = config.stage != InterpolationStage::NO_INTERP || !config.dense_enabled;
  if (needs_sparse) result.round1_sparse = sparse_search(query, config, indexes);

  if (!config.dense_enabled) {
    result.final_list = result.round1_sparse;
    return result;
  }

  if (!indexes.store) throw std::invalid_argument("dense retrieval requires a vector store");
  if (!query_vector)
    throw std::invalid_argument("missing query vector for query '" + query.id + "'");
  result.round1_dense = indexes.store->top_k(*query_vector, config.retrieval_depth);
  result.round1_dense.query_id = query.id;

  FusionConfig fusion_cfg = config.fusion;
  fusion_cfg.output_depth = config.retrieval_depth;

  if (config.stage == InterpolationStage::NO_INTERP && !config.use_prf) {
    result.final_list = result.round1_dense;
    return result;
  }

  if (!config.use_prf) {
    // Interpolation without feedback: a single round-1 fusion is the result.
    result.round1_fused = interpolate(result.round1_sparse, result.round1_dense, fusion_cfg);
    result.final_list = *result.round1_fused;
    return result;
  }

  if (config.stage == InterpolationStage::PRE || config.stage == InterpolationStage::BOTH)
    result.round1_fused = interpolate(result.round1_sparse, result.round1_dense, fusion_cfg);

  // Feedback comes from the list the stage designates: the fused ranking for
  // PRE/BOTH, the plain dense ranking otherwise.
  const ScoredList& feedback_source =
      result.round1_fused ? *result.round1_fused : result.round1_dense;
  auto feedback_ids = select_feedback(feedback_source, config.prf.depth_k);
  auto feedback_vectors = indexes.store->fetch_vectors(feedback_ids);
  result.prf_query = rocchio_update(*query_vector, feedback_vectors, config.prf.alpha,
                                    config.prf.beta, config.prf.aggregation);

  result.round2_dense = indexes.store->top_k(*result.prf_query, config.retrieval_depth);
  result.round2_dense->query_id = query.id;

  switch (config.stage) {
    case InterpolationStage::NO_INTERP:
    case InterpolationStage::PRE:
      result.final_list = *result.round2_dense;
      break;
    case InterpolationStage::POST:
    case InterpolationStage::BOTH:
      result.final_list = interpolate(result.round1_sparse, *result.round2_dense, fusion_cfg);
      break;
  }
  return result;
}

std::string to_string(InterpolationStage stage) { return stage_name(stage); }

std::string to_string(SparseBackend backend) {
  return backend == SparseBackend::BM25 ? "bm25" : "impact";
}

std::string to_string(Normalization mode) {
  return mode == Normalization::MINMAX ? "minmax" : "none";
}

std::string to_string(MissingPolicy policy) {
  return policy == MissingPolicy::MIN_SUBSTITUTE ? "min" : "skip";
}

InterpolationStage parse_stage(const std::string& text) {
  if (text == "none") return InterpolationStage::NO_INTERP;
  if (text == "pre") return InterpolationStage::PRE;
  if (text == "post") return InterpolationStage::POST;
  if (text == "both") return InterpolationStage::BOTH;
  throw std::invalid_argument("unknown stage '" + text + "' (expected none|pre|post|both)");
}

SparseBackend parse_backend(const std::string& text) {
  if (text == "bm25") return SparseBackend::BM25;
  if (text == "impact") return SparseBackend::IMPACT;
  throw std::invalid_argument("unknown sparse backend '" + text + "' (expected bm25|impact)");
}

Normalization parse_normalization(const std::string& text) {
  if (text == "none") return Normalization::NONE;
  if (text == "minmax") return Normalization::MINMAX;
  throw std::invalid_argument("unknown normalization '" + text + "' (expected none|minmax)");
}

MissingPolicy parse_missing_policy(const std::string& text) {
  if (text == "min") return MissingPolicy::MIN_SUBSTITUTE;
  if (text == "skip") return MissingPolicy::SKIP;
  throw std::invalid_argument("unknown missing policy '" + text + "' (expected min|skip)");
}

std::string run_tag(const PipelineConfig& config, const PipelineIndexes& indexes) {
  std::string tag;
  if (config.sparse_backend == SparseBackend::BM25) {
    tag = "bm25";
  } else {
    tag = indexes.query_term_weights ? "impact" : "impact.qtf";
  }
  if (!config.dense_enabled) return tag + "-only-d" + std::to_string(config.retrieval_depth);

  tag += std::string("-") + stage_name(config.stage);
  tag += config.use_prf ? "-prf" : "-noprf";
  if (config.stage != InterpolationStage::NO_INTERP) {
    tag += "-l" + fmt2(config.fusion.lambda);
    tag += config.fusion.normalization == Normalization::MINMAX ? "-nmm" : "-nraw";
    tag += config.fusion.missing_policy == MissingPolicy::MIN_SUBSTITUTE ? "-mmin" : "-mskip";
  }
  if (config.use_prf) {
    tag += "-a" + fmt2(config.prf.alpha) + "-b" + fmt2(config.prf.beta) + "-k" +
           std::to_string(config.prf.depth_k);
  }
  tag += "-d" + std::to_string(config.retrieval_depth);
  return tag;
}

std::vector<RunEntry> run_batch(std::span<const Query> queries,
                                const std::map<std::string, DenseVector>& query_vectors,
                                const PipelineConfig& config, const PipelineIndexes& indexes,
                                unsigned threads, const std::string& tag_override) {
  config.validate();
  const std::string tag = tag_override.empty() ? run_tag(config, indexes) : tag_override;

  if (config.dense_enabled) {
    for (const auto& q : queries)
      if (!query_vectors.count(q.id))
        throw std::invalid_argument("missing query vector for query '" + q.id + "'");
  }

  if (threads == 0) threads = std::thread::hardware_concurrency();
  if (threads == 0) threads = 1;
  threads = std::min<unsigned>(threads, queries.empty() ? 1 : queries.size());

  std::vector<ScoredList> finals(queries.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= queries.size()) break;
      try {
        const DenseVector* vec = nullptr;
        if (config.dense_enabled) vec = &query_vectors.at(queries[i].id);
        finals[i] = run_query(queries[i], vec, config, indexes).final_list;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<RunEntry> entries;
  for (const auto& list : finals) {
    int rank = 1;
    for (const auto& e : list.entries)
      entries.push_back(RunEntry{list.query_id, e.passage_id, rank++, e.score, tag});
  }
  return entries;
}

}  // namespace fuseprf
