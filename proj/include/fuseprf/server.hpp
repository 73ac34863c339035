#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "json.hpp"

#include "fuseprf/pipeline.hpp"

namespace httplib {
class Server;
}

namespace fuseprf {

// Read-only search endpoint over immutable indexes. The service owns the
// loaded structures and adds no retrieval logic of its own: a /search
// response must match what the CLI `run` produces for the same inputs.
class SearchService {
 public:
  explicit SearchService(PipelineConfig defaults) : defaults_(std::move(defaults)) {}

  void set_sparse_index(InvertedIndex index) { bm25_ = std::move(index); }
  void set_impact_index(ImpactIndex index) { impact_ = std::move(index); }
  void set_dense_store(DenseStore store) { store_.emplace(std::move(store)); }
  void set_query_term_weights(std::map<std::string, std::map<std::string, double>> weights) {
    query_term_weights_ = std::move(weights);
  }

  // Requests arriving before this flips get 503.
  void mark_ready() { ready_.store(true, std::memory_order_release); }
  bool ready() const { return ready_.load(std::memory_order_acquire); }

  // Returns (http status, response body). Body is a JSON error object on
  // 4xx/5xx, otherwise {"results": [...], "config": {...}}.
  std::pair<int, nlohmann::json> handle_search(const std::string& body) const;

  nlohmann::json handle_health() const;

  const PipelineConfig& defaults() const { return defaults_; }

 private:
  PipelineConfig defaults_;
  std::optional<InvertedIndex> bm25_;
  std::optional<ImpactIndex> impact_;
  std::optional<DenseStore> store_;
  std::optional<std::map<std::string, std::map<std::string, double>>> query_term_weights_;
  std::atomic<bool> ready_{false};
};

// Effective config as echoed in responses (also reused by tests).
nlohmann::json config_to_json(const PipelineConfig& config);

// Applies a request's `overrides` object onto a base config. Throws
// std::invalid_argument naming the offending field.
PipelineConfig apply_overrides(PipelineConfig base, const nlohmann::json& overrides);

// Wires POST /search and GET /healthz; the service must outlive the server.
void register_routes(httplib::Server& server, const SearchService& service);

}  // namespace fuseprf
