#include "fuseprf/server.hpp"

#include <stdexcept>

#include "httplib.h"

namespace fuseprf {

using nlohmann::json;

json config_to_json(const PipelineConfig& config) {
  json out;
  out["stage"] = to_string(config.stage);
  out["prf"] = config.use_prf;
  out["sparse"] = to_string(config.sparse_backend);
  out["sparse_only"] = !config.dense_enabled;
  out["lambda"] = config.fusion.lambda;
  out["norm"] = to_string(config.fusion.normalization);
  out["missing"] = to_string(config.fusion.missing_policy);
  out["alpha"] = config.prf.alpha;
  out["beta"] = config.prf.beta;
  out["prf_depth"] = config.prf.depth_k;
  out["depth"] = config.retrieval_depth;
  out["k1"] = config.bm25.k1;
  out["b"] = config.bm25.b;
  return out;
}

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& what) {
  throw std::invalid_argument(field + ": " + what);
}

double as_number(const json& value, const std::string& field) {
  if (!value.is_number()) bad_field(field, "expected a number");
  return value.get<double>();
}

std::size_t as_count(const json& value, const std::string& field) {
  if (!value.is_number_integer() || value.get<long long>() < 1)
    bad_field(field, "expected a positive integer");
  return value.get<std::size_t>();
}

bool as_bool(const json& value, const std::string& field) {
  if (!value.is_boolean()) bad_field(field, "expected a boolean");
  return value.get<bool>();
}

std::string as_string(const json& value, const std::string& field) {
  if (!value.is_string()) bad_field(field, "expected a string");
  return value.get<std::string>();
}

}  // namespace

PipelineConfig apply_overrides(PipelineConfig base, const json& overrides) {
  if (!overrides.is_object()) throw std::invalid_argument("overrides: expected an object");
  for (const auto& [key, value] : overrides.items()) {
    if (key == "stage") {
      base.stage = parse_stage(as_string(value, key));
    } else if (key == "prf") {
      base.use_prf = as_bool(value, key);
    } else if (key == "sparse") {
      base.sparse_backend = parse_backend(as_string(value, key));
    } else if (key == "sparse_only") {
      base.dense_enabled = !as_bool(value, key);
    } else if (key == "lambda") {
      base.fusion.lambda = as_number(value, key);
    } else if (key == "norm") {
      base.fusion.normalization = parse_normalization(as_string(value, key));
    } else if (key == "missing") {
      base.fusion.missing_policy = parse_missing_policy(as_string(value, key));
    } else if (key == "alpha") {
      base.prf.alpha = as_number(value, key);
    } else if (key == "beta") {
      base.prf.beta = as_number(value, key);
    } else if (key == "prf_depth") {
      base.prf.depth_k = as_count(value, key);
    } else if (key == "depth") {
      base.retrieval_depth = as_count(value, key);
    } else if (key == "k1") {
      base.bm25.k1 = as_number(value, key);
    } else if (key == "b") {
      base.bm25.b = as_number(value, key);
    } else {
      bad_field(key, "unknown override");
    }
  }
  return base;
}

std::pair<int, json> SearchService::handle_search(const std::string& body) const {
  if (!ready()) return {503, json{{"error", "indexes are still loading"}}};

  json request = json::parse(body, nullptr, false);
  if (request.is_discarded() || !request.is_object())
    return {400, json{{"error", "request body must be a JSON object"}}};

  PipelineConfig config = defaults_;
  try {
    if (request.contains("overrides")) config = apply_overrides(config, request["overrides"]);
    config.validate();

    std::string text;
    if (request.contains("query_text")) text = as_string(request["query_text"], "query_text");

    DenseVector vector;
    bool has_vector = false;
    if (request.contains("query_vector")) {
      const json& arr = request["query_vector"];
      if (!arr.is_array()) bad_field("query_vector", "expected an array of numbers");
      for (const auto& v : arr) vector.push_back(as_number(v, "query_vector"));
      has_vector = true;
    }

    // Precomputed term weights for the impact backend enter per request, the
    // same way the vector does; token counts are the fallback.
    std::map<std::string, std::map<std::string, double>> request_weights;
    if (request.contains("query_weights")) {
      const json& obj = request["query_weights"];
      if (!obj.is_object()) bad_field("query_weights", "expected an object of term weights");
      auto& weights = request_weights["q"];
      for (const auto& [term, value] : obj.items()) {
        double w = as_number(value, "query_weights");
        if (w < 0.0) bad_field("query_weights", "negative weight for term '" + term + "'");
        weights[term] = w;
      }
    }
    if (config.dense_enabled) {
      if (!has_vector) bad_field("query_vector", "required for dense retrieval");
      if (!store_) return {503, json{{"error", "dense store not loaded"}}};
      if (vector.size() != store_->dim())
        bad_field("query_vector", "dimension " + std::to_string(vector.size()) +
                                      " does not match store dimension " +
                                      std::to_string(store_->dim()));
    }

    PipelineIndexes indexes;
    if (bm25_) indexes.bm25 = &*bm25_;
    if (impact_) indexes.impact = &*impact_;
    if (store_) indexes.store = &*store_;
    if (!request_weights.empty()) {
      indexes.query_term_weights = &request_weights;
    } else if (query_term_weights_) {
      indexes.query_term_weights = &*query_term_weights_;
    }

    Query query{"q", text};
    PipelineResult result = run_query(query, has_vector ? &vector : nullptr, config, indexes);

    json results = json::array();
    for (const auto& e : result.final_list.entries)
      results.push_back({{"passage_id", e.passage_id}, {"score", e.score}});
    json response;
    response["results"] = std::move(results);
    response["config"] = config_to_json(config);
    return {200, response};
  } catch (const std::invalid_argument& e) {
    return {400, json{{"error", e.what()}}};
  } catch (const std::out_of_range& e) {
    return {400, json{{"error", e.what()}}};
  }
}

json SearchService::handle_health() const {
  return json{{"status", ready() ? "ok" : "loading"}};
}

void register_routes(httplib::Server& server, const SearchService& service) {
  server.Post("/search", [&service](const httplib::Request& req, httplib::Response& res) {
    auto [status, body] = service.handle_search(req.body);
    res.status = status;
    res.set_content(body.dump(), "application/json");
  });
  server.Get("/healthz", [&service](const httplib::Request&, httplib::Response& res) {
    if (!service.ready()) res.status = 503;
    res.set_content(service.handle_health().dump(), "application/json");
  });
}

}  // namespace fuseprf
