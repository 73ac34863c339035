#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <thread>

#include "httplib.h"

#include "fuseprf/server.hpp"

using namespace fuseprf;
using nlohmann::json;

namespace {

std::vector<Passage> service_corpus() {
  return {
      {"d1", "solar panels convert sunlight into electricity"},
      {"d2", "wind turbines generate renewable electricity from wind"},
      {"d3", "cats and dogs are common household pets"},
      {"d4", "a short guide to feeding your pet cat"},
  };
}

std::map<std::string, DenseVector> service_vectors() {
  return {
      {"d1", {0.9, 0.0, 0.1}},
      {"d2", {0.8, 0.1, 0.0}},
      {"d3", {0.1, 0.8, 0.2}},
      {"d4", {0.0, 0.7, 0.1}},
  };
}

PipelineConfig service_defaults() {
  PipelineConfig defaults;
  defaults.stage = InterpolationStage::BOTH;
  defaults.use_prf = true;
  defaults.retrieval_depth = 4;
  defaults.prf.depth_k = 2;
  return defaults;
}

void populate(SearchService& service, bool ready = true) {
  service.set_sparse_index(build_index(service_corpus()));
  service.set_dense_store(DenseStore::from_vectors(3, service_vectors()));
  if (ready) service.mark_ready();
}

}  // namespace

TEST_CASE("requests before readiness get 503") {
  SearchService service(service_defaults());
  populate(service, false);
  auto [status, body] = service.handle_search(R"({"query_text": "cat"})");
  CHECK(status == 503);
  CHECK(service.handle_health().at("status") == "loading");

  service.mark_ready();
  CHECK(service.handle_health().at("status") == "ok");
}

TEST_CASE("validation failures return 400 with the field in the message") {
  SearchService service(service_defaults());
  populate(service);

  auto [s1, b1] = service.handle_search(R"({"query_text": "cat",
      "query_vector": [0.1, 1.0, 0.2], "overrides": {"lambda": 1.5}})");
  CHECK(s1 == 400);
  CHECK(b1.at("error").get<std::string>().find("lambda") != std::string::npos);

  auto [s2, b2] = service.handle_search(R"({"query_text": "cat",
      "query_vector": [0.1, 1.0]})");
  CHECK(s2 == 400);
  CHECK(b2.at("error").get<std::string>().find("query_vector") != std::string::npos);

  auto [s3, b3] = service.handle_search(R"({"query_text": "cat",
      "query_vector": [0.1, 1.0, 0.2], "overrides": {"bogus": 1}})");
  CHECK(s3 == 400);
  CHECK(b3.at("error").get<std::string>().find("bogus") != std::string::npos);

  auto [s4, b4] = service.handle_search("not json");
  CHECK(s4 == 400);

  auto [s5, b5] = service.handle_search(R"({"overrides": {"stage": "pre"}})");
  CHECK(s5 == 400);  // dense retrieval with no vector
}

TEST_CASE("search responses mirror run_query exactly") {
  SearchService service(service_defaults());
  populate(service);
  auto [status, body] = service.handle_search(R"({
      "query_text": "renewable electricity",
      "query_vector": [1.0, 0.1, 0.2],
      "overrides": {"stage": "post", "prf": true, "lambda": 0.5, "prf_depth": 2}})");
  REQUIRE(status == 200);
  REQUIRE(body.contains("results"));
  REQUIRE(body.contains("config"));
  CHECK(body["config"]["stage"] == "post");
  CHECK(body["config"]["depth"] == 4);

  PipelineConfig config = service.defaults();
  config.stage = InterpolationStage::POST;

  auto corpus = service_corpus();
  auto index = build_index(corpus);
  auto store = DenseStore::from_vectors(3, service_vectors());
  PipelineIndexes view;
  view.bm25 = &index;
  view.store = &store;
  DenseVector qvec{1.0, 0.1, 0.2};
  auto expected = run_query(Query{"q", "renewable electricity"}, &qvec, config, view);

  REQUIRE(body["results"].size() == expected.final_list.entries.size());
  for (std::size_t i = 0; i < expected.final_list.entries.size(); ++i) {
    CHECK(body["results"][i]["passage_id"] == expected.final_list.entries[i].passage_id);
    CHECK(body["results"][i]["score"].get<double>() == expected.final_list.entries[i].score);
  }
}

TEST_CASE("per-request query weights drive the impact backend") {
  SearchService service(service_defaults());
  populate(service);

  std::vector<TermWeightDoc> docs;
  for (const auto& p : service_corpus()) {
    TermWeightDoc doc;
    doc.id = p.id;
    for (const auto& t : tokenize(p.text)) doc.weights[t] += 1.0;
    docs.push_back(doc);
  }
  service.set_impact_index(build_impact_index(docs));

  json request{{"query_text", "electricity"},
               {"query_vector", {1.0, 0.1, 0.2}},
               {"query_weights", {{"solar", 10.0}}},
               {"overrides", {{"stage", "both"}, {"prf", false}, {"sparse", "impact"},
                              {"lambda", 1.0}, {"norm", "none"}}}};
  auto [status, body] = service.handle_search(request.dump());
  REQUIRE(status == 200);
  // lambda=1 makes the sparse arm decisive; only d1 mentions solar.
  CHECK(body["results"][0]["passage_id"] == "d1");

  json negative = request;
  negative["query_weights"]["solar"] = -1.0;
  auto [bad_status, bad_body] = service.handle_search(negative.dump());
  CHECK(bad_status == 400);
  CHECK(bad_body.at("error").get<std::string>().find("query_weights") != std::string::npos);
}

TEST_CASE("the HTTP surface serves search and health") {
  SearchService service(service_defaults());
  populate(service);
  httplib::Server server;
  register_routes(server, service);

  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread runner([&server] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);

  json request{{"query_text", "cat pets"},
               {"query_vector", {0.1, 1.0, 0.2}},
               {"overrides", {{"stage", "none"}, {"prf", false}}}};
  auto response = client.Post("/search", request.dump(), "application/json");
  REQUIRE(response);
  CHECK(response->status == 200);
  auto body = json::parse(response->body);
  CHECK(body["results"].size() == 4);
  CHECK(body["config"]["stage"] == "none");

  auto bad = client.Post("/search", R"({"overrides": {"lambda": 2}})", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);

  server.stop();
  runner.join();
}
