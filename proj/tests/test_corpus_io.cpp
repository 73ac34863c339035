#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>

#include "fuseprf/corpus_io.hpp"

using namespace fuseprf;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / ("fuseprf_io_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const std::string& name, const std::string& contents) {
  auto path = temp_dir() / name;
  std::ofstream out(path);
  out << contents;
  return path;
}

}  // namespace

TEST_CASE("load_corpus parses JSON lines in order") {
  auto path = write_file("c1.jsonl",
                         "{\"id\": \"d1\", \"contents\": \"cat\"}\n"
                         "{\"id\": \"d2\", \"contents\": \"dog\"}\n");
  auto corpus = load_corpus(path);
  REQUIRE(corpus.size() == 2);
  CHECK(corpus[0].id == "d1");
  CHECK(corpus[0].text == "cat");
  CHECK(corpus[1].id == "d2");
  CHECK(corpus[1].text == "dog");
}

TEST_CASE("load_corpus empty file gives empty corpus") {
  auto path = write_file("c2.jsonl", "");
  CHECK(load_corpus(path).empty());
}

TEST_CASE("load_corpus rejects duplicates naming the id") {
  auto path = write_file("c3.jsonl",
                         "{\"id\": \"d1\", \"contents\": \"a\"}\n"
                         "{\"id\": \"d1\", \"contents\": \"b\"}\n");
  CHECK_THROWS_WITH_AS(load_corpus(path), doctest::Contains("d1"), ParseError);
}

TEST_CASE("load_corpus names the line of a malformed record") {
  auto path = write_file("c4.jsonl",
                         "{\"id\": \"d1\", \"contents\": \"a\"}\n"
                         "not json\n");
  CHECK_THROWS_WITH_AS(load_corpus(path), doctest::Contains(":2"), ParseError);
}

TEST_CASE("load_qrels parses grades and ignores the iteration field") {
  auto path = write_file("q1.txt", "q1 0 d1 2\nq1 0 d2 0\n");
  auto qrels = load_qrels(path);
  CHECK(qrels.judgments.at("q1").at("d1") == 2);
  CHECK(qrels.judgments.at("q1").at("d2") == 0);
}

TEST_CASE("load_qrels rejects out-of-range and non-integer grades") {
  CHECK_THROWS_AS(load_qrels(write_file("q2.txt", "q1 0 d1 5\n")), ParseError);
  CHECK_THROWS_AS(load_qrels(write_file("q3.txt", "q1 0 d1 high\n")), ParseError);
  CHECK_THROWS_AS(load_qrels(write_file("q4.txt", "q1 0 d1 -1\n")), ParseError);
}

TEST_CASE("load_qrels rejects duplicate judgments") {
  CHECK_THROWS_AS(load_qrels(write_file("q5.txt", "q1 0 d1 2\nq1 0 d1 1\n")), ParseError);
}

TEST_CASE("write_run renders the TREC line format") {
  auto path = temp_dir() / "r1.txt";
  write_run({RunEntry{"q1", "d1", 1, 0.5, "fuseprf"}}, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "q1 Q0 d1 1 0.500000 fuseprf");
}

TEST_CASE("write_run of nothing writes an empty file") {
  auto path = temp_dir() / "r2.txt";
  write_run({}, path);
  CHECK(fs::file_size(path) == 0);
}

TEST_CASE("run files round-trip modulo 6-decimal score rounding") {
  std::mt19937_64 rng(7);
  std::vector<RunEntry> entries;
  for (int q = 0; q < 5; ++q) {
    double score = 100.0;
    for (int r = 1; r <= 50; ++r) {
      score -= static_cast<double>(rng() % 1000) / 999.0;
      entries.push_back(
          RunEntry{"q" + std::to_string(q), "d" + std::to_string(r), r, score, "tag"});
    }
  }
  auto path = temp_dir() / "r3.txt";
  write_run(entries, path);
  auto loaded = load_run(path);
  REQUIRE(loaded.size() == entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CHECK(loaded[i].query_id == entries[i].query_id);
    CHECK(loaded[i].passage_id == entries[i].passage_id);
    CHECK(loaded[i].rank == entries[i].rank);
    CHECK(loaded[i].tag == entries[i].tag);
    CHECK(loaded[i].score == doctest::Approx(entries[i].score).epsilon(1e-6));
  }
}

TEST_CASE("load_run rejects rank gaps, rising scores, and repeated docids") {
  CHECK_THROWS_AS(load_run(write_file("r4.txt", "q1 Q0 d1 1 2.0 t\nq1 Q0 d2 3 1.0 t\n")),
                  ParseError);
  CHECK_THROWS_AS(load_run(write_file("r5.txt", "q1 Q0 d1 1 1.0 t\nq1 Q0 d2 2 2.0 t\n")),
                  ParseError);
  CHECK_THROWS_AS(load_run(write_file("r6.txt", "q1 Q0 d1 1 2.0 t\nq1 Q0 d1 2 1.0 t\n")),
                  ParseError);
}

TEST_CASE("load_vectors text format") {
  auto path = write_file("v1.txt", "d1 1.0 0.0 0.5\n");
  auto vectors = load_vectors(path, 3);
  REQUIRE(vectors.count("d1") == 1);
  CHECK(vectors["d1"] == DenseVector{1.0, 0.0, 0.5});
}

TEST_CASE("load_vectors rejects wrong arity naming the id") {
  auto path = write_file("v2.txt", "d1 1.0 0.0\n");
  CHECK_THROWS_WITH_AS(load_vectors(path, 3), doctest::Contains("d1"), ParseError);
}

TEST_CASE("load_vectors rejects duplicate ids") {
  auto path = write_file("v3.txt", "d1 1 2 3\nd1 4 5 6\n");
  CHECK_THROWS_AS(load_vectors(path, 3), ParseError);
}

TEST_CASE("generated vector files round-trip through text and binary") {
  std::mt19937_64 rng(11);
  std::map<std::string, DenseVector> vectors;
  for (int i = 0; i < 1000; ++i) {
    DenseVector v;
    for (int d = 0; d < 3; ++d)
      v.push_back(static_cast<double>(rng() % 20001) / 10000.0 - 1.0);  // 4 decimals
    vectors["d" + std::to_string(i)] = v;
  }

  auto text_path = temp_dir() / "v4.txt";
  write_vectors_text(vectors, text_path);
  auto from_text = load_vectors(text_path, 3);
  REQUIRE(from_text.size() == 1000);
  for (const auto& [id, v] : from_text) {
    REQUIRE(v.size() == 3);
    for (std::size_t d = 0; d < 3; ++d) CHECK(v[d] == doctest::Approx(vectors[id][d]).epsilon(1e-9));
  }

  auto bin_path = temp_dir() / "v4.bin";
  write_vectors_binary(vectors, 3, bin_path);
  auto from_bin = load_vectors(bin_path, 3);
  REQUIRE(from_bin.size() == 1000);
  for (const auto& [id, v] : from_bin)
    for (std::size_t d = 0; d < 3; ++d)
      CHECK(v[d] == doctest::Approx(vectors[id][d]).epsilon(1e-6));
}

TEST_CASE("binary vector loader validates the declared dimension") {
  std::map<std::string, DenseVector> vectors{{"d1", {1.0, 2.0, 3.0}}};
  auto path = temp_dir() / "v5.bin";
  write_vectors_binary(vectors, 3, path);
  CHECK_THROWS_AS(load_vectors(path, 4), ParseError);
}

TEST_CASE("load_queries reads TSV and rejects missing tabs") {
  auto path = write_file("qs1.tsv", "q1\twhat is bm25\nq2\tdense retrieval\n");
  auto queries = load_queries(path);
  REQUIRE(queries.size() == 2);
  CHECK(queries[0].id == "q1");
  CHECK(queries[1].text == "dense retrieval");
  CHECK_THROWS_AS(load_queries(write_file("qs2.tsv", "q1 no tab here\n")), ParseError);
}

TEST_CASE("load_term_weights parses records and rejects negatives") {
  auto path = write_file("w1.jsonl", "{\"id\": \"d1\", \"vector\": {\"cat\": 2.5, \"dog\": 0}}\n");
  auto docs = load_term_weights(path);
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].weights.at("cat") == 2.5);
  CHECK(docs[0].weights.at("dog") == 0.0);

  CHECK_THROWS_AS(
      load_term_weights(write_file("w2.jsonl", "{\"id\": \"d1\", \"vector\": {\"cat\": -1}}\n")),
      ParseError);
}

TEST_CASE("term weight files round-trip") {
  std::vector<TermWeightDoc> docs{{"d1", {{"cat", 1.25}, {"dog", 0.5}}},
                                  {"d2", {{"fish", 3.0}}}};
  auto path = temp_dir() / "w3.jsonl";
  write_term_weights(docs, path);
  auto loaded = load_term_weights(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].weights == docs[0].weights);
  CHECK(loaded[1].weights == docs[1].weights);
}

TEST_CASE("loaders raise on missing files") {
  CHECK_THROWS_AS(load_corpus("/nonexistent/nope.jsonl"), IoError);
  CHECK_THROWS_AS(load_qrels("/nonexistent/nope.txt"), IoError);
}
