#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fuseprf/types.hpp"

namespace fuseprf {

// Lowercases and splits on any non-alphanumeric byte; empty tokens dropped.
// Locale-independent, so the same text always yields the same terms.
std::vector<std::string> tokenize(std::string_view text);

struct Posting {
  std::uint32_t doc = 0;  // ordinal into doc_ids / doc_lengths
  std::uint32_t tf = 0;
};

struct InvertedIndex {
  std::uint64_t doc_count = 0;
  double avg_doc_len = 0.0;
  std::map<std::string, std::vector<Posting>> postings;  // sorted by ordinal
  std::vector<std::uint32_t> doc_lengths;
  std::vector<std::string> doc_ids;
};

struct Bm25Params {
  double k1 = 0.9;
  double b = 0.4;
};

// Builds the index with one posting per (term, doc) pair that has tf > 0.
// Throws on an empty corpus (avg_doc_len would be undefined).
InvertedIndex build_index(std::span<const Passage> corpus);

// Lucene-flavoured BM25 over the unique terms of the query:
//   sum_t idf(t) * tf / (tf + k1 * (1 - b + b * dl/avgdl))
//   idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))
// Terms absent from the doc contribute 0. Throws on an unknown ordinal.
double bm25_score(const InvertedIndex& index, const Bm25Params& params,
                  std::span<const std::string> query_terms, std::uint32_t doc);

// Top-`depth` passages by bm25_score; zero-scoring passages excluded,
// ties broken by ascending passage id.
ScoredList search_bm25(const InvertedIndex& index, const Bm25Params& params, const Query& query,
                       std::size_t depth);

struct ImpactPosting {
  std::uint32_t doc = 0;
  double weight = 0.0;  // >= 0
};

// Inverted structure over precomputed term impact weights; the score of a
// document is the dot product of query and document term-weight maps.
struct ImpactIndex {
  std::map<std::string, std::vector<ImpactPosting>> postings;  // sorted by ordinal
  std::vector<std::string> doc_ids;
};

ImpactIndex build_impact_index(std::span<const TermWeightDoc> docs);

ScoredList search_impact(const ImpactIndex& index,
                         const std::map<std::string, double>& query_weights, std::size_t depth);

// On-disk layout: <dir>/meta.json plus <dir>/postings.bin (versioned binary,
// documented in docs/formats.md). Round-trips exactly.
void save_index(const InvertedIndex& index, const std::filesystem::path& dir);
InvertedIndex load_index(const std::filesystem::path& dir);

void save_impact_index(const ImpactIndex& index, const std::filesystem::path& dir);
ImpactIndex load_impact_index(const std::filesystem::path& dir);

}  // namespace fuseprf
