#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fuseprf/types.hpp"

namespace fuseprf {

// Raised for any malformed input file; message carries path and line number.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON-lines, one object per line with string fields `id` and `contents`.
std::vector<Passage> load_corpus(const std::filesystem::path& path);

// TSV, `id<TAB>text`, one query per line.
std::vector<Query> load_queries(const std::filesystem::path& path);

// TREC qrels, whitespace-separated `qid iter docid grade`; grades must be 0..3.
Qrels load_qrels(const std::filesystem::path& path);

// TREC run lines `qid Q0 docid rank score tag`. Validates per-query rank
// contiguity (1..n), non-increasing scores, and unique docids.
std::vector<RunEntry> load_run(const std::filesystem::path& path);

// Writes entries as `qid Q0 docid rank score tag`, score with 6 decimals.
// Round-trips through load_run up to that rounding.
void write_run(const std::vector<RunEntry>& entries, const std::filesystem::path& path);

// Dense vectors keyed by id. Text format: `id v1 ... vd` per line. A binary
// variant (magic "FPFV", little-endian) is detected by sniffing the header.
std::map<std::string, DenseVector> load_vectors(const std::filesystem::path& path,
                                                std::size_t dim);

// Binary vector file: header `FPFV`, u32 version, u32 dim, u64 count, then
// per record u32 id length, id bytes, dim little-endian f32 values.
void write_vectors_binary(const std::map<std::string, DenseVector>& vectors, std::size_t dim,
                          const std::filesystem::path& path);

void write_vectors_text(const std::map<std::string, DenseVector>& vectors,
                        const std::filesystem::path& path);

// JSON-lines, one object per line with `id` (string) and `vector`
// (object of term -> non-negative weight).
std::vector<TermWeightDoc> load_term_weights(const std::filesystem::path& path);

void write_term_weights(const std::vector<TermWeightDoc>& docs,
                        const std::filesystem::path& path);

// Fixed-format score rendering shared by run files and reports ("%.6f").
std::string format_score(double score);

}  // namespace fuseprf
