#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace fuseprf {

// Desk-scale corpora for tests and demos. `tiny` is a handcrafted
// 6-passage/2-query set with dim-3 vectors; `synth` is a seeded 200-passage/
// 20-query set whose sparse and dense signals are complementary: for each
// query half the relevant passages carry its terms, the other half only sit
// near its vector, so neither retriever alone can reach them all.
struct FixtureSpec {
  std::string kind = "synth";  // "tiny" or "synth"
  std::uint64_t seed = 42;     // ignored by "tiny"
  std::filesystem::path out_dir;
};

// Writes corpus.jsonl, queries.tsv, qrels.txt, pvecs.txt, qvecs.txt,
// pweights.jsonl, qweights.jsonl into out_dir. Returns the vector dimension.
std::size_t generate_fixture(const FixtureSpec& spec);

}  // namespace fuseprf
