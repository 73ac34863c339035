#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace fuseprf {

// A corpus text unit. Text may be empty when the passage exists only as
// precomputed term weights (expanded collections never ship raw text).
struct Passage {
  std::string id;
  std::string text;
};

struct Query {
  std::string id;
  std::string text;
};

// Graded relevance judgments, query id -> passage id -> grade in {0,1,2,3}.
struct Qrels {
  std::map<std::string, std::map<std::string, int>> judgments;
};

// One line of a TREC run file: `qid Q0 docid rank score tag`.
struct RunEntry {
  std::string query_id;
  std::string passage_id;
  int rank = 0;
  double score = 0.0;
  std::string tag;
};

// Precomputed term weights for one passage (or one query).
struct TermWeightDoc {
  std::string id;
  std::map<std::string, double> weights;
};

using DenseVector = std::vector<double>;

struct ScoredEntry {
  std::string passage_id;
  double score = 0.0;

  bool operator==(const ScoredEntry&) const = default;
};

// Ranked list for one query. Scores non-increasing, passage ids unique,
// ties broken by ascending passage id so every ranking is a total order.
struct ScoredList {
  std::string query_id;
  std::vector<ScoredEntry> entries;
};

// Sorts by descending score, ascending id on ties.
void rank_entries(std::vector<ScoredEntry>& entries);

// rank_entries + truncate to depth.
ScoredList make_scored_list(std::string query_id, std::vector<ScoredEntry> entries,
                            std::size_t depth);

// Checks ScoredList invariants (ordering, tie-break, unique ids).
bool is_well_ranked(const ScoredList& list);

}  // namespace fuseprf
