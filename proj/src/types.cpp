#include "fuseprf/types.hpp"

#include <algorithm>
#include <unordered_set>

namespace fuseprf {

void rank_entries(std::vector<ScoredEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const ScoredEntry& a, const ScoredEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.passage_id < b.passage_id;
  });
}

ScoredList make_scored_list(std::string query_id, std::vector<ScoredEntry> entries,
                            std::size_t depth) {
  rank_entries(entries);
  if (entries.size() > depth) entries.resize(depth);
  return ScoredList{std::move(query_id), std::move(entries)};
}

bool is_well_ranked(const ScoredList& list) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < list.entries.size(); ++i) {
    if (!seen.insert(list.entries[i].passage_id).second) return false;
    if (i == 0) continue;
    const auto& prev = list.entries[i - 1];
    const auto& cur = list.entries[i];
    if (cur.score > prev.score) return false;
    if (cur.score == prev.score && prev.passage_id > cur.passage_id) return false;
  }
  return true;
}

}  // namespace fuseprf
