#include "fuseprf/sparse_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

#include "fuseprf/corpus_io.hpp"

namespace fuseprf {

namespace {

bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char to_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c; }

double idf(std::uint64_t doc_count, std::size_t df) {
  double n = static_cast<double>(doc_count);
  double d = static_cast<double>(df);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double tf_part(double tf, double dl, double avgdl, const Bm25Params& p) {
  double norm = avgdl > 0.0 ? dl / avgdl : 0.0;
  return tf / (tf + p.k1 * (1.0 - p.b + p.b * norm));
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (is_alnum(c)) {
      current.push_back(to_lower(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

InvertedIndex build_index(std::span<const Passage> corpus) {
  if (corpus.empty()) throw std::invalid_argument("cannot index an empty corpus");
  InvertedIndex index;
  index.doc_count = corpus.size();
  index.doc_ids.reserve(corpus.size());
  index.doc_lengths.reserve(corpus.size());

  std::uint64_t total_len = 0;
  for (std::size_t ordinal = 0; ordinal < corpus.size(); ++ordinal) {
    const Passage& p = corpus[ordinal];
    auto terms = tokenize(p.text);
    std::map<std::string, std::uint32_t> freqs;
    for (auto& t : terms) ++freqs[t];
    for (auto& [term, tf] : freqs)
      index.postings[term].push_back(Posting{static_cast<std::uint32_t>(ordinal), tf});
    index.doc_ids.push_back(p.id);
    index.doc_lengths.push_back(static_cast<std::uint32_t>(terms.size()));
    total_len += terms.size();
  }
  index.avg_doc_len = static_cast<double>(total_len) / static_cast<double>(index.doc_count);
  return index;
}

double bm25_score(const InvertedIndex& index, const Bm25Params& params,
                  std::span<const std::string> query_terms, std::uint32_t doc) {
  if (doc >= index.doc_ids.size())
    throw std::out_of_range("unknown document ordinal " + std::to_string(doc));
  std::set<std::string> unique(query_terms.begin(), query_terms.end());
  double dl = index.doc_lengths[doc];
  double score = 0.0;
  for (const auto& term : unique) {
    auto it = index.postings.find(term);
    if (it == index.postings.end()) continue;
    const auto& list = it->second;
    auto pos = std::lower_bound(list.begin(), list.end(), doc,
                                [](const Posting& p, std::uint32_t d) { return p.doc < d; });
    if (pos == list.end() || pos->doc != doc) continue;
    score += idf(index.doc_count, list.size()) *
             tf_part(pos->tf, dl, index.avg_doc_len, params);
  }
  return score;
}

ScoredList search_bm25(const InvertedIndex& index, const Bm25Params& params, const Query& query,
                       std::size_t depth) {
  if (depth == 0) throw std::invalid_argument("depth must be positive");
  std::set<std::string> unique;
  for (auto& t : tokenize(query.text)) unique.insert(std::move(t));

  std::vector<double> scores(index.doc_ids.size(), 0.0);
  for (const auto& term : unique) {
    auto it = index.postings.find(term);
    if (it == index.postings.end()) continue;
    double w = idf(index.doc_count, it->second.size());
    for (const Posting& p : it->second)
      scores[p.doc] += w * tf_part(p.tf, index.doc_lengths[p.doc], index.avg_doc_len, params);
  }

  std::vector<ScoredEntry> entries;
  for (std::size_t d = 0; d < scores.size(); ++d)
    if (scores[d] > 0.0) entries.push_back(ScoredEntry{index.doc_ids[d], scores[d]});
  return make_scored_list(query.id, std::move(entries), depth);
}

ImpactIndex build_impact_index(std::span<const TermWeightDoc> docs) {
  ImpactIndex index;
  index.doc_ids.reserve(docs.size());
  std::set<std::string> seen;
  for (std::size_t ordinal = 0; ordinal < docs.size(); ++ordinal) {
    const TermWeightDoc& doc = docs[ordinal];
    if (!seen.insert(doc.id).second)
      throw std::invalid_argument("duplicate document id '" + doc.id + "'");
    for (const auto& [term, w] : doc.weights) {
      if (w < 0.0) throw std::invalid_argument("negative weight for term '" + term + "'");
      index.postings[term].push_back(ImpactPosting{static_cast<std::uint32_t>(ordinal), w});
    }
    index.doc_ids.push_back(doc.id);
  }
  return index;
}

ScoredList search_impact(const ImpactIndex& index,
                         const std::map<std::string, double>& query_weights, std::size_t depth) {
  if (depth == 0) throw std::invalid_argument("depth must be positive");
  for (const auto& [term, w] : query_weights)
    if (w < 0.0) throw std::invalid_argument("negative query weight for term '" + term + "'");

  std::vector<double> scores(index.doc_ids.size(), 0.0);
  for (const auto& [term, qw] : query_weights) {
    if (qw == 0.0) continue;
    auto it = index.postings.find(term);
    if (it == index.postings.end()) continue;
    for (const ImpactPosting& p : it->second) scores[p.doc] += qw * p.weight;
  }

  std::vector<ScoredEntry> entries;
  for (std::size_t d = 0; d < scores.size(); ++d)
    if (scores[d] > 0.0) entries.push_back(ScoredEntry{index.doc_ids[d], scores[d]});
  return make_scored_list("", std::move(entries), depth);
}

namespace {

constexpr char kIndexMagic[4] = {'F', 'P', 'I', 'X'};
constexpr std::uint32_t kIndexVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::ifstream& in, T& value, const std::filesystem::path& path) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ParseError(path.string() + ": truncated index file");
}

void write_string(std::ofstream& out, const std::string& s) {
  write_raw(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in, const std::filesystem::path& path) {
  std::uint32_t len = 0;
  read_raw(in, len, path);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw ParseError(path.string() + ": truncated index file");
  return s;
}

std::ofstream open_index_output(const std::filesystem::path& dir, const char* kind) {
  std::filesystem::create_directories(dir);
  nlohmann::json meta;
  meta["format_version"] = kIndexVersion;
  meta["kind"] = kind;
  std::ofstream meta_out(dir / "meta.json");
  if (!meta_out) throw IoError("cannot write " + (dir / "meta.json").string());
  meta_out << meta.dump(2) << '\n';

  std::ofstream out(dir / "postings.bin", std::ios::binary);
  if (!out) throw IoError("cannot write " + (dir / "postings.bin").string());
  out.write(kIndexMagic, 4);
  write_raw(out, kIndexVersion);
  return out;
}

std::ifstream open_index_input(const std::filesystem::path& dir, const char* kind) {
  auto meta_path = dir / "meta.json";
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw IoError("cannot open " + meta_path.string());
  auto meta = nlohmann::json::parse(meta_in, nullptr, false);
  if (meta.is_discarded() || meta.value("kind", "") != kind)
    throw ParseError(meta_path.string() + ": not a " + std::string(kind) + " index");
  if (meta.value("format_version", 0u) != kIndexVersion)
    throw ParseError(meta_path.string() + ": unsupported format version");

  auto bin_path = dir / "postings.bin";
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + bin_path.string());
  char magic[4];
  in.read(magic, 4);
  std::uint32_t version = 0;
  read_raw(in, version, bin_path);
  if (!in || !std::equal(magic, magic + 4, kIndexMagic) || version != kIndexVersion)
    throw ParseError(bin_path.string() + ": bad index header");
  return in;
}

}  // namespace

void save_index(const InvertedIndex& index, const std::filesystem::path& dir) {
  auto out = open_index_output(dir, "bm25");
  write_raw(out, index.doc_count);
  write_raw(out, index.avg_doc_len);
  write_raw(out, static_cast<std::uint64_t>(index.doc_ids.size()));
  for (std::size_t i = 0; i < index.doc_ids.size(); ++i) {
    write_string(out, index.doc_ids[i]);
    write_raw(out, index.doc_lengths[i]);
  }
  write_raw(out, static_cast<std::uint64_t>(index.postings.size()));
  for (const auto& [term, list] : index.postings) {
    write_string(out, term);
    write_raw(out, static_cast<std::uint64_t>(list.size()));
    for (const Posting& p : list) {
      write_raw(out, p.doc);
      write_raw(out, p.tf);
    }
  }
  if (!out) throw IoError("failed writing index to " + dir.string());
}

InvertedIndex load_index(const std::filesystem::path& dir) {
  auto path = dir / "postings.bin";
  auto in = open_index_input(dir, "bm25");
  InvertedIndex index;
  read_raw(in, index.doc_count, path);
  read_raw(in, index.avg_doc_len, path);
  std::uint64_t docs = 0;
  read_raw(in, docs, path);
  index.doc_ids.reserve(docs);
  index.doc_lengths.reserve(docs);
  for (std::uint64_t i = 0; i < docs; ++i) {
    index.doc_ids.push_back(read_string(in, path));
    std::uint32_t len = 0;
    read_raw(in, len, path);
    index.doc_lengths.push_back(len);
  }
  std::uint64_t terms = 0;
  read_raw(in, terms, path);
  for (std::uint64_t t = 0; t < terms; ++t) {
    std::string term = read_string(in, path);
    std::uint64_t n = 0;
    read_raw(in, n, path);
    std::vector<Posting> list(n);
    for (auto& p : list) {
      read_raw(in, p.doc, path);
      read_raw(in, p.tf, path);
    }
    index.postings.emplace(std::move(term), std::move(list));
  }
  return index;
}

void save_impact_index(const ImpactIndex& index, const std::filesystem::path& dir) {
  auto out = open_index_output(dir, "impact");
  write_raw(out, static_cast<std::uint64_t>(index.doc_ids.size()));
  for (const auto& id : index.doc_ids) write_string(out, id);
  write_raw(out, static_cast<std::uint64_t>(index.postings.size()));
  for (const auto& [term, list] : index.postings) {
    write_string(out, term);
    write_raw(out, static_cast<std::uint64_t>(list.size()));
    for (const ImpactPosting& p : list) {
      write_raw(out, p.doc);
      write_raw(out, p.weight);
    }
  }
  if (!out) throw IoError("failed writing index to " + dir.string());
}

ImpactIndex load_impact_index(const std::filesystem::path& dir) {
  auto path = dir / "postings.bin";
  auto in = open_index_input(dir, "impact");
  ImpactIndex index;
  std::uint64_t docs = 0;
  read_raw(in, docs, path);
  index.doc_ids.reserve(docs);
  for (std::uint64_t i = 0; i < docs; ++i) index.doc_ids.push_back(read_string(in, path));
  std::uint64_t terms = 0;
  read_raw(in, terms, path);
  for (std::uint64_t t = 0; t < terms; ++t) {
    std::string term = read_string(in, path);
    std::uint64_t n = 0;
    read_raw(in, n, path);
    std::vector<ImpactPosting> list(n);
    for (auto& p : list) {
      read_raw(in, p.doc, path);
      read_raw(in, p.weight, path);
    }
    index.postings.emplace(std::move(term), std::move(list));
  }
  return index;
}

}  // namespace fuseprf
