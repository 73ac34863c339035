#include "fuseprf/corpus_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace fuseprf {

namespace {

using nlohmann::json;

[[noreturn]] void fail_parse(const std::filesystem::path& path, std::size_t line,
                             const std::string& what) {
  throw ParseError(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_input(const std::filesystem::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void chomp(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream iss(line);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

long parse_int(const std::string& tok, const std::filesystem::path& path, std::size_t line,
               const char* field) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    fail_parse(path, line, std::string("expected integer ") + field + ", got '" + tok + "'");
  return value;
}

double parse_real(const std::string& tok, const std::filesystem::path& path, std::size_t line,
                  const char* field) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(value))
    fail_parse(path, line, std::string("expected finite real ") + field + ", got '" + tok + "'");
  return value;
}

}  // namespace

std::string format_score(double score) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", score);
  return buf;
}

std::vector<Passage> load_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<Passage> passages;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    chomp(line);
    if (line.empty()) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object())
      fail_parse(path, lineno, "malformed JSON record");
    if (!record.contains("id") || !record["id"].is_string())
      fail_parse(path, lineno, "missing string field 'id'");
    if (!record.contains("contents") || !record["contents"].is_string())
      fail_parse(path, lineno, "missing string field 'contents'");
    Passage p{record["id"].get<std::string>(), record["contents"].get<std::string>()};
    if (p.id.empty()) fail_parse(path, lineno, "empty passage id");
    if (!seen.insert(p.id).second) fail_parse(path, lineno, "duplicate passage id '" + p.id + "'");
    passages.push_back(std::move(p));
  }
  return passages;
}

std::vector<Query> load_queries(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<Query> queries;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    chomp(line);
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) fail_parse(path, lineno, "expected `id<TAB>text`");
    Query q{line.substr(0, tab), line.substr(tab + 1)};
    if (q.id.empty()) fail_parse(path, lineno, "empty query id");
    if (!seen.insert(q.id).second) fail_parse(path, lineno, "duplicate query id '" + q.id + "'");
    queries.push_back(std::move(q));
  }
  return queries;
}

Qrels load_qrels(const std::filesystem::path& path) {
  auto in = open_input(path);
  Qrels qrels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    chomp(line);
    if (line.empty()) continue;
    auto fields = split_ws(line);
    if (fields.size() != 4) fail_parse(path, lineno, "expected `qid iter docid grade`");
    long grade = parse_int(fields[3], path, lineno, "grade");
    if (grade < 0 || grade > 3)
      fail_parse(path, lineno, "grade " + std::to_string(grade) + " outside 0..3");
    auto& per_query = qrels.judgments[fields[0]];
    auto [it, inserted] = per_query.emplace(fields[2], static_cast<int>(grade));
    (void)it;
    if (!inserted)
      fail_parse(path, lineno, "duplicate judgment for (" + fields[0] + ", " + fields[2] + ")");
  }
  return qrels;
}

std::vector<RunEntry> load_run(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<RunEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    chomp(line);
    if (line.empty()) continue;
    auto fields = split_ws(line);
    if (fields.size() != 6) fail_parse(path, lineno, "expected `qid Q0 docid rank score tag`");
    long rank = parse_int(fields[3], path, lineno, "rank");
    if (rank < 1) fail_parse(path, lineno, "rank must be positive");
    double score = parse_real(fields[4], path, lineno, "score");
    entries.push_back(
        RunEntry{fields[0], fields[2], static_cast<int>(rank), score, fields[5]});
  }

  // Per-query invariants: ranks 1..n without gaps, scores non-increasing,
  // no repeated docid.
  std::unordered_map<std::string, std::vector<const RunEntry*>> by_query;
  for (const auto& e : entries) by_query[e.query_id].push_back(&e);
  for (auto& [qid, group] : by_query) {
    std::sort(group.begin(), group.end(),
              [](const RunEntry* a, const RunEntry* b) { return a->rank < b->rank; });
    std::unordered_set<std::string> docs;
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (group[i]->rank != static_cast<int>(i) + 1)
        throw ParseError(path.string() + ": query " + qid + " has rank gap at " +
                         std::to_string(i + 1));
      if (i > 0 && group[i]->score > group[i - 1]->score)
        throw ParseError(path.string() + ": query " + qid + " scores increase at rank " +
                         std::to_string(group[i]->rank));
      if (!docs.insert(group[i]->passage_id).second)
        throw ParseError(path.string() + ": query " + qid + " repeats docid " +
                         group[i]->passage_id);
    }
  }
  return entries;
}

void write_run(const std::vector<RunEntry>& entries, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& e : entries) {
    out << e.query_id << " Q0 " << e.passage_id << ' ' << e.rank << ' ' << format_score(e.score)
        << ' ' << e.tag << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

constexpr char kVectorMagic[4] = {'F', 'P', 'F', 'V'};
constexpr std::uint32_t kVectorVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool read_raw(std::ifstream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return static_cast<bool>(in);
}

std::map<std::string, DenseVector> load_vectors_binary(const std::filesystem::path& path,
                                                       std::size_t dim) {
  auto in = open_input(path, true);
  char magic[4];
  in.read(magic, 4);
  std::uint32_t version = 0, file_dim = 0;
  std::uint64_t count = 0;
  if (!in || !read_raw(in, version) || !read_raw(in, file_dim) || !read_raw(in, count))
    throw ParseError(path.string() + ": truncated vector file header");
  if (version != kVectorVersion)
    throw ParseError(path.string() + ": unsupported vector file version " +
                     std::to_string(version));
  if (file_dim != dim)
    throw ParseError(path.string() + ": file dimension " + std::to_string(file_dim) +
                     " does not match requested " + std::to_string(dim));
  std::map<std::string, DenseVector> vectors;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint32_t len = 0;
    if (!read_raw(in, len)) throw ParseError(path.string() + ": truncated record");
    std::string id(len, '\0');
    in.read(id.data(), len);
    std::vector<float> values(dim);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(dim * sizeof(float)));
    if (!in) throw ParseError(path.string() + ": truncated record for id '" + id + "'");
    DenseVector v(values.begin(), values.end());
    for (double x : v)
      if (!std::isfinite(x))
        throw ParseError(path.string() + ": non-finite value for id '" + id + "'");
    if (!vectors.emplace(std::move(id), std::move(v)).second)
      throw ParseError(path.string() + ": duplicate vector id in record " + std::to_string(i));
  }
  return vectors;
}

}  // namespace

std::map<std::string, DenseVector> load_vectors(const std::filesystem::path& path,
                                                std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("vector dimension must be positive");
  {
    auto probe = open_input(path, true);
    char magic[4] = {0, 0, 0, 0};
    probe.read(magic, 4);
    if (probe.gcount() == 4 && std::equal(magic, magic + 4, kVectorMagic))
      return load_vectors_binary(path, dim);
  }
  auto in = open_input(path);
  std::map<std::string, DenseVector> vectors;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    chomp(line);
    if (line.empty()) continue;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    const std::string& id = fields[0];
    if (fields.size() != dim + 1)
      fail_parse(path, lineno,
                 "id '" + id + "' has " + std::to_string(fields.size() - 1) + " values, expected " +
                     std::to_string(dim));
    DenseVector v;
    v.reserve(dim);
    for (std::size_t i = 1; i < fields.size(); ++i)
      v.push_back(parse_real(fields[i], path, lineno, "vector component"));
    if (!vectors.emplace(id, std::move(v)).second)
      fail_parse(path, lineno, "duplicate vector id '" + id + "'");
  }
  return vectors;
}

void write_vectors_binary(const std::map<std::string, DenseVector>& vectors, std::size_t dim,
                          const std::filesystem::path& path) {
  auto out = open_output(path, true);
  out.write(kVectorMagic, 4);
  write_raw(out, kVectorVersion);
  write_raw(out, static_cast<std::uint32_t>(dim));
  write_raw(out, static_cast<std::uint64_t>(vectors.size()));
  for (const auto& [id, v] : vectors) {
    if (v.size() != dim)
      throw std::invalid_argument("vector for '" + id + "' has wrong dimension");
    write_raw(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (double x : v) {
      float f = static_cast<float>(x);
      write_raw(out, f);
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_vectors_text(const std::map<std::string, DenseVector>& vectors,
                        const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& [id, v] : vectors) {
    out << id;
    for (double x : v) out << ' ' << format_score(x);
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<TermWeightDoc> load_term_weights(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<TermWeightDoc> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    chomp(line);
    if (line.empty()) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object())
      fail_parse(path, lineno, "malformed JSON record");
    if (!record.contains("id") || !record["id"].is_string())
      fail_parse(path, lineno, "missing string field 'id'");
    if (!record.contains("vector") || !record["vector"].is_object())
      fail_parse(path, lineno, "missing object field 'vector'");
    TermWeightDoc doc;
    doc.id = record["id"].get<std::string>();
    if (doc.id.empty()) fail_parse(path, lineno, "empty id");
    for (const auto& [term, weight] : record["vector"].items()) {
      if (term.empty()) fail_parse(path, lineno, "empty term for id '" + doc.id + "'");
      if (!weight.is_number())
        fail_parse(path, lineno, "non-numeric weight for term '" + term + "'");
      double w = weight.get<double>();
      if (!std::isfinite(w) || w < 0.0)
        fail_parse(path, lineno, "negative or non-finite weight for term '" + term + "'");
      doc.weights[term] = w;
    }
    if (!seen.insert(doc.id).second) fail_parse(path, lineno, "duplicate id '" + doc.id + "'");
    docs.push_back(std::move(doc));
  }
  return docs;
}

void write_term_weights(const std::vector<TermWeightDoc>& docs,
                        const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& doc : docs) {
    json record;
    record["id"] = doc.id;
    record["vector"] = json::object();
    for (const auto& [term, w] : doc.weights) record["vector"][term] = w;
    out << record.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace fuseprf
