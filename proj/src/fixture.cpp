#include "fuseprf/fixture.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "fuseprf/corpus_io.hpp"
#include "fuseprf/sparse_index.hpp"
#include "fuseprf/types.hpp"

namespace fuseprf {

namespace {

// mt19937_64 output is fully specified by the standard, so fixtures
// regenerate identically for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.141592653589793 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t below(std::uint64_t bound) { return engine_() % bound; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Round to the 6 decimals the text formats carry, so text, binary, and
// in-memory values agree.
double q6(double v) { return std::round(v * 1e6) / 1e6; }

DenseVector quantize(DenseVector v) {
  for (double& x : v) x = q6(x);
  return v;
}

const char* kBackgroundWords[] = {
    "the",    "report", "notes",  "data",   "study",  "value",  "field", "item",
    "record", "table",  "figure", "source", "draft",  "review", "case",  "series",
    "update", "survey", "detail", "about",  "within", "during", "under", "general",
};
constexpr std::size_t kBackgroundCount = sizeof(kBackgroundWords) / sizeof(char*);

std::string background_text(Rng& rng, std::size_t words) {
  std::string text;
  for (std::size_t i = 0; i < words; ++i) {
    if (!text.empty()) text.push_back(' ');
    text += kBackgroundWords[rng.below(kBackgroundCount)];
  }
  return text;
}

std::string repeat_term(const std::string& term, std::size_t times) {
  std::string out;
  for (std::size_t i = 0; i < times; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += term;
  }
  return out;
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& line : lines) out << line << '\n';
}

struct FixtureData {
  std::size_t dim = 0;
  std::vector<Passage> corpus;
  std::vector<Query> queries;
  std::vector<std::string> qrel_lines;
  std::map<std::string, DenseVector> pvecs;
  std::map<std::string, DenseVector> qvecs;
  std::vector<TermWeightDoc> pweights;
  std::vector<TermWeightDoc> qweights;
};

FixtureData make_tiny() {
  FixtureData f;
  f.dim = 3;
  f.corpus = {
      {"d1", "solar panels convert sunlight into electricity"},
      {"d2", "wind turbines generate renewable electricity from wind"},
      {"d3", "cats and dogs are common household pets"},
      {"d4", "a short guide to feeding your pet cat"},
      {"d5", "electricity grids balance supply and demand"},
      {"d6", "the long history of domestic cats"},
  };
  f.queries = {{"q1", "renewable electricity"}, {"q2", "cat pets"}};
  f.qrel_lines = {
      "q1 0 d1 3", "q1 0 d2 2", "q1 0 d5 1", "q1 0 d3 0",
      "q2 0 d4 3", "q2 0 d6 2", "q2 0 d3 1", "q2 0 d1 0",
  };
  f.pvecs = {
      {"d1", {0.9, 0.0, 0.1}}, {"d2", {0.8, 0.1, 0.0}}, {"d3", {0.1, 0.8, 0.2}},
      {"d4", {0.0, 0.7, 0.1}}, {"d5", {0.6, 0.0, 0.3}}, {"d6", {0.1, 0.9, 0.3}},
  };
  f.qvecs = {{"q1", {1.0, 0.1, 0.2}}, {"q2", {0.1, 1.0, 0.2}}};
  for (const auto& p : f.corpus) {
    TermWeightDoc doc;
    doc.id = p.id;
    for (const auto& term : tokenize(p.text)) doc.weights[term] += 1.0;
    f.pweights.push_back(std::move(doc));
  }
  f.qweights = {
      {"q1", {{"renewable", 1.0}, {"electricity", 1.2}}},
      {"q2", {{"cat", 1.1}, {"pets", 0.9}}},
  };
  return f;
}

FixtureData make_synth(std::uint64_t seed) {
  constexpr std::size_t kQueries = 20;
  constexpr std::size_t kDim = 24;
  Rng rng(seed);
  FixtureData f;
  f.dim = kDim;

  // Orthonormal topic centers via Gram-Schmidt keep queries well separated.
  std::vector<DenseVector> centers;
  for (std::size_t i = 0; i < kQueries; ++i) {
    DenseVector v(kDim);
    for (double& x : v) x = rng.gaussian();
    for (const auto& c : centers) {
      double proj = 0.0;
      for (std::size_t d = 0; d < kDim; ++d) proj += v[d] * c[d];
      for (std::size_t d = 0; d < kDim; ++d) v[d] -= proj * c[d];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    centers.push_back(v);
  }

  auto noisy = [&](const DenseVector& base, double scale, double sigma) {
    DenseVector v(kDim);
    for (std::size_t d = 0; d < kDim; ++d) v[d] = scale * base[d] + sigma * rng.gaussian();
    return v;
  };
  auto random_vec = [&](double sigma) {
    DenseVector v(kDim);
    for (double& x : v) x = sigma * rng.gaussian();
    return v;
  };

  std::size_t doc_counter = 0;
  auto next_doc_id = [&doc_counter]() {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "d%03zu", ++doc_counter);
    return std::string(buf);
  };

  for (std::size_t qi = 1; qi <= kQueries; ++qi) {
    std::string qid = "q" + std::to_string(qi);
    std::string sig_a = "topic" + std::to_string(qi) + "a";
    std::string sig_b = "topic" + std::to_string(qi) + "b";
    std::string alt_x = "alt" + std::to_string(qi) + "x";
    std::string alt_y = "alt" + std::to_string(qi) + "y";

    f.queries.push_back(Query{qid, sig_a + " " + sig_b});
    f.qvecs[qid] = quantize(centers[qi - 1]);
    f.qweights.push_back(TermWeightDoc{
        qid, {{sig_a, q6(1.3 + 0.4 * rng.uniform())}, {sig_b, q6(1.0 + 0.4 * rng.uniform())}}});

    auto add_doc = [&](const std::string& text, const DenseVector& vec, int grade,
                       const std::map<std::string, double>& extra_weights) {
      std::string id = next_doc_id();
      f.corpus.push_back(Passage{id, text});
      f.pvecs[id] = quantize(vec);
      f.qrel_lines.push_back(qid + " 0 " + id + " " + std::to_string(grade));
      TermWeightDoc w;
      w.id = id;
      for (const auto& term : tokenize(text)) w.weights[term] += 1.0;
      for (auto& [term, weight] : w.weights) weight = q6(weight * (0.6 + 0.8 * rng.uniform()));
      for (const auto& [term, weight] : extra_weights) w.weights[term] = weight;
      f.pweights.push_back(std::move(w));
    };

    // Lexically-reachable relevant passages: query terms, unrelated vectors.
    const int lexical_grades[3] = {3, 2, 2};
    for (int j = 0; j < 3; ++j) {
      std::string text = repeat_term(sig_a, 2 + j % 2) + " " + repeat_term(sig_b, 1 + j % 2) +
                         " " + background_text(rng, 8);
      add_doc(text, random_vec(0.25), lexical_grades[j], {});
    }
    // Semantically-reachable relevant passages: no query terms, vectors near
    // the query center. Their learned weights still carry the query terms,
    // the way expansion-based impact models do.
    const int semantic_grades[3] = {3, 2, 2};
    for (int j = 0; j < 3; ++j) {
      std::string text = repeat_term(alt_x, 2) + " " + repeat_term(alt_y, 1) + " " +
                         background_text(rng, 8);
      add_doc(text, noisy(centers[qi - 1], 1.0, 0.12), semantic_grades[j],
              {{sig_a, q6(0.9 + 0.6 * rng.uniform())}, {sig_b, q6(0.7 + 0.6 * rng.uniform())}});
    }
    // Term distractors: one query term, weak or no relevance.
    const int distractor_grades[2] = {1, 0};
    for (int j = 0; j < 2; ++j) {
      std::string text = sig_a + " " + background_text(rng, 12);
      add_doc(text, random_vec(0.25), distractor_grades[j], {});
    }
    // Vector distractors: near-ish vectors, no query terms, not relevant.
    for (int j = 0; j < 2; ++j) {
      add_doc(background_text(rng, 10), noisy(centers[qi - 1], 0.55, 0.12), 0, {});
    }
  }
  return f;
}

}  // namespace

std::size_t generate_fixture(const FixtureSpec& spec) {
  FixtureData data;
  if (spec.kind == "tiny") {
    data = make_tiny();
  } else if (spec.kind == "synth") {
    data = make_synth(spec.seed);
  } else {
    throw std::invalid_argument("unknown fixture kind '" + spec.kind + "'");
  }

  std::filesystem::create_directories(spec.out_dir);

  std::vector<std::string> corpus_lines;
  for (const auto& p : data.corpus) {
    std::string escaped;
    for (char c : p.text) {
      if (c == '"' || c == '\\') escaped.push_back('\\');
      escaped.push_back(c);
    }
    corpus_lines.push_back("{\"id\": \"" + p.id + "\", \"contents\": \"" + escaped + "\"}");
  }
  write_lines(spec.out_dir / "corpus.jsonl", corpus_lines);

  std::vector<std::string> query_lines;
  for (const auto& q : data.queries) query_lines.push_back(q.id + "\t" + q.text);
  write_lines(spec.out_dir / "queries.tsv", query_lines);

  write_lines(spec.out_dir / "qrels.txt", data.qrel_lines);
  write_vectors_text(data.pvecs, spec.out_dir / "pvecs.txt");
  write_vectors_text(data.qvecs, spec.out_dir / "qvecs.txt");
  write_term_weights(data.pweights, spec.out_dir / "pweights.jsonl");
  write_term_weights(data.qweights, spec.out_dir / "qweights.jsonl");
  return data.dim;
}

}  // namespace fuseprf
