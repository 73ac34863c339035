#include "fuseprf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace fuseprf {

Qrels binarize(const Qrels& qrels, int threshold) {
  Qrels out;
  for (const auto& [qid, docs] : qrels.judgments) {
    auto& target = out.judgments[qid];
    for (const auto& [docid, grade] : docs) target[docid] = grade >= threshold ? 1 : 0;
  }
  return out;
}

double average_precision(std::span<const std::string> ranked_ids,
                         const std::map<std::string, int>& binary_judgments) {
  std::size_t total_relevant = 0;
  for (const auto& [docid, rel] : binary_judgments)
    if (rel > 0) ++total_relevant;
  if (total_relevant == 0) return 0.0;

  double sum = 0.0;
  std::size_t relevant_seen = 0;
  for (std::size_t i = 0; i < ranked_ids.size(); ++i) {
    auto it = binary_judgments.find(ranked_ids[i]);
    if (it != binary_judgments.end() && it->second > 0) {
      ++relevant_seen;
      sum += static_cast<double>(relevant_seen) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(total_relevant);
}

namespace {

double gain_of(int grade, GainFunction gain) {
  if (gain == GainFunction::EXPONENTIAL) return std::exp2(static_cast<double>(grade)) - 1.0;
  return static_cast<double>(grade);
}

double discount(std::size_t rank) {  // rank is 1-based
  return std::log2(static_cast<double>(rank) + 1.0);
}

}  // namespace

double ndcg_at(std::span<const std::string> ranked_ids,
               const std::map<std::string, int>& graded_judgments, std::size_t cutoff,
               GainFunction gain) {
  if (cutoff == 0) throw std::invalid_argument("cutoff must be positive");

  std::vector<int> grades;
  grades.reserve(graded_judgments.size());
  for (const auto& [docid, grade] : graded_judgments) grades.push_back(grade);
  std::sort(grades.begin(), grades.end(), std::greater<int>());

  double ideal = 0.0;
  for (std::size_t i = 0; i < grades.size() && i < cutoff; ++i)
    ideal += gain_of(grades[i], gain) / discount(i + 1);
  if (ideal == 0.0) return 0.0;

  double dcg = 0.0;
  for (std::size_t i = 0; i < ranked_ids.size() && i < cutoff; ++i) {
    auto it = graded_judgments.find(ranked_ids[i]);
    if (it != graded_judgments.end()) dcg += gain_of(it->second, gain) / discount(i + 1);
  }
  return dcg / ideal;
}

double recall_at(std::span<const std::string> ranked_ids,
                 const std::map<std::string, int>& binary_judgments, std::size_t cutoff) {
  if (cutoff == 0) throw std::invalid_argument("cutoff must be positive");
  std::size_t total_relevant = 0;
  for (const auto& [docid, rel] : binary_judgments)
    if (rel > 0) ++total_relevant;
  if (total_relevant == 0) return 0.0;

  std::size_t found = 0;
  for (std::size_t i = 0; i < ranked_ids.size() && i < cutoff; ++i) {
    auto it = binary_judgments.find(ranked_ids[i]);
    if (it != binary_judgments.end() && it->second > 0) ++found;
  }
  return static_cast<double>(found) / static_cast<double>(total_relevant);
}

MetricSpec parse_metric(const std::string& text) {
  auto at = text.find('@');
  std::string name = text.substr(0, at);
  if (name != "map" && name != "ndcg" && name != "recall")
    throw std::invalid_argument("unknown metric '" + text + "'");
  MetricSpec spec{name, std::nullopt};
  if (at != std::string::npos) {
    std::size_t cutoff = 0;
    try {
      cutoff = std::stoul(text.substr(at + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad cutoff in metric '" + text + "'");
    }
    if (cutoff == 0) throw std::invalid_argument("cutoff must be positive in '" + text + "'");
    spec.cutoff = cutoff;
  } else if (name != "map") {
    // Conventional defaults when the cutoff is omitted.
    spec.cutoff = name == "ndcg" ? 10 : 1000;
  }
  return spec;
}

std::map<std::string, std::vector<std::string>> ranked_ids_by_query(
    const std::vector<RunEntry>& run) {
  std::map<std::string, std::vector<const RunEntry*>> grouped;
  for (const auto& e : run) grouped[e.query_id].push_back(&e);
  std::map<std::string, std::vector<std::string>> out;
  for (auto& [qid, entries] : grouped) {
    std::sort(entries.begin(), entries.end(),
              [](const RunEntry* a, const RunEntry* b) { return a->rank < b->rank; });
    auto& ids = out[qid];
    ids.reserve(entries.size());
    for (const auto* e : entries) ids.push_back(e->passage_id);
  }
  return out;
}

MetricReport evaluate_metric(const MetricSpec& spec, const std::vector<RunEntry>& run,
                             const Qrels& qrels, int binarize_threshold, GainFunction gain) {
  MetricReport report;
  report.metric_name = spec.name;
  report.cutoff = spec.cutoff;

  auto ranked = ranked_ids_by_query(run);
  const std::vector<std::string> empty;
  Qrels binary;
  if (spec.name != "ndcg") binary = binarize(qrels, binarize_threshold);

  double sum = 0.0;
  for (const auto& [qid, judgments] : qrels.judgments) {
    auto it = ranked.find(qid);
    const auto& ids = it != ranked.end() ? it->second : empty;
    double value = 0.0;
    if (spec.name == "map") {
      const auto& bin = binary.judgments.at(qid);
      bool any = std::any_of(bin.begin(), bin.end(), [](const auto& kv) { return kv.second > 0; });
      if (!any) continue;
      value = average_precision(ids, bin);
    } else if (spec.name == "recall") {
      const auto& bin = binary.judgments.at(qid);
      bool any = std::any_of(bin.begin(), bin.end(), [](const auto& kv) { return kv.second > 0; });
      if (!any) continue;
      value = recall_at(ids, bin, spec.cutoff.value_or(1000));
    } else {
      bool any = std::any_of(judgments.begin(), judgments.end(),
                             [](const auto& kv) { return kv.second > 0; });
      if (!any) continue;  // IDCG would be zero
      value = ndcg_at(ids, judgments, spec.cutoff.value_or(10), gain);
    }
    report.per_query[qid] = value;
    sum += value;
  }
  report.mean = report.per_query.empty() ? 0.0 : sum / static_cast<double>(report.per_query.size());
  return report;
}

TTestResult paired_t_test(const std::map<std::string, double>& a,
                          const std::map<std::string, double>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("paired t-test requires aligned query sets");
  std::vector<double> diffs;
  diffs.reserve(a.size());
  auto ib = b.begin();
  for (auto ia = a.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first)
      throw std::invalid_argument("paired t-test requires aligned query sets (mismatch at '" +
                                  ia->first + "' vs '" + ib->first + "')");
    diffs.push_back(ia->second - ib->second);
  }
  std::size_t n = diffs.size();
  if (n < 2) throw std::invalid_argument("paired t-test requires at least two pairs");

  double mean = 0.0;
  for (double d : diffs) mean += d;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double d : diffs) ss += (d - mean) * (d - mean);
  double variance = ss / static_cast<double>(n - 1);

  TTestResult result;
  result.df = static_cast<double>(n - 1);
  if (variance == 0.0) {
    if (mean == 0.0) {
      result.t = 0.0;
      result.p_value = 1.0;
    } else {
      result.t = mean > 0.0 ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
      result.p_value = 0.0;
      result.degenerate = true;
    }
    return result;
  }

  result.t = mean / std::sqrt(variance / static_cast<double>(n));
  boost::math::students_t_distribution<double> dist(result.df);
  result.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(result.t)));
  return result;
}

}  // namespace fuseprf
