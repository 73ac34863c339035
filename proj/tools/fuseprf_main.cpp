#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

#include "fuseprf/corpus_io.hpp"
#include "fuseprf/dense_store.hpp"
#include "fuseprf/eval.hpp"
#include "fuseprf/fixture.hpp"
#include "fuseprf/fusion.hpp"
#include "fuseprf/pipeline.hpp"
#include "fuseprf/prf.hpp"
#include "fuseprf/server.hpp"
#include "fuseprf/sparse_index.hpp"
#include "fuseprf/types.hpp"

namespace {

namespace fs = std::filesystem;
using namespace fuseprf;

// Usage/config problems exit 2; runtime failures exit 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_input(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("input path does not exist: " + path.string());
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

struct RunOptions {
  std::string config_path;
  std::string index_sparse;
  std::string index_impact;
  std::string index_dense;
  std::string data_dir;
  std::string queries_path;
  std::string qvecs_path;
  std::string qweights_path;
  std::string stage = "none";
  std::string prf = "off";
  double lambda = 0.5;
  double alpha = 0.4;
  double beta = 0.6;
  std::size_t prf_depth = 3;
  std::size_t depth = 1000;
  std::string sparse = "bm25";
  bool sparse_only = false;
  std::string norm = "minmax";
  std::string missing = "min";
  double k1 = 0.9;
  double b = 0.4;
  unsigned threads = 0;
  std::string tag;
};

void add_pipeline_flags(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--index-sparse", o.index_sparse, "BM25 index directory");
  cmd->add_option("--index-impact", o.index_impact, "Impact index directory");
  cmd->add_option("--index-dense", o.index_dense, "Dense store directory");
  cmd->add_option("--data-dir", o.data_dir, "Directory providing default index locations")
      ->envname("FUSEPRF_DATA_DIR");
  cmd->add_option("--stage", o.stage, "Interpolation stage: none|pre|post|both")
      ->capture_default_str();
  cmd->add_option("--prf", o.prf, "Pseudo-relevance feedback: on|off")->capture_default_str();
  cmd->add_option("--lambda", o.lambda, "Sparse weight in score interpolation")
      ->capture_default_str();
  cmd->add_option("--alpha", o.alpha, "Rocchio weight of the original query")
      ->capture_default_str();
  cmd->add_option("--beta", o.beta, "Rocchio weight of the feedback centroid")
      ->capture_default_str();
  cmd->add_option("--prf-depth", o.prf_depth, "Feedback passages per query")
      ->capture_default_str();
  cmd->add_option("--depth", o.depth, "Retrieval depth for every round")->capture_default_str();
  cmd->add_option("--sparse", o.sparse, "Sparse backend: bm25|impact")->capture_default_str();
  cmd->add_flag("--sparse-only", o.sparse_only, "Skip dense retrieval, emit the sparse run");
  cmd->add_option("--norm", o.norm, "Score normalization: none|minmax")->capture_default_str();
  cmd->add_option("--missing", o.missing, "Union passages absent from one list: min|skip")
      ->capture_default_str();
  cmd->add_option("--k1", o.k1, "BM25 k1")->capture_default_str();
  cmd->add_option("--b", o.b, "BM25 b")->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads (0 = available cores)")
      ->capture_default_str();
  cmd->add_option("--config", o.config_path,
                  "Read pipeline options from a TOML-style file; flags take precedence");
}

// Flat `key = value` TOML-style file holding pipeline parameters. Values set
// on the command line win; unknown keys are rejected.
void apply_config_file(const CLI::App* cmd, RunOptions& o) {
  if (o.config_path.empty()) return;
  require_input(o.config_path);
  std::ifstream in(o.config_path);

  auto unquote = [](std::string v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                          (v.front() == '\'' && v.back() == '\'')))
      v = v.substr(1, v.size() - 2);
    return v;
  };
  auto trim = [](std::string s) {
    auto begin = s.find_first_not_of(" \t\r");
    auto end = s.find_last_not_of(" \t\r");
    return begin == std::string::npos ? std::string() : s.substr(begin, end - begin + 1);
  };
  auto as_real = [&o](const std::string& key, const std::string& v) {
    try {
      return std::stod(v);
    } catch (const std::exception&) {
      throw UsageError(o.config_path + ": bad number for '" + key + "'");
    }
  };
  auto as_count = [&o](const std::string& key, const std::string& v) {
    try {
      return static_cast<std::size_t>(std::stoull(v));
    } catch (const std::exception&) {
      throw UsageError(o.config_path + ": bad integer for '" + key + "'");
    }
  };
  // The command-line flag wins over the file.
  auto overridden = [cmd](const std::string& flag) { return cmd->count("--" + flag) > 0; };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string text = trim(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[' && text.back() == ']') continue;  // section headers ignored
    auto eq = text.find('=');
    if (eq == std::string::npos)
      throw UsageError(o.config_path + ":" + std::to_string(lineno) + ": expected `key = value`");
    std::string key = trim(text.substr(0, eq));
    std::string value = unquote(trim(text.substr(eq + 1)));
    if (key == "prf_depth") key = "prf-depth";
    if (key == "sparse_only") key = "sparse-only";
    if (overridden(key)) continue;

    if (key == "stage") {
      o.stage = value;
    } else if (key == "prf") {
      o.prf = value;
    } else if (key == "lambda") {
      o.lambda = as_real(key, value);
    } else if (key == "alpha") {
      o.alpha = as_real(key, value);
    } else if (key == "beta") {
      o.beta = as_real(key, value);
    } else if (key == "prf-depth") {
      o.prf_depth = as_count(key, value);
    } else if (key == "depth") {
      o.depth = as_count(key, value);
    } else if (key == "sparse") {
      o.sparse = value;
    } else if (key == "sparse-only") {
      o.sparse_only = value == "true" || value == "1" || value == "on";
    } else if (key == "norm") {
      o.norm = value;
    } else if (key == "missing") {
      o.missing = value;
    } else if (key == "k1") {
      o.k1 = as_real(key, value);
    } else if (key == "b") {
      o.b = as_real(key, value);
    } else if (key == "threads") {
      o.threads = static_cast<unsigned>(as_count(key, value));
    } else if (key == "tag") {
      o.tag = value;
    } else {
      throw UsageError(o.config_path + ":" + std::to_string(lineno) + ": unknown key '" + key +
                       "'");
    }
  }
}

PipelineConfig to_config(const RunOptions& o) {
  if (o.prf != "on" && o.prf != "off")
    throw UsageError("--prf expects on|off, got '" + o.prf + "'");
  PipelineConfig config;
  config.stage = parse_stage(o.stage);
  config.use_prf = o.prf == "on";
  config.dense_enabled = !o.sparse_only;
  config.fusion.lambda = o.lambda;
  config.fusion.normalization = parse_normalization(o.norm);
  config.fusion.missing_policy = parse_missing_policy(o.missing);
  config.fusion.output_depth = o.depth;
  config.prf.alpha = o.alpha;
  config.prf.beta = o.beta;
  config.prf.depth_k = o.prf_depth;
  config.bm25.k1 = o.k1;
  config.bm25.b = o.b;
  config.retrieval_depth = o.depth;
  config.sparse_backend = parse_backend(o.sparse);
  config.validate();
  return config;
}

struct LoadedIndexes {
  std::optional<InvertedIndex> bm25;
  std::optional<ImpactIndex> impact;
  std::optional<DenseStore> store;
  std::optional<std::map<std::string, std::map<std::string, double>>> query_weights;

  PipelineIndexes view() const {
    PipelineIndexes v;
    if (bm25) v.bm25 = &*bm25;
    if (impact) v.impact = &*impact;
    if (store) v.store = &*store;
    if (query_weights) v.query_term_weights = &*query_weights;
    return v;
  }
};

std::string resolve_index_dir(const std::string& given, const std::string& data_dir,
                              const char* leaf, const char* flag) {
  if (!given.empty()) return given;
  if (!data_dir.empty()) return (fs::path(data_dir) / leaf).string();
  throw UsageError(std::string(flag) + " is required (or set --data-dir / FUSEPRF_DATA_DIR)");
}

LoadedIndexes load_indexes(const PipelineConfig& config, const RunOptions& o) {
  LoadedIndexes loaded;
  const bool needs_sparse =
      config.stage != InterpolationStage::NO_INTERP || !config.dense_enabled;
  if (needs_sparse) {
    if (config.sparse_backend == SparseBackend::BM25) {
      auto dir = resolve_index_dir(o.index_sparse, o.data_dir, "sparse", "--index-sparse");
      require_input(dir);
      loaded.bm25 = load_index(dir);
    } else {
      auto dir = resolve_index_dir(o.index_impact, o.data_dir, "impact", "--index-impact");
      require_input(dir);
      loaded.impact = load_impact_index(dir);
      if (!o.qweights_path.empty()) {
        require_input(o.qweights_path);
        std::map<std::string, std::map<std::string, double>> weights;
        for (auto& doc : load_term_weights(o.qweights_path))
          weights.emplace(doc.id, std::move(doc.weights));
        loaded.query_weights = std::move(weights);
      }
    }
  }
  if (config.dense_enabled) {
    auto dir = resolve_index_dir(o.index_dense, o.data_dir, "dense", "--index-dense");
    require_input(dir);
    loaded.store = DenseStore::load(dir);
  }
  return loaded;
}

std::map<std::string, DenseVector> load_query_vectors(const RunOptions& o,
                                                      const LoadedIndexes& loaded) {
  if (!loaded.store) return {};
  if (o.qvecs_path.empty()) throw UsageError("--qvecs is required for dense retrieval");
  require_input(o.qvecs_path);
  return load_vectors(o.qvecs_path, loaded.store->dim());
}

int cmd_index(const std::string& kind, const std::string& corpus, const std::string& weights,
              const std::string& vectors, std::size_t dim, const std::string& out, bool force) {
  fs::path out_dir(out);
  if (fs::exists(out_dir) && !force)
    throw UsageError("output directory exists: " + out_dir.string() + " (pass --force to rebuild)");

  if (kind == "sparse") {
    if (corpus.empty()) throw UsageError("index sparse requires --corpus");
    require_input(corpus);
    auto passages = load_corpus(corpus);
    auto index = build_index(passages);
    save_index(index, out_dir);
    std::printf("%llu documents, %zu terms, avg doc length %.2f\n",
                static_cast<unsigned long long>(index.doc_count), index.postings.size(),
                index.avg_doc_len);
  } else if (kind == "impact") {
    if (weights.empty()) throw UsageError("index impact requires --weights");
    require_input(weights);
    auto docs = load_term_weights(weights);
    auto index = build_impact_index(docs);
    save_impact_index(index, out_dir);
    std::printf("%zu documents, %zu terms\n", index.doc_ids.size(), index.postings.size());
  } else if (kind == "dense") {
    if (vectors.empty()) throw UsageError("index dense requires --vectors");
    if (dim == 0) throw UsageError("index dense requires --dim");
    require_input(vectors);
    auto vecs = load_vectors(vectors, dim);
    auto store = DenseStore::from_vectors(dim, vecs);
    store.save(out_dir);
    std::printf("%zu documents, dimension %zu\n", store.size(), store.dim());
  } else {
    throw UsageError("unknown index kind '" + kind + "' (expected sparse|impact|dense)");
  }
  return 0;
}

int cmd_run(const CLI::App* cmd, RunOptions o, const std::string& out) {
  apply_config_file(cmd, o);
  auto config = to_config(o);
  auto loaded = load_indexes(config, o);

  if (o.queries_path.empty()) throw UsageError("--queries is required");
  require_input(o.queries_path);
  auto queries = load_queries(o.queries_path);
  auto qvecs = load_query_vectors(o, loaded);

  auto entries = run_batch(queries, qvecs, config, loaded.view(), o.threads, o.tag);
  write_run(entries, out);
  std::printf("wrote %zu entries for %zu queries to %s\n", entries.size(), queries.size(),
              out.c_str());
  return 0;
}

std::string metric_label(const MetricReport& report) {
  std::string label = report.metric_name;
  if (report.cutoff) label += "@" + std::to_string(*report.cutoff);
  return label;
}

void write_json_report(const std::vector<MetricReport>& reports,
                       const std::vector<std::pair<std::string, TTestResult>>& tests,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& report : reports) {
    for (const auto& [qid, value] : report.per_query) {
      nlohmann::json line{{"metric", metric_label(report)}, {"query", qid}, {"value", value}};
      out << line.dump() << '\n';
    }
    nlohmann::json mean_line{{"metric", metric_label(report)},
                             {"query", "all"},
                             {"value", report.mean},
                             {"queries", report.per_query.size()}};
    out << mean_line.dump() << '\n';
  }
  for (const auto& [label, test] : tests) {
    nlohmann::json line{{"metric", label},       {"query", "ttest"},
                        {"t", test.t},           {"df", test.df},
                        {"p_value", test.p_value}, {"degenerate", test.degenerate}};
    out << line.dump() << '\n';
  }
}

int cmd_eval(const std::string& run_path, const std::string& qrels_path,
             const std::vector<std::string>& metric_names, const std::string& compare_path,
             const std::string& json_path, const std::string& gain_name, int threshold) {
  require_input(run_path);
  require_input(qrels_path);
  GainFunction gain;
  if (gain_name == "linear") {
    gain = GainFunction::LINEAR;
  } else if (gain_name == "exp") {
    gain = GainFunction::EXPONENTIAL;
  } else {
    throw UsageError("--gain expects linear|exp");
  }

  auto run = load_run(run_path);
  auto qrels = load_qrels(qrels_path);

  std::vector<MetricReport> reports;
  for (const auto& name : metric_names)
    reports.push_back(evaluate_metric(parse_metric(name), run, qrels, threshold, gain));

  std::vector<std::pair<std::string, TTestResult>> tests;
  if (compare_path.empty()) {
    std::printf("%-14s %10s %8s\n", "metric", "mean", "queries");
    for (const auto& report : reports)
      std::printf("%-14s %10.4f %8zu\n", metric_label(report).c_str(), report.mean,
                  report.per_query.size());
  } else {
    require_input(compare_path);
    auto other = load_run(compare_path);
    std::printf("%-14s %10s %10s %10s %10s\n", "metric", "run", "compare", "diff", "p-value");
    for (const auto& report : reports) {
      MetricSpec spec{report.metric_name, report.cutoff};
      auto other_report = evaluate_metric(spec, other, qrels, threshold, gain);
      auto test = paired_t_test(report.per_query, other_report.per_query);
      tests.emplace_back(metric_label(report), test);
      std::printf("%-14s %10.4f %10.4f %+10.4f %10.4f%s\n", metric_label(report).c_str(),
                  report.mean, other_report.mean, report.mean - other_report.mean, test.p_value,
                  test.degenerate ? " (degenerate)" : "");
    }
  }

  if (!json_path.empty()) write_json_report(reports, tests, json_path);
  return 0;
}

std::string format_sweep_value(const std::string& param, double value) {
  if (param == "prf_depth") return std::to_string(static_cast<long long>(value));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", value);
  return buf;
}

int cmd_sweep(const CLI::App* cmd, RunOptions o, const std::string& param,
              std::vector<double> values, const std::string& qrels_path,
              const std::vector<std::string>& metric_names, const std::string& out_dir) {
  apply_config_file(cmd, o);
  if (values.empty()) throw UsageError("--values must be non-empty");
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] <= values[i - 1]) throw UsageError("--values must be strictly ascending");
  if (param != "lambda" && param != "alpha" && param != "beta" && param != "prf_depth")
    throw UsageError("--param expects lambda|alpha|beta|prf_depth");
  if (param == "prf_depth") {
    for (double v : values)
      if (v < 1 || v != std::floor(v)) throw UsageError("prf_depth values must be positive integers");
  }

  require_input(qrels_path);
  auto qrels = load_qrels(qrels_path);

  auto base_config = to_config(o);
  auto loaded = load_indexes(base_config, o);
  if (o.queries_path.empty()) throw UsageError("--queries is required");
  require_input(o.queries_path);
  auto queries = load_queries(o.queries_path);
  auto qvecs = load_query_vectors(o, loaded);

  fs::create_directories(out_dir);

  std::vector<MetricSpec> specs;
  for (const auto& name : metric_names) specs.push_back(parse_metric(name));

  std::printf("%-10s", param.c_str());
  for (const auto& name : metric_names) std::printf(" %12s", name.c_str());
  std::printf("\n");

  for (double value : values) {
    PipelineConfig config = base_config;
    if (param == "lambda") config.fusion.lambda = value;
    if (param == "alpha") config.prf.alpha = value;
    if (param == "beta") config.prf.beta = value;
    if (param == "prf_depth") config.prf.depth_k = static_cast<std::size_t>(value);
    config.validate();

    auto entries = run_batch(queries, qvecs, config, loaded.view(), o.threads, o.tag);
    auto run_path = fs::path(out_dir) / ("run-" + param + "-" + format_sweep_value(param, value) +
                                         ".txt");
    write_run(entries, run_path);

    std::printf("%-10s", format_sweep_value(param, value).c_str());
    for (const auto& spec : specs) {
      auto report = evaluate_metric(spec, entries, qrels);
      std::printf(" %12.4f", report.mean);
    }
    std::printf("\n");
    std::fflush(stdout);
  }
  return 0;
}

httplib::Server* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const CLI::App* cmd, RunOptions o, const std::string& host, int port) {
  apply_config_file(cmd, o);
  auto config = to_config(o);
  SearchService service(config);

  httplib::Server server;
  register_routes(server, service);
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);

  // Indexes load in the background; requests before readiness get 503.
  std::thread loader([&service, &config, &o] {
    try {
      auto loaded = load_indexes(config, o);
      if (loaded.bm25) service.set_sparse_index(std::move(*loaded.bm25));
      if (loaded.impact) service.set_impact_index(std::move(*loaded.impact));
      if (loaded.store) service.set_dense_store(std::move(*loaded.store));
      if (loaded.query_weights) service.set_query_term_weights(std::move(*loaded.query_weights));
      service.mark_ready();
      std::fprintf(stderr, "indexes loaded, serving\n");
    } catch (const std::exception& e) {
      std::fprintf(stderr, "index loading failed: %s\n", e.what());
      if (g_server) g_server->stop();
    }
  });

  std::printf("listening on %s:%d\n", host.c_str(), port);
  std::fflush(stdout);
  bool ok = server.listen(host, port);
  loader.join();
  g_server = nullptr;
  if (!ok) throw std::runtime_error("failed to listen on " + host + ":" + std::to_string(port));
  return 0;
}

int cmd_gen_fixture(const std::string& kind, const std::string& out, std::uint64_t seed) {
  FixtureSpec spec;
  spec.kind = kind;
  spec.seed = seed;
  spec.out_dir = out;
  std::size_t dim = generate_fixture(spec);
  std::printf("fixture '%s' written to %s (vector dimension %zu)\n", kind.c_str(), out.c_str(),
              dim);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fuseprf: hybrid sparse/dense retrieval with Rocchio vector feedback"};
  app.require_subcommand(1);

  // index
  auto* index_cmd = app.add_subcommand("index", "Build and persist an index");
  std::string index_kind, index_corpus, index_weights, index_vectors, index_out;
  std::size_t index_dim = 0;
  bool index_force = false;
  index_cmd->add_option("kind", index_kind, "sparse|impact|dense")->required();
  index_cmd->add_option("--corpus", index_corpus, "JSON-lines corpus (id, contents)");
  index_cmd->add_option("--weights", index_weights, "JSON-lines term weights (id, vector)");
  index_cmd->add_option("--vectors", index_vectors, "Vector file (text or binary)");
  index_cmd->add_option("--dim", index_dim, "Vector dimension");
  index_cmd->add_option("--out", index_out, "Output directory")->required();
  index_cmd->add_flag("--force", index_force, "Overwrite an existing output directory");

  // run
  auto* run_cmd = app.add_subcommand("run", "Execute a retrieval pipeline over a query set");
  RunOptions run_opts;
  std::string run_out = "run.txt";
  add_pipeline_flags(run_cmd, run_opts);
  run_cmd->add_option("--queries", run_opts.queries_path, "TSV query file");
  run_cmd->add_option("--qvecs", run_opts.qvecs_path, "Query vector file");
  run_cmd->add_option("--qweights", run_opts.qweights_path,
                      "Query term weights for the impact backend (token counts otherwise)");
  run_cmd->add_option("--tag", run_opts.tag, "Run tag (defaults to a config digest)");
  run_cmd->add_option("--out", run_out, "Run file to write")->capture_default_str();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Score a run file against qrels");
  std::string eval_run, eval_qrels, eval_compare, eval_json;
  std::string eval_gain = "linear";
  int eval_threshold = 2;
  std::vector<std::string> eval_metrics{"map", "ndcg@10", "recall@1000"};
  eval_cmd->add_option("--run", eval_run, "Run file")->required();
  eval_cmd->add_option("--qrels", eval_qrels, "Qrels file")->required();
  eval_cmd->add_option("--metrics", eval_metrics, "Comma-separated metric list")
      ->delimiter(',')
      ->capture_default_str();
  eval_cmd->add_option("--compare", eval_compare, "Second run for a paired t-test");
  eval_cmd->add_option("--json", eval_json, "Write a JSON-lines report here");
  eval_cmd->add_option("--gain", eval_gain, "nDCG gain: linear|exp")->capture_default_str();
  eval_cmd->add_option("--threshold", eval_threshold, "Binary relevance grade threshold")
      ->capture_default_str();

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Run and evaluate across parameter values");
  RunOptions sweep_opts;
  std::string sweep_param, sweep_qrels, sweep_out_dir = "sweep";
  std::vector<double> sweep_values;
  std::vector<std::string> sweep_metrics{"map", "ndcg@10", "recall@1000"};
  add_pipeline_flags(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--queries", sweep_opts.queries_path, "TSV query file");
  sweep_cmd->add_option("--qvecs", sweep_opts.qvecs_path, "Query vector file");
  sweep_cmd->add_option("--qweights", sweep_opts.qweights_path, "Query term weights");
  sweep_cmd->add_option("--tag", sweep_opts.tag, "Run tag override");
  sweep_cmd->add_option("--param", sweep_param, "lambda|alpha|beta|prf_depth")->required();
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated ascending values")
      ->delimiter(',')
      ->required();
  sweep_cmd->add_option("--qrels", sweep_qrels, "Qrels file")->required();
  sweep_cmd->add_option("--metrics", sweep_metrics, "Metrics to report")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--out-dir", sweep_out_dir, "Directory for per-value run files")
      ->capture_default_str();

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "HTTP search service over loaded indexes");
  RunOptions serve_opts;
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  add_pipeline_flags(serve_cmd, serve_opts);
  serve_cmd->add_option("--qweights", serve_opts.qweights_path, "Query term weights");
  serve_cmd->add_option("--host", serve_host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", serve_port, "Port")->capture_default_str();

  // gen-fixture
  auto* fixture_cmd = app.add_subcommand("gen-fixture", "Emit a seeded desk-scale corpus");
  std::string fixture_kind = "synth", fixture_out;
  std::uint64_t fixture_seed = 42;
  fixture_cmd->add_option("--kind", fixture_kind, "tiny|synth")->capture_default_str();
  fixture_cmd->add_option("--out", fixture_out, "Output directory")->required();
  fixture_cmd->add_option("--seed", fixture_seed, "Generator seed (synth only)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (index_cmd->parsed())
    return guarded([&] {
      return cmd_index(index_kind, index_corpus, index_weights, index_vectors, index_dim,
                       index_out, index_force);
    });
  if (run_cmd->parsed()) return guarded([&] { return cmd_run(run_cmd, run_opts, run_out); });
  if (eval_cmd->parsed())
    return guarded([&] {
      return cmd_eval(eval_run, eval_qrels, eval_metrics, eval_compare, eval_json, eval_gain,
                      eval_threshold);
    });
  if (sweep_cmd->parsed())
    return guarded([&] {
      return cmd_sweep(sweep_cmd, sweep_opts, sweep_param, sweep_values, sweep_qrels,
                       sweep_metrics, sweep_out_dir);
    });
  if (serve_cmd->parsed())
    return guarded([&] { return cmd_serve(serve_cmd, serve_opts, serve_host, serve_port); });
  if (fixture_cmd->parsed())
    return guarded([&] { return cmd_gen_fixture(fixture_kind, fixture_out, fixture_seed); });
  return 2;
}
