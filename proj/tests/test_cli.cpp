#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>

#include "httplib.h"
#include "json.hpp"

#include "fuseprf/corpus_io.hpp"

using namespace fuseprf;
namespace fs = std::filesystem;

namespace {

std::string binary() {
  if (const char* env = std::getenv("FUSEPRF_BIN")) return env;
  return FUSEPRF_BIN_PATH;
}

fs::path source_dir() {
  if (const char* env = std::getenv("FUSEPRF_SRC")) return env;
  return FUSEPRF_SRC_DIR;
}

fs::path work_dir() {
  static fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("fuseprf_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const std::string& log = "cli.log") {
  std::string cmd = binary() + " " + args + " >> " + (work_dir() / log).string() + " 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(static_cast<bool>(in), "cannot open ", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Paths {
  fs::path fixture = source_dir() / "tests" / "fixtures" / "synth";
  fs::path sparse = work_dir() / "sparse";
  fs::path dense = work_dir() / "dense";

  std::string common_run_flags() const {
    return " --index-sparse " + sparse.string() + " --index-dense " + dense.string() +
           " --queries " + (fixture / "queries.tsv").string() + " --qvecs " +
           (fixture / "qvecs.txt").string() + " --depth 50";
  }
};

const Paths& paths() {
  static Paths p = [] {
    Paths paths;
    REQUIRE(run("index sparse --corpus " + (paths.fixture / "corpus.jsonl").string() + " --out " +
                paths.sparse.string()) == 0);
    REQUIRE(run("index dense --vectors " + (paths.fixture / "pvecs.txt").string() +
                " --dim 24 --out " + paths.dense.string()) == 0);
    return paths;
  }();
  return p;
}

}  // namespace

TEST_CASE("index subcommand exit codes") {
  const auto& p = paths();
  // Rebuild into an existing directory needs --force.
  CHECK(run("index sparse --corpus " + (p.fixture / "corpus.jsonl").string() + " --out " +
            p.sparse.string()) == 2);
  CHECK(run("index sparse --corpus " + (p.fixture / "corpus.jsonl").string() + " --out " +
            p.sparse.string() + " --force") == 0);
  // Missing input file.
  CHECK(run("index sparse --corpus /no/such/file.jsonl --out " +
            (work_dir() / "never").string()) == 2);
  // Unknown kind and missing required flags are usage errors.
  CHECK(run("index banana --corpus x --out y") == 2);
  CHECK(run("index sparse --out z") == 2);
}

TEST_CASE("run rejects bad flag domains with exit 2") {
  const auto& p = paths();
  CHECK(run("run" + p.common_run_flags() + " --stage diagonal --out " +
            (work_dir() / "x.txt").string()) == 2);
  CHECK(run("run" + p.common_run_flags() + " --stage both --prf off --lambda 1.5 --out " +
            (work_dir() / "x.txt").string()) == 2);
  CHECK(run("run" + p.common_run_flags() + " --stage both --prf on --prf-depth 99 --out " +
            (work_dir() / "x.txt").string()) == 2);  // depth 50 < prf depth
}

TEST_CASE("run writes a valid TREC run with the config digest as tag") {
  const auto& p = paths();
  auto out = work_dir() / "digest.txt";
  REQUIRE(run("run" + p.common_run_flags() + " --stage post --prf on --lambda 0.25 --out " +
              out.string()) == 0);
  auto entries = load_run(out);
  REQUIRE(!entries.empty());
  CHECK(entries[0].tag.find("bm25-post-prf-l0.25") != std::string::npos);
}

TEST_CASE("config file supplies defaults and flags override it") {
  const auto& p = paths();
  auto config_path = work_dir() / "run.toml";
  {
    std::ofstream cfg(config_path);
    cfg << "stage = \"both\"\n";
    cfg << "prf = \"on\"\n";
    cfg << "lambda = 0.7\n";
  }
  auto out1 = work_dir() / "cfg1.txt";
  REQUIRE(run("run" + p.common_run_flags() + " --config " + config_path.string() + " --out " +
              out1.string()) == 0);
  auto entries1 = load_run(out1);
  REQUIRE(!entries1.empty());
  CHECK(entries1[0].tag.find("both-prf") != std::string::npos);
  CHECK(entries1[0].tag.find("l0.70") != std::string::npos);

  auto out2 = work_dir() / "cfg2.txt";
  REQUIRE(run("run" + p.common_run_flags() + " --config " + config_path.string() +
              " --lambda 0.3 --out " + out2.string()) == 0);
  auto entries2 = load_run(out2);
  CHECK(entries2[0].tag.find("l0.30") != std::string::npos);
}

TEST_CASE("sweep endpoints cross-check against direct pipeline runs") {
  const auto& p = paths();
  auto sweep_dir = work_dir() / "sweep";
  REQUIRE(run("sweep --param lambda --values 0,0.5,1 --stage both --prf off --qrels " +
              (p.fixture / "qrels.txt").string() + p.common_run_flags() + " --out-dir " +
              sweep_dir.string(), "sweep.log") == 0);

  CHECK(fs::exists(sweep_dir / "run-lambda-0.000.txt"));
  CHECK(fs::exists(sweep_dir / "run-lambda-0.500.txt"));
  CHECK(fs::exists(sweep_dir / "run-lambda-1.000.txt"));

  // The lambda=0 sweep row must equal a direct run at lambda=0, byte for byte.
  auto direct = work_dir() / "direct-l0.txt";
  REQUIRE(run("run" + p.common_run_flags() + " --stage both --prf off --lambda 0 --out " +
              direct.string()) == 0);
  CHECK(slurp(sweep_dir / "run-lambda-0.000.txt") == slurp(direct));

  // Three metric rows in the table output.
  auto table = slurp(work_dir() / "sweep.log");
  CHECK(table.find("0.000") != std::string::npos);
  CHECK(table.find("0.500") != std::string::npos);
  CHECK(table.find("1.000") != std::string::npos);
}

TEST_CASE("single-value sweep matches one run") {
  const auto& p = paths();
  auto sweep_dir = work_dir() / "sweep-single";
  REQUIRE(run("sweep --param lambda --values 0.5 --stage both --prf on --qrels " +
              (p.fixture / "qrels.txt").string() + p.common_run_flags() + " --out-dir " +
              sweep_dir.string()) == 0);
  auto direct = work_dir() / "direct-single.txt";
  REQUIRE(run("run" + p.common_run_flags() + " --stage both --prf on --lambda 0.5 --out " +
              direct.string()) == 0);
  CHECK(slurp(sweep_dir / "run-lambda-0.500.txt") == slurp(direct));
}

TEST_CASE("sweep rejects empty or unsorted values") {
  const auto& p = paths();
  CHECK(run("sweep --param lambda --values 0.5,0.2 --qrels " +
            (p.fixture / "qrels.txt").string() + p.common_run_flags() + " --out-dir " +
            (work_dir() / "sx").string()) == 2);
  CHECK(run("sweep --param lambda --qrels " + (p.fixture / "qrels.txt").string() +
            p.common_run_flags() + " --out-dir " + (work_dir() / "sy").string()) == 2);
}

TEST_CASE("eval prints means and writes the JSON-lines report") {
  const auto& p = paths();
  auto out = work_dir() / "eval-run.txt";
  REQUIRE(run("run" + p.common_run_flags() + " --stage both --prf on --out " + out.string()) ==
          0);
  auto report = work_dir() / "report.jsonl";
  REQUIRE(run("eval --run " + out.string() + " --qrels " + (p.fixture / "qrels.txt").string() +
              " --json " + report.string(), "eval.log") == 0);

  std::ifstream in(report);
  std::string line;
  std::size_t lines = 0, means = 0;
  while (std::getline(in, line)) {
    auto parsed = nlohmann::json::parse(line);
    CHECK(parsed.contains("metric"));
    if (parsed.at("query") == "all") ++means;
    ++lines;
  }
  CHECK(means == 3);               // map, ndcg@10, recall@1000
  CHECK(lines == 3 * (20 + 1));    // per-query plus mean for each metric

  auto table = slurp(work_dir() / "eval.log");
  CHECK(table.find("map") != std::string::npos);
  CHECK(table.find("ndcg@10") != std::string::npos);
}

TEST_CASE("eval --compare reports paired t-tests") {
  const auto& p = paths();
  auto run_a = work_dir() / "cmp-a.txt";
  auto run_b = work_dir() / "cmp-b.txt";
  REQUIRE(run("run" + p.common_run_flags() + " --stage both --prf on --out " + run_a.string()) ==
          0);
  REQUIRE(run("run" + p.common_run_flags() + " --stage none --prf off --out " + run_b.string()) ==
          0);
  auto report = work_dir() / "cmp.jsonl";
  REQUIRE(run("eval --run " + run_a.string() + " --compare " + run_b.string() + " --qrels " +
              (p.fixture / "qrels.txt").string() + " --json " + report.string()) == 0);

  bool saw_ttest = false;
  std::ifstream in(report);
  std::string line;
  while (std::getline(in, line)) {
    auto parsed = nlohmann::json::parse(line);
    if (parsed.at("query") == "ttest") {
      saw_ttest = true;
      CHECK(parsed.at("p_value").get<double>() >= 0.0);
      CHECK(parsed.at("p_value").get<double>() <= 1.0);
    }
  }
  CHECK(saw_ttest);
}

TEST_CASE("gen-fixture regenerates the committed fixtures byte-identically") {
  auto tiny_dir = work_dir() / "tiny";
  REQUIRE(run("gen-fixture --kind tiny --out " + tiny_dir.string()) == 0);
  for (const char* name : {"corpus.jsonl", "queries.tsv", "qrels.txt", "pvecs.txt", "qvecs.txt",
                           "pweights.jsonl", "qweights.jsonl"}) {
    CHECK(slurp(tiny_dir / name) ==
          slurp(source_dir() / "tests" / "fixtures" / "tiny" / name));
  }

  auto synth_dir = work_dir() / "synth";
  REQUIRE(run("gen-fixture --kind synth --seed 42 --out " + synth_dir.string()) == 0);
  for (const char* name : {"corpus.jsonl", "qrels.txt", "pvecs.txt", "qvecs.txt"}) {
    CHECK(slurp(synth_dir / name) ==
          slurp(source_dir() / "tests" / "fixtures" / "synth" / name));
  }

  // A different seed must change the synthetic corpus.
  auto other_dir = work_dir() / "synth-7";
  REQUIRE(run("gen-fixture --kind synth --seed 7 --out " + other_dir.string()) == 0);
  CHECK(slurp(other_dir / "pvecs.txt") != slurp(synth_dir / "pvecs.txt"));
}

TEST_CASE("serve answers health and search over HTTP") {
  const auto& p = paths();
  int port = 18000 + static_cast<int>(::getpid() % 2000);
  auto pidfile = work_dir() / "serve.pid";
  std::string cmd = binary() + " serve --index-sparse " + p.sparse.string() +
                    " --index-dense " + p.dense.string() +
                    " --stage both --prf on --depth 20 --port " + std::to_string(port) +
                    " >> " + (work_dir() / "serve.log").string() + " 2>&1 & echo $! > " +
                    pidfile.string();
  REQUIRE(std::system(("sh -c '" + cmd + "'").c_str()) == 0);
  pid_t pid = std::stoi(slurp(pidfile));

  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(1, 0);
  bool ready = false;
  for (int attempt = 0; attempt < 100 && !ready; ++attempt) {
    auto res = client.Get("/healthz");
    if (res && res->status == 200) ready = true;
    else std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  REQUIRE(ready);

  auto queries = load_queries(p.fixture / "queries.tsv");
  auto qvecs = load_vectors(p.fixture / "qvecs.txt", 24);
  nlohmann::json request{{"query_text", queries[0].text},
                         {"query_vector", qvecs.at(queries[0].id)}};
  auto res = client.Post("/search", request.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  auto body = nlohmann::json::parse(res->body);
  CHECK(body.at("results").size() == 20);
  CHECK(body.at("config").at("stage") == "both");

  ::kill(pid, SIGTERM);
}
