#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "arblink/cli.hpp"
#include "arblink/io.hpp"

using namespace arblink;
namespace fs = std::filesystem;

namespace {

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"arblink"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return cli_main(int(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("arblink_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const char* name) const { return (path / name).string(); }
};

void make_corpus(const TempDir& tmp, const char* name, double holdout,
                 double noise = 0.05) {
  REQUIRE(run({"--seed", "3", "synth", "--out", tmp / name, "--entities", "8",
               "--mentions-per-entity", "4", "--dim", "8", "--noise-sigma",
               std::to_string(noise), "--holdout", std::to_string(holdout)}) == 0);
}

}  // namespace

TEST_CASE("usage errors exit 2, data errors exit 3") {
  TempDir tmp;
  CHECK(run({"--definitely-not-a-flag"}) == 2);
  CHECK(run({"link"}) == 2);  // missing required options
  CHECK(run({"link", "--corpus", tmp / "nowhere", "--lambda", "0", "--out",
             tmp / "p.tsv"}) == 3);
  make_corpus(tmp, "c", 0.0);
  CHECK(run({"link", "--corpus", tmp / "c", "--lambda", "0", "--mode",
             "sideways", "--out", tmp / "p.tsv"}) == 2);
}

TEST_CASE("lambda below every weight leaves every mention NIL") {
  TempDir tmp;
  make_corpus(tmp, "c", 0.0);
  REQUIRE(run({"link", "--corpus", tmp / "c", "--k", "2", "--lambda", "-1e9",
               "--out", tmp / "pred.tsv"}) == 0);
  std::ifstream in(tmp / "pred.tsv");
  std::string line;
  size_t lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    CHECK(line.find("\tNIL\t") != std::string::npos);
  }
  CHECK(lines == 32);
}

TEST_CASE("link then evaluate round-trips and scores the synthetic corpus") {
  TempDir tmp;
  make_corpus(tmp, "c", 0.125);
  REQUIRE(run({"link", "--corpus", tmp / "c", "--k", "2", "--lambda", "-0.2",
               "--mode", "undirected", "--out", tmp / "pred.tsv", "--trace",
               tmp / "trace.txt"}) == 0);
  REQUIRE(run({"evaluate", "--corpus", tmp / "c", "--pred", tmp / "pred.tsv",
               "--recall-k", "64", "--out", tmp / "report.txt"}) == 0);
  std::string report = slurp(tmp / "report.txt");
  CHECK(report.find("overall_acc") != std::string::npos);
  CHECK(report.find("recall_k\t7") != std::string::npos);  // clamped: KB has 7
  CHECK(fs::exists(tmp / "report.txt.json"));
  CHECK(!slurp(tmp / "trace.txt").empty());
}

TEST_CASE("discover writes a cluster listing") {
  TempDir tmp;
  make_corpus(tmp, "c", 0.125);
  REQUIRE(run({"discover", "--corpus", tmp / "c", "--k", "2", "--lambda",
               "-0.2", "--out", tmp / "pred.tsv", "--clusters-out",
               tmp / "disc.tsv"}) == 0);
  CHECK(fs::exists(tmp / "disc.tsv"));
}

TEST_CASE("outputs are byte-identical for any thread count") {
  TempDir tmp;
  make_corpus(tmp, "c", 0.125);
  for (const char* threads : {"1", "2", "5"}) {
    REQUIRE(run({"--threads", threads, "link", "--corpus", tmp / "c", "--k",
                 "2", "--lambda", "0", "--out",
                 (tmp.path / ("pred" + std::string(threads) + ".tsv")).string(),
                 "--trace",
                 (tmp.path / ("tr" + std::string(threads) + ".txt")).string()})
            == 0);
  }
  CHECK(slurp(tmp / "pred1.tsv") == slurp(tmp / "pred2.tsv"));
  CHECK(slurp(tmp / "pred1.tsv") == slurp(tmp / "pred5.tsv"));
  CHECK(slurp(tmp / "tr1.txt") == slurp(tmp / "tr2.txt"));

  for (const char* threads : {"1", "2"}) {
    REQUIRE(run({"--seed", "11", "--threads", threads, "train", "--corpus",
                 tmp / "c", "--batch-size", "8", "--neg-k", "2", "--epochs",
                 "2", "--lr", "0.02", "--out",
                 (tmp.path / ("ck" + std::string(threads) + ".bin")).string()})
            == 0);
  }
  CHECK(slurp(tmp / "ck1.bin") == slurp(tmp / "ck2.bin"));
  CHECK(slurp(tmp / "ck1.bin.meta.json") == slurp(tmp / "ck2.bin.meta.json"));
}

TEST_CASE("train emits a loadable checkpoint; graph build emits edges") {
  TempDir tmp;
  make_corpus(tmp, "c", 0.0);
  REQUIRE(run({"--seed", "7", "train", "--corpus", tmp / "c", "--batch-size",
               "16", "--neg-k", "4", "--epochs", "3", "--lr", "0.05", "--out",
               tmp / "ckpt.bin"}) == 0);
  EmbeddingStore ck = read_store(tmp / "ckpt.bin");
  CHECK(ck.mention_count() == 32);
  CHECK(slurp(tmp / "ckpt.bin.meta.json").find("loss_history") !=
        std::string::npos);

  REQUIRE(run({"build-graph", "--corpus", tmp / "c", "--k", "3", "--out",
               tmp / "graph.tsv"}) == 0);
  std::ifstream in(tmp / "graph.tsv");
  size_t lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 32 * 4);
}

TEST_CASE("sweep reports a best row") {
  TempDir tmp;
  make_corpus(tmp, "c", 0.125);
  REQUIRE(run({"sweep", "--corpus", tmp / "c", "--k-list", "1", "2",
               "--objective", "discovery", "--out", tmp / "sweep.tsv"}) == 0);
  std::string table = slurp(tmp / "sweep.tsv");
  CHECK(table.find("# best\t") != std::string::npos);
}

TEST_CASE("flags can come from a config file, with CLI overrides") {
  TempDir tmp;
  make_corpus(tmp, "c", 0.0);
  {
    std::ofstream cfg(tmp / "run.ini");
    cfg << "seed=3\n";
  }
  REQUIRE(run({"--config", tmp / "run.ini", "link", "--corpus", tmp / "c",
               "--k", "1", "--lambda", "0", "--out", tmp / "p.tsv"}) == 0);
  CHECK(fs::exists(tmp / "p.tsv"));
}
