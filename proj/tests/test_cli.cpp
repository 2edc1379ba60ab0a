// End-to-end tests of the skyshard executable against node processes.

#include <doctest.h>

#include <csignal>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cluster.hpp"
#include "skyshard/csv.hpp"
#include "support.hpp"

using namespace skyshard;
using namespace skyshard::testing;
namespace fs = std::filesystem;

namespace {

const std::string kExe = SKYSHARD_EXE;
const fs::path kQueries = fs::path(SKYSHARD_FIXTURE_DIR) / "queries";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::pair<std::string, std::string>> golden_queries() {
  std::vector<std::pair<std::string, std::string>> out;
  std::ifstream in(kQueries / "queries.tsv");
  std::string line;
  while (std::getline(in, line)) {
    auto tab = line.find('\t');
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("golden query suite gives byte-identical output across node counts and policies") {
  auto queries = golden_queries();
  REQUIRE(queries.size() >= 15);
  for (auto [nodes, target] : std::vector<std::pair<int, int>>{{1, 4096}, {3, 5}, {2, 1}}) {
    CAPTURE(nodes);
    CAPTURE(target);
    TempDir dir;
    ProcessCluster cluster(kExe, dir.path(), nodes);
    auto [st, out] = cluster.cli({"load-csv", "golden", (kQueries / "dataset.csv").string(), "--target-rows",
                                  std::to_string(target)});
    REQUIRE_MESSAGE(st == 0, out);
    for (const auto& [id, text] : queries) {
      CAPTURE(text);
      auto [qs, qout] = cluster.cli({"query", text});
      CHECK(qs == 0);
      CHECK(qout == slurp(kQueries / (id + ".out")));
    }
  }
}

TEST_CASE("load-csv then SELECT * reproduces the file") {
  TempDir dir;
  ProcessCluster cluster(kExe, dir.path(), 2);
  std::ifstream in(kQueries / "dataset.csv");
  auto records = read_csv_records(in);
  std::string expect;
  for (const auto& rec : records) {
    for (std::size_t i = 0; i < rec.size(); ++i) expect += (i ? "\t" : "") + rec[i];
    expect += "\n";
  }
  REQUIRE(cluster.cli({"load-csv", "g", (kQueries / "dataset.csv").string(), "--target-rows", "6"}).first == 0);
  CHECK(cluster.cli({"query", "SELECT * FROM g"}).second == expect);
}

TEST_CASE("load-csv reports objects and placement; inference and empty tables") {
  TempDir dir;
  ProcessCluster cluster(kExe, dir.path(), 2);
  std::ofstream(dir / "ten.csv") << "a,b\n1,1\n2,2.5\n3,3\n4,4\n5,5\n6,6\n7,7\n8,8\n9,9\n10,10\n";
  auto [st, out] = cluster.cli({"load-csv", "ten", (dir / "ten.csv").string(), "--target-rows", "4"});
  CHECK(st == 0);
  CHECK(first_line(out) == "3 objects");
  CHECK(out.find("ten.00000002\t") != std::string::npos);

  auto [js, jout] = cluster.cli({"--json", "query", "SELECT * FROM ten WHERE a = 2"});
  CHECK(js == 0);
  auto j = nlohmann::json::parse(jout);
  CHECK(j["columns"][0]["type"] == "i64");
  CHECK(j["columns"][1]["type"] == "f64");  // "1" and "2.5" mix
  CHECK(j["rows"][0][1].get<double>() == 2.5);

  std::ofstream(dir / "empty.csv") << "x\n";
  CHECK(first_line(cluster.cli({"load-csv", "empty", (dir / "empty.csv").string()}).second) == "0 objects");
  auto [cs, cout_] = cluster.cli({"query", "SELECT count(x) FROM empty"});
  CHECK(cs == 0);
  CHECK(cout_ == "0\n");

  std::ofstream(dir / "bad.csv") << "a,b\n1,2\n3\n";
  auto [bs, bout] = cluster.cli({"load-csv", "bad", (dir / "bad.csv").string()});
  CHECK(bs != 0);
  CHECK(bout.find("row 2") != std::string::npos);
}

TEST_CASE("query errors: caret-positioned parse errors and failing objects") {
  TempDir dir;
  ProcessCluster cluster(kExe, dir.path(), 1);
  auto [st, out] = cluster.cli({"query", "SELECT sum(a) BINS 4 FROM t"});
  CHECK(st != 0);
  std::istringstream lines(out);
  std::string msg, echo, caret;
  std::getline(lines, msg);
  std::getline(lines, echo);
  std::getline(lines, caret);
  CHECK(msg.find("error") == 0);
  CHECK(echo == "  SELECT sum(a) BINS 4 FROM t");
  CHECK(caret == std::string(2 + 14, ' ') + "^");

  auto [us, uout] = cluster.cli({"query", "SELECT * FROM nowhere"});
  CHECK(us != 0);
  CHECK(uout.find("UnknownDataset") != std::string::npos);

  // a node that went away: the error names the object and the node
  std::ofstream(dir / "t.csv") << "a\n1\n2\n3\n";
  REQUIRE(cluster.cli({"load-csv", "t", (dir / "t.csv").string()}).first == 0);
  cluster.node(0).process.signal(SIGKILL);
  cluster.node(0).process.wait();
  auto [ds, dout] = cluster.cli({"query", "SELECT count(a) FROM t"});
  CHECK(ds != 0);
  CHECK(dout.find("t.00000000") != std::string::npos);
  CHECK(dout.find("n1") != std::string::npos);
}

TEST_CASE("index build through the CLI keeps results") {
  TempDir dir;
  ProcessCluster cluster(kExe, dir.path(), 2);
  REQUIRE(cluster.cli({"load-csv", "g", (kQueries / "dataset.csv").string(), "--target-rows", "8"}).first == 0);
  std::string q = "SELECT * FROM g WHERE grp = 'north' AND qty >= 12";
  std::string before = cluster.cli({"query", q}).second;
  auto [st, out] = cluster.cli({"index", "build", "g", "grp"});
  CHECK(st == 0);
  CHECK(out.find("8 objects") != std::string::npos);
  CHECK(cluster.cli({"query", q}).second == before);
  CHECK(cluster.cli({"index", "build", "g", "val"}).first != 0);  // Float64 is not indexable
}

TEST_CASE("node serve: ping, occupied port, SIGTERM") {
  TempDir dir;
  SpawnedNode n = spawn_node(kExe, "solo", dir / "solo", false);
  RemoteNodeClient client("solo", n.address);
  client.ping();

  auto [st, out] = run_process({kExe, "node", "serve", "--node-id", "other", "--listen", n.address, "--data-dir",
                                (dir / "other").string()},
                               true);
  CHECK(st != 0);
  CHECK(out.find("AddressInUse") != std::string::npos);

  n.process.signal(SIGTERM);
  CHECK(n.process.wait() == 0);
  CHECK(run_process({kExe, "node", "serve", "--node-id", "x"}, true).first != 0);  // no listen address
}

TEST_CASE("SIGTERM mid-write: every acknowledged put survives the restart") {
  TempDir dir;
  CrashOutcome o = crash_restart_trial(kExe, dir.path(), SIGTERM, 3, 30);
  CHECK_MESSAGE(o.failure.empty(), o.failure);
  CHECK(o.acked >= 30);
  CHECK(o.present_after_restart >= o.acked);
}

TEST_CASE("bench argument checks and a small pushdown run") {
  auto [zs, zout] = run_process({kExe, "bench", "write-scaling", "--size-mb", "0", "--spawn"}, true);
  CHECK(zs != 0);
  CHECK(zout.find("size-mb") != std::string::npos);

  auto [ps, pout] = run_process({kExe, "--json", "bench", "pushdown", "--spawn", "--rows", "20000", "--selectivity",
                                 "1.0", "--nodes", "2", "--target-rows", "2000"});
  REQUIRE(ps == 0);
  auto j = nlohmann::json::parse(pout);
  CHECK(j["parameters"]["results_identical"] == "true");
  CHECK(j["parameters"]["matched_rows"] == "20000");
  double ratio = j["runs"][1]["byte_ratio"].get<double>();
  CHECK(j["runs"][1]["configuration"] == "pushdown");
  // every row matches: both modes move the same rows, up to framing and sub-query text
  CHECK(ratio > 0.98);
  CHECK(ratio < 1.02);

  auto [ws, wout] = run_process({kExe, "--json", "bench", "write-scaling", "--spawn", "--size-mb", "4",
                                 "--node-counts", "1,2", "--chunk-mb", "1", "--no-sync"});
  REQUIRE(ws == 0);
  auto w = nlohmann::json::parse(wout);
  REQUIRE(w["runs"].size() == 3);
  double base = w["runs"][0]["seconds"].get<double>();
  for (const auto& r : w["runs"]) {
    CHECK(r["speedup"].get<double>() == doctest::Approx(base / r["seconds"].get<double>()));
  }
}
