#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "popnet/netcore.hpp"
#include "popnet/trace_io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using popnet::cli::run_cli;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "popnet");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kSmallConfig =
    "H = 6\nR = 3\niterations = 120\nburn_in = 40\nseed = 3\nsnapshot_every = 50\n";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate, fit, summarize, diagnose") {
  const auto dir = testing::scratch_dir("cli_pipeline");
  const auto data = (dir / "pop.txt").string();
  const auto trace = (dir / "fit.trace").string();
  write(dir / "small.cfg", kSmallConfig);

  auto r = cli({"simulate", "-r", "paper_sec5", "-o", data});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(data + ".recipe"));
  CHECK(fs::exists(data + ".labels"));
  CHECK(fs::exists(data + ".manifest.json"));
  const auto ds = popnet::load_dataset_file(data);
  CHECK(ds.size() == 100);
  CHECK(ds.v_count() == 20);

  r = cli({"fit", "-d", data, "-c", (dir / "small.cfg").string(), "-o", trace});
  REQUIRE(r.code == 0);
  const auto t = popnet::read_trace(trace);
  CHECK(t.kept() == 80);
  CHECK_FALSE(fs::exists(trace + ".snapshot"));
  const auto fm = nlohmann::json::parse(slurp(trace + ".manifest.json"));
  CHECK(fm["command"] == "fit");
  CHECK(fm["chains"].size() == 1);

  r = cli({"summarize", "-t", trace, "-d", data, "-o", (dir / "sum").string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "sum.pi_bar.mean.csv"));
  const auto sj = nlohmann::json::parse(slurp(dir / "sum.summary.json"));
  CHECK(sj.contains("ari_vs_truth"));
  CHECK(sj["auc"]["mean"].get<double>() > 0.5);

  r = cli({"diagnose", "-t", trace});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(trace + ".diagnostics.json"));

  r = cli({"stats", "-d", data, "-o", (dir / "stats.csv").string(), "--groups", "1,1,1,1,1,1,1,1,1,1,2,2,2,2,2,2,2,2,2,2"});
  REQUIRE(r.code == 0);
  std::istringstream csv(slurp(dir / "stats.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 100);

  r = cli({"trace", "export", "-t", trace, "-o", (dir / "trace.csv").string()});
  CHECK(r.code == 0);
}

TEST_CASE("fits are reproducible and resumable") {
  const auto dir = testing::scratch_dir("cli_repro");
  const auto data = (dir / "pop.txt").string();
  write(dir / "small.cfg", kSmallConfig);
  const auto cfg = (dir / "small.cfg").string();
  REQUIRE(cli({"simulate", "-r", "paper_sec5", "-o", data, "--seed", "4"}).code == 0);

  const auto a = (dir / "a.trace").string(), b = (dir / "b.trace").string(), c = (dir / "c.trace").string();
  REQUIRE(cli({"fit", "-d", data, "-c", cfg, "-o", a}).code == 0);
  REQUIRE(cli({"fit", "-d", data, "-c", cfg, "-o", b}).code == 0);
  CHECK(slurp(a) == slurp(b));

  // Interrupt after sweep 75 (last snapshot at 50), then resume.
  REQUIRE(cli({"fit", "-d", data, "-c", cfg, "-o", c, "--stop-after", "75"}).code == 0);
  CHECK(fs::exists(c + ".snapshot"));
  REQUIRE(cli({"fit", "-d", data, "-c", cfg, "-o", c, "--resume"}).code == 0);
  CHECK(slurp(c) == slurp(a));
  CHECK_FALSE(fs::exists(c + ".snapshot"));

  // Replay the recorded command.
  fs::remove(b);
  REQUIRE(cli({"replay", b + ".manifest.json"}).code == 0);
  CHECK(slurp(b) == slurp(a));
}

TEST_CASE("multiple chains") {
  const auto dir = testing::scratch_dir("cli_chains");
  const auto data = (dir / "pop.txt").string();
  write(dir / "small.cfg", kSmallConfig);
  REQUIRE(cli({"simulate", "-r", "paper_sec5", "-o", data}).code == 0);
  const auto out = (dir / "m.trace").string();
  REQUIRE(cli({"fit", "-d", data, "-c", (dir / "small.cfg").string(), "-o", out, "--chains", "2"}).code == 0);
  const auto t1 = popnet::read_trace((dir / "m.chain1.trace").string());
  const auto t2 = popnet::read_trace((dir / "m.chain2.trace").string());
  CHECK(t1.chain_id == 0);
  CHECK(t2.chain_id == 1);
  CHECK(t1.records != t2.records);
}

TEST_CASE("exit codes") {
  const auto dir = testing::scratch_dir("cli_codes");
  const auto data = (dir / "pop.txt").string();
  REQUIRE(cli({"simulate", "-r", "paper_sec5", "-o", data}).code == 0);

  CHECK(cli({}).code == 2);
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"fit", "-d", data}).code == 2);

  write(dir / "bad.cfg", "H = 6\n");  // no seed
  CHECK(cli({"fit", "-d", data, "-c", (dir / "bad.cfg").string(), "-o", (dir / "x.trace").string()}).code == 2);
  write(dir / "typo.cfg", "seed = 1\nburnin = 3\n");
  CHECK(cli({"fit", "-d", data, "-c", (dir / "typo.cfg").string(), "-o", (dir / "x.trace").string()}).code == 2);

  write(dir / "broken.txt", "V=3 n=2\n1 0 0\n1 1\n");
  write(dir / "ok.cfg", kSmallConfig);
  const auto r = cli({"fit", "-d", (dir / "broken.txt").string(), "-c", (dir / "ok.cfg").string(), "-o",
                      (dir / "x.trace").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK(cli({"summarize", "-t", (dir / "none.trace").string(), "-o", (dir / "s").string()}).code == 3);
  CHECK(cli({"simulate", "-r", "no_such_recipe", "-o", (dir / "y.txt").string()}).code != 0);
}

}  // TEST_SUITE
