#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "popnet/errors.hpp"
#include "popnet/trace_io.hpp"
#include "support.hpp"

using namespace popnet;

namespace {

PosteriorTrace small_trace() {
  RngStream rng(1, 0);
  std::vector<EdgeVector> nets;
  for (int i = 0; i < 5; ++i) nets.push_back(testing::random_network(4, 0.5, rng));
  ModelConfig cfg;
  cfg.H = 3;
  cfg.R = 2;
  cfg.iterations = 12;
  cfg.burn_in = 4;
  cfg.thin = 2;
  cfg.seed = 5;
  return run_chain(NetworkDataset(4, nets), cfg);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("trace_io") {

TEST_CASE("write then read is lossless") {
  const auto dir = testing::scratch_dir("trace_rt");
  const auto t = small_trace();
  const auto path = (dir / "t.trace").string();
  write_trace(path, t);
  const auto back = read_trace(path);
  CHECK(back.kept_iterations == t.kept_iterations);
  CHECK(back.records == t.records);
  CHECK(back.layout.stride() == t.layout.stride());
  CHECK(back.config.to_key_values().to_text() == t.config.to_key_values().to_text());
  write_trace((dir / "u.trace").string(), back);
  CHECK(slurp(dir / "u.trace") == slurp(path));
}

TEST_CASE("streaming writer matches the bulk writer") {
  const auto dir = testing::scratch_dir("trace_stream");
  const auto t = small_trace();
  {
    TraceWriter w((dir / "s.trace").string(), t.layout, t.config, t.chain_id);
    for (std::size_t k = 0; k < t.kept(); ++k) w.append(t.record(k));
    CHECK(w.written() == t.kept());
  }
  write_trace((dir / "b.trace").string(), t);
  CHECK(slurp(dir / "s.trace") == slurp(dir / "b.trace"));

  // Reopen after two records and append the rest again.
  {
    auto w = TraceWriter::reopen((dir / "s.trace").string(), 2);
    for (std::size_t k = 2; k < t.kept(); ++k) w.append(t.record(k));
  }
  CHECK(slurp(dir / "s.trace") == slurp(dir / "b.trace"));
}

TEST_CASE("truncated and malformed files") {
  const auto dir = testing::scratch_dir("trace_bad");
  const auto t = small_trace();
  const auto path = dir / "t.trace";
  write_trace(path.string(), t);
  const auto full = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, full - 3 * sizeof(double));
  const auto partial = read_trace(path.string());
  CHECK(partial.kept() == t.kept() - 1);

  std::ofstream(dir / "junk.trace") << "not a trace at all";
  CHECK_THROWS_AS(read_trace((dir / "junk.trace").string()), IoError);
  CHECK_THROWS_AS(read_trace((dir / "none.trace").string()), IoError);
}

TEST_CASE("csv export") {
  const auto t = small_trace();
  std::ostringstream out;
  export_trace_csv(out, t);
  std::istringstream in(out.str());
  std::string header, line;
  std::getline(in, header);
  CHECK(header.rfind("iteration,nu_1,", 0) == 0);
  CHECK(header.find("G_5") != std::string::npos);
  CHECK(header.find("pi_3_6") != std::string::npos);
  CHECK(header.find("Z_6") != std::string::npos);
  CHECK(header.find("lambda_3_2") != std::string::npos);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == static_cast<int>(t.kept()));
}

}  // TEST_SUITE
