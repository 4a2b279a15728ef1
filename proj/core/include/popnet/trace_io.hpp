#pragma once

// Binary posterior traces.
//
//   "POPNTRC1" | u64 header length | JSON header | kept x stride float64 records
//
// All integers and doubles are little-endian. The header carries the config,
// dimensions and record layout; kept sweep indices follow from (burn_in, thin).
// Wall-clock data is kept out so equal seeds give equal bytes.

#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <string>

#include "popnet/gibbs.hpp"

namespace popnet {

std::string trace_header_json(const TraceLayout& layout, const ModelConfig& cfg, std::uint64_t chain_id,
                              std::size_t kept);

// Streams records to disk as they are produced.
class TraceWriter {
 public:
  // Creates or truncates `path` and writes the header.
  TraceWriter(const std::string& path, const TraceLayout& layout, const ModelConfig& cfg,
              std::uint64_t chain_id);
  // Reopens an existing trace for appending after `keep_records` records,
  // discarding anything beyond (used on resume).
  static TraceWriter reopen(const std::string& path, std::size_t keep_records);

  void append(std::span<const double> record);
  std::size_t written() const noexcept { return written_; }
  void flush();

 private:
  TraceWriter() = default;
  std::string path_;
  std::ofstream out_;
  std::size_t stride_ = 0;
  std::size_t written_ = 0;
};

void write_trace(const std::string& path, const PosteriorTrace& trace);
// Throws IoError on malformed or truncated files; a partial final record is dropped.
PosteriorTrace read_trace(const std::string& path);

// Wide CSV: one row per kept iteration, columns iteration, nu_h, G_i, pi_h_l, Z_l, lambda_h_r.
void export_trace_csv(std::ostream& out, const PosteriorTrace& trace);

}  // namespace popnet
