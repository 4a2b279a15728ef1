#include "popnet/trace_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "popnet/errors.hpp"

static_assert(std::endian::native == std::endian::little, "trace files assume a little-endian host");

namespace popnet {

namespace {

constexpr char kMagic[8] = {'P', 'O', 'P', 'N', 'T', 'R', 'C', '1'};

void write_u64(std::ostream& out, std::uint64_t x) { out.write(reinterpret_cast<const char*>(&x), sizeof x); }

struct ParsedHeader {
  TraceLayout layout;
  ModelConfig config;
  std::uint64_t chain_id = 0;
  std::uint64_t data_offset = 0;
};

ParsedHeader read_header(std::istream& in, const std::string& path) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw IoError("'" + path + "' is not a popnet trace");
  }
  std::uint64_t len = 0;
  if (!in.read(reinterpret_cast<char*>(&len), sizeof len) || len > (1u << 30)) {
    throw IoError("'" + path + "': truncated trace header");
  }
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw IoError("'" + path + "': truncated trace header");
  }
  ParsedHeader h;
  try {
    const auto j = nlohmann::json::parse(text);
    std::istringstream cfg_text(j.at("config").get<std::string>());
    h.config = ModelConfig::from_key_values(KeyValues::parse(cfg_text));
    h.chain_id = j.at("chain_id").get<std::uint64_t>();
    h.layout.v_count = j.at("V").get<int>();
    h.layout.n = j.at("n").get<std::size_t>();
    h.layout.H = j.at("H").get<int>();
    h.layout.R = j.at("R").get<int>();
    if (j.at("stride").get<std::size_t>() != h.layout.stride()) {
      throw IoError("'" + path + "': header stride does not match dimensions");
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("'" + path + "': bad trace header: " + e.what());
  } catch (const ConfigError& e) {
    throw IoError("'" + path + "': bad config in trace header: " + e.what());
  }
  h.data_offset = 16 + len;
  return h;
}

}  // namespace

std::string trace_header_json(const TraceLayout& layout, const ModelConfig& cfg, std::uint64_t chain_id,
                              std::size_t kept) {
  nlohmann::ordered_json j;
  j["format"] = "popnet-trace";
  j["version"] = 1;
  j["config"] = cfg.to_key_values().to_text();
  j["seed"] = cfg.seed;
  j["chain_id"] = chain_id;
  j["V"] = layout.v_count;
  j["n"] = layout.n;
  j["H"] = layout.H;
  j["R"] = layout.R;
  j["expected_kept"] = kept;
  j["stride"] = layout.stride();
  j["record_layout"] = {
      {"nu", {layout.nu_offset(), layout.H}},
      {"labels", {layout.labels_offset(), layout.n}},
      {"pi", {layout.pi_offset(), static_cast<std::size_t>(layout.H) * layout.slots()}},
      {"z", {layout.z_offset(), layout.slots()}},
      {"lambda", {layout.lambda_offset(), static_cast<std::size_t>(layout.H) * layout.R}},
  };
  return j.dump();
}

TraceWriter::TraceWriter(const std::string& path, const TraceLayout& layout, const ModelConfig& cfg,
                         std::uint64_t chain_id)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), stride_(layout.stride()) {
  if (!out_) throw IoError("cannot write trace '" + path + "'");
  const auto header = trace_header_json(layout, cfg, chain_id, cfg.kept_count());
  out_.write(kMagic, 8);
  write_u64(out_, header.size());
  out_.write(header.data(), static_cast<std::streamsize>(header.size()));
  if (!out_) throw IoError("cannot write trace '" + path + "'");
}

TraceWriter TraceWriter::reopen(const std::string& path, std::size_t keep_records) {
  ParsedHeader h;
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open trace '" + path + "'");
    h = read_header(in, path);
  }
  const auto stride = h.layout.stride();
  const auto want = h.data_offset + keep_records * stride * sizeof(double);
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec || size < want) {
    throw IoError("trace '" + path + "' holds fewer records than the snapshot expects");
  }
  std::filesystem::resize_file(path, want, ec);
  if (ec) throw IoError("cannot truncate trace '" + path + "': " + ec.message());
  TraceWriter w;
  w.path_ = path;
  w.out_.open(path, std::ios::binary | std::ios::app);
  if (!w.out_) throw IoError("cannot append to trace '" + path + "'");
  w.stride_ = stride;
  w.written_ = keep_records;
  return w;
}

void TraceWriter::append(std::span<const double> record) {
  if (record.size() != stride_) throw DomainError("TraceWriter: record has wrong stride");
  out_.write(reinterpret_cast<const char*>(record.data()), static_cast<std::streamsize>(record.size_bytes()));
  if (!out_) throw IoError("write failed on trace '" + path_ + "'");
  ++written_;
}

void TraceWriter::flush() { out_.flush(); }

void write_trace(const std::string& path, const PosteriorTrace& trace) {
  TraceWriter w(path, trace.layout, trace.config, trace.chain_id);
  for (std::size_t k = 0; k < trace.kept(); ++k) w.append(trace.record(k));
  w.flush();
}

PosteriorTrace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace '" + path + "'");
  auto h = read_header(in, path);
  PosteriorTrace t;
  t.layout = h.layout;
  t.config = h.config;
  t.chain_id = h.chain_id;
  const auto stride = h.layout.stride();
  const auto size = std::filesystem::file_size(path);
  const std::size_t count = (size - h.data_offset) / (stride * sizeof(double));
  const auto kept = kept_iteration_indices(h.config);
  if (count > kept.size()) throw IoError("'" + path + "': more records than the config allows");
  t.kept_iterations.assign(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(count));
  t.records.resize(count * stride);
  if (!in.read(reinterpret_cast<char*>(t.records.data()),
               static_cast<std::streamsize>(t.records.size() * sizeof(double)))) {
    throw IoError("'" + path + "': truncated trace records");
  }
  return t;
}

void export_trace_csv(std::ostream& out, const PosteriorTrace& trace) {
  const auto& L = trace.layout;
  const auto slots = L.slots();
  out << "iteration";
  for (int h = 1; h <= L.H; ++h) out << ",nu_" << h;
  for (std::size_t i = 1; i <= L.n; ++i) out << ",G_" << i;
  for (int h = 1; h <= L.H; ++h) {
    for (std::size_t l = 1; l <= slots; ++l) out << ",pi_" << h << '_' << l;
  }
  for (std::size_t l = 1; l <= slots; ++l) out << ",Z_" << l;
  for (int h = 1; h <= L.H; ++h) {
    for (int r = 1; r <= L.R; ++r) out << ",lambda_" << h << '_' << r;
  }
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t k = 0; k < trace.kept(); ++k) {
    out << trace.kept_iterations[k];
    const auto rec = trace.record(k);
    for (std::size_t j = 0; j < rec.size(); ++j) {
      if (j >= L.labels_offset() && j < L.pi_offset()) {
        out << ',' << static_cast<int>(rec[j]);
      } else {
        out << ',' << rec[j];
      }
    }
    out << '\n';
  }
}

}  // namespace popnet
