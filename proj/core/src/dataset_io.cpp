#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string_view>

#include "popnet/errors.hpp"
#include "popnet/netcore.hpp"

namespace popnet {

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-blank line; false at end of stream.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  }

  // Push back the last line so the next call to next() returns it again.
  void unread(std::string line) { pending_ = std::move(line); }

  bool next_or_pending(std::string& line) {
    if (pending_) {
      line = std::move(*pending_);
      pending_.reset();
      return true;
    }
    return next(line);
  }

  std::size_t number() const noexcept { return number_; }

 private:
  std::istream& in_;
  std::size_t number_ = 0;
  std::optional<std::string> pending_;
};

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_int(std::string_view s, long long& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

struct Header {
  int v_count;
  std::size_t n;
};

Header parse_header(LineReader& reader) {
  std::string line;
  if (!reader.next(line)) throw ParseError(reader.number() + 1, "missing header 'V=<int> n=<int>'");
  const auto tokens = split_ws(line);
  long long v = -1, n = -1;
  bool have_v = false, have_n = false;
  for (auto tok : tokens) {
    if (tok.starts_with("V=")) {
      have_v = parse_int(tok.substr(2), v);
    } else if (tok.starts_with("n=")) {
      have_n = parse_int(tok.substr(2), n);
    } else {
      throw ParseError(reader.number(), "unexpected header token '" + std::string(tok) + "'");
    }
  }
  if (!have_v || !have_n || tokens.size() != 2) {
    throw ParseError(reader.number(), "malformed header, expected 'V=<int> n=<int>'");
  }
  if (v < 2 || v > 100000) throw ParseError(reader.number(), "V must be >= 2");
  if (n < 1) throw ParseError(reader.number(), "n must be >= 1");
  return {static_cast<int>(v), static_cast<std::size_t>(n)};
}

std::optional<std::vector<int>> parse_labels(LineReader& reader, std::size_t n) {
  std::string line;
  if (!reader.next_or_pending(line)) return std::nullopt;
  std::string_view view(line);
  const auto first = view.find_first_not_of(" \t");
  view.remove_prefix(first);
  if (!view.starts_with("labels:")) {
    throw ParseError(reader.number(), "unexpected trailing content");
  }
  view.remove_prefix(7);
  std::vector<int> labels;
  for (auto tok : split_ws(view)) {
    long long g;
    if (!parse_int(tok, g) || g < 1) {
      throw ParseError(reader.number(), "labels must be positive integers");
    }
    labels.push_back(static_cast<int>(g));
  }
  if (labels.size() != n) {
    throw ParseError(reader.number(), "expected " + std::to_string(n) + " labels, got " +
                                          std::to_string(labels.size()));
  }
  if (reader.next(line)) throw ParseError(reader.number(), "content after labels block");
  return labels;
}

NetworkDataset load_vech(LineReader& reader) {
  const auto header = parse_header(reader);
  const std::size_t slots = pair_count(header.v_count);
  std::vector<EdgeVector> networks;
  networks.reserve(header.n);
  std::string line;
  for (std::size_t i = 0; i < header.n; ++i) {
    if (!reader.next(line)) {
      throw ParseError(reader.number() + 1, "truncated: expected " + std::to_string(header.n) +
                                                " networks, found " + std::to_string(i));
    }
    const auto tokens = split_ws(line);
    if (tokens.size() != slots) {
      throw ParseError(reader.number(), "row has " + std::to_string(tokens.size()) +
                                            " values, expected V(V-1)/2 = " + std::to_string(slots));
    }
    std::vector<std::uint8_t> bits(slots);
    for (std::size_t l = 0; l < slots; ++l) {
      if (tokens[l] == "0") {
        bits[l] = 0;
      } else if (tokens[l] == "1") {
        bits[l] = 1;
      } else {
        throw ParseError(reader.number(), "non-binary value '" + std::string(tokens[l]) +
                                              "' at position " + std::to_string(l + 1));
      }
    }
    networks.emplace_back(header.v_count, std::move(bits));
  }
  auto labels = parse_labels(reader, header.n);
  return NetworkDataset(header.v_count, std::move(networks), std::move(labels));
}

NetworkDataset load_adjlist(LineReader& reader) {
  const auto header = parse_header(reader);
  const PairTable table(header.v_count);
  std::vector<EdgeVector> networks;
  networks.reserve(header.n);
  std::string line;
  for (std::size_t i = 1; i <= header.n; ++i) {
    if (!reader.next_or_pending(line)) {
      throw ParseError(reader.number() + 1, "truncated: expected record 'network " +
                                                std::to_string(i) + "'");
    }
    const auto tokens = split_ws(line);
    long long idx;
    if (tokens.size() != 2 || tokens[0] != "network" || !parse_int(tokens[1], idx) ||
        idx != static_cast<long long>(i)) {
      throw ParseError(reader.number(), "expected 'network " + std::to_string(i) + "'");
    }
    EdgeVector edges(header.v_count);
    std::set<std::size_t> seen;
    while (reader.next(line)) {
      const auto fields = split_ws(line);
      if (!fields.empty() && (fields[0] == "network" || fields[0].starts_with("labels:"))) {
        reader.unread(line);
        break;
      }
      long long a, b;
      if (fields.size() != 2 || !parse_int(fields[0], a) || !parse_int(fields[1], b)) {
        throw ParseError(reader.number(), "expected '<u> <v>' edge line");
      }
      const std::string where = "line " + std::to_string(reader.number()) + ": ";
      if (a < 1 || b < 1 || a > header.v_count || b > header.v_count) {
        throw ValidationError(where + "node label outside 1.." + std::to_string(header.v_count));
      }
      if (a == b) {
        throw ValidationError(where + "diagonal entry (" + std::to_string(a) + "," +
                              std::to_string(b) + ") breaks hollowness");
      }
      const auto l = table.edge(static_cast<int>(a - 1), static_cast<int>(b - 1));
      if (!seen.insert(l).second) {
        throw ValidationError(where + "edge {" + std::to_string(a) + "," + std::to_string(b) +
                              "} listed twice; each undirected edge appears once");
      }
      edges.set(l, true);
    }
    networks.push_back(std::move(edges));
  }
  auto labels = parse_labels(reader, header.n);
  return NetworkDataset(header.v_count, std::move(networks), std::move(labels));
}

void write_labels(std::ostream& out, const NetworkDataset& data) {
  if (!data.true_labels()) return;
  out << "labels:";
  for (int g : *data.true_labels()) out << ' ' << g;
  out << '\n';
}

}  // namespace

DatasetFormat parse_dataset_format(const std::string& tag) {
  if (tag == "vech") return DatasetFormat::Vech;
  if (tag == "adjlist") return DatasetFormat::AdjList;
  throw DomainError("unknown dataset format '" + tag + "' (expected vech or adjlist)");
}

std::string to_string(DatasetFormat format) {
  return format == DatasetFormat::Vech ? "vech" : "adjlist";
}

NetworkDataset load_dataset(std::istream& in, DatasetFormat format) {
  LineReader reader(in);
  return format == DatasetFormat::Vech ? load_vech(reader) : load_adjlist(reader);
}

void save_dataset(std::ostream& out, const NetworkDataset& data, DatasetFormat format) {
  out << "V=" << data.v_count() << " n=" << data.size() << '\n';
  if (format == DatasetFormat::Vech) {
    std::string row;
    for (const auto& net : data.networks()) {
      row.clear();
      for (std::size_t l = 0; l < net.size(); ++l) {
        if (l) row.push_back(' ');
        row.push_back(net[l] ? '1' : '0');
      }
      out << row << '\n';
    }
  } else {
    const PairTable table(data.v_count());
    for (std::size_t i = 0; i < data.size(); ++i) {
      out << "network " << (i + 1) << '\n';
      for (std::size_t l = 0; l < table.size(); ++l) {
        if (!data[i][l]) continue;
        const auto p = table.pair(l);
        out << (p.u + 1) << ' ' << (p.v + 1) << '\n';
      }
    }
  }
  write_labels(out, data);
}

NetworkDataset load_dataset_file(const std::string& path, DatasetFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path + "'");
  return load_dataset(in, format);
}

NetworkDataset load_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path + "'");
  std::string line;
  DatasetFormat format = DatasetFormat::Vech;
  int seen = 0;
  while (seen < 2 && std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (++seen == 2 && line.find("network") != std::string::npos) format = DatasetFormat::AdjList;
  }
  in.clear();
  in.seekg(0);
  return load_dataset(in, format);
}

void save_dataset_file(const std::string& path, const NetworkDataset& data, DatasetFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset '" + path + "'");
  save_dataset(out, data, format);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace popnet
