#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "popnet/errors.hpp"
#include "popnet/gibbs.hpp"
#include "popnet/graphgen.hpp"
#include "popnet/netstats.hpp"
#include "popnet/trace_io.hpp"

#ifndef POPNET_VERSION
#define POPNET_VERSION "0.0.0"
#endif

namespace popnet::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

namespace {

const char* kBundledConfig =
    "# Settings used for the four-class simulation study.\n"
    "H = 30\n"
    "R = 10\n"
    "mu = 0\n"
    "sigma2 = 10\n"
    "a1 = 2.5\n"
    "a2 = 3.5\n"
    "iterations = 5000\n"
    "burn_in = 1000\n"
    "thin = 1\n"
    "seed = 1\n";

std::string num(double x) {
  if (std::isnan(x)) return "NaN";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed on '" + path + "'");
}

void write_atomically(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  write_text_file(tmp, text);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace '" + path + "': " + ec.message());
}

// A file path, or the name of a built-in text when no such file exists.
KeyValues load_key_values(const std::string& source, const std::optional<std::string>& bundled,
                          const char* what) {
  std::istringstream in;
  std::string origin = source;
  if (fs::exists(source)) {
    in.str(read_text_file(source));
  } else if (bundled) {
    in.str(*bundled);
    origin = "built-in " + source;
  } else {
    throw ConfigError(std::string("no ") + what + " file or built-in named '" + source + "'");
  }
  try {
    return KeyValues::parse(in);
  } catch (const ParseError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

ModelConfig load_model_config(const std::string& source) {
  const auto kv = load_key_values(source, source == "paper_sec5" ? std::optional<std::string>(kBundledConfig)
                                                                  : std::nullopt,
                                  "config");
  const fs::path base = fs::exists(source) ? fs::path(source).parent_path() : fs::path{};
  return ModelConfig::from_key_values(kv, base);
}

void write_matrix_csv(const std::string& path, std::span<const double> values, int v_count, double diagonal) {
  const auto dense = unvech_dense(values, v_count, diagonal);
  std::string text;
  for (int r = 0; r < v_count; ++r) {
    for (int c = 0; c < v_count; ++c) {
      if (c) text.push_back(',');
      text += num(dense[static_cast<std::size_t>(r) * v_count + c]);
    }
    text.push_back('\n');
  }
  write_text_file(path, text);
}

std::string chain_trace_path(const std::string& output, int chain, int chains) {
  if (chains == 1) return output;
  fs::path p(output);
  const auto ext = p.extension().string();
  p.replace_extension();
  return p.string() + ".chain" + std::to_string(chain) + ext;
}

struct Manifest {
  json body;
  Clock::time_point start = Clock::now();

  Manifest(const std::string& command, const std::vector<std::string>& args) {
    body["command"] = command;
    body["argv"] = std::vector<std::string>(args.begin() + 1, args.end());
    body["cwd"] = fs::current_path().string();
    body["version"] = POPNET_VERSION;
  }

  void write(const std::string& path) {
    body["wall_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
    write_text_file(path, body.dump(2) + "\n");
  }
};

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string recipe;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::string format = "vech";
};

int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("simulate", args);
  auto kv = load_key_values(a.recipe, bundled_recipe(a.recipe), "recipe");
  if (a.seed) kv.set("seed", std::to_string(*a.seed));
  const auto file = parse_recipe(kv);
  RngStream rng(file.seed, 0);
  const auto data = simulate_population(file.recipe, rng);
  const auto format = parse_dataset_format(a.format);
  save_dataset_file(a.output, data, format);

  std::string recipe_text = "# resolved recipe; every parameter and seed used\n" + file.resolved.to_text();
  write_text_file(a.output + ".recipe", recipe_text);
  std::string labels;
  for (int g : *data.true_labels()) labels += std::to_string(g) + "\n";
  write_text_file(a.output + ".labels", labels);

  manifest.body["recipe"] = a.recipe;
  manifest.body["seed"] = file.seed;
  manifest.body["template_seed"] = file.template_seed;
  manifest.body["outputs"] = {a.output, a.output + ".recipe", a.output + ".labels"};
  manifest.write(a.output + ".manifest.json");
  out << "simulated " << data.size() << " networks on V=" << data.v_count() << " nodes ("
      << file.recipe.nu.size() << " classes) -> " << a.output << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::string config;
  std::string output;
  int chains = 1;
  bool resume = false;
  std::optional<int> snapshot_every;
  std::optional<int> stop_after;
  bool progress = false;
};

struct ChainOutcome {
  std::string trace_path;
  int chain_id = 0;
  int completed = 0;
  bool resumed = false;
  double wall_seconds = 0.0;
  StepTimings timings;
  std::size_t label_switches = 0;
};

ChainOutcome run_one_chain(const NetworkDataset& data, const ModelConfig& cfg, const FitArgs& a, int chain,
                           std::ostream& err, std::mutex& err_mutex) {
  ChainOutcome result;
  result.chain_id = chain - 1;
  result.trace_path = chain_trace_path(a.output, chain, a.chains);
  const std::string snap_path = result.trace_path + ".snapshot";

  ChainRunner runner(data, cfg, static_cast<std::uint64_t>(result.chain_id));
  std::optional<TraceWriter> writer;
  if (a.resume && fs::exists(snap_path)) {
    runner.restore(read_text_file(snap_path));
    const auto kept = kept_iteration_indices(cfg);
    const auto done = static_cast<std::size_t>(
        std::upper_bound(kept.begin(), kept.end(), runner.completed_iterations()) - kept.begin());
    writer.emplace(TraceWriter::reopen(result.trace_path, done));
    result.resumed = true;
  } else {
    if (a.resume) {
      std::lock_guard lock(err_mutex);
      err << "chain " << chain << ": no snapshot at " << snap_path << ", starting from scratch\n";
    }
    writer.emplace(result.trace_path, runner.layout(), cfg, static_cast<std::uint64_t>(result.chain_id));
  }

  RunOptions options;
  options.chain_id = static_cast<std::uint64_t>(result.chain_id);
  options.keep_in_memory = true;
  options.on_record = [&](int, std::span<const double> record) { writer->append(record); };
  options.on_snapshot = [&](int, const std::string& text) {
    writer->flush();
    write_atomically(snap_path, text);
  };
  if (a.progress) {
    options.progress_every = std::max(1, cfg.iterations / 20);
    options.on_progress = [&](int it, int total) {
      std::lock_guard lock(err_mutex);
      err << "chain " << chain << ": " << it << "/" << total << "\n";
    };
  }
  runner.run(options, a.stop_after.value_or(-1));
  writer->flush();
  result.completed = runner.completed_iterations();
  if (result.completed >= cfg.iterations) {
    std::error_code ec;
    fs::remove(snap_path, ec);
  } else {
    // Interrupted on purpose: leave a snapshot at the stopping point.
    write_atomically(snap_path, runner.snapshot());
  }
  result.wall_seconds = runner.trace().wall_seconds;
  result.timings = runner.trace().timings;
  result.label_switches = detect_label_switches(runner.trace()).size();
  return result;
}

int cmd_fit(const FitArgs& a, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Manifest manifest("fit", args);
  if (a.chains < 1) throw ConfigError("--chains must be at least 1");
  ModelConfig cfg = load_model_config(a.config);
  if (a.snapshot_every) cfg.snapshot_every = *a.snapshot_every;
  const auto data = load_dataset_file(a.data);
  cfg.validate(data.edge_slots());
  for (const auto& w : cfg.warnings()) err << "warning: " << w << "\n";

  std::vector<ChainOutcome> outcomes(static_cast<std::size_t>(a.chains));
  std::vector<std::exception_ptr> failures(outcomes.size());
  std::mutex err_mutex;
  auto work = [&](int chain) {
    try {
      outcomes[chain - 1] = run_one_chain(data, cfg, a, chain, err, err_mutex);
    } catch (...) {
      failures[chain - 1] = std::current_exception();
    }
  };
  if (a.chains == 1) {
    work(1);
  } else {
    std::vector<std::thread> threads;
    for (int c = 1; c <= a.chains; ++c) threads.emplace_back(work, c);
    for (auto& t : threads) t.join();
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  manifest.body["config"] = a.config;
  manifest.body["resolved_config"] = cfg.to_key_values().to_text();
  manifest.body["data"] = a.data;
  manifest.body["seed"] = cfg.seed;
  json chains = json::array();
  for (const auto& o : outcomes) {
    chains.push_back({{"trace", o.trace_path},
                      {"chain_id", o.chain_id},
                      {"completed_iterations", o.completed},
                      {"resumed", o.resumed},
                      {"wall_seconds", o.wall_seconds},
                      {"step_seconds", o.timings.seconds},
                      {"label_switch_flags", o.label_switches}});
    out << "chain " << o.chain_id + 1 << ": " << o.completed << "/" << cfg.iterations << " sweeps, "
        << std::fixed << std::setprecision(2) << o.wall_seconds << " s -> " << o.trace_path << "\n";
    out.unsetf(std::ios::fixed);
  }
  manifest.body["chains"] = std::move(chains);
  manifest.write(a.output + ".manifest.json");
  return kOk;
}

// ---------------------------------------------------------------------------

struct SummarizeArgs {
  std::string trace;
  std::string output;
  std::optional<std::string> data;
  double mass = 0.95;
};

int cmd_summarize(const SummarizeArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("summarize", args);
  const auto trace = read_trace(a.trace);
  if (trace.kept() == 0) throw IoError("'" + a.trace + "' holds no kept draws");
  const auto s = summarize_posterior(trace, a.mass);
  const int V = trace.layout.v_count;
  const std::size_t L = s.slots;
  std::vector<std::string> outputs;
  auto matrix = [&](const std::string& suffix, std::span<const double> values, double diag) {
    const std::string path = a.output + suffix;
    write_matrix_csv(path, values, V, diag);
    outputs.push_back(path);
  };
  matrix(".pi_bar.q025.csv", s.pi_bar_lo, 0.0);
  matrix(".pi_bar.mean.csv", s.pi_bar_mean, 0.0);
  matrix(".pi_bar.q975.csv", s.pi_bar_hi, 0.0);

  const std::set<int> occupied(s.map_labels.begin(), s.map_labels.end());
  std::vector<double> dev(L);
  for (int h1 : occupied) {
    const std::size_t off = static_cast<std::size_t>(h1 - 1) * L;
    const std::span<const double> mean(s.class_pi_mean.data() + off, L);
    const std::string stem = ".class" + std::to_string(h1);
    matrix(stem + ".mean.csv", mean, 0.0);
    matrix(stem + ".hpd_lo.csv", std::span<const double>(s.class_hpd_lo.data() + off, L), 0.0);
    matrix(stem + ".hpd_hi.csv", std::span<const double>(s.class_hpd_hi.data() + off, L), 0.0);
    for (std::size_t l = 0; l < L; ++l) dev[l] = mean[l] - s.pi_bar_mean[l];
    matrix(stem + ".deviation.csv", dev, 0.0);
  }

  json j;
  j["trace"] = a.trace;
  j["kept"] = trace.kept();
  j["hpd_mass"] = a.mass;
  json nu = json::array();
  for (int h = 0; h < s.H; ++h) {
    nu.push_back({{"class", h + 1}, {"mean", s.nu_mean[h]}, {"q025", s.nu_lo[h]}, {"q975", s.nu_hi[h]}});
  }
  j["nu"] = std::move(nu);
  j["occupied_classes"] = std::vector<int>(occupied.begin(), occupied.end());
  j["map_labels"] = s.map_labels;
  j["label_switch_flags"] = detect_label_switches(trace).size();

  if (a.data) {
    const auto data = load_dataset_file(*a.data);
    if (data.v_count() != V || data.size() != trace.layout.n) {
      throw ValidationError("dataset '" + *a.data + "' does not match the trace dimensions");
    }
    if (data.true_labels()) {
      j["ari_vs_truth"] = adjusted_rand_index(s.map_labels, *data.true_labels());
    }
    std::vector<double> shared(L, 0.0);
    for (const auto& net : data.networks()) {
      for (std::size_t l = 0; l < L; ++l) shared[l] += net[l];
    }
    for (double& x : shared) x /= static_cast<double>(data.size());
    json per = json::array();
    double model_sum = 0.0, base_sum = 0.0;
    std::size_t defined = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const std::size_t off = static_cast<std::size_t>(s.map_labels[i] - 1) * L;
      const auto m = auc_edge_prediction(data[i], std::span<const double>(s.class_pi_mean.data() + off, L));
      const auto b = auc_edge_prediction(data[i], shared);
      per.push_back({{"network", i + 1},
                     {"auc", m.undefined ? json(nullptr) : json(m.value)},
                     {"baseline_auc", b.undefined ? json(nullptr) : json(b.value)}});
      if (!m.undefined && !b.undefined) {
        model_sum += m.value;
        base_sum += b.value;
        ++defined;
      }
    }
    j["auc"] = {{"per_network", std::move(per)},
                {"mean", defined ? model_sum / defined : 0.0},
                {"baseline_mean", defined ? base_sum / defined : 0.0},
                {"defined_networks", defined}};
    out << "mean AUC " << num(defined ? model_sum / defined : 0.0) << " (shared-probability baseline "
        << num(defined ? base_sum / defined : 0.0) << ")\n";
  }
  const std::string summary_path = a.output + ".summary.json";
  write_text_file(summary_path, j.dump(2) + "\n");
  outputs.push_back(summary_path);

  out << "occupied classes:";
  for (int h : occupied) out << ' ' << h << " (nu " << num(s.nu_mean[h - 1]) << ")";
  out << "\nwrote " << outputs.size() << " files with prefix " << a.output << "\n";
  manifest.body["trace"] = a.trace;
  manifest.body["seed"] = trace.config.seed;
  manifest.body["outputs"] = outputs;
  manifest.write(a.output + ".manifest.json");
  return kOk;
}

// ---------------------------------------------------------------------------

struct DiagnoseArgs {
  std::string trace;
  std::optional<std::string> output;
  std::optional<std::string> manifest;
};

int cmd_diagnose(const DiagnoseArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("diagnose", args);
  const auto trace = read_trace(a.trace);
  const std::size_t K = trace.kept();
  if (K < 10) throw IoError("'" + a.trace + "' holds fewer than 10 kept draws; ESS needs more");
  const auto map = map_cluster_labels(trace);
  const std::set<int> occupied(map.begin(), map.end());
  const std::size_t L = trace.layout.slots();

  json ess = json::array();
  std::vector<double> column(K);
  double min_ess = std::numeric_limits<double>::infinity();
  auto report = [&](const std::string& name) {
    const auto e = effective_sample_size(column);
    min_ess = std::min(min_ess, e.ess);
    ess.push_back({{"quantity", name}, {"ess", e.ess}, {"constant", e.constant}, {"antithetic", e.antithetic}});
    out << std::left << std::setw(18) << name << " ESS " << std::setw(10) << num(std::round(e.ess))
        << (e.constant ? " [constant]" : "") << (e.antithetic ? " [antithetic]" : "") << "\n";
  };
  for (int h1 : occupied) {
    const int h = h1 - 1;
    for (std::size_t k = 0; k < K; ++k) column[k] = trace.nu(k, h);
    report("nu_" + std::to_string(h1));
    for (std::size_t k = 0; k < K; ++k) column[k] = trace.lambda(k, h, 0);
    report("lambda1_" + std::to_string(h1));
    // The first pair and the pair with the largest posterior spread.
    std::size_t widest = 0;
    double widest_var = -1.0;
    for (std::size_t l = 0; l < L; ++l) {
      double m = 0.0, m2 = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        const double x = trace.pi(k, h, l);
        m += x;
        m2 += x * x;
      }
      const double var = m2 / K - (m / K) * (m / K);
      if (var > widest_var) {
        widest_var = var;
        widest = l;
      }
    }
    for (std::size_t l : {std::size_t{0}, widest}) {
      for (std::size_t k = 0; k < K; ++k) column[k] = trace.pi(k, h, l);
      report("pi_" + std::to_string(h1) + "_" + std::to_string(l + 1));
      if (widest == 0) break;
    }
  }
  for (std::size_t k = 0; k < K; ++k) column[k] = trace.z(k, 0);
  report("Z_1");

  const auto switches = detect_label_switches(trace);
  json flags = json::array();
  for (const auto& sw : switches) {
    flags.push_back({{"iteration", sw.iteration}, {"from", sw.class_a}, {"to", sw.class_b}});
  }
  out << "label-switch flags: " << switches.size() << "\n";

  json j;
  j["trace"] = a.trace;
  j["kept"] = K;
  j["ess"] = std::move(ess);
  j["min_ess"] = min_ess;
  j["label_switches"] = std::move(flags);

  const std::string manifest_path = a.manifest.value_or(a.trace + ".manifest.json");
  static const char* kStepNames[] = {"allocate", "nu", "polya_gamma", "z", "rows", "theta", "pi"};
  std::optional<json> timing;
  if (fs::exists(manifest_path)) {
    const auto fit = nlohmann::json::parse(read_text_file(manifest_path), nullptr, false);
    if (!fit.is_discarded() && fit.contains("chains")) {
      for (const auto& c : fit["chains"]) {
        if (fs::path(c.value("trace", "")).filename() == fs::path(a.trace).filename() || fit["chains"].size() == 1) {
          timing = json::object();
          (*timing)["wall_seconds"] = c.value("wall_seconds", 0.0);
          const auto steps = c.value("step_seconds", std::vector<double>{});
          for (std::size_t s = 0; s < steps.size() && s < 7; ++s) (*timing)[kStepNames[s]] = steps[s];
        }
      }
    }
  }
  if (timing) {
    out << "per-step seconds:";
    for (const auto& [k, v] : timing->items()) out << ' ' << k << '=' << num(v.get<double>());
    out << "\n";
    j["timings"] = *timing;
  } else {
    out << "per-step timings unavailable (no fit manifest at " << manifest_path << ")\n";
    j["timings"] = nullptr;
  }
  const std::string out_path = a.output.value_or(a.trace + ".diagnostics.json");
  write_text_file(out_path, j.dump(2) + "\n");
  manifest.body["trace"] = a.trace;
  manifest.body["seed"] = trace.config.seed;
  manifest.body["outputs"] = {out_path};
  manifest.write(out_path + ".manifest.json");
  return kOk;
}

// ---------------------------------------------------------------------------

struct StatsArgs {
  std::string data;
  std::string output;
  std::optional<std::string> groups;
};

int cmd_stats(const StatsArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("stats", args);
  const auto data = load_dataset_file(a.data);
  std::vector<int> groups;
  if (a.groups) {
    std::string text = *a.groups;
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream in(text);
    int g;
    while (in >> g) groups.push_back(g);
    if (groups.size() != static_cast<std::size_t>(data.v_count())) {
      throw ConfigError("--groups needs one entry per node (" + std::to_string(data.v_count()) + ")");
    }
  }
  std::string csv =
      "network,degree_mean,degree_variance,transitivity,avg_path_length,degree_assortativity,"
      "transitivity_undefined,assortativity_undefined,no_connected_pairs,unreachable_fraction";
  if (!groups.empty()) csv += ",partition_assortativity";
  csv += "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto t = topology_summary(data[i]);
    csv += std::to_string(i + 1) + "," + num(t.degree_mean) + "," + num(t.degree_variance) + "," +
           num(t.transitivity) + "," + num(t.avg_path_length) + "," + num(t.degree_assortativity) + "," +
           (t.transitivity_undefined ? "1" : "0") + "," + (t.assortativity_undefined ? "1" : "0") + "," +
           (t.no_connected_pairs ? "1" : "0") + "," + num(t.unreachable_fraction);
    if (!groups.empty()) csv += "," + num(partition_assortativity(data[i], groups));
    csv += "\n";
  }
  write_text_file(a.output, csv);
  manifest.body["data"] = a.data;
  manifest.body["seed"] = nullptr;
  manifest.body["outputs"] = {a.output};
  manifest.write(a.output + ".manifest.json");
  out << "wrote statistics for " << data.size() << " networks -> " << a.output << "\n";
  return kOk;
}

struct ExportArgs {
  std::string trace;
  std::string output;
};

int cmd_trace_export(const ExportArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("trace export", args);
  const auto trace = read_trace(a.trace);
  std::ostringstream csv;
  export_trace_csv(csv, trace);
  write_text_file(a.output, csv.str());
  manifest.body["trace"] = a.trace;
  manifest.body["seed"] = trace.config.seed;
  manifest.body["outputs"] = {a.output};
  manifest.write(a.output + ".manifest.json");
  out << "exported " << trace.kept() << " draws -> " << a.output << "\n";
  return kOk;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixtures of low-rank factorizations for populations of binary networks", "popnet"};
  app.require_subcommand(1);
  app.set_version_flag("--version", POPNET_VERSION);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a network population from a recipe");
  simulate->add_option("-r,--recipe", sim.recipe, "Recipe file or built-in name (paper_sec5)")->required();
  simulate->add_option("-o,--output", sim.output, "Dataset path")->required();
  simulate->add_option("--seed", sim.seed, "Override the recipe seed");
  simulate->add_option("--format", sim.format, "vech or adjlist")->check(CLI::IsMember({"vech", "adjlist"}));

  FitArgs fit;
  auto* fitc = app.add_subcommand("fit", "Run the Gibbs sampler");
  fitc->add_option("-d,--data", fit.data, "Dataset path")->required();
  fitc->add_option("-c,--config", fit.config, "Model config file or built-in name (paper_sec5)")->required();
  fitc->add_option("-o,--output", fit.output, "Trace path")->required();
  fitc->add_option("--chains", fit.chains, "Independent chains run in parallel");
  fitc->add_flag("--resume", fit.resume, "Continue from the last snapshot");
  fitc->add_option("--snapshot-every", fit.snapshot_every, "Sweeps between snapshots (0 disables)");
  fitc->add_option("--stop-after", fit.stop_after, "Stop after this sweep, leaving a snapshot")->group("");
  fitc->add_flag("--progress", fit.progress, "Report progress on stderr");

  SummarizeArgs sum;
  auto* summarize = app.add_subcommand("summarize", "Posterior summaries from a trace");
  summarize->add_option("-t,--trace", sum.trace, "Trace path")->required();
  summarize->add_option("-o,--output", sum.output, "Output prefix")->required();
  summarize->add_option("-d,--data", sum.data, "Dataset, for per-network AUC");
  summarize->add_option("--mass", sum.mass, "HPD mass")->check(CLI::Range(0.5, 0.999));

  DiagnoseArgs diag;
  auto* diagnose = app.add_subcommand("diagnose", "Effective sample sizes, label switching and timings");
  diagnose->add_option("-t,--trace", diag.trace, "Trace path")->required();
  diagnose->add_option("-o,--output", diag.output, "Report path (default <trace>.diagnostics.json)");
  diagnose->add_option("--manifest", diag.manifest, "Fit manifest (default <trace>.manifest.json)");

  StatsArgs st;
  auto* stats = app.add_subcommand("stats", "Per-network topology statistics as CSV");
  stats->add_option("-d,--data", st.data, "Dataset path")->required();
  stats->add_option("-o,--output", st.output, "CSV path")->required();
  stats->add_option("--groups", st.groups, "Node partition for partition assortativity, e.g. 1,1,2,2");

  ExportArgs ex;
  auto* trace_cmd = app.add_subcommand("trace", "Trace utilities");
  trace_cmd->require_subcommand(1);
  auto* export_cmd = trace_cmd->add_subcommand("export", "Write a trace as wide CSV");
  export_cmd->add_option("-t,--trace", ex.trace, "Trace path")->required();
  export_cmd->add_option("-o,--output", ex.output, "CSV path")->required();

  std::string replay_manifest;
  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("manifest", replay_manifest, "Manifest path")->required();

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  if (simulate->parsed()) return cmd_simulate(sim, args, out);
  if (fitc->parsed()) return cmd_fit(fit, args, out, err);
  if (summarize->parsed()) return cmd_summarize(sum, args, out);
  if (diagnose->parsed()) return cmd_diagnose(diag, args, out);
  if (stats->parsed()) return cmd_stats(st, args, out);
  if (export_cmd->parsed()) return cmd_trace_export(ex, args, out);
  if (replay->parsed()) {
    const auto m = nlohmann::json::parse(read_text_file(replay_manifest), nullptr, false);
    if (m.is_discarded() || !m.contains("argv")) throw IoError("'" + replay_manifest + "' is not a manifest");
    std::vector<std::string> again{args.front()};
    for (const auto& s : m["argv"]) again.push_back(s.get<std::string>());
    if (again.size() > 1 && again[1] == "replay") throw ConfigError("refusing to replay a replay");
    return run_cli(again, out, err);
  }
  return kConfigError;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const ParseError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const ValidationError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kDataError;
  } catch (const DomainError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace popnet::cli
