// aspectmine: mine event aspects and product-type carousels from query-click
// logs.
//
//   aspectmine synth    --spec spec.json --out DIR
//   aspectmine mine     --input log.csv --event-pattern REGEX --out DIR
//   aspectmine evaluate --carousels DIR/carousels.json --truth truth.json
//   aspectmine sweep    --input log.csv --truth truth.json --event-pattern REGEX
//   aspectmine inspect  FILE
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 internal.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aspectmine/carousel.h"
#include "aspectmine/clustering.h"
#include "aspectmine/errors.h"
#include "aspectmine/evaluation.h"
#include "aspectmine/graph.h"
#include "aspectmine/ingest.h"
#include "aspectmine/log.h"
#include "aspectmine/pipeline.h"
#include "aspectmine/synthgen.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace aspectmine;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

nlohmann::json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw DataError(path.string() + " is not valid JSON");
  return doc;
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void WriteJson(const fs::path& path, const nlohmann::ordered_json& doc) {
  WriteText(path, doc.dump(2) + "\n");
}

// Flags shared by mine and sweep.
struct PipelineFlags {
  std::string input;
  std::string load_graph;
  std::string save_graph;
  std::vector<std::string> patterns;
  std::string pattern_file;
  std::string event = "event";
  double tau = 0.2;
  std::optional<double> tau_p;
  std::string mode = "ic2";
  std::size_t k = 20;
  std::size_t z = 5;
  int min_samples = 3;
  int max_iters = 50;
  bool prior_on_missing = false;
  std::string alpha_mode = "per-pt";
  int jobs = 1;
  bool strict = false;

  void AddSource(CLI::App* cmd) {
    cmd->add_option("--input", input, "Query-click log (CSV or JSONL)");
    cmd->add_option("--load-graph", load_graph, "Read a graph snapshot instead of a log");
    cmd->add_option("--save-graph", save_graph, "Write the built graph snapshot");
    cmd->add_option("--event-pattern", patterns, "Event keyword regex (repeatable)");
    cmd->add_option("--pattern-file", pattern_file, "File with one regex per line");
    cmd->add_option("--event", event, "Event label written to outputs");
    cmd->add_flag("--strict", strict, "Fail on the first malformed log row");
  }
  void AddModel(CLI::App* cmd) {
    cmd->add_option("--k", k, "Carousels reported")->check(CLI::PositiveNumber);
    cmd->add_option("--z", z, "Product-types per carousel")->check(CLI::PositiveNumber);
    cmd->add_option("--min-samples", min_samples, "DBSCAN core-point threshold")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", max_iters, "Iterative clustering cap")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--prior-on-missing", prior_on_missing,
                  "Give cluster pairs without impressions the prior-only weight");
    cmd->add_option("--alpha-mode", alpha_mode, "per-pt or global")
        ->check(CLI::IsMember({"per-pt", "global"}));
    cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  }

  MineOptions Options() const {
    MineOptions o;
    o.event = event;
    o.clustering.tau_q = tau;
    o.clustering.tau_p = tau_p.value_or(tau);
    o.clustering.mode = ParseMode(mode);
    o.clustering.max_iterations = max_iters;
    o.clustering.dbscan_min_samples = min_samples;
    o.clustering.weighting.prior_on_missing = prior_on_missing;
    o.clustering.threads = jobs;
    o.carousels.top_k = k;
    o.carousels.top_z = z;
    o.alpha_mode = ParseAlphaMode(alpha_mode);
    return o;
  }

  std::vector<std::string> AllPatterns() const {
    std::vector<std::string> all = patterns;
    if (!pattern_file.empty()) {
      auto more = ReadPatternFile(pattern_file);
      all.insert(all.end(), more.begin(), more.end());
    }
    return all;
  }

  // Loads the graph from a snapshot or from the filtered log.
  BipartiteGraph LoadGraph(RunManifest& manifest) const {
    BipartiteGraph graph;
    if (!load_graph.empty()) {
      std::ifstream in(load_graph);
      if (!in) throw IoError("cannot open graph snapshot " + load_graph);
      graph = LoadGraphSnapshot(in);
      manifest.inputs.push_back(load_graph);
    } else {
      if (input.empty()) throw ConfigError("one of --input or --load-graph is required");
      auto pats = AllPatterns();
      if (pats.empty()) {
        throw ConfigError("at least one --event-pattern or --pattern-file is required");
      }
      EventFilter filter(event, pats);
      LoadOptions lo;
      lo.strict = strict;
      LoadResult loaded = LoadAndFilterFile(input, filter, lo);
      for (const auto& issue : loaded.report.malformed) {
        Log(LogLevel::kWarn, "skipped row " + std::to_string(issue.row) + ": " + issue.reason);
      }
      manifest.inputs.push_back(input);
      manifest.event_patterns = pats;
      manifest.extra["load_report"] = {{"rows_read", loaded.report.rows_read},
                                       {"rows_matched", loaded.report.rows_matched},
                                       {"rows_malformed", loaded.report.malformed.size()}};
      graph = BipartiteGraph::Build(loaded.rows);
    }
    if (!save_graph.empty()) {
      std::ostringstream out;
      SaveGraphSnapshot(graph, out);
      WriteText(save_graph, out.str());
    }
    manifest.extra["graph"] = {{"queries", graph.num_queries()},
                               {"product_types", graph.num_product_types()},
                               {"edges", graph.num_edges()}};
    return graph;
  }
};

int RunSynth(const std::string& spec_path, std::optional<std::uint64_t> seed,
             const std::string& out_dir, const std::string& format) {
  RunManifest manifest;
  manifest.command = "synth";
  manifest.started_at = NowUtc();
  SyntheticSpec spec;
  if (!spec_path.empty()) {
    spec = SyntheticSpec::FromJson(ReadJsonFile(spec_path));
    manifest.inputs.push_back(spec_path);
  }
  if (seed) spec.seed = *seed;
  SyntheticData data = Generate(spec);
  fs::create_directories(out_dir);
  std::ostringstream log;
  std::string log_name;
  if (format == "jsonl") {
    WriteLogJsonl(log, data.rows);
    log_name = "log.jsonl";
  } else {
    WriteLogCsv(log, data.rows);
    log_name = "log.csv";
  }
  WriteText(fs::path(out_dir) / log_name, log.str());
  WriteJson(fs::path(out_dir) / "truth.json", GroundTruthToJson(data.truth));
  manifest.seed = spec.seed;
  manifest.config = spec.ToJson();
  manifest.extra["generator"] = kGeneratorAlgorithm;
  manifest.extra["rows"] = data.rows.size();
  manifest.extra["event_pattern"] = "^" + spec.event_keyword + " ";
  manifest.finished_at = NowUtc();
  WriteJson(fs::path(out_dir) / "manifest.json", manifest.ToJson());
  std::cout << "wrote " << data.rows.size() << " rows to " << (fs::path(out_dir) / log_name).string()
            << '\n';
  if (data.truth.certified_tau) {
    std::cout << "certified tau " << *data.truth.certified_tau << '\n';
  }
  return kOk;
}

int RunMine(const PipelineFlags& flags, const std::string& out_dir,
            const std::optional<std::string>& generated_at) {
  RunManifest manifest;
  manifest.command = "mine";
  manifest.started_at = NowUtc();
  MineOptions options = flags.Options();
  options.clustering.Validate();
  options.carousels.Validate();
  BipartiteGraph graph = flags.LoadGraph(manifest);
  MineResult result = Mine(graph, options);
  const std::string stamp = ResolveGeneratedAt(generated_at);

  fs::create_directories(out_dir);
  WriteJson(fs::path(out_dir) / "carousels.json",
            CarouselsToJson(MakeCarouselDocument(result, options, stamp)));
  WriteJson(fs::path(out_dir) / "partition.json", result.queries.ToJson(&graph.queries()));
  manifest.config = options.ToJson();
  manifest.config.erase("threads");
  manifest.config["jobs"] = flags.jobs;
  manifest.prior = result.prior;
  manifest.extra["generated_at"] = stamp;
  manifest.extra["iterations"] = result.iterations;
  manifest.extra["converged"] = result.converged;
  manifest.extra["clusters"] = result.queries.num_clusters();
  manifest.extra["carousels"] = result.carousels.size();
  manifest.finished_at = NowUtc();
  WriteJson(fs::path(out_dir) / "manifest.json", manifest.ToJson());
  if (!result.converged) {
    Log(LogLevel::kWarn, "iterative clustering hit --max-iters without converging");
  }
  std::cout << "mined " << result.queries.num_clusters() << " clusters, wrote "
            << result.carousels.size() << " carousels to "
            << (fs::path(out_dir) / "carousels.json").string() << '\n';
  return kOk;
}

int RunEvaluate(const std::string& carousels_path, const std::string& truth_path,
                const std::string& partition_path, const std::string& out_path) {
  CarouselDocument doc = CarouselsFromJson(ReadJsonFile(carousels_path));
  GroundTruth truth = GroundTruthFromJson(ReadJsonFile(truth_path));
  std::optional<Partition> predicted, expected;
  if (!partition_path.empty() && truth.true_partition) {
    nlohmann::json pj = ReadJsonFile(partition_path);
    predicted = Partition::FromJson(pj);
    if (!pj.contains("labels")) {
      throw DataError("partition file lacks 'labels'; cannot align with the truth");
    }
    auto labels = pj["labels"].get<std::vector<std::string>>();
    if (labels.size() != predicted->num_nodes()) {
      throw DataError("partition 'labels' length does not match its node count");
    }
    std::map<std::string, NodeIndex> index;
    for (std::size_t i = 0; i < labels.size(); ++i) index[labels[i]] = static_cast<NodeIndex>(i);
    std::vector<std::vector<NodeIndex>> clusters;
    std::size_t covered = 0;
    for (const auto& c : *truth.true_partition) {
      auto& ids = clusters.emplace_back();
      for (const auto& q : c) {
        auto it = index.find(q);
        if (it == index.end()) throw DataError("true partition names unknown query '" + q + "'");
        ids.push_back(it->second);
        ++covered;
      }
    }
    if (covered != labels.size()) {
      throw DataError("true partition and predicted partition cover different queries");
    }
    expected = Partition::FromClusters(Side::kQuery, labels.size(), clusters);
  }
  EvalReport report = Evaluate(doc.carousels, truth, predicted, expected);
  std::cout << report.ToText();
  if (!out_path.empty()) WriteJson(out_path, report.ToJson());
  return kOk;
}

std::vector<double> ParseTaus(const std::vector<std::string>& items) {
  std::vector<double> taus;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (part.empty()) continue;
      try {
        taus.push_back(std::stod(part));
      } catch (const std::exception&) {
        throw ConfigError("bad tau value '" + part + "'");
      }
    }
  }
  return taus;
}

int RunSweepCommand(const PipelineFlags& flags, const std::string& truth_path,
                    const std::string& spec_path, std::optional<std::uint64_t> seed,
                    const std::vector<std::string>& taus,
                    const std::vector<std::string>& modes, const std::string& out_dir) {
  RunManifest manifest;
  manifest.command = "sweep";
  manifest.started_at = NowUtc();
  for (const auto& m : modes) ParseMode(m);
  ParseTaus(taus);
  BipartiteGraph graph;
  GroundTruth truth;
  if (!spec_path.empty()) {
    SyntheticSpec spec = SyntheticSpec::FromJson(ReadJsonFile(spec_path));
    if (seed) spec.seed = *seed;
    spec.certify_tau = false;
    SyntheticData data = Generate(spec);
    graph = BipartiteGraph::Build(data.rows);
    truth = std::move(data.truth);
    manifest.inputs.push_back(spec_path);
    manifest.seed = spec.seed;
    manifest.extra["synthetic_spec"] = spec.ToJson();
    manifest.extra["generator"] = kGeneratorAlgorithm;
  } else {
    if (truth_path.empty()) throw ConfigError("sweep needs --truth (or --spec)");
    graph = flags.LoadGraph(manifest);
    truth = GroundTruthFromJson(ReadJsonFile(truth_path));
    manifest.inputs.push_back(truth_path);
  }
  SweepOptions sweep;
  sweep.base = flags.Options();
  sweep.jobs = flags.jobs;
  if (!taus.empty()) sweep.taus = ParseTaus(taus);
  if (!modes.empty()) {
    sweep.modes.clear();
    for (const auto& m : modes) sweep.modes.push_back(ParseMode(m));
  }
  auto cells = RunSweep(graph, truth, sweep);
  std::string table = FormatSweepTables(cells, sweep);
  std::cout << table;
  if (!out_dir.empty()) {
    WriteText(fs::path(out_dir) / "sweep.txt", table);
    WriteText(fs::path(out_dir) / "sweep.csv", FormatSweepCsv(cells));
    manifest.config = sweep.base.ToJson();
    manifest.config.erase("mode");
    manifest.config.erase("tau_q");
    manifest.config.erase("tau_p");
    manifest.config.erase("threads");
    manifest.config["taus"] = sweep.taus;
    std::vector<std::string> names;
    for (Mode m : sweep.modes) names.emplace_back(ModeName(m));
    manifest.config["modes"] = names;
    manifest.config["jobs"] = flags.jobs;
    manifest.finished_at = NowUtc();
    WriteJson(fs::path(out_dir) / "manifest.json", manifest.ToJson());
  }
  return kOk;
}

void InspectGraph(const BipartiteGraph& g) {
  std::cout << "|Q|=" << g.num_queries() << ", |P|=" << g.num_product_types()
            << ", |E|=" << g.num_edges() << '\n';
  EdgeStats t = g.Totals();
  std::size_t clicked = 0;
  for (NodeIndex p = 0; p < g.num_product_types(); ++p) {
    if (g.ProductTypeTotals(p).clicks > 0) ++clicked;
  }
  std::cout << "impressions=" << t.impressions << ", clicks=" << t.clicks << '\n';
  std::cout << "unique clicked product-types=" << clicked
            << ", unique impression product-types=" << g.num_product_types() << '\n';
}

void InspectPartition(const Partition& p) {
  std::map<std::size_t, std::size_t> histogram;
  for (const auto& m : p.clusters()) ++histogram[m.size()];
  std::cout << "side=" << SideName(p.side()) << ", nodes=" << p.num_nodes()
            << ", clusters=" << p.num_clusters() << ", noise=" << p.num_noise() << '\n';
  std::cout << "cluster size histogram (size: count)\n";
  for (auto it = histogram.rbegin(); it != histogram.rend(); ++it) {
    std::cout << "  " << it->first << ": " << it->second << '\n';
  }
}

void InspectCarousels(const CarouselDocument& doc) {
  std::cout << "event=" << doc.event << ", mode=" << doc.mode << ", tau=" << doc.tau
            << ", k=" << doc.k << ", z=" << doc.z << '\n';
  std::cout << "Carousels | Top-" << doc.z << " product-types by CTR\n";
  for (const auto& c : doc.carousels) {
    std::string label;
    for (std::size_t i = 0; i < c.member_queries.size() && i < 3; ++i) {
      if (i) label += "; ";
      label += c.member_queries[i];
    }
    if (c.member_queries.size() > 3) label += "; ...";
    std::cout << "Carousel " << c.size_rank << " (" << c.member_queries.size()
              << " queries: " << label << ") | ";
    for (std::size_t i = 0; i < c.items.size(); ++i) {
      if (i) std::cout << ", ";
      std::cout << c.items[i].product_type;
    }
    std::cout << '\n';
  }
}

int RunInspect(const std::string& path) {
  nlohmann::json doc = ReadJsonFile(path);
  if (doc.is_object() && doc.value("format", "") == "aspectmine-graph") {
    std::ifstream in(path);
    InspectGraph(LoadGraphSnapshot(in));
  } else if (doc.is_object() && doc.contains("carousels")) {
    InspectCarousels(CarouselsFromJson(doc));
  } else if (doc.is_object() && doc.contains("clusters") && doc.contains("side")) {
    InspectPartition(Partition::FromJson(doc));
  } else {
    throw DataError(path + ": not a graph snapshot, partition or carousels file");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mine event aspects and product-type carousels from query-click logs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(Version()));

  std::string spec_path, out_dir, format = "csv";
  std::optional<std::uint64_t> seed;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic log with planted aspects");
  synth->add_option("--spec", spec_path, "Synthetic spec JSON (defaults used if omitted)");
  synth->add_option("--seed", seed, "Override the synthetic spec seed");
  synth->add_option("--out", out_dir, "Output directory")->required();
  synth->add_option("--format", format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));

  PipelineFlags mine_flags;
  std::string mine_out = "out";
  std::optional<std::string> generated_at;
  auto* mine = app.add_subcommand("mine", "Mine carousels from a log");
  mine_flags.AddSource(mine);
  mine->add_option("--tau", mine_flags.tau, "Merge threshold")->check(CLI::PositiveNumber);
  mine->add_option("--tau-p", mine_flags.tau_p, "Product-type threshold (default --tau)");
  mine->add_option("--mode", mine_flags.mode, "ic1, ic2, hc or dbscan");
  mine_flags.AddModel(mine);
  mine->add_option("--out", mine_out, "Output directory");
  mine->add_option("--generated-at", generated_at,
                   "Timestamp recorded in carousels.json (default SOURCE_DATE_EPOCH or epoch)");

  std::string eval_carousels, eval_truth, eval_partition, eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "Score a carousels file");
  evaluate->add_option("--carousels", eval_carousels, "carousels.json")->required();
  evaluate->add_option("--truth", eval_truth, "Ground-truth JSON")->required();
  evaluate->add_option("--partition", eval_partition, "partition.json for ARI");
  evaluate->add_option("--out", eval_out, "Write the report as JSON");

  PipelineFlags sweep_flags;
  std::string sweep_truth, sweep_spec, sweep_out;
  std::optional<std::uint64_t> sweep_seed;
  std::vector<std::string> sweep_taus, sweep_modes;
  auto* sweep = app.add_subcommand("sweep", "Evaluate a tau x mode grid");
  sweep_flags.AddSource(sweep);
  sweep_flags.AddModel(sweep);
  sweep->add_option("--truth", sweep_truth, "Ground-truth JSON");
  sweep->add_option("--spec", sweep_spec, "Generate the data from a synthetic spec");
  sweep->add_option("--seed", sweep_seed, "Override the synthetic spec seed");
  sweep->add_option("--tau", sweep_taus, "Tau values (repeatable or comma list)");
  sweep->add_option("--mode", sweep_modes, "Modes (repeatable)");
  sweep->add_option("--out", sweep_out, "Directory for sweep.txt, sweep.csv, manifest.json");

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "Summarize a graph, partition or carousels file");
  inspect->add_option("file", inspect_path, "File to inspect")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*synth) return RunSynth(spec_path, seed, out_dir, format);
    if (*mine) return RunMine(mine_flags, mine_out, generated_at);
    if (*evaluate) return RunEvaluate(eval_carousels, eval_truth, eval_partition, eval_out);
    if (*sweep) {
      return RunSweepCommand(sweep_flags, sweep_truth, sweep_spec, sweep_seed, sweep_taus,
                             sweep_modes, sweep_out);
    }
    if (*inspect) return RunInspect(inspect_path);
  } catch (const ConfigError& e) {
    std::cerr << "aspectmine: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "aspectmine: " << e.what() << '\n';
    return kData;
  } catch (const IoError& e) {
    std::cerr << "aspectmine: " << e.what() << '\n';
    return kData;
  } catch (const UndefinedMetricError& e) {
    std::cerr << "aspectmine: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "aspectmine: internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
