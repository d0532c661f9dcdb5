#include "aspectmine/pipeline.h"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <sstream>
#include <thread>

#include "aspectmine/errors.h"

#ifndef ASPECTMINE_VERSION
#define ASPECTMINE_VERSION "0.0.0"
#endif

namespace aspectmine {
namespace {

std::string FormatUtc(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string Cell(double v, int digits, const char* suffix = "") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f%s", digits, v, suffix);
  return buf;
}

}  // namespace

const char* Version() { return ASPECTMINE_VERSION; }

nlohmann::ordered_json MineOptions::ToJson() const {
  nlohmann::ordered_json j;
  j["event"] = event;
  j["mode"] = ModeName(clustering.mode);
  j["tau_q"] = clustering.tau_q;
  j["tau_p"] = clustering.tau_p;
  j["max_iterations"] = clustering.max_iterations;
  j["dbscan_min_samples"] = clustering.dbscan_min_samples;
  j["prior_on_missing"] = clustering.weighting.prior_on_missing;
  j["alpha_mode"] = AlphaModeName(alpha_mode);
  j["k"] = carousels.top_k;
  j["z"] = carousels.top_z;
  j["threads"] = clustering.threads;
  return j;
}

MineResult Mine(const BipartiteGraph& graph, const MineOptions& options) {
  options.clustering.Validate();
  options.carousels.Validate();
  MineResult r;
  r.prior = EstimatePrior(graph, options.alpha_mode);
  switch (options.clustering.mode) {
    case Mode::kIc1:
    case Mode::kIc2: {
      IterativeResult ic = IterateClustering(graph, r.prior, options.clustering);
      r.queries = std::move(ic.queries);
      r.product_types = std::move(ic.product_types);
      r.iterations = ic.iterations;
      r.converged = ic.converged;
      break;
    }
    case Mode::kHc:
    case Mode::kDbscan:
      r.queries = ClusterBaseline(graph, r.prior, options.clustering);
      break;
  }
  r.carousels = BuildCarousels(graph, r.queries, options.carousels);
  return r;
}

CarouselDocument MakeCarouselDocument(const MineResult& result,
                                      const MineOptions& options,
                                      std::string generated_at) {
  CarouselDocument doc;
  doc.event = options.event;
  doc.generated_at = std::move(generated_at);
  doc.k = options.carousels.top_k;
  doc.z = options.carousels.top_z;
  doc.tau = options.clustering.tau_q;
  doc.mode = std::string(ModeName(options.clustering.mode));
  doc.carousels = result.carousels;
  return doc;
}

std::string ResolveGeneratedAt(const std::optional<std::string>& explicit_value) {
  if (explicit_value) return *explicit_value;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    long long secs = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0') return FormatUtc(static_cast<std::time_t>(secs));
  }
  return FormatUtc(0);
}

std::string NowUtc() {
  return FormatUtc(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now()));
}

EvalReport EvaluateRun(const BipartiteGraph& graph, const MineResult& result,
                       const MineOptions& options, const GroundTruth& truth) {
  std::optional<Partition> true_partition;
  if (truth.true_partition) {
    true_partition = NamedPartition(graph, Side::kQuery, *truth.true_partition);
  }
  EvalReport report = Evaluate(result.carousels, truth, result.queries, true_partition);
  CarouselConfig all = options.carousels;
  all.top_k = kAllClusters;
  auto every = BuildCarousels(graph, result.queries, all);
  if (every.size() >= 2) report.heterogeneity_all = Heterogeneity(every);
  return report;
}

std::vector<SweepCell> RunSweep(const BipartiteGraph& graph, const GroundTruth& truth,
                                const SweepOptions& options) {
  std::vector<SweepCell> cells;
  for (double tau : options.taus) {
    for (Mode mode : options.modes) cells.push_back({tau, mode, std::nullopt, {}});
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      SweepCell& cell = cells[i];
      MineOptions opts = options.base;
      opts.clustering.tau_q = cell.tau;
      opts.clustering.tau_p = cell.tau;
      opts.clustering.mode = cell.mode;
      opts.clustering.threads = 1;
      try {
        MineResult r = Mine(graph, opts);
        cell.report = EvaluateRun(graph, r, opts, truth);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  std::size_t jobs = std::max(1, options.jobs);
  jobs = std::min(jobs, cells.size());
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return cells;
}

std::string FormatSweepTables(const std::vector<SweepCell>& cells,
                              const SweepOptions& options) {
  struct Metric {
    const char* title;
    std::optional<double> (*get)(const EvalReport&);
    int digits;
    const char* suffix;
  };
  const Metric metrics[] = {
      {"Precision", [](const EvalReport& r) -> std::optional<double> { return r.precision; },
       2, "%"},
      {"Heterogeneity", [](const EvalReport& r) { return r.heterogeneity; }, 3, ""},
      {"Cohesion", [](const EvalReport& r) { return r.cohesion; }, 3, ""},
      {"Adjusted Rand", [](const EvalReport& r) { return r.adjusted_rand; }, 3, ""},
  };
  constexpr int kWidth = 12;
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  std::ostringstream out;
  for (const auto& m : metrics) {
    bool any = false;
    for (const auto& c : cells) any |= c.report && m.get(*c.report).has_value();
    if (!any) continue;
    out << m.title << '\n';
    out << pad("tau", 8);
    for (Mode mode : options.modes) {
      std::string name(ModeName(mode));
      for (auto& ch : name) ch = static_cast<char>(std::toupper(ch));
      if (name.size() == 3 && name[0] == 'I') name.insert(2, "-");
      out << pad(name, kWidth);
    }
    out << '\n';
    std::size_t i = 0;
    for (double tau : options.taus) {
      out << pad(Cell(tau, 2), 8);
      for (std::size_t k = 0; k < options.modes.size(); ++k, ++i) {
        const SweepCell& c = cells[i];
        std::string v;
        if (!c.error.empty()) {
          v = "error";
        } else if (auto x = m.get(*c.report)) {
          v = Cell(*x, m.digits, m.suffix);
        } else {
          v = "n/a";
        }
        out << pad(v, kWidth);
      }
      out << '\n';
    }
    out << '\n';
  }
  for (const auto& c : cells) {
    if (!c.error.empty()) {
      out << "error tau=" << Cell(c.tau, 2) << " mode=" << ModeName(c.mode) << ": "
          << c.error << '\n';
    }
  }
  return out.str();
}

std::string FormatSweepCsv(const std::vector<SweepCell>& cells) {
  std::ostringstream out;
  out << "tau,mode,num_carousels,precision,heterogeneity,heterogeneity_all,cohesion,"
         "adjusted_rand,error\n";
  auto opt = [](const std::optional<double>& v) { return v ? Cell(*v, 6) : ""; };
  for (const auto& c : cells) {
    out << Cell(c.tau, 6) << ',' << ModeName(c.mode) << ',';
    if (c.report) {
      const auto& r = *c.report;
      out << r.num_carousels << ',' << Cell(r.precision, 6) << ',' << opt(r.heterogeneity)
          << ',' << opt(r.heterogeneity_all) << ',' << opt(r.cohesion) << ','
          << opt(r.adjusted_rand) << ',';
    } else {
      out << ",,,,,,";
    }
    std::string err = c.error;
    for (auto& ch : err) {
      if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    }
    out << err << '\n';
  }
  return out.str();
}

nlohmann::ordered_json RunManifest::ToJson() const {
  nlohmann::ordered_json j;
  j["tool"] = "aspectmine";
  j["tool_version"] = Version();
  j["command"] = command;
  j["inputs"] = inputs;
  j["event_patterns"] = event_patterns;
  j["config"] = config;
  if (prior) {
    j["prior"] = {{"alpha", prior->alpha}, {"beta", prior->beta}};
  } else {
    j["prior"] = nullptr;
  }
  if (seed) {
    j["seed"] = *seed;
  } else {
    j["seed"] = nullptr;
  }
  for (const auto& [k, v] : extra.items()) j[k] = v;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  return j;
}

}  // namespace aspectmine
