#ifndef ASPECTMINE_PIPELINE_H_
#define ASPECTMINE_PIPELINE_H_

#include <optional>
#include <string>
#include <vector>

#include "aspectmine/carousel.h"
#include "aspectmine/clustering.h"
#include "aspectmine/evaluation.h"
#include "aspectmine/graph.h"
#include "aspectmine/weighting.h"
#include "json.hpp"

namespace aspectmine {

const char* Version();

struct MineOptions {
  std::string event = "event";
  ClusteringConfig clustering;
  CarouselConfig carousels;
  AlphaMode alpha_mode = AlphaMode::kPerProductType;

  nlohmann::ordered_json ToJson() const;
};

struct MineResult {
  PriorParams prior;
  Partition queries;
  std::optional<Partition> product_types;  // IC modes only
  int iterations = 1;
  bool converged = true;
  std::vector<Carousel> carousels;
};

// estimate_prior -> clustering (by mode) -> carousels.
MineResult Mine(const BipartiteGraph& graph, const MineOptions& options);

CarouselDocument MakeCarouselDocument(const MineResult& result,
                                      const MineOptions& options,
                                      std::string generated_at);

// Timestamp stamped into output files: explicit value, else SOURCE_DATE_EPOCH,
// else the Unix epoch. Never the wall clock, so reruns are byte-identical.
std::string ResolveGeneratedAt(const std::optional<std::string>& explicit_value);
std::string NowUtc();

// Full metric report for one mining run, including heterogeneity over every
// non-noise cluster and ARI when the truth carries a partition.
EvalReport EvaluateRun(const BipartiteGraph& graph, const MineResult& result,
                       const MineOptions& options, const GroundTruth& truth);

struct SweepOptions {
  std::vector<double> taus{0.1, 0.2, 0.5};
  std::vector<Mode> modes{Mode::kIc1, Mode::kIc2, Mode::kHc, Mode::kDbscan};
  MineOptions base;  // tau and mode are overwritten per cell; tau_p = tau
  int jobs = 1;      // cells run concurrently
};

struct SweepCell {
  double tau = 0.0;
  Mode mode = Mode::kIc1;
  std::optional<EvalReport> report;
  std::string error;  // nonempty when the cell failed
};

// Cells ordered tau-major, mode-minor. A failing cell records its error and
// the sweep continues.
std::vector<SweepCell> RunSweep(const BipartiteGraph& graph, const GroundTruth& truth,
                                const SweepOptions& options);

// One aligned table per metric: rows tau, columns modes.
std::string FormatSweepTables(const std::vector<SweepCell>& cells,
                              const SweepOptions& options);
std::string FormatSweepCsv(const std::vector<SweepCell>& cells);

// Record of everything that influenced an output file.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::string> event_patterns;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::optional<PriorParams> prior;
  std::optional<std::uint64_t> seed;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
  std::string started_at;
  std::string finished_at;

  nlohmann::ordered_json ToJson() const;
};

}  // namespace aspectmine

#endif  // ASPECTMINE_PIPELINE_H_
