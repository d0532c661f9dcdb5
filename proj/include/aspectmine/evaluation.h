#ifndef ASPECTMINE_EVALUATION_H_
#define ASPECTMINE_EVALUATION_H_

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "aspectmine/carousel.h"
#include "aspectmine/graph.h"
#include "aspectmine/partition.h"
#include "json.hpp"

namespace aspectmine {

struct GroundTruth {
  std::set<std::string> event_product_types;
  std::map<std::string, std::string> department_map;  // product-type -> dept
  // Named query clusters; present for synthetic data only.
  std::optional<std::vector<std::vector<std::string>>> true_partition;
  // Threshold the generator certified to recover true_partition, if any.
  std::optional<double> certified_tau;
};

nlohmann::ordered_json GroundTruthToJson(const GroundTruth& truth);
GroundTruth GroundTruthFromJson(const nlohmann::json& doc);

// Percentage (0-100) of truth.event_product_types covered by the union of
// all carousel items.
double Precision(std::span<const Carousel> carousels, const GroundTruth& truth);

// |x ∩ y| / |x ∪ y|; two empty sets count as identical (1.0).
double Jaccard(const std::set<std::string>& x, const std::set<std::string>& y);

// 1 - mean Jaccard similarity of item sets over all unordered pairs of
// carousels. Throws UndefinedMetricError for fewer than two carousels.
double Heterogeneity(std::span<const Carousel> carousels);

// 1 / (mean number of distinct departments per carousel).
double Cohesion(std::span<const Carousel> carousels, const GroundTruth& truth);

double AdjustedRand(const Partition& pred, const Partition& truth);

// Maps a named partition (e.g. GroundTruth::true_partition) onto graph
// indices. Throws DataError if the names do not cover exactly the graph's
// nodes on that side.
Partition NamedPartition(const BipartiteGraph& graph, Side side,
                         const std::vector<std::vector<std::string>>& clusters);

struct EvalReport {
  std::size_t num_carousels = 0;
  double precision = 0.0;
  std::optional<double> heterogeneity;      // over the reported carousels
  std::optional<double> heterogeneity_all;  // over every non-noise cluster
  std::optional<double> cohesion;
  std::optional<double> adjusted_rand;
  std::vector<std::string> notes;

  nlohmann::ordered_json ToJson() const;
  std::string ToText() const;
};

// Metrics that are undefined for the input are left empty with a note.
EvalReport Evaluate(std::span<const Carousel> carousels, const GroundTruth& truth,
                    const std::optional<Partition>& predicted = std::nullopt,
                    const std::optional<Partition>& true_partition = std::nullopt);

}  // namespace aspectmine

#endif  // ASPECTMINE_EVALUATION_H_
