#ifndef ASPECTMINE_CAROUSEL_H_
#define ASPECTMINE_CAROUSEL_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aspectmine/graph.h"
#include "aspectmine/partition.h"
#include "json.hpp"

namespace aspectmine {

struct CarouselItem {
  std::string product_type;
  double ctr = 0.0;
  std::int64_t clicks = 0;
  std::int64_t impressions = 0;
};

// One mined aspect: a query cluster and its CTR-ranked product-types.
struct Carousel {
  ClusterId cluster_id = 0;
  std::size_t size_rank = 0;  // 1-based position by cluster size
  std::vector<std::string> member_queries;
  std::vector<CarouselItem> items;
};

inline constexpr std::size_t kAllClusters = std::numeric_limits<std::size_t>::max();

struct CarouselConfig {
  std::size_t top_k = 20;  // clusters reported; kAllClusters keeps every one
  std::size_t top_z = 5;   // product-types per cluster

  void Validate() const;
};

// sum(clicks) / sum(impressions) over the cluster's edges to `pt`. Throws
// ContractViolation if the cluster is empty or has no impression on `pt`.
double ClusterCtr(const BipartiteGraph& graph,
                  std::span<const NodeIndex> query_cluster, NodeIndex pt);

// Ranks non-noise clusters by member count (ties: more aggregate clicks, then
// smaller cluster id), keeps top_k, and for each lists the top_z product-types
// by CTR (ties: more clicks, then product-type id).
std::vector<Carousel> BuildCarousels(const BipartiteGraph& graph,
                                     const Partition& query_partition,
                                     const CarouselConfig& config);

// Top-level carousels file.
struct CarouselDocument {
  std::string event;
  std::string generated_at;
  std::size_t k = 0;
  std::size_t z = 0;
  double tau = 0.0;
  std::string mode;
  std::vector<Carousel> carousels;
};

nlohmann::ordered_json CarouselsToJson(const CarouselDocument& doc);
// Throws DataError with the offending field path on schema mismatch.
CarouselDocument CarouselsFromJson(const nlohmann::json& doc);

}  // namespace aspectmine

#endif  // ASPECTMINE_CAROUSEL_H_
