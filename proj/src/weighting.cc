#include "aspectmine/weighting.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "aspectmine/errors.h"
#include "parallel.h"

namespace aspectmine {

void PriorParams::Validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) ||
      !std::isfinite(beta)) {
    throw ConfigError("prior requires alpha > 0 and beta > 0");
  }
}

std::string_view AlphaModeName(AlphaMode mode) {
  return mode == AlphaMode::kPerProductType ? "per-pt" : "global";
}

AlphaMode ParseAlphaMode(std::string_view name) {
  if (name == "per-pt") return AlphaMode::kPerProductType;
  if (name == "global") return AlphaMode::kGlobal;
  throw ConfigError("unknown alpha mode '" + std::string(name) +
                    "' (expected per-pt or global)");
}

PriorParams EstimatePrior(const BipartiteGraph& graph, AlphaMode mode,
                          double epsilon) {
  if (graph.num_product_types() == 0) {
    throw DataError("cannot estimate a prior on an empty graph");
  }
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw ConfigError("alpha epsilon must lie in (0, 0.5)");
  }
  double alpha = 0.0;
  if (mode == AlphaMode::kPerProductType) {
    double sum = 0.0;
    for (NodeIndex p = 0; p < graph.num_product_types(); ++p) {
      EdgeStats t = graph.ProductTypeTotals(p);
      sum += static_cast<double>(t.clicks) / static_cast<double>(t.impressions);
    }
    alpha = sum / static_cast<double>(graph.num_product_types());
  } else {
    EdgeStats t = graph.Totals();
    alpha = static_cast<double>(t.clicks) / static_cast<double>(t.impressions);
  }
  alpha = std::clamp(alpha, epsilon, 1.0 - epsilon);
  return {alpha, 1.0 - alpha};
}

double EdgeWeight(std::int64_t clicks, std::int64_t impressions,
                  const PriorParams& prior) {
  if (clicks < 0 || impressions < 0 || clicks > impressions) {
    throw ContractViolation("EdgeWeight requires 0 <= clicks <= impressions");
  }
  const double clk = static_cast<double>(clicks);
  const double imp = static_cast<double>(impressions);
  return std::sqrt((prior.alpha + clk) / (prior.beta + imp - clk) *
                   (prior.alpha + prior.beta + imp + 1.0));
}

SparseVector::SparseVector(std::size_t dimension, std::vector<Entry> entries)
    : dimension_(dimension), entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first >= dimension_) {
      throw ContractViolation("sparse vector index out of range");
    }
    if (!(entries_[i].second > 0.0)) {
      throw ContractViolation("sparse vector weights must be positive");
    }
    if (i > 0 && entries_[i - 1].first >= entries_[i].first) {
      throw ContractViolation("sparse vector indices must be increasing");
    }
  }
}

double SparseVector::at(std::uint32_t index) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), index,
      [](const Entry& e, std::uint32_t i) { return e.first < i; });
  return (it != entries_.end() && it->first == index) ? it->second : 0.0;
}

namespace {

// Accumulates edge stats from `cluster` into buckets of `other` clusters and
// turns them into weights. `scratch` must be sized to other.num_clusters()
// and zeroed; it is left zeroed on return.
SparseVector BuildVector(const BipartiteGraph& graph, Side side,
                         const Partition& other,
                         std::span<const NodeIndex> cluster,
                         const PriorParams& prior,
                         const WeightingOptions& options,
                         std::vector<EdgeStats>& scratch,
                         std::vector<ClusterId>& touched) {
  if (cluster.empty()) {
    throw ContractViolation("cluster vector requested for an empty cluster");
  }
  touched.clear();
  for (NodeIndex n : cluster) {
    for (const auto& a : graph.edges_of(side, n)) {
      ClusterId c = other.cluster_of(a.node);
      if (scratch[c].impressions == 0) touched.push_back(c);
      scratch[c] += a.stats;
    }
  }
  std::sort(touched.begin(), touched.end());
  std::vector<SparseVector::Entry> entries;
  const std::size_t dim = other.num_clusters();
  if (options.prior_on_missing) {
    const double missing = EdgeWeight(0, 0, prior);
    entries.reserve(dim);
    for (ClusterId c = 0; c < dim; ++c) {
      const EdgeStats& s = scratch[c];
      entries.emplace_back(c, s.impressions > 0
                                  ? EdgeWeight(s.clicks, s.impressions, prior)
                                  : missing);
    }
  } else {
    entries.reserve(touched.size());
    for (ClusterId c : touched) {
      const EdgeStats& s = scratch[c];
      entries.emplace_back(c, EdgeWeight(s.clicks, s.impressions, prior));
    }
  }
  for (ClusterId c : touched) scratch[c] = {};
  return SparseVector(dim, std::move(entries));
}

void CheckPartition(const BipartiteGraph& graph, const Partition& p, Side side) {
  if (p.side() != side || p.num_nodes() != graph.num_nodes(side)) {
    throw ContractViolation(std::string("partition does not cover the ") +
                            std::string(SideName(side)) + " side");
  }
}

}  // namespace

SparseVector QueryClusterVector(const BipartiteGraph& graph,
                                const Partition& pt_partition,
                                std::span<const NodeIndex> cluster,
                                const PriorParams& prior,
                                const WeightingOptions& options) {
  CheckPartition(graph, pt_partition, Side::kProductType);
  std::vector<EdgeStats> scratch(pt_partition.num_clusters());
  std::vector<ClusterId> touched;
  return BuildVector(graph, Side::kQuery, pt_partition, cluster, prior, options,
                     scratch, touched);
}

SparseVector ProductTypeClusterVector(const BipartiteGraph& graph,
                                      const Partition& query_partition,
                                      std::span<const NodeIndex> cluster,
                                      const PriorParams& prior,
                                      const WeightingOptions& options) {
  CheckPartition(graph, query_partition, Side::kQuery);
  std::vector<EdgeStats> scratch(query_partition.num_clusters());
  std::vector<ClusterId> touched;
  return BuildVector(graph, Side::kProductType, query_partition, cluster, prior,
                     options, scratch, touched);
}

std::vector<SparseVector> ClusterVectors(const BipartiteGraph& graph,
                                         const Partition& own,
                                         const Partition& other,
                                         const PriorParams& prior,
                                         const WeightingOptions& options,
                                         int threads) {
  const Side side = own.side();
  const Side other_side = side == Side::kQuery ? Side::kProductType : Side::kQuery;
  CheckPartition(graph, own, side);
  CheckPartition(graph, other, other_side);
  prior.Validate();
  std::vector<SparseVector> out(own.num_clusters());
  internal::ParallelChunks(out.size(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<EdgeStats> scratch(other.num_clusters());
    std::vector<ClusterId> touched;
    for (std::size_t c = begin; c < end; ++c) {
      out[c] = BuildVector(graph, side, other, own.members(static_cast<ClusterId>(c)),
                           prior, options, scratch, touched);
    }
  });
  return out;
}

}  // namespace aspectmine
