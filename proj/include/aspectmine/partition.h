#ifndef ASPECTMINE_PARTITION_H_
#define ASPECTMINE_PARTITION_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aspectmine/graph.h"
#include "json.hpp"

namespace aspectmine {

using ClusterId = std::uint32_t;

// Assignment of every node on one side of the graph to exactly one cluster.
//
// Cluster ids are canonical: walking nodes in index order, the first node of
// each not-yet-seen cluster opens the next id. Two partitions with the same
// grouping therefore compare equal regardless of how they were labeled.
// Clusters may be flagged as noise (DBSCAN); noise clusters are singletons.
class Partition {
 public:
  Partition() = default;

  static Partition Singletons(Side side, std::size_t num_nodes);
  static Partition SingleCluster(Side side, std::size_t num_nodes);

  // `labels[i]` is any cluster label for node i; equal labels share a cluster.
  static Partition FromLabels(Side side, std::span<const std::int64_t> labels);
  static Partition FromClusters(Side side, std::size_t num_nodes,
                                const std::vector<std::vector<NodeIndex>>& clusters,
                                std::span<const NodeIndex> noise = {});

  Side side() const { return side_; }
  std::size_t num_nodes() const { return assignment_.size(); }
  std::size_t num_clusters() const { return members_.size(); }
  ClusterId cluster_of(NodeIndex node) const { return assignment_.at(node); }
  const std::vector<ClusterId>& assignment() const { return assignment_; }

  // Members of `c` in ascending node order.
  const std::vector<NodeIndex>& members(ClusterId c) const { return members_.at(c); }
  const std::vector<std::vector<NodeIndex>>& clusters() const { return members_; }

  bool is_noise(ClusterId c) const { return noise_.at(c); }
  std::size_t num_noise() const;

  // Every cluster of *this is contained in some cluster of `coarser`.
  bool Refines(const Partition& coarser) const;

  // Partition of the clusters of *this (as nodes) applied to the nodes.
  // `grouping.num_nodes()` must equal num_clusters().
  Partition Coarsen(const Partition& grouping) const;

  bool operator==(const Partition& o) const {
    return side_ == o.side_ && assignment_ == o.assignment_ && noise_ == o.noise_;
  }

  // {side, clusters: [[id...]...], noise: [id...]} with canonical ordering.
  // Noise singletons appear both in `clusters` and in `noise`. When labels
  // are given they are written under "labels" (labels[i] names node i).
  nlohmann::ordered_json ToJson(const std::vector<std::string>* labels = nullptr) const;
  static Partition FromJson(const nlohmann::json& doc);

 private:
  Side side_ = Side::kQuery;
  std::vector<ClusterId> assignment_;
  std::vector<std::vector<NodeIndex>> members_;
  std::vector<bool> noise_;
};

}  // namespace aspectmine

#endif  // ASPECTMINE_PARTITION_H_
