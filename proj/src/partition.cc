#include "aspectmine/partition.h"

#include <algorithm>
#include <unordered_map>

#include "aspectmine/errors.h"

namespace aspectmine {

Partition Partition::Singletons(Side side, std::size_t num_nodes) {
  std::vector<std::int64_t> labels(num_nodes);
  for (std::size_t i = 0; i < num_nodes; ++i) labels[i] = static_cast<std::int64_t>(i);
  return FromLabels(side, labels);
}

Partition Partition::SingleCluster(Side side, std::size_t num_nodes) {
  std::vector<std::int64_t> labels(num_nodes, 0);
  return FromLabels(side, labels);
}

Partition Partition::FromLabels(Side side, std::span<const std::int64_t> labels) {
  Partition p;
  p.side_ = side;
  p.assignment_.resize(labels.size());
  std::unordered_map<std::int64_t, ClusterId> canon;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] =
        canon.try_emplace(labels[i], static_cast<ClusterId>(p.members_.size()));
    if (inserted) p.members_.emplace_back();
    p.assignment_[i] = it->second;
    p.members_[it->second].push_back(static_cast<NodeIndex>(i));
  }
  p.noise_.assign(p.members_.size(), false);
  return p;
}

Partition Partition::FromClusters(Side side, std::size_t num_nodes,
                                  const std::vector<std::vector<NodeIndex>>& clusters,
                                  std::span<const NodeIndex> noise) {
  std::vector<std::int64_t> labels(num_nodes, -1);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (clusters[c].empty()) throw DataError("partition has an empty cluster");
    for (NodeIndex n : clusters[c]) {
      if (n >= num_nodes) throw DataError("partition node id out of range");
      if (labels[n] != -1) {
        throw DataError("node " + std::to_string(n) + " assigned twice");
      }
      labels[n] = static_cast<std::int64_t>(c);
    }
  }
  for (std::size_t i = 0; i < num_nodes; ++i) {
    if (labels[i] == -1) throw DataError("node " + std::to_string(i) + " unassigned");
  }
  Partition p = FromLabels(side, labels);
  for (NodeIndex n : noise) {
    if (n >= num_nodes) throw DataError("noise node id out of range");
    ClusterId c = p.assignment_[n];
    if (p.members_[c].size() != 1) {
      throw DataError("noise node " + std::to_string(n) + " is not a singleton");
    }
    p.noise_[c] = true;
  }
  return p;
}

std::size_t Partition::num_noise() const {
  return static_cast<std::size_t>(std::count(noise_.begin(), noise_.end(), true));
}

bool Partition::Refines(const Partition& coarser) const {
  if (coarser.num_nodes() != num_nodes()) return false;
  for (const auto& m : members_) {
    ClusterId target = coarser.cluster_of(m.front());
    for (NodeIndex n : m) {
      if (coarser.cluster_of(n) != target) return false;
    }
  }
  return true;
}

Partition Partition::Coarsen(const Partition& grouping) const {
  if (grouping.num_nodes() != num_clusters()) {
    throw ContractViolation("grouping size does not match cluster count");
  }
  std::vector<std::int64_t> labels(num_nodes());
  for (std::size_t i = 0; i < num_nodes(); ++i) {
    labels[i] = grouping.cluster_of(assignment_[i]);
  }
  return FromLabels(side_, labels);
}

nlohmann::ordered_json Partition::ToJson(const std::vector<std::string>* labels) const {
  nlohmann::ordered_json doc;
  doc["side"] = SideName(side_);
  doc["clusters"] = members_;
  auto noise = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < members_.size(); ++c) {
    if (noise_[c]) noise.push_back(members_[c].front());
  }
  std::sort(noise.begin(), noise.end());
  doc["noise"] = std::move(noise);
  if (labels != nullptr) doc["labels"] = *labels;
  return doc;
}

Partition Partition::FromJson(const nlohmann::json& doc) {
  try {
    Side side = ParseSide(doc.at("side").get<std::string>());
    auto clusters = doc.at("clusters").get<std::vector<std::vector<NodeIndex>>>();
    std::vector<NodeIndex> noise;
    if (doc.contains("noise")) noise = doc["noise"].get<std::vector<NodeIndex>>();
    std::size_t n = 0;
    for (const auto& c : clusters) n += c.size();
    return FromClusters(side, n, clusters, noise);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed partition JSON: ") + e.what());
  }
}

}  // namespace aspectmine
