#ifndef ASPECTMINE_GRAPH_H_
#define ASPECTMINE_GRAPH_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "aspectmine/ingest.h"

namespace aspectmine {

using NodeIndex = std::uint32_t;

enum class Side { kQuery, kProductType };

std::string_view SideName(Side side);
Side ParseSide(std::string_view name);

struct EdgeStats {
  std::int64_t impressions = 0;
  std::int64_t clicks = 0;

  EdgeStats& operator+=(const EdgeStats& o) {
    impressions += o.impressions;
    clicks += o.clicks;
    return *this;
  }
  bool operator==(const EdgeStats&) const = default;
};

// Aggregated statistics between a query cluster and a product-type cluster.
using ClusterStats = EdgeStats;

struct Edge {
  NodeIndex query;
  NodeIndex product_type;
  EdgeStats stats;

  bool operator==(const Edge&) const = default;
};

// A neighbor entry in one side's adjacency list.
struct Adjacent {
  NodeIndex node;
  EdgeStats stats;
};

// Query / product-type bipartite graph with (impressions, clicks) on every
// edge. Immutable after construction.
//
// Indices are dense and assigned in first-seen order. Edges with zero
// impressions are not stored, so every product-type and every query has at
// least one edge with impressions >= 1. Adjacency lists are sorted by the
// neighbor index and are stored for both sides.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;

  // Sums duplicate (query, product_type) rows. Throws DataError when nothing
  // survives the exclusion of zero-impression product-types.
  static BipartiteGraph Build(std::span<const RawLogRow> rows);

  // Builds from explicit node tables and edge triples (snapshot loading).
  // Validates every invariant and throws DataError on violation.
  static BipartiteGraph FromParts(std::vector<std::string> queries,
                                  std::vector<std::string> product_types,
                                  std::vector<Edge> edges);

  std::size_t num_queries() const { return queries_.size(); }
  std::size_t num_product_types() const { return product_types_.size(); }
  std::size_t num_edges() const { return query_adj_.size(); }
  std::size_t num_nodes(Side side) const {
    return side == Side::kQuery ? num_queries() : num_product_types();
  }

  const std::string& query(NodeIndex q) const { return queries_.at(q); }
  const std::string& product_type(NodeIndex p) const {
    return product_types_.at(p);
  }
  const std::string& label(Side side, NodeIndex n) const {
    return side == Side::kQuery ? query(n) : product_type(n);
  }
  const std::vector<std::string>& queries() const { return queries_; }
  const std::vector<std::string>& product_types() const {
    return product_types_;
  }

  std::span<const Adjacent> query_edges(NodeIndex q) const;
  std::span<const Adjacent> product_type_edges(NodeIndex p) const;
  std::span<const Adjacent> edges_of(Side side, NodeIndex n) const {
    return side == Side::kQuery ? query_edges(n) : product_type_edges(n);
  }

  std::optional<NodeIndex> FindQuery(std::string_view q) const;
  std::optional<NodeIndex> FindProductType(std::string_view p) const;

  // Total over all edges incident to `p`.
  EdgeStats ProductTypeTotals(NodeIndex p) const;
  EdgeStats Totals() const;

  // All edges ordered by (query, product_type).
  std::vector<Edge> EdgeList() const;

 private:
  std::vector<std::string> queries_;
  std::vector<std::string> product_types_;
  std::unordered_map<std::string, NodeIndex> query_index_;
  std::unordered_map<std::string, NodeIndex> product_type_index_;
  // CSR adjacency, one per side.
  std::vector<std::size_t> query_offsets_;
  std::vector<Adjacent> query_adj_;
  std::vector<std::size_t> pt_offsets_;
  std::vector<Adjacent> pt_adj_;
};

// Sum of edge statistics between the two node sets. Missing edges add
// nothing. Throws ContractViolation on an empty set and std::out_of_range on
// an index outside the graph.
ClusterStats AggregateStats(const BipartiteGraph& graph,
                            std::span<const NodeIndex> query_cluster,
                            std::span<const NodeIndex> pt_cluster);

// Versioned JSON snapshot: node tables plus [query, pt, impressions, clicks]
// edge quadruples in (query, pt) order. Output is byte-stable for a graph.
void SaveGraphSnapshot(const BipartiteGraph& graph, std::ostream& out);
BipartiteGraph LoadGraphSnapshot(std::istream& in);

}  // namespace aspectmine

#endif  // ASPECTMINE_GRAPH_H_
