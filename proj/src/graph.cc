#include "aspectmine/graph.h"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "aspectmine/errors.h"
#include "json.hpp"

namespace aspectmine {
namespace {

constexpr std::string_view kSnapshotFormat = "aspectmine-graph";
constexpr int kSnapshotVersion = 1;

void BuildCsr(std::size_t num_nodes, const std::vector<Edge>& edges,
              bool by_query, std::vector<std::size_t>& offsets,
              std::vector<Adjacent>& adj) {
  offsets.assign(num_nodes + 1, 0);
  for (const auto& e : edges) ++offsets[(by_query ? e.query : e.product_type) + 1];
  for (std::size_t i = 0; i < num_nodes; ++i) offsets[i + 1] += offsets[i];
  adj.resize(edges.size());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& e : edges) {
    NodeIndex from = by_query ? e.query : e.product_type;
    NodeIndex to = by_query ? e.product_type : e.query;
    adj[cursor[from]++] = {to, e.stats};
  }
  for (std::size_t i = 0; i < num_nodes; ++i) {
    std::sort(adj.begin() + offsets[i], adj.begin() + offsets[i + 1],
              [](const Adjacent& a, const Adjacent& b) { return a.node < b.node; });
  }
}

}  // namespace

std::string_view SideName(Side side) {
  return side == Side::kQuery ? "query" : "product_type";
}

Side ParseSide(std::string_view name) {
  if (name == "query" || name == "Q") return Side::kQuery;
  if (name == "product_type" || name == "P") return Side::kProductType;
  throw DataError("unknown partition side '" + std::string(name) + "'");
}

BipartiteGraph BipartiteGraph::Build(std::span<const RawLogRow> rows) {
  if (rows.empty()) throw DataError("cannot build a graph from zero rows");

  // First pass: sum duplicates, keyed by first-seen raw indices.
  std::vector<std::string> raw_queries, raw_pts;
  std::unordered_map<std::string, NodeIndex> q_index, p_index;
  std::map<std::pair<NodeIndex, NodeIndex>, EdgeStats> sums;
  for (const auto& row : rows) {
    if (row.clicks > row.impressions || row.impressions < 0 || row.clicks < 0) {
      throw DataError("row (" + row.query + ", " + row.product_type +
                      ") violates 0 <= clicks <= impressions");
    }
    auto [qi, q_new] =
        q_index.try_emplace(row.query, static_cast<NodeIndex>(raw_queries.size()));
    if (q_new) raw_queries.push_back(row.query);
    auto [pi, p_new] = p_index.try_emplace(
        row.product_type, static_cast<NodeIndex>(raw_pts.size()));
    if (p_new) raw_pts.push_back(row.product_type);
    sums[{qi->second, pi->second}] += {row.impressions, row.clicks};
  }

  // Drop zero-impression edges; that removes zero-impression product-types and
  // any query left without edges. Surviving nodes keep first-seen order.
  std::vector<bool> q_alive(raw_queries.size(), false);
  std::vector<bool> p_alive(raw_pts.size(), false);
  for (const auto& [key, stats] : sums) {
    if (stats.impressions > 0) {
      q_alive[key.first] = true;
      p_alive[key.second] = true;
    }
  }
  std::vector<NodeIndex> q_map(raw_queries.size()), p_map(raw_pts.size());
  std::vector<std::string> queries, pts;
  for (std::size_t i = 0; i < raw_queries.size(); ++i) {
    if (!q_alive[i]) continue;
    q_map[i] = static_cast<NodeIndex>(queries.size());
    queries.push_back(std::move(raw_queries[i]));
  }
  for (std::size_t i = 0; i < raw_pts.size(); ++i) {
    if (!p_alive[i]) continue;
    p_map[i] = static_cast<NodeIndex>(pts.size());
    pts.push_back(std::move(raw_pts[i]));
  }
  std::vector<Edge> edges;
  edges.reserve(sums.size());
  for (const auto& [key, stats] : sums) {
    if (stats.impressions == 0) continue;
    edges.push_back({q_map[key.first], p_map[key.second], stats});
  }
  if (edges.empty()) {
    throw DataError("graph is empty: no product-type has an impression");
  }
  return FromParts(std::move(queries), std::move(pts), std::move(edges));
}

BipartiteGraph BipartiteGraph::FromParts(std::vector<std::string> queries,
                                         std::vector<std::string> product_types,
                                         std::vector<Edge> edges) {
  if (queries.empty() || product_types.empty() || edges.empty()) {
    throw DataError("graph must have at least one query, product-type and edge");
  }
  BipartiteGraph g;
  g.queries_ = std::move(queries);
  g.product_types_ = std::move(product_types);
  for (std::size_t i = 0; i < g.queries_.size(); ++i) {
    if (!g.query_index_.emplace(g.queries_[i], static_cast<NodeIndex>(i)).second) {
      throw DataError("duplicate query '" + g.queries_[i] + "'");
    }
  }
  for (std::size_t i = 0; i < g.product_types_.size(); ++i) {
    if (!g.product_type_index_
             .emplace(g.product_types_[i], static_cast<NodeIndex>(i))
             .second) {
      throw DataError("duplicate product-type '" + g.product_types_[i] + "'");
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.query, a.product_type) < std::tie(b.query, b.product_type);
  });
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    if (e.query >= g.queries_.size() || e.product_type >= g.product_types_.size()) {
      throw DataError("edge endpoint out of range");
    }
    if (e.stats.impressions < 1 || e.stats.clicks < 0 ||
        e.stats.clicks > e.stats.impressions) {
      throw DataError("edge (" + g.queries_[e.query] + ", " +
                      g.product_types_[e.product_type] +
                      ") violates 0 <= clicks <= impressions, impressions >= 1");
    }
    if (i > 0 && edges[i - 1].query == e.query &&
        edges[i - 1].product_type == e.product_type) {
      throw DataError("duplicate edge (" + g.queries_[e.query] + ", " +
                      g.product_types_[e.product_type] + ")");
    }
  }
  BuildCsr(g.queries_.size(), edges, true, g.query_offsets_, g.query_adj_);
  BuildCsr(g.product_types_.size(), edges, false, g.pt_offsets_, g.pt_adj_);
  for (std::size_t q = 0; q < g.queries_.size(); ++q) {
    if (g.query_offsets_[q] == g.query_offsets_[q + 1]) {
      throw DataError("query '" + g.queries_[q] + "' has no edges");
    }
  }
  for (std::size_t p = 0; p < g.product_types_.size(); ++p) {
    if (g.pt_offsets_[p] == g.pt_offsets_[p + 1]) {
      throw DataError("product-type '" + g.product_types_[p] + "' has no edges");
    }
  }
  return g;
}

std::span<const Adjacent> BipartiteGraph::query_edges(NodeIndex q) const {
  if (q >= queries_.size()) throw std::out_of_range("query index out of range");
  return {query_adj_.data() + query_offsets_[q],
          query_offsets_[q + 1] - query_offsets_[q]};
}

std::span<const Adjacent> BipartiteGraph::product_type_edges(NodeIndex p) const {
  if (p >= product_types_.size()) {
    throw std::out_of_range("product-type index out of range");
  }
  return {pt_adj_.data() + pt_offsets_[p], pt_offsets_[p + 1] - pt_offsets_[p]};
}

std::optional<NodeIndex> BipartiteGraph::FindQuery(std::string_view q) const {
  auto it = query_index_.find(std::string(q));
  if (it == query_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<NodeIndex> BipartiteGraph::FindProductType(std::string_view p) const {
  auto it = product_type_index_.find(std::string(p));
  if (it == product_type_index_.end()) return std::nullopt;
  return it->second;
}

EdgeStats BipartiteGraph::ProductTypeTotals(NodeIndex p) const {
  EdgeStats total;
  for (const auto& a : product_type_edges(p)) total += a.stats;
  return total;
}

EdgeStats BipartiteGraph::Totals() const {
  EdgeStats total;
  for (const auto& a : query_adj_) total += a.stats;
  return total;
}

std::vector<Edge> BipartiteGraph::EdgeList() const {
  std::vector<Edge> edges;
  edges.reserve(query_adj_.size());
  for (NodeIndex q = 0; q < queries_.size(); ++q) {
    for (const auto& a : query_edges(q)) edges.push_back({q, a.node, a.stats});
  }
  return edges;
}

ClusterStats AggregateStats(const BipartiteGraph& graph,
                            std::span<const NodeIndex> query_cluster,
                            std::span<const NodeIndex> pt_cluster) {
  if (query_cluster.empty() || pt_cluster.empty()) {
    throw ContractViolation("AggregateStats requires nonempty clusters");
  }
  std::vector<bool> in_pt(graph.num_product_types(), false);
  for (NodeIndex p : pt_cluster) {
    if (p >= graph.num_product_types()) {
      throw std::out_of_range("product-type index out of range");
    }
    in_pt[p] = true;
  }
  ClusterStats total;
  for (NodeIndex q : query_cluster) {
    for (const auto& a : graph.query_edges(q)) {
      if (in_pt[a.node]) total += a.stats;
    }
  }
  return total;
}

void SaveGraphSnapshot(const BipartiteGraph& graph, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["format"] = kSnapshotFormat;
  doc["version"] = kSnapshotVersion;
  doc["queries"] = graph.queries();
  doc["product_types"] = graph.product_types();
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : graph.EdgeList()) {
    edges.push_back({e.query, e.product_type, e.stats.impressions, e.stats.clicks});
  }
  doc["edges"] = std::move(edges);
  out << doc.dump() << '\n';
}

BipartiteGraph LoadGraphSnapshot(std::istream& in) {
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw DataError("graph snapshot is not valid JSON");
  }
  if (doc.value("format", "") != kSnapshotFormat) {
    throw DataError("not a graph snapshot (format field)");
  }
  if (doc.value("version", 0) != kSnapshotVersion) {
    throw DataError("unsupported graph snapshot version");
  }
  try {
    auto queries = doc.at("queries").get<std::vector<std::string>>();
    auto pts = doc.at("product_types").get<std::vector<std::string>>();
    std::vector<Edge> edges;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 4) throw DataError("bad edge entry");
      edges.push_back({e[0].get<NodeIndex>(), e[1].get<NodeIndex>(),
                       {e[2].get<std::int64_t>(), e[3].get<std::int64_t>()}});
    }
    return BipartiteGraph::FromParts(std::move(queries), std::move(pts),
                                     std::move(edges));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed graph snapshot: ") + e.what());
  }
}

}  // namespace aspectmine
