#include "aspectmine/carousel.h"

#include <algorithm>
#include <numeric>

#include "aspectmine/errors.h"

namespace aspectmine {
namespace {

// a.clicks / a.impressions > b.clicks / b.impressions, exactly.
bool CtrGreater(const EdgeStats& a, const EdgeStats& b) {
  return static_cast<__int128>(a.clicks) * b.impressions >
         static_cast<__int128>(b.clicks) * a.impressions;
}

bool CtrEqual(const EdgeStats& a, const EdgeStats& b) {
  return static_cast<__int128>(a.clicks) * b.impressions ==
         static_cast<__int128>(b.clicks) * a.impressions;
}

struct PtTotal {
  NodeIndex pt;
  EdgeStats stats;
};

}  // namespace

void CarouselConfig::Validate() const {
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  if (top_z < 1) throw ConfigError("top_z must be >= 1");
}

double ClusterCtr(const BipartiteGraph& graph,
                  std::span<const NodeIndex> query_cluster, NodeIndex pt) {
  if (query_cluster.empty()) throw ContractViolation("ClusterCtr: empty cluster");
  if (pt >= graph.num_product_types()) {
    throw std::out_of_range("product-type index out of range");
  }
  NodeIndex one[] = {pt};
  ClusterStats s = AggregateStats(graph, query_cluster, one);
  if (s.impressions == 0) {
    throw ContractViolation("ClusterCtr: cluster has no impression on '" +
                            graph.product_type(pt) + "'");
  }
  return static_cast<double>(s.clicks) / static_cast<double>(s.impressions);
}

std::vector<Carousel> BuildCarousels(const BipartiteGraph& graph,
                                     const Partition& query_partition,
                                     const CarouselConfig& config) {
  config.Validate();
  if (query_partition.side() != Side::kQuery ||
      query_partition.num_nodes() != graph.num_queries()) {
    throw ContractViolation("partition does not cover the graph's queries");
  }

  struct Candidate {
    ClusterId id;
    std::size_t size;
    std::int64_t clicks;
  };
  std::vector<Candidate> candidates;
  for (ClusterId c = 0; c < query_partition.num_clusters(); ++c) {
    if (query_partition.is_noise(c)) continue;
    std::int64_t clicks = 0;
    for (NodeIndex q : query_partition.members(c)) {
      for (const auto& a : graph.query_edges(q)) clicks += a.stats.clicks;
    }
    candidates.push_back({c, query_partition.members(c).size(), clicks});
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.size != b.size) return a.size > b.size;
              if (a.clicks != b.clicks) return a.clicks > b.clicks;
              return a.id < b.id;
            });
  if (candidates.size() > config.top_k) candidates.resize(config.top_k);

  std::vector<Carousel> out;
  out.reserve(candidates.size());
  std::vector<EdgeStats> scratch(graph.num_product_types());
  std::vector<NodeIndex> touched;
  for (std::size_t rank = 0; rank < candidates.size(); ++rank) {
    const auto& members = query_partition.members(candidates[rank].id);
    touched.clear();
    for (NodeIndex q : members) {
      for (const auto& a : graph.query_edges(q)) {
        if (scratch[a.node].impressions == 0) touched.push_back(a.node);
        scratch[a.node] += a.stats;
      }
    }
    std::vector<PtTotal> totals;
    totals.reserve(touched.size());
    for (NodeIndex p : touched) {
      totals.push_back({p, scratch[p]});
      scratch[p] = {};
    }
    auto item_before = [&](const PtTotal& a, const PtTotal& b) {
      if (!CtrEqual(a.stats, b.stats)) return CtrGreater(a.stats, b.stats);
      if (a.stats.clicks != b.stats.clicks) return a.stats.clicks > b.stats.clicks;
      return graph.product_type(a.pt) < graph.product_type(b.pt);
    };
    std::size_t keep = std::min(config.top_z, totals.size());
    std::partial_sort(totals.begin(), totals.begin() + keep, totals.end(), item_before);
    totals.resize(keep);

    Carousel carousel;
    carousel.cluster_id = candidates[rank].id;
    carousel.size_rank = rank + 1;
    for (NodeIndex q : members) carousel.member_queries.push_back(graph.query(q));
    for (const auto& t : totals) {
      carousel.items.push_back({graph.product_type(t.pt),
                                static_cast<double>(t.stats.clicks) /
                                    static_cast<double>(t.stats.impressions),
                                t.stats.clicks, t.stats.impressions});
    }
    out.push_back(std::move(carousel));
  }
  return out;
}

nlohmann::ordered_json CarouselsToJson(const CarouselDocument& doc) {
  nlohmann::ordered_json j;
  j["event"] = doc.event;
  j["generated_at"] = doc.generated_at;
  j["config"] = {{"k", doc.k}, {"z", doc.z}, {"tau", doc.tau}, {"mode", doc.mode}};
  auto list = nlohmann::ordered_json::array();
  for (const auto& c : doc.carousels) {
    nlohmann::ordered_json entry;
    entry["rank"] = c.size_rank;
    entry["cluster_id"] = c.cluster_id;
    entry["queries"] = c.member_queries;
    auto items = nlohmann::ordered_json::array();
    for (const auto& it : c.items) {
      items.push_back({{"product_type", it.product_type},
                       {"ctr", it.ctr},
                       {"clicks", it.clicks},
                       {"impressions", it.impressions}});
    }
    entry["items"] = std::move(items);
    list.push_back(std::move(entry));
  }
  j["carousels"] = std::move(list);
  return j;
}

namespace {

const nlohmann::json& Field(const nlohmann::json& obj, const char* name,
                            const std::string& path) {
  if (!obj.is_object() || !obj.contains(name)) {
    throw DataError("carousels file: missing field '" + path + name + "'");
  }
  return obj[name];
}

template <typename T>
T As(const nlohmann::json& v, const std::string& path) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError("carousels file: field '" + path + "' has the wrong type");
  }
}

}  // namespace

CarouselDocument CarouselsFromJson(const nlohmann::json& j) {
  CarouselDocument doc;
  if (!j.is_object()) throw DataError("carousels file: top level must be an object");
  doc.event = j.contains("event") && j["event"].is_string() ? j["event"].get<std::string>() : "";
  doc.generated_at = j.contains("generated_at") && j["generated_at"].is_string()
                         ? j["generated_at"].get<std::string>()
                         : "";
  if (j.contains("config")) {
    const auto& cfg = j["config"];
    if (cfg.contains("k")) doc.k = As<std::size_t>(cfg["k"], "config.k");
    if (cfg.contains("z")) doc.z = As<std::size_t>(cfg["z"], "config.z");
    if (cfg.contains("tau")) doc.tau = As<double>(cfg["tau"], "config.tau");
    if (cfg.contains("mode")) doc.mode = As<std::string>(cfg["mode"], "config.mode");
  }
  const auto& list = Field(j, "carousels", "");
  if (!list.is_array()) throw DataError("carousels file: 'carousels' must be an array");
  for (std::size_t i = 0; i < list.size(); ++i) {
    std::string path = "carousels[" + std::to_string(i) + "].";
    const auto& entry = list[i];
    Carousel c;
    c.size_rank = entry.contains("rank") ? As<std::size_t>(entry["rank"], path + "rank") : i + 1;
    c.cluster_id = entry.contains("cluster_id")
                       ? As<ClusterId>(entry["cluster_id"], path + "cluster_id")
                       : static_cast<ClusterId>(i);
    c.member_queries = As<std::vector<std::string>>(Field(entry, "queries", path),
                                                    path + "queries");
    const auto& items = Field(entry, "items", path);
    if (!items.is_array()) throw DataError("carousels file: '" + path + "items' must be an array");
    for (std::size_t k = 0; k < items.size(); ++k) {
      std::string ip = path + "items[" + std::to_string(k) + "].";
      CarouselItem item;
      item.product_type = As<std::string>(Field(items[k], "product_type", ip),
                                          ip + "product_type");
      item.ctr = As<double>(Field(items[k], "ctr", ip), ip + "ctr");
      item.clicks = As<std::int64_t>(Field(items[k], "clicks", ip), ip + "clicks");
      item.impressions =
          As<std::int64_t>(Field(items[k], "impressions", ip), ip + "impressions");
      c.items.push_back(std::move(item));
    }
    doc.carousels.push_back(std::move(c));
  }
  return doc;
}

}  // namespace aspectmine
