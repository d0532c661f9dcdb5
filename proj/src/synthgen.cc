#include "aspectmine/synthgen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "aspectmine/clustering.h"
#include "aspectmine/errors.h"
#include "aspectmine/graph.h"
#include "aspectmine/weighting.h"

namespace aspectmine {
namespace {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  std::int64_t Int(std::int64_t lo, std::int64_t hi) {
    auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }
  double Real(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(engine_() >> 11) * 0x1.0p-53);
  }

 private:
  std::mt19937_64 engine_;
};

std::string Name(const char* fmt, long value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, value);
  return buf;
}

template <typename T>
void CheckRange(const Range<T>& r, const char* name) {
  if (!(r.lo <= r.hi)) throw ConfigError(std::string(name) + ": range lo > hi");
}

template <typename T>
nlohmann::ordered_json RangeJson(const Range<T>& r) {
  return nlohmann::ordered_json::array({r.lo, r.hi});
}

template <typename T>
Range<T> RangeFrom(const nlohmann::json& v, const char* name) {
  if (v.is_array() && v.size() == 2) return {v[0].get<T>(), v[1].get<T>()};
  if (v.is_number()) return {v.get<T>(), v.get<T>()};
  throw ConfigError(std::string("synthetic spec: '") + name +
                    "' must be a number or [lo, hi]");
}

}  // namespace

void SyntheticSpec::Validate() const {
  if (num_aspects < 1) throw ConfigError("num_aspects must be >= 1 (zero edges otherwise)");
  CheckRange(queries_per_aspect, "queries_per_aspect");
  CheckRange(pts_per_aspect, "pts_per_aspect");
  CheckRange(within_aspect_ctr, "within_aspect_ctr");
  CheckRange(impressions_per_edge, "impressions_per_edge");
  if (queries_per_aspect.lo < 1) {
    throw ConfigError("queries_per_aspect must be >= 1 (zero edges otherwise)");
  }
  if (pts_per_aspect.lo < 1) {
    throw ConfigError("pts_per_aspect must be >= 1 (zero edges otherwise)");
  }
  if (impressions_per_edge.lo < 1) {
    throw ConfigError("impressions_per_edge must be >= 1");
  }
  if (!(within_aspect_ctr.lo > 0.0) || within_aspect_ctr.hi > 1.0) {
    throw ConfigError("within_aspect_ctr must lie in (0, 1] so noise CTR stays below it");
  }
  if (!(cross_aspect_edge_rate >= 0.0 && cross_aspect_edge_rate <= 1.0)) {
    throw ConfigError("cross_aspect_edge_rate must lie in [0, 1]");
  }
  if (!(query_pt_coverage > 0.0 && query_pt_coverage <= 1.0)) {
    throw ConfigError("query_pt_coverage must lie in (0, 1]");
  }
  if (event_keyword.empty()) throw ConfigError("event_keyword must be nonempty");
}

nlohmann::ordered_json SyntheticSpec::ToJson() const {
  nlohmann::ordered_json j;
  j["num_aspects"] = num_aspects;
  j["queries_per_aspect"] = RangeJson(queries_per_aspect);
  j["pts_per_aspect"] = RangeJson(pts_per_aspect);
  j["within_aspect_ctr"] = RangeJson(within_aspect_ctr);
  j["cross_aspect_edge_rate"] = cross_aspect_edge_rate;
  j["impressions_per_edge"] = RangeJson(impressions_per_edge);
  j["query_pt_coverage"] = query_pt_coverage;
  j["seed"] = seed;
  j["event_keyword"] = event_keyword;
  j["certify_tau"] = certify_tau;
  return j;
}

SyntheticSpec SyntheticSpec::FromJson(const nlohmann::json& doc) {
  SyntheticSpec s;
  if (!doc.is_object()) throw ConfigError("synthetic spec must be a JSON object");
  try {
    for (const auto& [key, v] : doc.items()) {
      if (key == "num_aspects") {
        s.num_aspects = v.get<int>();
      } else if (key == "queries_per_aspect") {
        s.queries_per_aspect = RangeFrom<int>(v, "queries_per_aspect");
      } else if (key == "pts_per_aspect") {
        s.pts_per_aspect = RangeFrom<int>(v, "pts_per_aspect");
      } else if (key == "within_aspect_ctr") {
        s.within_aspect_ctr = RangeFrom<double>(v, "within_aspect_ctr");
      } else if (key == "cross_aspect_edge_rate") {
        s.cross_aspect_edge_rate = v.get<double>();
      } else if (key == "impressions_per_edge") {
        s.impressions_per_edge = RangeFrom<std::int64_t>(v, "impressions_per_edge");
      } else if (key == "query_pt_coverage") {
        s.query_pt_coverage = v.get<double>();
      } else if (key == "seed") {
        s.seed = v.get<std::uint64_t>();
      } else if (key == "event_keyword") {
        s.event_keyword = v.get<std::string>();
      } else if (key == "certify_tau") {
        s.certify_tau = v.get<bool>();
      } else {
        throw ConfigError("synthetic spec: unknown field '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  s.Validate();
  return s;
}

SyntheticData Generate(const SyntheticSpec& spec) {
  spec.Validate();
  Sampler rng(spec.seed);
  const int groups = spec.num_aspects;

  std::vector<int> num_queries(groups), num_pts(groups);
  for (int g = 0; g < groups; ++g) {
    num_queries[g] = static_cast<int>(
        rng.Int(spec.queries_per_aspect.lo, spec.queries_per_aspect.hi));
    num_pts[g] = static_cast<int>(rng.Int(spec.pts_per_aspect.lo, spec.pts_per_aspect.hi));
  }

  std::vector<int> pt_aspect;
  std::vector<std::vector<int>> pool(groups);
  for (int g = 0; g < groups; ++g) {
    for (int i = 0; i < num_pts[g]; ++i) {
      pool[g].push_back(static_cast<int>(pt_aspect.size()));
      pt_aspect.push_back(g);
    }
  }
  const int total_pts = static_cast<int>(pt_aspect.size());
  std::vector<double> base_ctr(total_pts);
  for (auto& c : base_ctr) c = rng.Real(spec.within_aspect_ctr.lo, spec.within_aspect_ctr.hi);

  SyntheticData data;
  GroundTruth& truth = data.truth;
  std::vector<std::string> pt_names(total_pts);
  for (int p = 0; p < total_pts; ++p) {
    pt_names[p] = Name("pt%05ld", p);
    truth.event_product_types.insert(pt_names[p]);
    truth.department_map[pt_names[p]] = Name("dept%03ld", pt_aspect[p]);
  }

  const double noise_ctr_cap = spec.within_aspect_ctr.lo / 2.0;
  truth.true_partition.emplace(groups);
  long query_id = 0;
  std::vector<std::pair<int, RawLogRow>> edges;
  for (int g = 0; g < groups; ++g) {
    const int pool_size = num_pts[g];
    const int own = std::max(
        1, static_cast<int>(std::lround(spec.query_pt_coverage * pool_size)));
    for (int qi = 0; qi < num_queries[g]; ++qi, ++query_id) {
      std::string query = spec.event_keyword + Name(" q%05ld", query_id);
      (*truth.true_partition)[g].push_back(query);
      edges.clear();

      std::vector<int> order = pool[g];
      for (int k = 0; k < own; ++k) {
        int pick = static_cast<int>(rng.Int(k, pool_size - 1));
        std::swap(order[k], order[pick]);
        int p = order[k];
        std::int64_t imp =
            rng.Int(spec.impressions_per_edge.lo, spec.impressions_per_edge.hi);
        std::int64_t clk = std::min<std::int64_t>(
            imp, std::llround(base_ctr[p] * static_cast<double>(imp)));
        edges.push_back({p, {query, pt_names[p], imp, clk}});
      }
      if (spec.cross_aspect_edge_rate > 0.0) {
        for (int p = 0; p < total_pts; ++p) {
          if (pt_aspect[p] == g) continue;
          if (!(rng.Real(0.0, 1.0) < spec.cross_aspect_edge_rate)) continue;
          std::int64_t imp =
              rng.Int(spec.impressions_per_edge.lo, spec.impressions_per_edge.hi);
          double ctr = rng.Real(0.0, noise_ctr_cap);
          auto clk = static_cast<std::int64_t>(std::floor(ctr * static_cast<double>(imp)));
          edges.push_back({p, {query, pt_names[p], imp, clk}});
        }
      }
      std::sort(edges.begin(), edges.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      for (auto& e : edges) data.rows.push_back(std::move(e.second));
    }
  }
  if (data.rows.empty()) throw ConfigError("synthetic spec produced zero edges");
  if (spec.certify_tau) truth.certified_tau = CertifyTau(data.rows, truth);
  return data;
}

std::optional<double> CertifyTau(const std::vector<RawLogRow>& rows,
                                 const GroundTruth& truth) {
  if (!truth.true_partition) return std::nullopt;
  BipartiteGraph graph = BipartiteGraph::Build(rows);
  PriorParams prior = EstimatePrior(graph);
  Partition queries = NamedPartition(graph, Side::kQuery, *truth.true_partition);
  Partition q_single = Partition::Singletons(Side::kQuery, graph.num_queries());
  Partition p_single = Partition::Singletons(Side::kProductType, graph.num_product_types());

  constexpr double kInf = std::numeric_limits<double>::infinity();
  double within = 0.0, cross = kInf;
  auto qv = ClusterVectors(graph, q_single, p_single, prior);
  for (std::size_t i = 0; i < qv.size(); ++i) {
    for (std::size_t j = i + 1; j < qv.size(); ++j) {
      double d = EuclideanDistance(qv[i], qv[j]);
      if (queries.cluster_of(i) == queries.cluster_of(j)) {
        within = std::max(within, d);
      } else {
        cross = std::min(cross, d);
      }
    }
  }
  if (!(within < cross)) return std::nullopt;
  const double tau = within + kCertifiedTauGapFraction * (cross - within);

  // Product-types of different aspects must stay apart (IC-2 step 3), and so
  // must the aggregated aspects in the following iteration.
  std::vector<std::string> pt_aspect(graph.num_product_types());
  for (NodeIndex p = 0; p < graph.num_product_types(); ++p) {
    auto it = truth.department_map.find(graph.product_type(p));
    if (it == truth.department_map.end()) return std::nullopt;
    pt_aspect[p] = it->second;
  }
  auto pv = ClusterVectors(graph, p_single, q_single, prior);
  for (std::size_t i = 0; i < pv.size(); ++i) {
    for (std::size_t j = i + 1; j < pv.size(); ++j) {
      if (pt_aspect[i] != pt_aspect[j] && !(EuclideanDistance(pv[i], pv[j]) > tau)) {
        return std::nullopt;
      }
    }
  }
  auto av = ClusterVectors(graph, queries, p_single, prior);
  for (std::size_t i = 0; i < av.size(); ++i) {
    for (std::size_t j = i + 1; j < av.size(); ++j) {
      if (!(EuclideanDistance(av[i], av[j]) > tau)) return std::nullopt;
    }
  }
  return tau;
}

}  // namespace aspectmine
