#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "aspectmine/clustering.h"
#include "aspectmine/errors.h"
#include "aspectmine/evaluation.h"
#include "aspectmine/graph.h"
#include "aspectmine/ingest.h"
#include "aspectmine/synthgen.h"
#include "aspectmine/weighting.h"
#include "doctest.h"

using namespace aspectmine;

namespace {

std::string AsCsv(const std::vector<RawLogRow>& rows) {
  std::ostringstream out;
  WriteLogCsv(out, rows);
  return out.str();
}

// Connected components of the query side, as sorted name groups.
std::set<std::set<std::string>> QueryComponents(const BipartiteGraph& g) {
  std::vector<int> comp(g.num_queries(), -1);
  int next = 0;
  for (NodeIndex s = 0; s < g.num_queries(); ++s) {
    if (comp[s] >= 0) continue;
    std::vector<NodeIndex> stack{s};
    std::vector<bool> pt_seen(g.num_product_types(), false);
    comp[s] = next;
    while (!stack.empty()) {
      NodeIndex q = stack.back();
      stack.pop_back();
      for (const auto& a : g.query_edges(q)) {
        if (pt_seen[a.node]) continue;
        pt_seen[a.node] = true;
        for (const auto& b : g.product_type_edges(a.node)) {
          if (comp[b.node] < 0) {
            comp[b.node] = next;
            stack.push_back(b.node);
          }
        }
      }
    }
    ++next;
  }
  std::vector<std::set<std::string>> groups(next);
  for (NodeIndex q = 0; q < g.num_queries(); ++q) groups[comp[q]].insert(g.query(q));
  return {groups.begin(), groups.end()};
}

std::set<std::set<std::string>> AsSets(const std::vector<std::vector<std::string>>& groups) {
  std::set<std::set<std::string>> out;
  for (const auto& g : groups) out.insert({g.begin(), g.end()});
  return out;
}

}  // namespace

TEST_CASE("fixed seed gives byte-identical rows") {
  SyntheticSpec spec;
  spec.cross_aspect_edge_rate = 0.05;
  spec.query_pt_coverage = 0.5;
  spec.certify_tau = false;
  auto a = Generate(spec);
  auto b = Generate(spec);
  CHECK(AsCsv(a.rows) == AsCsv(b.rows));
  spec.seed = 2;
  CHECK(AsCsv(Generate(spec).rows) != AsCsv(a.rows));
}

TEST_CASE("two aspects without noise form two components") {
  SyntheticSpec spec;
  spec.num_aspects = 2;
  spec.queries_per_aspect = {5, 12};
  spec.pts_per_aspect = {3, 6};
  auto data = Generate(spec);
  auto g = BipartiteGraph::Build(data.rows);
  REQUIRE(data.truth.true_partition.has_value());
  CHECK(QueryComponents(g) == AsSets(*data.truth.true_partition));
}

TEST_CASE("row count follows the binomial noise model") {
  SyntheticSpec spec;
  spec.cross_aspect_edge_rate = 0.05;
  spec.certify_tau = false;
  const double own = 4 * 50 * 10;
  const double trials = 4 * 50 * 30;
  const double mean = trials * 0.05;
  const double sigma = std::sqrt(trials * 0.05 * 0.95);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    spec.seed = seed;
    double rows = static_cast<double>(Generate(spec).rows.size());
    CHECK(rows >= own);
    CHECK(rows >= own + mean - 5 * sigma);
    CHECK(rows <= own + mean + 5 * sigma);
  }
}

TEST_CASE("planted structure: pools, departments, noise CTR") {
  SyntheticSpec spec;
  spec.num_aspects = 3;
  spec.cross_aspect_edge_rate = 0.1;
  spec.within_aspect_ctr = {0.2, 0.4};
  spec.certify_tau = false;
  auto data = Generate(spec);
  const auto& t = data.truth;
  CHECK(t.event_product_types.size() == 30);
  std::set<std::string> depts;
  for (const auto& [pt, d] : t.department_map) depts.insert(d);
  CHECK(depts.size() == 3);
  std::map<std::string, std::size_t> aspect_of_query;
  for (std::size_t g = 0; g < t.true_partition->size(); ++g) {
    for (const auto& q : (*t.true_partition)[g]) aspect_of_query[q] = g;
  }
  std::size_t noise = 0;
  for (const auto& r : data.rows) {
    CHECK(r.query.rfind("ev ", 0) == 0);
    CHECK(r.clicks <= r.impressions);
    CHECK(r.impressions >= 200);
    CHECK(r.impressions <= 400);
    char own[16];
    std::snprintf(own, sizeof(own), "dept%03zu", aspect_of_query.at(r.query));
    double ctr = double(r.clicks) / double(r.impressions);
    if (t.department_map.at(r.product_type) != own) {
      ++noise;
      CHECK(ctr < 0.1);
    } else {
      CHECK(ctr >= 0.2 - 0.5 / 200);
      CHECK(ctr <= 0.4 + 0.5 / 200);
    }
  }
  CHECK(noise > 0);
}

TEST_CASE("low coverage leaves same-aspect queries with disjoint profiles") {
  SyntheticSpec spec;
  spec.query_pt_coverage = 0.3;
  spec.certify_tau = false;
  auto data = Generate(spec);
  std::map<std::string, std::set<std::string>> profile;
  for (const auto& r : data.rows) profile[r.query].insert(r.product_type);
  std::size_t disjoint = 0;
  const auto& group = data.truth.true_partition->front();
  for (std::size_t i = 0; i < group.size(); ++i) {
    CHECK(profile[group[i]].size() == 3);
    for (std::size_t j = i + 1; j < group.size(); ++j) {
      bool shared = false;
      for (const auto& p : profile[group[i]]) shared |= profile[group[j]].count(p) > 0;
      disjoint += !shared;
    }
  }
  CHECK(disjoint > 0);
}

TEST_CASE("certified tau recovers the planted partition with IC-1") {
  SyntheticSpec spec;
  auto data = Generate(spec);
  REQUIRE(data.truth.certified_tau.has_value());
  auto g = BipartiteGraph::Build(data.rows);
  ClusteringConfig cfg;
  cfg.mode = Mode::kIc1;
  cfg.tau_q = cfg.tau_p = *data.truth.certified_tau;
  auto r = IterateClustering(g, EstimatePrior(g), cfg);
  auto truth = NamedPartition(g, Side::kQuery, *data.truth.true_partition);
  CHECK(AdjustedRand(r.queries, truth) == 1.0);
}

TEST_CASE("noisy data gets no certified tau") {
  SyntheticSpec spec;
  spec.cross_aspect_edge_rate = 0.3;
  spec.query_pt_coverage = 0.3;
  CHECK_FALSE(Generate(spec).truth.certified_tau.has_value());
}

TEST_CASE("spec JSON parsing and validation") {
  auto s = SyntheticSpec::FromJson(nlohmann::json::parse(
      R"({"num_aspects":2,"queries_per_aspect":[3,5],"pts_per_aspect":4,
          "within_aspect_ctr":[0.2,0.3],"seed":9})"));
  CHECK(s.num_aspects == 2);
  CHECK(s.queries_per_aspect.lo == 3);
  CHECK(s.queries_per_aspect.hi == 5);
  CHECK(s.pts_per_aspect.lo == 4);
  CHECK(s.pts_per_aspect.hi == 4);
  CHECK(s.seed == 9);
  auto again = SyntheticSpec::FromJson(nlohmann::json::parse(s.ToJson().dump()));
  CHECK(again.ToJson() == s.ToJson());

  CHECK_THROWS_AS(SyntheticSpec::FromJson(nlohmann::json::parse(R"({"nope":1})")), ConfigError);
  CHECK_THROWS_AS(SyntheticSpec::FromJson(nlohmann::json::parse(R"({"num_aspects":0})")),
                  ConfigError);
  CHECK_THROWS_AS(
      SyntheticSpec::FromJson(nlohmann::json::parse(R"({"queries_per_aspect":[5,3]})")),
      ConfigError);
  CHECK_THROWS_AS(SyntheticSpec::FromJson(nlohmann::json::parse(R"({"query_pt_coverage":0})")),
                  ConfigError);
  CHECK_THROWS_AS(
      SyntheticSpec::FromJson(nlohmann::json::parse(R"({"within_aspect_ctr":[0,0.5]})")),
      ConfigError);
  CHECK_THROWS_AS(SyntheticSpec::FromJson(nlohmann::json::parse(R"({"seed":"x"})")),
                  ConfigError);
}
