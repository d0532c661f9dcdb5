#include "aspectmine/evaluation.h"

#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "aspectmine/errors.h"
#include "aspectmine/log.h"

namespace aspectmine {
namespace {

std::set<std::string> ItemSet(const Carousel& c) {
  std::set<std::string> s;
  for (const auto& it : c.items) s.insert(it.product_type);
  return s;
}

double Choose2(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace

nlohmann::ordered_json GroundTruthToJson(const GroundTruth& truth) {
  nlohmann::ordered_json j;
  j["event_product_types"] = truth.event_product_types;
  nlohmann::ordered_json depts = nlohmann::ordered_json::object();
  for (const auto& [pt, d] : truth.department_map) depts[pt] = d;
  j["department_map"] = std::move(depts);
  if (truth.true_partition) j["true_partition"] = *truth.true_partition;
  if (truth.certified_tau) {
    j["certified_tau"] = *truth.certified_tau;
  } else {
    j["certified_tau"] = nullptr;
  }
  return j;
}

GroundTruth GroundTruthFromJson(const nlohmann::json& doc) {
  GroundTruth t;
  try {
    if (!doc.is_object()) throw DataError("ground truth: top level must be an object");
    if (!doc.contains("event_product_types")) {
      throw DataError("ground truth: missing field 'event_product_types'");
    }
    if (!doc.contains("department_map")) {
      throw DataError("ground truth: missing field 'department_map'");
    }
    for (const auto& pt : doc["event_product_types"]) {
      t.event_product_types.insert(pt.get<std::string>());
    }
    for (const auto& [pt, d] : doc["department_map"].items()) {
      t.department_map[pt] = d.get<std::string>();
    }
    if (doc.contains("true_partition") && !doc["true_partition"].is_null()) {
      t.true_partition =
          doc["true_partition"].get<std::vector<std::vector<std::string>>>();
    }
    if (doc.contains("certified_tau") && doc["certified_tau"].is_number()) {
      t.certified_tau = doc["certified_tau"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("ground truth: malformed field: ") + e.what());
  }
  return t;
}

double Precision(std::span<const Carousel> carousels, const GroundTruth& truth) {
  if (truth.event_product_types.empty()) {
    throw ContractViolation("precision needs a nonempty ground-truth set");
  }
  std::set<std::string> covered;
  for (const auto& c : carousels) {
    for (const auto& it : c.items) {
      if (truth.event_product_types.count(it.product_type)) covered.insert(it.product_type);
    }
  }
  return 100.0 * static_cast<double>(covered.size()) /
         static_cast<double>(truth.event_product_types.size());
}

double Jaccard(const std::set<std::string>& x, const std::set<std::string>& y) {
  if (x.empty() && y.empty()) {
    Log(LogLevel::kInfo, "jaccard of two empty sets taken as 1.0");
    return 1.0;
  }
  std::size_t inter = 0;
  for (const auto& e : x) inter += y.count(e);
  return static_cast<double>(inter) / static_cast<double>(x.size() + y.size() - inter);
}

double Heterogeneity(std::span<const Carousel> carousels) {
  if (carousels.size() < 2) {
    throw UndefinedMetricError("heterogeneity needs at least two carousels");
  }
  std::vector<std::set<std::string>> sets;
  sets.reserve(carousels.size());
  for (const auto& c : carousels) sets.push_back(ItemSet(c));
  double sum = 0.0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) sum += Jaccard(sets[i], sets[j]);
  }
  return 1.0 - sum / Choose2(static_cast<double>(sets.size()));
}

double Cohesion(std::span<const Carousel> carousels, const GroundTruth& truth) {
  if (carousels.empty()) throw UndefinedMetricError("cohesion needs at least one carousel");
  double total = 0.0;
  for (const auto& c : carousels) {
    if (c.items.empty()) throw ContractViolation("cohesion: carousel without items");
    std::set<std::string> depts;
    for (const auto& it : c.items) {
      auto found = truth.department_map.find(it.product_type);
      if (found == truth.department_map.end()) {
        throw DataError("department map has no entry for product-type '" +
                        it.product_type + "'");
      }
      depts.insert(found->second);
    }
    total += static_cast<double>(depts.size());
  }
  return static_cast<double>(carousels.size()) / total;
}

double AdjustedRand(const Partition& pred, const Partition& truth) {
  if (pred.side() != truth.side() || pred.num_nodes() != truth.num_nodes()) {
    throw ContractViolation("adjusted_rand: partitions cover different node sets");
  }
  const std::size_t n = pred.num_nodes();
  std::unordered_map<std::uint64_t, std::uint64_t> table;
  for (NodeIndex i = 0; i < n; ++i) {
    ++table[(static_cast<std::uint64_t>(pred.cluster_of(i)) << 32) | truth.cluster_of(i)];
  }
  double index = 0.0;
  for (const auto& [key, count] : table) index += Choose2(static_cast<double>(count));
  double sum_a = 0.0, sum_b = 0.0;
  for (const auto& m : pred.clusters()) sum_a += Choose2(static_cast<double>(m.size()));
  for (const auto& m : truth.clusters()) sum_b += Choose2(static_cast<double>(m.size()));
  const double total = Choose2(static_cast<double>(n));
  if (total == 0.0) return 1.0;
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both trivial and identical in kind
  return (index - expected) / (max_index - expected);
}

Partition NamedPartition(const BipartiteGraph& graph, Side side,
                         const std::vector<std::vector<std::string>>& clusters) {
  std::vector<std::vector<NodeIndex>> ids;
  ids.reserve(clusters.size());
  std::size_t count = 0;
  for (const auto& c : clusters) {
    auto& out = ids.emplace_back();
    for (const auto& name : c) {
      auto idx = side == Side::kQuery ? graph.FindQuery(name) : graph.FindProductType(name);
      if (!idx) throw DataError("partition names unknown node '" + name + "'");
      out.push_back(*idx);
      ++count;
    }
  }
  if (count != graph.num_nodes(side)) {
    throw DataError("partition covers " + std::to_string(count) + " nodes, graph has " +
                    std::to_string(graph.num_nodes(side)));
  }
  return Partition::FromClusters(side, graph.num_nodes(side), ids);
}

EvalReport Evaluate(std::span<const Carousel> carousels, const GroundTruth& truth,
                    const std::optional<Partition>& predicted,
                    const std::optional<Partition>& true_partition) {
  EvalReport r;
  r.num_carousels = carousels.size();
  r.precision = Precision(carousels, truth);
  try {
    r.heterogeneity = Heterogeneity(carousels);
  } catch (const UndefinedMetricError& e) {
    r.notes.emplace_back(e.what());
  }
  try {
    r.cohesion = Cohesion(carousels, truth);
  } catch (const UndefinedMetricError& e) {
    r.notes.emplace_back(e.what());
  }
  if (predicted && true_partition) {
    r.adjusted_rand = AdjustedRand(*predicted, *true_partition);
  }
  return r;
}

namespace {

nlohmann::ordered_json OptionalJson(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

nlohmann::ordered_json EvalReport::ToJson() const {
  nlohmann::ordered_json j;
  j["num_carousels"] = num_carousels;
  j["precision"] = precision;
  j["heterogeneity"] = OptionalJson(heterogeneity);
  j["heterogeneity_all"] = OptionalJson(heterogeneity_all);
  j["cohesion"] = OptionalJson(cohesion);
  j["adjusted_rand"] = OptionalJson(adjusted_rand);
  j["notes"] = notes;
  return j;
}

std::string EvalReport::ToText() const {
  std::ostringstream out;
  auto line = [&](const char* name, const std::string& v) {
    out << name;
    for (std::size_t i = std::char_traits<char>::length(name); i < 20; ++i) out << ' ';
    out << v << '\n';
  };
  auto opt = [&](const std::optional<double>& v) { return v ? Fixed(*v, 3) : "n/a"; };
  line("carousels", std::to_string(num_carousels));
  line("precision", Fixed(precision, 2) + "%");
  line("heterogeneity", opt(heterogeneity));
  if (heterogeneity_all) line("heterogeneity(all)", opt(heterogeneity_all));
  line("cohesion", opt(cohesion));
  if (adjusted_rand) line("adjusted_rand", opt(adjusted_rand));
  for (const auto& n : notes) out << "note: " << n << '\n';
  return out.str();
}

}  // namespace aspectmine
