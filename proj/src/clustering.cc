#include "aspectmine/clustering.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aspectmine/errors.h"
#include "parallel.h"

namespace aspectmine {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Upper-triangular n x n matrix without the diagonal.
class CondensedMatrix {
 public:
  explicit CondensedMatrix(std::size_t n) : n_(n), data_(n < 2 ? 0 : n * (n - 1) / 2) {}

  double& operator()(std::size_t i, std::size_t j) {
    return data_[Offset(std::min(i, j), std::max(i, j))];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[Offset(std::min(i, j), std::max(i, j))];
  }
  double* row_tail(std::size_t i) { return data_.data() + Offset(i, i + 1); }

 private:
  std::size_t Offset(std::size_t i, std::size_t j) const {
    return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
  }

  std::size_t n_;
  std::vector<double> data_;
};

void CheckDimensions(std::span<const SparseVector> vectors) {
  for (const auto& v : vectors) {
    if (v.dimension() != vectors.front().dimension()) {
      throw ContractViolation("vectors have inconsistent dimensions");
    }
  }
}

CondensedMatrix PairwiseDistances(std::span<const SparseVector> vectors, int threads) {
  const std::size_t n = vectors.size();
  CondensedMatrix dist(n);
  internal::ParallelChunks(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (i + 1 >= n) continue;
      double* row = dist.row_tail(i);
      for (std::size_t j = i + 1; j < n; ++j) {
        row[j - i - 1] = EuclideanDistance(vectors[i], vectors[j]);
      }
    }
  });
  return dist;
}

bool ContentLess(const SparseVector& u, const SparseVector& v) {
  auto a = u.entries();
  auto b = v.entries();
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

std::string_view ModeName(Mode mode) {
  switch (mode) {
    case Mode::kIc1:
      return "ic1";
    case Mode::kIc2:
      return "ic2";
    case Mode::kHc:
      return "hc";
    case Mode::kDbscan:
      return "dbscan";
  }
  return "?";
}

Mode ParseMode(std::string_view name) {
  std::string lower(name);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::erase(lower, '-');
  if (lower == "ic1") return Mode::kIc1;
  if (lower == "ic2") return Mode::kIc2;
  if (lower == "hc") return Mode::kHc;
  if (lower == "dbscan") return Mode::kDbscan;
  throw ConfigError("unknown mode '" + std::string(name) +
                    "' (expected ic1, ic2, hc or dbscan)");
}

void ClusteringConfig::Validate() const {
  if (!(tau_q > 0.0) || !std::isfinite(tau_q)) throw ConfigError("tau_q must be > 0");
  if (!(tau_p > 0.0) || !std::isfinite(tau_p)) throw ConfigError("tau_p must be > 0");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (dbscan_min_samples < 1) throw ConfigError("dbscan min_samples must be >= 1");
}

double EuclideanDistance(const SparseVector& u, const SparseVector& v) {
  if (u.dimension() != v.dimension()) {
    throw ContractViolation("EuclideanDistance: dimension mismatch (" +
                            std::to_string(u.dimension()) + " vs " +
                            std::to_string(v.dimension()) + ")");
  }
  auto a = u.entries();
  auto b = v.entries();
  std::size_t i = 0, j = 0;
  double sum = 0.0;
  while (i < a.size() || j < b.size()) {
    double d;
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      d = a[i++].second;
    } else if (i == a.size() || b[j].first < a[i].first) {
      d = b[j++].second;
    } else {
      d = a[i++].second - b[j++].second;
    }
    sum += d * d;
  }
  return std::sqrt(sum);
}

Partition HcRound(std::span<const SparseVector> vectors, double tau, Side side,
                  int threads) {
  const std::size_t n = vectors.size();
  if (n == 0) throw ContractViolation("HcRound needs at least one vector");
  CheckDimensions(vectors);
  if (n == 1) return Partition::Singletons(side, 1);

  // link(i, j) holds the SUM of member-pair distances between the clusters
  // rooted at i and j; the average is link / (size_i * size_j). A merged
  // cluster lives in the slot of its smaller root, so a slot index is always
  // the cluster's minimum member index.
  CondensedMatrix link = PairwiseDistances(vectors, threads);
  std::vector<double> size(n, 1.0);
  std::vector<std::size_t> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = i;
  std::vector<std::size_t> root(n);
  for (std::size_t i = 0; i < n; ++i) root[i] = i;

  auto avg = [&](std::size_t i, std::size_t j) {
    return link(i, j) / (size[i] * size[j]);
  };
  std::vector<double> row_min(n, kInf);
  std::vector<std::size_t> row_arg(n, n);
  auto recompute_row = [&](std::size_t k) {
    row_min[k] = kInf;
    row_arg[k] = n;
    for (std::size_t j : active) {
      if (j == k) continue;
      double d = avg(k, j);
      if (d < row_min[k]) {
        row_min[k] = d;
        row_arg[k] = j;
      }
    }
  };
  for (std::size_t k = 0; k < n; ++k) recompute_row(k);

  while (active.size() > 1) {
    double best = kInf;
    for (std::size_t i : active) best = std::min(best, row_min[i]);
    if (!(best < tau)) break;
    const double limit = best + kTieTolerance;
    auto is_candidate = [&](double d) { return d <= limit && d < tau; };

    std::size_t a = n;
    for (std::size_t i : active) {
      if (is_candidate(row_min[i])) {
        a = i;
        break;
      }
    }
    std::size_t b = n;
    for (std::size_t j : active) {
      if (j != a && is_candidate(avg(a, j))) {
        b = j;
        break;
      }
    }
    // a is the least row owning a candidate pair, so its partner is larger.
    for (std::size_t k : active) {
      if (k != a && k != b) link(a, k) += link(b, k);
    }
    size[a] += size[b];
    root[b] = a;
    active.erase(std::find(active.begin(), active.end(), b));

    recompute_row(a);
    for (std::size_t k : active) {
      if (k == a) continue;
      if (row_arg[k] == a || row_arg[k] == b) {
        recompute_row(k);
      } else {
        double d = avg(k, a);
        if (d < row_min[k]) {
          row_min[k] = d;
          row_arg[k] = a;
        }
      }
    }
  }

  std::vector<std::int64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = i;
    while (root[r] != r) r = root[r];
    labels[i] = static_cast<std::int64_t>(r);
  }
  return Partition::FromLabels(side, labels);
}

Partition Dbscan(std::span<const SparseVector> vectors, double eps,
                 int min_samples, Side side, int threads) {
  const std::size_t n = vectors.size();
  if (n == 0) throw ContractViolation("Dbscan needs at least one vector");
  if (min_samples < 1) throw ConfigError("min_samples must be >= 1");
  CheckDimensions(vectors);

  std::vector<std::vector<std::pair<std::size_t, double>>> neighbors(n);
  internal::ParallelChunks(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        double d = EuclideanDistance(vectors[i], vectors[j]);
        if (d <= eps) neighbors[i].emplace_back(j, d);
      }
    }
  });
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    core[i] = neighbors[i].size() + 1 >= static_cast<std::size_t>(min_samples);
  }

  // Clusters are the connected components of core points.
  constexpr std::int64_t kUnset = -1;
  std::vector<std::int64_t> label(n, kUnset);
  std::int64_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (!core[s] || label[s] != kUnset) continue;
    label[s] = next;
    stack.assign(1, s);
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (const auto& [v, d] : neighbors[u]) {
        if (core[v] && label[v] == kUnset) {
          label[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }

  // Border points: nearest core neighbor; exact distance ties go to the core
  // whose vector is lexicographically smaller, which does not depend on input
  // order (equal vectors are always in the same component).
  std::vector<NodeIndex> noise;
  std::vector<std::int64_t> final_label = label;
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    std::size_t best = n;
    double best_d = kInf;
    for (const auto& [v, d] : neighbors[i]) {
      if (!core[v]) continue;
      if (best == n || d < best_d ||
          (d == best_d && ContentLess(vectors[v], vectors[best]))) {
        best = v;
        best_d = d;
      }
    }
    if (best == n) {
      noise.push_back(static_cast<NodeIndex>(i));
      final_label[i] = -static_cast<std::int64_t>(i) - 2;
    } else {
      final_label[i] = label[best];
    }
  }
  Partition grouped = Partition::FromLabels(side, final_label);
  return Partition::FromClusters(side, n, grouped.clusters(), noise);
}

IterativeResult IterateClustering(const BipartiteGraph& graph,
                                  const PriorParams& prior,
                                  const ClusteringConfig& config) {
  config.Validate();
  prior.Validate();
  if (config.mode != Mode::kIc1 && config.mode != Mode::kIc2) {
    throw ConfigError("IterateClustering requires mode ic1 or ic2");
  }
  const bool cluster_pts = config.mode == Mode::kIc2;
  IterativeResult result{Partition::Singletons(Side::kQuery, graph.num_queries()),
                         Partition::Singletons(Side::kProductType,
                                               graph.num_product_types()),
                         0, false};
  for (int it = 1; it <= config.max_iterations; ++it) {
    auto query_vectors = ClusterVectors(graph, result.queries, result.product_types,
                                        prior, config.weighting, config.threads);
    std::vector<SparseVector> pt_vectors;
    if (cluster_pts) {
      pt_vectors = ClusterVectors(graph, result.product_types, result.queries, prior,
                                  config.weighting, config.threads);
    }
    Partition queries = result.queries.Coarsen(
        HcRound(query_vectors, config.tau_q, Side::kQuery, config.threads));
    Partition pts = cluster_pts
                        ? result.product_types.Coarsen(HcRound(
                              pt_vectors, config.tau_p, Side::kProductType,
                              config.threads))
                        : result.product_types;
    const bool changed = !(queries == result.queries) || !(pts == result.product_types);
    result.queries = std::move(queries);
    result.product_types = std::move(pts);
    result.iterations = it;
    if (!changed) {
      result.converged = true;
      break;
    }
  }
  return result;
}

Partition ClusterBaseline(const BipartiteGraph& graph, const PriorParams& prior,
                          const ClusteringConfig& config) {
  config.Validate();
  prior.Validate();
  auto vectors = ClusterVectors(
      graph, Partition::Singletons(Side::kQuery, graph.num_queries()),
      Partition::Singletons(Side::kProductType, graph.num_product_types()), prior,
      config.weighting, config.threads);
  switch (config.mode) {
    case Mode::kHc:
      return HcRound(vectors, config.tau_q, Side::kQuery, config.threads);
    case Mode::kDbscan:
      return Dbscan(vectors, config.tau_q, config.dbscan_min_samples, Side::kQuery,
                    config.threads);
    default:
      throw ConfigError("ClusterBaseline requires mode hc or dbscan");
  }
}

}  // namespace aspectmine
