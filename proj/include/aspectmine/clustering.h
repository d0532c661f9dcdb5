#ifndef ASPECTMINE_CLUSTERING_H_
#define ASPECTMINE_CLUSTERING_H_

#include <span>
#include <string_view>
#include <vector>

#include "aspectmine/graph.h"
#include "aspectmine/partition.h"
#include "aspectmine/weighting.h"

namespace aspectmine {

enum class Mode { kIc1, kIc2, kHc, kDbscan };

std::string_view ModeName(Mode mode);  // "ic1", "ic2", "hc", "dbscan"
Mode ParseMode(std::string_view name);

// Two average-linkage distances closer than this are treated as tied.
inline constexpr double kTieTolerance = 1e-12;

struct ClusteringConfig {
  double tau_q = 0.2;  // query merge threshold
  double tau_p = 0.2;  // product-type merge threshold (IC-2 only)
  Mode mode = Mode::kIc2;
  int max_iterations = 50;
  int dbscan_min_samples = 3;
  WeightingOptions weighting;
  // Worker threads for vector construction and pairwise distances. Output
  // does not depend on this value.
  int threads = 1;

  void Validate() const;  // throws ConfigError
};

// sqrt(sum_i (u_i - v_i)^2) with absent entries as zero. Throws
// ContractViolation on a dimension mismatch.
double EuclideanDistance(const SparseVector& u, const SparseVector& v);

// Threshold agglomerative clustering with average linkage.
//
// Starts from singletons and repeatedly merges the two clusters with the
// smallest mean pairwise distance between their members' input vectors, as
// long as that distance is below `tau`. Among pairs within kTieTolerance of
// the minimum, the pair whose (smaller, larger) minimum-member indices is
// lexicographically least wins. Node i of the result is vectors[i].
Partition HcRound(std::span<const SparseVector> vectors, double tau,
                  Side side = Side::kQuery, int threads = 1);

// DBSCAN with euclidean distance. A point is core when at least
// `min_samples` points (itself included) lie within `eps`. A border point
// joins the cluster of its nearest core point. Unreached points become noise
// singletons.
Partition Dbscan(std::span<const SparseVector> vectors, double eps,
                 int min_samples, Side side = Side::kQuery, int threads = 1);

struct IterativeResult {
  Partition queries;
  Partition product_types;
  int iterations = 0;
  bool converged = false;
};

// Iterative clustering over the bipartite graph (modes kIc1 and kIc2).
//
// Each outer iteration rebuilds cluster vectors from the current partitions,
// reclusters the query clusters with tau_q and, for kIc2, the product-type
// clusters with tau_p (both against the vectors built at the start of the
// iteration). Stops after an iteration that changes nothing (kIc1 checks the
// query side only) or after max_iterations, with converged = false.
IterativeResult IterateClustering(const BipartiteGraph& graph,
                                  const PriorParams& prior,
                                  const ClusteringConfig& config);

// Single-pass baselines (modes kHc and kDbscan) on singleton query vectors
// built against singleton product-types. DBSCAN uses eps = tau_q.
Partition ClusterBaseline(const BipartiteGraph& graph, const PriorParams& prior,
                          const ClusteringConfig& config);

}  // namespace aspectmine

#endif  // ASPECTMINE_CLUSTERING_H_
