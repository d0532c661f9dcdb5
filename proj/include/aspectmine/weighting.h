#ifndef ASPECTMINE_WEIGHTING_H_
#define ASPECTMINE_WEIGHTING_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "aspectmine/graph.h"
#include "aspectmine/partition.h"

namespace aspectmine {

// Beta prior over the click probability of an edge.
struct PriorParams {
  double alpha = 0.0;  // prior click mass
  double beta = 0.0;   // prior non-click mass

  void Validate() const;  // throws ConfigError unless alpha, beta > 0
};

enum class AlphaMode {
  kPerProductType,  // mean of per-product-type CTRs
  kGlobal,          // sum(clicks) / sum(impressions)
};

std::string_view AlphaModeName(AlphaMode mode);
AlphaMode ParseAlphaMode(std::string_view name);

inline constexpr double kDefaultAlphaEpsilon = 1e-6;

// alpha = average CTR, beta = 1 - alpha, with alpha clamped into
// [epsilon, 1 - epsilon].
PriorParams EstimatePrior(const BipartiteGraph& graph,
                          AlphaMode mode = AlphaMode::kPerProductType,
                          double epsilon = kDefaultAlphaEpsilon);

// Bayesian point estimate of an edge's weight:
//
//   w = sqrt((alpha + clk) / (beta + imp - clk) * (alpha + beta + imp + 1))
//
// Throws ContractViolation if clicks > impressions or a count is negative.
double EdgeWeight(std::int64_t clicks, std::int64_t impressions,
                  const PriorParams& prior);

// Sparse real vector with entries kept sorted by index. Stored weights are
// strictly positive; absent indices are zero.
class SparseVector {
 public:
  using Entry = std::pair<std::uint32_t, double>;

  SparseVector() = default;
  explicit SparseVector(std::size_t dimension) : dimension_(dimension) {}
  // Entries must be strictly increasing in index, positive, and < dimension.
  SparseVector(std::size_t dimension, std::vector<Entry> entries);

  std::size_t dimension() const { return dimension_; }
  std::span<const Entry> entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  double at(std::uint32_t index) const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::size_t dimension_ = 0;
  std::vector<Entry> entries_;
};

struct WeightingOptions {
  // When set, cluster pairs without any impression get the prior-only
  // EdgeWeight(0, 0) instead of an absent entry.
  bool prior_on_missing = false;
};

// Feature vector of a query cluster over the product-type clusters of
// `pt_partition`; entry j weighs the aggregate (clicks, impressions) between
// the cluster and product-type cluster j.
SparseVector QueryClusterVector(const BipartiteGraph& graph,
                                const Partition& pt_partition,
                                std::span<const NodeIndex> cluster,
                                const PriorParams& prior,
                                const WeightingOptions& options = {});

// Mirror of QueryClusterVector with the sides exchanged.
SparseVector ProductTypeClusterVector(const BipartiteGraph& graph,
                                      const Partition& query_partition,
                                      std::span<const NodeIndex> cluster,
                                      const PriorParams& prior,
                                      const WeightingOptions& options = {});

// Vectors for every cluster of `own` (in cluster-id order) against the
// clusters of `other`. `own.side()` selects the vector layout.
std::vector<SparseVector> ClusterVectors(const BipartiteGraph& graph,
                                         const Partition& own,
                                         const Partition& other,
                                         const PriorParams& prior,
                                         const WeightingOptions& options = {},
                                         int threads = 1);

}  // namespace aspectmine

#endif  // ASPECTMINE_WEIGHTING_H_
