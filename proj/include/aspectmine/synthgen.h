#ifndef ASPECTMINE_SYNTHGEN_H_
#define ASPECTMINE_SYNTHGEN_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aspectmine/evaluation.h"
#include "aspectmine/ingest.h"
#include "json.hpp"

namespace aspectmine {

template <typename T>
struct Range {
  T lo{};
  T hi{};
};

// Parameters of a planted-aspect query-click log.
struct SyntheticSpec {
  int num_aspects = 4;
  Range<int> queries_per_aspect{50, 50};
  Range<int> pts_per_aspect{10, 10};
  Range<double> within_aspect_ctr{0.1, 0.5};
  double cross_aspect_edge_rate = 0.0;
  Range<std::int64_t> impressions_per_edge{200, 400};
  double query_pt_coverage = 1.0;
  std::uint64_t seed = 1;
  std::string event_keyword = "ev";
  // Compute GroundTruth::certified_tau (quadratic in the query count).
  bool certify_tau = true;

  void Validate() const;  // throws ConfigError
  nlohmann::ordered_json ToJson() const;
  static SyntheticSpec FromJson(const nlohmann::json& doc);
};

// Name of the sampling procedure, recorded in manifests.
inline constexpr const char* kGeneratorAlgorithm = "aspectmine-synth-v1/mt19937_64";

// Fraction of the singleton-level vector gap used for certified_tau.
inline constexpr double kCertifiedTauGapFraction = 0.2;

struct SyntheticData {
  std::vector<RawLogRow> rows;
  GroundTruth truth;
};

// Deterministic for a fixed spec. Sampling, all from one std::mt19937_64
// seeded with spec.seed, in this order:
//
//   int in [lo, hi]:  lo + next() % (hi - lo + 1)
//   real in [lo, hi): lo + (hi - lo) * (next() >> 11) * 2^-53
//
//   per aspect g: query count, then product-type count
//   per product-type (global order): base CTR from within_aspect_ctr
//   per query (global order):
//     own edges: k = max(1, round(coverage * pool)) product-types by partial
//       Fisher-Yates over the aspect pool; per chosen edge, impressions, and
//       clicks = round(base_ctr * impressions)
//     noise: for each foreign product-type in index order, one real < rate
//       adds an edge with impressions, CTR in [0, min_ctr / 2) and
//       clicks = floor(ctr * impressions)
//
// Rows come out grouped by query, edges ordered by product-type index.
SyntheticData Generate(const SyntheticSpec& spec);

// Singleton-level query vector gap: if the largest within-aspect distance is
// below the smallest cross-aspect one (and below the smallest cross-aspect
// product-type and aspect-aggregate distances), returns a threshold
// kCertifiedTauGapFraction of the way into that gap.
std::optional<double> CertifyTau(const std::vector<RawLogRow>& rows,
                                 const GroundTruth& truth);

}  // namespace aspectmine

#endif  // ASPECTMINE_SYNTHGEN_H_
