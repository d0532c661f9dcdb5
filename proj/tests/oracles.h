// Reference implementations used only by tests. Each one is written
// directly from the textbook definition, sharing no code with the library.

#ifndef ASPECTMINE_TESTS_ORACLES_H_
#define ASPECTMINE_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <utility>
#include <vector>

namespace oracle {

// Straight transcription of the smoothed edge weight
// sqrt((a + clk) / (b + imp - clk) * (a + b + imp + 1)).
inline double EdgeWeight(double clk, double imp, double a, double b) {
  double numerator = a + clk;
  double denominator = b + imp - clk;
  double scale = a + b + imp + 1.0;
  return std::sqrt(numerator / denominator * scale);
}

using Dense = std::vector<double>;

inline double Distance(const Dense& u, const Dense& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
  return std::sqrt(s);
}

// Naive average-linkage agglomeration. Every step recomputes every
// inter-cluster average from scratch. Among pairs within 1e-12 of the
// minimum (and below tau) the one whose (smaller, larger) minimum member
// indices are lexicographically least merges. Returns a label per point
// equal to the smallest index in its cluster.
inline std::vector<std::size_t> AverageLinkage(const std::vector<Dense>& points,
                                               double tau) {
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < points.size(); ++i) clusters.push_back({i});
  for (;;) {
    std::vector<std::vector<double>> avg(clusters.size(),
                                         std::vector<double>(clusters.size()));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double total = 0.0;
        for (std::size_t x : clusters[i]) {
          for (std::size_t y : clusters[j]) total += Distance(points[x], points[y]);
        }
        avg[i][j] = total / double(clusters[i].size() * clusters[j].size());
        best = std::min(best, avg[i][j]);
      }
    }
    if (!(best < tau)) break;
    std::pair<std::size_t, std::size_t> key{SIZE_MAX, SIZE_MAX};
    std::size_t pick_i = 0, pick_j = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        if (avg[i][j] > best + 1e-12 || !(avg[i][j] < tau)) continue;
        std::size_t mi = *std::min_element(clusters[i].begin(), clusters[i].end());
        std::size_t mj = *std::min_element(clusters[j].begin(), clusters[j].end());
        std::pair<std::size_t, std::size_t> k{std::min(mi, mj), std::max(mi, mj)};
        if (k < key) {
          key = k;
          pick_i = i;
          pick_j = j;
        }
      }
    }
    clusters[pick_i].insert(clusters[pick_i].end(), clusters[pick_j].begin(),
                            clusters[pick_j].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(pick_j));
  }
  std::vector<std::size_t> label(points.size());
  for (const auto& c : clusters) {
    std::size_t m = *std::min_element(c.begin(), c.end());
    for (std::size_t x : c) label[x] = m;
  }
  return label;
}

// Adjusted Rand index from raw pair counts (Hubert and Arabie).
inline double AdjustedRand(const std::vector<std::size_t>& x,
                           const std::vector<std::size_t>& y) {
  double same_both = 0, same_x = 0, same_y = 0, neither = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      bool sx = x[i] == x[j];
      bool sy = y[i] == y[j];
      if (sx && sy) {
        ++same_both;
      } else if (sx) {
        ++same_x;
      } else if (sy) {
        ++same_y;
      } else {
        ++neither;
      }
    }
  }
  double num = 2.0 * (same_both * neither - same_x * same_y);
  double den = (same_both + same_x) * (same_x + neither) +
               (same_both + same_y) * (same_y + neither);
  return den == 0.0 ? 1.0 : num / den;
}

}  // namespace oracle

#endif  // ASPECTMINE_TESTS_ORACLES_H_
