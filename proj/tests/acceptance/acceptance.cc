// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aspectmine/carousel.h"
#include "aspectmine/clustering.h"
#include "aspectmine/evaluation.h"
#include "aspectmine/graph.h"
#include "aspectmine/ingest.h"
#include "aspectmine/synthgen.h"
#include "aspectmine/weighting.h"
#include "oracles.h"

namespace fs = std::filesystem;
using namespace aspectmine;

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void Report(int id, const char* name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %d. %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
}

std::string Fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

// --- 1 ---------------------------------------------------------------------

Outcome EdgeWeightOracle() {
  auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    std::int64_t imp = static_cast<std::int64_t>(rng() % 1000001);
    std::int64_t clk = static_cast<std::int64_t>(rng() % (imp + 1));
    double a = unit(rng);
    while (a <= 0.0 || a >= 1.0) a = unit(rng);
    double got = EdgeWeight(clk, imp, {a, 1.0 - a});
    double want = oracle::EdgeWeight(double(clk), double(imp), a, 1.0 - a);
    worst = std::max(worst, std::abs(got - want) / std::abs(want));
  }
  double t = Seconds(start);
  return {worst <= 1e-12 && t < 1.0,
          "10000 tuples, max rel err " + Fmt("%.3g", worst) + ", " + Fmt("%.3f s", t)};
}

// --- 2 ---------------------------------------------------------------------

Outcome HcOracle() {
  auto start = Clock::now();
  std::mt19937 rng(777);
  int mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    std::size_t n = 2 + rng() % 49;
    std::size_t dim = 1 + rng() % 8;
    std::uniform_real_distribution<double> coord(0.0, 1.0);
    std::vector<oracle::Dense> pts;
    for (std::size_t i = 0; i < n; ++i) {
      if (!pts.empty() && rng() % 6 == 0) {
        pts.push_back(pts[rng() % pts.size()]);
        continue;
      }
      oracle::Dense p(dim, 0.0);
      for (auto& x : p) {
        if (rng() % 3) x = coord(rng);
      }
      pts.push_back(p);
    }
    std::vector<SparseVector> vecs;
    for (const auto& p : pts) {
      std::vector<SparseVector::Entry> e;
      for (std::uint32_t i = 0; i < dim; ++i) {
        if (p[i] != 0.0) e.emplace_back(i, p[i]);
      }
      vecs.emplace_back(dim, std::move(e));
    }
    double tau = 0.05 + (rng() % 1000) / 400.0;
    Partition got = HcRound(vecs, tau);
    std::vector<std::size_t> labels(n);
    for (const auto& m : got.clusters()) {
      for (NodeIndex x : m) labels[x] = m.front();
    }
    if (labels != oracle::AverageLinkage(pts, tau)) ++mismatches;
  }
  double t = Seconds(start);
  return {mismatches == 0 && t < 30.0,
          "200 instances, " + std::to_string(mismatches) + " mismatches, " + Fmt("%.2f s", t)};
}

// --- 3 ---------------------------------------------------------------------

Outcome PlantedRecovery() {
  auto start = Clock::now();
  SyntheticSpec spec;  // 4 aspects, 50 queries and 10 PTs each, coverage 1, no noise
  spec.num_aspects = 4;
  spec.queries_per_aspect = {50, 50};
  spec.pts_per_aspect = {10, 10};
  spec.query_pt_coverage = 1.0;
  spec.cross_aspect_edge_rate = 0.0;
  auto data = Generate(spec);
  if (!data.truth.certified_tau) return {false, "generator could not certify a tau"};
  auto g = BipartiteGraph::Build(data.rows);
  auto prior = EstimatePrior(g);
  auto truth = NamedPartition(g, Side::kQuery, *data.truth.true_partition);
  bool ok = true;
  std::string detail = "tau " + Fmt("%.4f", *data.truth.certified_tau);
  for (Mode m : {Mode::kIc1, Mode::kIc2}) {
    ClusteringConfig cfg;
    cfg.mode = m;
    cfg.tau_q = cfg.tau_p = *data.truth.certified_tau;
    auto r = IterateClustering(g, prior, cfg);
    CarouselConfig shown;
    shown.top_z = 10;  // a whole aspect pool, so full coverage is reachable
    auto carousels = BuildCarousels(g, r.queries, shown);
    double ari = AdjustedRand(r.queries, truth);
    double precision = Precision(carousels, data.truth);
    double cohesion = Cohesion(carousels, data.truth);
    double heterogeneity = Heterogeneity(carousels);
    ok = ok && ari == 1.0 && precision == 100.0 && std::abs(cohesion - 1.0) <= 1e-12 &&
         std::abs(heterogeneity - 1.0) <= 1e-12;
    detail += std::string(", ") + (m == Mode::kIc1 ? "IC-1" : "IC-2") + " ARI " +
              Fmt("%.3f", ari) + " P " + Fmt("%.1f%%", precision) + " C " +
              Fmt("%.3f", cohesion) + " D " + Fmt("%.3f", heterogeneity);
  }
  double t = Seconds(start);
  detail += ", " + Fmt("%.2f s", t);
  return {ok && t < 5.0, detail};
}

// --- 4 and 5 -------------------------------------------------------------

// Shared synthetic regime: coverage 0.3, noise 0.02, 4 aspects of 50 queries
// and 10 product-types, generator defaults for CTR and impressions.
SyntheticSpec SparseSpec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.num_aspects = 4;
  spec.queries_per_aspect = {50, 50};
  spec.pts_per_aspect = {10, 10};
  spec.query_pt_coverage = 0.3;
  spec.cross_aspect_edge_rate = 0.02;
  spec.certify_tau = false;
  spec.seed = seed;
  return spec;
}

// Threshold shared by every method on one dataset: a fixed fraction of the
// median pairwise distance between singleton query vectors.
constexpr double kTauFraction = 0.9;

double MedianSingletonDistance(const BipartiteGraph& g, const PriorParams& prior) {
  auto vecs = ClusterVectors(g, Partition::Singletons(Side::kQuery, g.num_queries()),
                             Partition::Singletons(Side::kProductType, g.num_product_types()),
                             prior);
  std::vector<double> d;
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    for (std::size_t j = i + 1; j < vecs.size(); ++j) d.push_back(EuclideanDistance(vecs[i], vecs[j]));
  }
  std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
  return d[d.size() / 2];
}

struct SeedRun {
  double ic1, ic2, hc, agreement;
};

SeedRun RunSeed(std::uint64_t seed, double fraction) {
  auto data = Generate(SparseSpec(seed));
  auto g = BipartiteGraph::Build(data.rows);
  auto prior = EstimatePrior(g);
  auto truth = NamedPartition(g, Side::kQuery, *data.truth.true_partition);
  ClusteringConfig cfg;
  cfg.tau_q = cfg.tau_p = fraction * MedianSingletonDistance(g, prior);
  cfg.mode = Mode::kIc1;
  auto ic1 = IterateClustering(g, prior, cfg).queries;
  cfg.mode = Mode::kIc2;
  auto ic2 = IterateClustering(g, prior, cfg).queries;
  cfg.mode = Mode::kHc;
  auto hc = ClusterBaseline(g, prior, cfg);
  return {AdjustedRand(ic1, truth), AdjustedRand(ic2, truth), AdjustedRand(hc, truth),
          AdjustedRand(ic1, ic2)};
}

std::vector<SeedRun> sparse_runs;
double sparse_seconds = 0.0;

void EnsureSparseRuns() {
  if (!sparse_runs.empty()) return;
  auto start = Clock::now();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) sparse_runs.push_back(RunSeed(seed, kTauFraction));
  sparse_seconds = Seconds(start);
}

Outcome SparsityAdvantage() {
  EnsureSparseRuns();
  double ic1 = 0, ic2 = 0, hc = 0;
  for (const auto& r : sparse_runs) {
    ic1 += r.ic1;
    ic2 += r.ic2;
    hc += r.hc;
  }
  ic1 /= sparse_runs.size();
  ic2 /= sparse_runs.size();
  hc /= sparse_runs.size();
  std::string detail = "20 seeds, tau = " + Fmt("%.2f", kTauFraction) +
                       " x median singleton distance: mean ARI IC-1 " + Fmt("%.4f", ic1) +
                       ", IC-2 " + Fmt("%.4f", ic2) + ", HC " + Fmt("%.4f", hc) + ", " +
                       Fmt("%.2f s", sparse_seconds);
  return {ic1 >= hc + 0.05 && ic2 >= hc + 0.05 && sparse_seconds < 60.0, detail};
}

// Informational: the same comparison over a range of tau fractions.
void SparsityScan() {
  std::printf("       tau scan (fraction: IC-1 / IC-2 / HC mean ARI over 5 seeds):");
  for (double f : {0.5, 0.7, 0.8, 1.0, 1.2}) {
    double a = 0, b = 0, c = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto r = RunSeed(seed, f);
      a += r.ic1 / 5;
      b += r.ic2 / 5;
      c += r.hc / 5;
    }
    std::printf(" %.1f: %.3f/%.3f/%.3f", f, a, b, c);
  }
  std::printf("\n");
}

Outcome IcAgreement() {
  EnsureSparseRuns();
  double mean = 0;
  for (const auto& r : sparse_runs) mean += r.agreement;
  mean /= sparse_runs.size();
  return {mean >= 0.9, "mean ARI(IC-1, IC-2) over 20 seeds " + Fmt("%.4f", mean)};
}

// --- 6 ---------------------------------------------------------------------

Carousel Items(std::initializer_list<const char*> names) {
  Carousel c;
  for (const char* n : names) c.items.push_back({n, 0.1, 1, 10});
  return c;
}

Outcome MetricIdentities() {
  GroundTruth t;
  t.event_product_types = {"a", "b", "c", "d"};
  t.department_map = {{"a", "x"}, {"b", "x"}, {"c", "y"}, {"d", "y"}};
  std::vector<Carousel> full{Items({"a", "b"}), Items({"c", "d"})};
  std::vector<Carousel> dup{Items({"a", "b"}), Items({"b", "a"})};
  std::vector<Carousel> tri{Items({"a", "b"}), Items({"b", "c"}), Items({"a", "c"})};
  double p = Precision(full, t);
  double d_disjoint = Heterogeneity(full);
  double d_dup = Heterogeneity(dup);
  double c = Cohesion(full, t);
  double d_tri = Heterogeneity(tri);
  bool ok = std::abs(p - 100.0) <= 1e-12 && std::abs(d_disjoint - 1.0) <= 1e-12 &&
            std::abs(d_dup) <= 1e-12 && std::abs(c - 1.0) <= 1e-12 &&
            std::abs(d_tri - 2.0 / 3.0) <= 1e-12;
  return {ok, "precision " + Fmt("%.12g", p) + ", D(disjoint) " + Fmt("%.12g", d_disjoint) +
                  ", D(duplicate) " + Fmt("%.12g", d_dup) + ", C " + Fmt("%.12g", c) +
                  ", D(worked) " + Fmt("%.15g", d_tri)};
}

// --- 7 ---------------------------------------------------------------------

int RunCli(const std::string& args) {
  std::string cmd = std::string(ASPECTMINE_CLI) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome DeterminismAtScale() {
  fs::path dir = fs::temp_directory_path() / ("aspectmine_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  SyntheticSpec spec;
  spec.num_aspects = 25;
  spec.queries_per_aspect = {200, 200};
  spec.pts_per_aspect = {20, 20};
  spec.query_pt_coverage = 1.0;
  spec.cross_aspect_edge_rate = 0.001;
  spec.certify_tau = false;
  spec.seed = 7;
  auto data = Generate(spec);
  {
    std::ofstream out(dir / "log.csv", std::ios::binary);
    WriteLogCsv(out, data.rows);
  }
  auto g = BipartiteGraph::Build(data.rows);
  std::string base = "mine --input " + (dir / "log.csv").string() +
                     " --event-pattern '^ev ' --tau 10 --mode ic2 --k 20 --z 5 --out ";
  std::vector<std::string> outputs;
  double slowest = 0.0;
  int bad_exit = 0;
  const int jobs[] = {1, 1, 1, 4};
  for (int i = 0; i < 4; ++i) {
    fs::path out = dir / ("run" + std::to_string(i));
    auto start = Clock::now();
    int code = RunCli(base + out.string() + " --jobs " + std::to_string(jobs[i]));
    slowest = std::max(slowest, Seconds(start));
    if (code != 0) ++bad_exit;
    outputs.push_back(Slurp(out / "carousels.json"));
  }
  bool same = !outputs[0].empty();
  for (const auto& o : outputs) same = same && o == outputs[0];
  fs::remove_all(dir);
  std::string detail = "|Q|=" + std::to_string(g.num_queries()) +
                       " |P|=" + std::to_string(g.num_product_types()) +
                       " |E|=" + std::to_string(g.num_edges()) + ", 3 runs --jobs 1 + 1 run --jobs 4 " +
                       (same ? "byte-identical" : "DIFFER") + ", slowest run " +
                       Fmt("%.1f s", slowest);
  if (bad_exit) detail += ", " + std::to_string(bad_exit) + " runs failed";
  return {same && bad_exit == 0 && slowest < 120.0, detail};
}

// --- 8 ---------------------------------------------------------------------

Outcome CtrScaling() {
  std::mt19937 rng(88);
  int violations = 0;
  for (int t = 0; t < 100; ++t) {
    int nq = 1 + rng() % 6, np = 2 + rng() % 15;
    std::vector<std::string> qs, ps;
    for (int i = 0; i < nq; ++i) qs.push_back("q" + std::to_string(i));
    for (int i = 0; i < np; ++i) ps.push_back("p" + std::to_string(i));
    std::vector<Edge> edges;
    for (NodeIndex q = 0; q < static_cast<NodeIndex>(nq); ++q) {
      for (NodeIndex p = 0; p < static_cast<NodeIndex>(np); ++p) {
        if (q != 0 && p != q % np && rng() % 2) continue;
        std::int64_t imp = 1 + rng() % 50;
        // Coarse CTRs so that exact ties occur.
        std::int64_t clk = imp * static_cast<std::int64_t>(rng() % 5) / 4;
        edges.push_back({q, p, {imp, clk}});
      }
    }
    std::int64_t k = 2 + rng() % 10000;
    auto scaled = edges;
    for (auto& e : scaled) e.stats = {e.stats.impressions * k, e.stats.clicks * k};
    CarouselConfig cfg;
    cfg.top_z = static_cast<std::size_t>(np);
    auto order = [&](const std::vector<Edge>& es) {
      auto cs = BuildCarousels(BipartiteGraph::FromParts(qs, ps, es),
                               Partition::SingleCluster(Side::kQuery, nq), cfg);
      std::vector<std::string> names;
      for (const auto& it : cs.at(0).items) names.push_back(it.product_type);
      return names;
    };
    if (order(edges) != order(scaled)) ++violations;
  }
  return {violations == 0, "100 random clusters, " + std::to_string(violations) + " order changes"};
}

// --- 9 ---------------------------------------------------------------------

Outcome DbscanContract() {
  // Five queries with identical profiles and one outlier.
  std::vector<std::string> qs{"q0", "q1", "q2", "q3", "q4", "far"};
  std::vector<Edge> edges;
  for (NodeIndex q = 0; q < 5; ++q) edges.push_back({q, 0, {100, 20}});
  edges.push_back({5, 1, {100, 90}});
  auto g = BipartiteGraph::FromParts(qs, {"p0", "p1"}, edges);
  auto prior = EstimatePrior(g);
  ClusteringConfig cfg;
  cfg.mode = Mode::kDbscan;
  cfg.dbscan_min_samples = 3;
  cfg.tau_q = 0.5;
  auto part = ClusterBaseline(g, prior, cfg);
  bool shape = part.num_clusters() == 2 && part.num_noise() == 1 &&
               part.members(part.cluster_of(0)).size() == 5 && part.is_noise(part.cluster_of(5));
  auto carousels = BuildCarousels(g, part, {});
  bool noise_absent = carousels.size() == 1;
  for (const auto& c : carousels) {
    for (const auto& q : c.member_queries) noise_absent = noise_absent && q != "far";
  }
  return {shape && noise_absent,
          std::to_string(part.num_clusters() - part.num_noise()) + " cluster(s), " +
              std::to_string(part.num_noise()) + " noise, " + std::to_string(carousels.size()) +
              " carousel(s), noise in carousels: " + (noise_absent ? "no" : "yes")};
}

}  // namespace

int main() {
  Report(1, "edge weight oracle", EdgeWeightOracle);
  Report(2, "average-linkage oracle", HcOracle);
  Report(3, "planted-aspect recovery", PlantedRecovery);
  Report(4, "sparsity advantage of IC over HC", SparsityAdvantage);
  SparsityScan();
  Report(5, "IC-1 / IC-2 agreement", IcAgreement);
  Report(6, "metric identities", MetricIdentities);
  Report(7, "determinism and scale", DeterminismAtScale);
  Report(8, "CTR ranking invariance", CtrScaling);
  Report(9, "DBSCAN baseline contract", DbscanContract);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
