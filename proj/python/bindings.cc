#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "aspectmine/carousel.h"
#include "aspectmine/clustering.h"
#include "aspectmine/errors.h"
#include "aspectmine/evaluation.h"
#include "aspectmine/graph.h"
#include "aspectmine/ingest.h"
#include "aspectmine/partition.h"
#include "aspectmine/pipeline.h"
#include "aspectmine/synthgen.h"
#include "aspectmine/weighting.h"
#include "json.hpp"

namespace py = pybind11;
using namespace aspectmine;

namespace {

using Row = std::tuple<std::string, std::string, std::int64_t, std::int64_t>;

py::object ToPy(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json FromPy(const py::handle& obj) {
  std::string text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return nlohmann::json::parse(text);
}

std::vector<RawLogRow> RowsFromTuples(const std::vector<Row>& rows) {
  std::vector<RawLogRow> out;
  out.reserve(rows.size());
  for (const auto& [q, pt, imp, clk] : rows) out.push_back({q, pt, imp, clk});
  return out;
}

std::vector<Row> RowsToTuples(const std::vector<RawLogRow>& rows) {
  std::vector<Row> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.emplace_back(r.query, r.product_type, r.impressions, r.clicks);
  return out;
}

MineOptions MakeOptions(double tau, std::optional<double> tau_p, const std::string& mode,
                        std::size_t k, std::size_t z, int max_iters, int min_samples,
                        bool prior_on_missing, const std::string& alpha_mode, int jobs,
                        const std::string& event) {
  MineOptions o;
  o.event = event;
  o.clustering.tau_q = tau;
  o.clustering.tau_p = tau_p.value_or(tau);
  o.clustering.mode = ParseMode(mode);
  o.clustering.max_iterations = max_iters;
  o.clustering.dbscan_min_samples = min_samples;
  o.clustering.weighting.prior_on_missing = prior_on_missing;
  o.clustering.threads = jobs;
  o.carousels.top_k = k;
  o.carousels.top_z = z;
  o.alpha_mode = ParseAlphaMode(alpha_mode);
  o.clustering.Validate();
  o.carousels.Validate();
  return o;
}

py::dict ResultToPy(const BipartiteGraph& graph, const MineResult& r,
                    const MineOptions& options, const std::string& generated_at) {
  py::dict d;
  d["carousels"] = ToPy(CarouselsToJson(MakeCarouselDocument(r, options, generated_at)));
  d["partition"] = ToPy(r.queries.ToJson(&graph.queries()));
  if (r.product_types) {
    d["product_type_partition"] = ToPy(r.product_types->ToJson(&graph.product_types()));
  } else {
    d["product_type_partition"] = py::none();
  }
  d["prior"] = py::make_tuple(r.prior.alpha, r.prior.beta);
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  return d;
}

#define ASPECTMINE_MINE_ARGS                                                    \
  py::kw_only(), py::arg("tau") = 0.2, py::arg("tau_p") = py::none(),           \
      py::arg("mode") = "ic2", py::arg("k") = 20, py::arg("z") = 5,             \
      py::arg("max_iters") = 50, py::arg("min_samples") = 3,                    \
      py::arg("prior_on_missing") = false, py::arg("alpha_mode") = "per-pt",    \
      py::arg("jobs") = 1, py::arg("event") = "event"

}  // namespace

PYBIND11_MODULE(_aspectmine, m) {
  m.doc() = "Shopping-aspect mining from query-click logs";

  auto base = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError",
                                               PyExc_ArithmeticError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);
  (void)base;

  m.def("version", &Version);
  m.def("normalize_query", [](const std::string& q) { return NormalizeQuery(q); });
  m.def("matches_event",
        [](const std::string& query, const std::vector<std::string>& patterns) {
          return EventFilter("event", patterns).Matches(NormalizeQuery(query));
        },
        py::arg("query"), py::arg("patterns"));
  m.def("edge_weight",
        [](std::int64_t clicks, std::int64_t impressions, double alpha, double beta) {
          return EdgeWeight(clicks, impressions, PriorParams{alpha, beta});
        },
        py::arg("clicks"), py::arg("impressions"), py::arg("alpha"), py::arg("beta"));

  py::class_<BipartiteGraph>(m, "Graph")
      .def_static("from_rows",
                  [](const std::vector<Row>& rows) {
                    auto raw = RowsFromTuples(rows);
                    return BipartiteGraph::Build(raw);
                  },
                  py::arg("rows"))
      .def_static(
          "load_log",
          [](const std::filesystem::path& path, const std::vector<std::string>& patterns,
             const std::string& event, bool strict) {
            EventFilter filter(event, patterns);
            LoadResult loaded;
            {
              py::gil_scoped_release release;
              loaded = LoadAndFilterFile(path, filter, LoadOptions{strict});
            }
            py::dict report;
            report["rows_read"] = loaded.report.rows_read;
            report["rows_matched"] = loaded.report.rows_matched;
            py::list issues;
            for (const auto& i : loaded.report.malformed) issues.append(py::make_tuple(i.row, i.reason));
            report["malformed"] = issues;
            return py::make_tuple(BipartiteGraph::Build(loaded.rows), report);
          },
          py::arg("path"), py::arg("patterns"), py::arg("event") = "event",
          py::arg("strict") = false)
      .def_static("load_snapshot",
                  [](const std::filesystem::path& path) {
                    std::ifstream in(path);
                    if (!in) throw IoError("cannot open " + path.string());
                    return LoadGraphSnapshot(in);
                  },
                  py::arg("path"))
      .def("save_snapshot",
           [](const BipartiteGraph& g, const std::filesystem::path& path) {
             std::ofstream out(path);
             if (!out) throw IoError("cannot write " + path.string());
             SaveGraphSnapshot(g, out);
           },
           py::arg("path"))
      .def_property_readonly("num_queries", &BipartiteGraph::num_queries)
      .def_property_readonly("num_product_types", &BipartiteGraph::num_product_types)
      .def_property_readonly("num_edges", &BipartiteGraph::num_edges)
      .def_property_readonly("queries", &BipartiteGraph::queries)
      .def_property_readonly("product_types", &BipartiteGraph::product_types)
      .def("edges",
           [](const BipartiteGraph& g) {
             std::vector<Row> out;
             for (const auto& e : g.EdgeList()) {
               out.emplace_back(g.query(e.query), g.product_type(e.product_type),
                                e.stats.impressions, e.stats.clicks);
             }
             return out;
           })
      .def("estimate_prior",
           [](const BipartiteGraph& g, const std::string& alpha_mode) {
             auto p = EstimatePrior(g, ParseAlphaMode(alpha_mode));
             return py::make_tuple(p.alpha, p.beta);
           },
           py::arg("alpha_mode") = "per-pt")
      .def("__repr__", [](const BipartiteGraph& g) {
        return "<Graph |Q|=" + std::to_string(g.num_queries()) +
               " |P|=" + std::to_string(g.num_product_types()) +
               " |E|=" + std::to_string(g.num_edges()) + ">";
      });

  m.def(
      "mine",
      [](const BipartiteGraph& graph, double tau, std::optional<double> tau_p,
         const std::string& mode, std::size_t k, std::size_t z, int max_iters,
         int min_samples, bool prior_on_missing, const std::string& alpha_mode, int jobs,
         const std::string& event, std::optional<std::string> generated_at) {
        auto options = MakeOptions(tau, tau_p, mode, k, z, max_iters, min_samples,
                                   prior_on_missing, alpha_mode, jobs, event);
        MineResult r;
        {
          py::gil_scoped_release release;
          r = Mine(graph, options);
        }
        return ResultToPy(graph, r, options, ResolveGeneratedAt(generated_at));
      },
      py::arg("graph"), ASPECTMINE_MINE_ARGS, py::arg("generated_at") = py::none());

  m.def(
      "evaluate",
      [](const py::object& carousels, const py::object& truth) {
        auto doc = CarouselsFromJson(FromPy(carousels));
        auto t = GroundTruthFromJson(FromPy(truth));
        return ToPy(Evaluate(doc.carousels, t).ToJson());
      },
      py::arg("carousels"), py::arg("truth"));

  m.def(
      "evaluate_run",
      [](const BipartiteGraph& graph, const py::object& truth, double tau,
         std::optional<double> tau_p, const std::string& mode, std::size_t k,
         std::size_t z, int max_iters, int min_samples, bool prior_on_missing,
         const std::string& alpha_mode, int jobs, const std::string& event) {
        auto options = MakeOptions(tau, tau_p, mode, k, z, max_iters, min_samples,
                                   prior_on_missing, alpha_mode, jobs, event);
        auto t = GroundTruthFromJson(FromPy(truth));
        EvalReport report;
        {
          py::gil_scoped_release release;
          report = EvaluateRun(graph, Mine(graph, options), options, t);
        }
        return ToPy(report.ToJson());
      },
      py::arg("graph"), py::arg("truth"), ASPECTMINE_MINE_ARGS);

  m.def(
      "adjusted_rand",
      [](const std::vector<std::int64_t>& predicted, const std::vector<std::int64_t>& truth) {
        if (predicted.size() != truth.size()) {
          throw ConfigError("adjusted_rand: label sequences differ in length");
        }
        return AdjustedRand(Partition::FromLabels(Side::kQuery, predicted),
                            Partition::FromLabels(Side::kQuery, truth));
      },
      py::arg("predicted"), py::arg("truth"));

  m.def(
      "generate",
      [](const py::object& spec) {
        auto s = SyntheticSpec::FromJson(FromPy(spec));
        SyntheticData data;
        {
          py::gil_scoped_release release;
          data = Generate(s);
        }
        return py::make_tuple(RowsToTuples(data.rows), ToPy(GroundTruthToJson(data.truth)));
      },
      py::arg("spec"));

  m.def(
      "default_synthetic_spec", [] { return ToPy(SyntheticSpec{}.ToJson()); });

  m.def(
      "sweep",
      [](const BipartiteGraph& graph, const py::object& truth, const std::vector<double>& taus,
         const std::vector<std::string>& modes, std::size_t k, std::size_t z, int jobs) {
        SweepOptions options;
        options.taus = taus;
        options.modes.clear();
        for (const auto& name : modes) options.modes.push_back(ParseMode(name));
        options.base.carousels.top_k = k;
        options.base.carousels.top_z = z;
        options.jobs = jobs;
        auto t = GroundTruthFromJson(FromPy(truth));
        std::vector<SweepCell> cells;
        {
          py::gil_scoped_release release;
          cells = RunSweep(graph, t, options);
        }
        py::list out;
        for (const auto& c : cells) {
          py::dict row;
          row["tau"] = c.tau;
          row["mode"] = std::string(ModeName(c.mode));
          row["report"] = c.report ? ToPy(c.report->ToJson()) : py::none();
          row["error"] = c.error;
          out.append(row);
        }
        return out;
      },
      py::arg("graph"), py::arg("truth"), py::kw_only(),
      py::arg("taus") = std::vector<double>{0.1, 0.2, 0.5},
      py::arg("modes") = std::vector<std::string>{"ic1", "ic2", "hc", "dbscan"},
      py::arg("k") = 20, py::arg("z") = 5, py::arg("jobs") = 1);
}
