// Copyright 2026 The sparseattn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sparseattn/attention.hpp"
#include "sparseattn/concentration.hpp"
#include "sparseattn/construct.hpp"
#include "sparseattn/pipeline.hpp"
#include "sparseattn/render.hpp"
#include "sparseattn/sweep.hpp"
#include "sparseattn/verify.hpp"

namespace py = pybind11;
namespace sa = sparseattn;

namespace {

py::dict report_dict(const sa::ApproxReport& r) {
  py::dict d;
  d["passed"] = r.passed;
  d["worst_zero_ratio_log"] = r.worst_zero_ratio_log;
  d["worst_nonzero_dev"] = r.worst_nonzero_dev;
  d["n_triples_checked"] = r.n_triples_checked;
  if (r.first_violation) {
    const auto& v = *r.first_violation;
    d["first_violation"] =
        py::make_tuple(v.i, v.j1, v.j2, std::string(sa::to_string(v.kind)));
  } else {
    d["first_violation"] = py::none();
  }
  return d;
}

py::dict record_dict(const sa::SweepRecord& r) {
  py::dict d;
  d["L"] = r.L;
  d["trial"] = r.trial;
  d["q"] = r.q;
  d["d_min"] = r.found() ? py::object(py::int_(r.d_min)) : py::object(py::none());
  d["theoretical_d"] = r.theoretical_d;
  d["redraws_used"] = r.redraws_used;
  d["seed"] = r.seed;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sparse attention approximation by low-dimensional softmax attention.";

  py::register_exception<sa::Error>(m, "Error", PyExc_ValueError);

  py::class_<sa::ApproxParams>(m, "ApproxParams")
      .def(py::init([](int L, int k, double gamma, double eps1, double eps2, bool causal) {
             sa::ApproxParams p{L, k, gamma, eps1, eps2, causal};
             p.check();
             return p;
           }),
           py::arg("L"), py::arg("k") = 1, py::arg("gamma") = 1.0, py::arg("eps1") = 0.15,
           py::arg("eps2") = 1.41, py::arg("causal") = false)
      .def_readwrite("L", &sa::ApproxParams::L)
      .def_readwrite("k", &sa::ApproxParams::k)
      .def_readwrite("gamma", &sa::ApproxParams::gamma)
      .def_readwrite("eps1", &sa::ApproxParams::eps1)
      .def_readwrite("eps2", &sa::ApproxParams::eps2)
      .def_readwrite("causal", &sa::ApproxParams::causal)
      .def("__repr__", [](const sa::ApproxParams& p) {
        return "ApproxParams(L=" + std::to_string(p.L) + ", k=" + std::to_string(p.k) +
               ", gamma=" + sa::format_double(p.gamma) + ", eps1=" +
               sa::format_double(p.eps1) + ", eps2=" + sa::format_double(p.eps2) +
               ", causal=" + (p.causal ? "True" : "False") + ")";
      });

  py::class_<sa::SparseStochasticMatrix>(m, "SparseStochasticMatrix")
      .def(py::init([](int L, int k, double gamma, bool causal,
                       const std::vector<std::tuple<int, int, double>>& entries) {
             std::vector<sa::Entry> e;
             e.reserve(entries.size());
             for (const auto& [i, j, v] : entries) e.push_back({i, j, v});
             return sa::SparseStochasticMatrix(L, k, gamma, causal, std::move(e));
           }),
           py::arg("L"), py::arg("k"), py::arg("gamma"), py::arg("causal"), py::arg("entries"))
      .def_property_readonly("L", &sa::SparseStochasticMatrix::size)
      .def_property_readonly("k", &sa::SparseStochasticMatrix::k)
      .def_property_readonly("gamma", &sa::SparseStochasticMatrix::gamma)
      .def_property_readonly("causal", &sa::SparseStochasticMatrix::causal)
      .def_property_readonly("nnz", &sa::SparseStochasticMatrix::nnz)
      .def("entries",
           [](const sa::SparseStochasticMatrix& a) {
             std::vector<std::tuple<int, int, double>> out;
             for (const auto& e : a.entries()) out.emplace_back(e.row, e.col, e.value);
             return out;
           })
      .def("to_dense", &sa::SparseStochasticMatrix::to_dense)
      .def("__eq__", [](const sa::SparseStochasticMatrix& a,
                        const sa::SparseStochasticMatrix& b) { return a == b; });

  m.def("generate", &sa::generate, py::arg("params"), py::arg("seed") = 0);
  m.def(
      "validate",
      [](const sa::SparseStochasticMatrix& a, const sa::ApproxParams& p) {
        const auto r = sa::validate(a, p);
        py::list violations;
        for (const auto& v : r.violations)
          violations.append(py::make_tuple(v.invariant, v.row, v.col, v.detail));
        return py::make_tuple(r.passed, violations);
      },
      py::arg("A"), py::arg("params"),
      "Returns (passed, [(invariant, row, col, detail), ...]).");
  m.def("parse_coo", &sa::parse_coo, py::arg("text"));
  m.def("format_coo", &sa::format_coo, py::arg("A"));
  m.def("read_coo", &sa::read_coo, py::arg("path"));
  m.def("write_coo", &sa::write_coo, py::arg("A"), py::arg("path"));

  m.def(
      "log_gap",
      [](const sa::SparseStochasticMatrix& a, double eps1, double eps2) {
        auto lg = sa::build_log_gap(a, eps1, eps2);
        return py::make_tuple(lg.B, lg.min_nz);
      },
      py::arg("A"), py::arg("eps1"), py::arg("eps2"), "Returns (B, min_nz).");
  m.def(
      "svd_factor",
      [](const sa::Matrix& B) {
        auto f = sa::svd_factor(B);
        return py::make_tuple(f.D, f.V, f.sigma);
      },
      py::arg("B"), "Returns (D, V, sigma) with B = D V^T.");
  m.def(
      "sample_stiefel",
      [](int L, int half_d, std::uint64_t seed) { return sa::sample_stiefel(L, half_d, seed).Y; },
      py::arg("L"), py::arg("half_d"), py::arg("seed"));
  m.def(
      "attention_inputs",
      [](const sa::Matrix& D, const sa::Matrix& V, const sa::Matrix& Y, int d, int d_hid) {
        sa::Factorization f{D, V, sa::Vector()};
        sa::StiefelSample s{Y, 0};
        const auto ai = sa::assemble(sa::compress(f, s, d), d_hid > 0 ? d_hid : d);
        return py::make_tuple(ai.X, ai.WQ, ai.WK);
      },
      py::arg("D"), py::arg("V"), py::arg("Y"), py::arg("d"), py::arg("d_hid") = 0,
      "Returns (X, WQ, WK) for the compressed pair at width d.");
  m.def(
      "logits",
      [](const sa::Matrix& X, const sa::Matrix& WQ, const sa::Matrix& WK) {
        sa::AttentionInputs ai{X, WQ, WK, static_cast<int>(WQ.cols()),
                               static_cast<int>(WQ.rows())};
        return sa::logits(ai);
      },
      py::arg("X"), py::arg("WQ"), py::arg("WK"));
  m.def("sam", [](const sa::Matrix& Z) { return sa::sam(Z).M; }, py::arg("Z"));
  m.def("csam", [](const sa::Matrix& Z) { return sa::csam(Z).M; }, py::arg("Z"));

  m.def(
      "check_conditions",
      [](const sa::Matrix& Z, const sa::SparseStochasticMatrix& a, double eps1, double eps2,
         bool causal) { return report_dict(sa::check_conditions(Z, a, eps1, eps2, causal)); },
      py::arg("Z"), py::arg("A"), py::arg("eps1"), py::arg("eps2"), py::arg("causal") = false);
  m.def(
      "check_direct",
      [](const sa::Matrix& M, const sa::SparseStochasticMatrix& a, double eps1, double eps2,
         bool causal) {
        return report_dict(sa::check_direct({M, causal}, a, eps1, eps2, causal));
      },
      py::arg("M"), py::arg("A"), py::arg("eps1"), py::arg("eps2"), py::arg("causal") = false);

  py::class_<sa::Pipeline>(m, "Pipeline")
      .def(py::init<sa::SparseStochasticMatrix, double, double, bool>(), py::arg("A"),
           py::arg("eps1"), py::arg("eps2"), py::arg("causal") = false)
      .def_property_readonly("B", [](const sa::Pipeline& p) { return p.log_gap().B; })
      .def_property_readonly("sigma",
                             [](const sa::Pipeline& p) { return p.factorization().sigma; })
      .def("passes", &sa::Pipeline::passes, py::arg("d"), py::arg("seed"),
           py::call_guard<py::gil_scoped_release>())
      .def(
          "evaluate",
          [](const sa::Pipeline& p, int d, std::uint64_t seed) {
            sa::Pipeline::Evaluation ev;
            {
              py::gil_scoped_release release;
              ev = p.evaluate(d, seed);
            }
            return py::make_tuple(report_dict(ev.report), ev.Z);
          },
          py::arg("d"), py::arg("seed"), "Returns (report, Z).")
      .def(
          "search",
          [](const sa::Pipeline& p, int d, std::uint64_t base, std::int64_t budget,
             int threads) {
            sa::Pipeline::Search s;
            {
              py::gil_scoped_release release;
              s = p.search(d, base, budget, threads);
            }
            return py::make_tuple(s.pass_index ? py::object(py::int_(*s.pass_index))
                                               : py::object(py::none()),
                                  s.redraws_used);
          },
          py::arg("d"), py::arg("base_seed"), py::arg("budget"), py::arg("threads") = 1,
          "Returns (pass_index or None, redraws_used).");

  m.def("redraw_seed", &sa::redraw_seed, py::arg("base"), py::arg("d"), py::arg("t"));
  m.def("redraw_budget", &sa::redraw_budget, py::arg("q"), py::arg("L"));
  m.def("theoretical_d", &sa::theoretical_d, py::arg("params"), py::arg("L"));
  m.def(
      "sweep",
      [](const std::string& config_text, std::vector<double> q_values, int threads) {
        const auto parsed = sa::parse_sweep_config(config_text);
        sa::SweepOptions opts;
        opts.threads = threads;
        sa::SweepOutcome out;
        {
          py::gil_scoped_release release;
          out = q_values.empty() ? sa::run_sweep(parsed.config, opts)
                                 : sa::q_sweep(parsed.config, q_values, opts);
        }
        py::list records;
        for (const auto& r : out.records) records.append(record_dict(r));
        return py::make_tuple(records, out.failures);
      },
      py::arg("config"), py::arg("q_values") = std::vector<double>{}, py::arg("threads") = 1,
      "Runs a sweep from key = value config text. Returns (records, failures).");

  py::enum_<sa::ProjectionMode>(m, "ProjectionMode")
      .value("orthogonal", sa::ProjectionMode::kOrthogonal)
      .value("iid", sa::ProjectionMode::kIid);
  m.def("projection_matrix", &sa::projection_matrix, py::arg("p"), py::arg("m"),
        py::arg("sigma"), py::arg("mode"), py::arg("seed"));
  m.def("theoretical_tail", &sa::theoretical_tail, py::arg("p"), py::arg("m"),
        py::arg("epsilon"), py::arg("mode"));
  m.def(
      "tail_estimate",
      [](const sa::Vector& x, const sa::Vector& y, int m, double sigma,
         sa::ProjectionMode mode, double epsilon, int n_samples, std::uint64_t seed) {
        sa::JltParams p{static_cast<int>(x.size()), m, sigma, mode, epsilon, n_samples};
        return sa::tail_estimate(x, y, p, seed);
      },
      py::arg("x"), py::arg("y"), py::arg("m"), py::arg("sigma") = 1.0,
      py::arg("mode") = sa::ProjectionMode::kOrthogonal, py::arg("epsilon") = 0.5,
      py::arg("n_samples") = 10000, py::arg("seed") = 0,
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "render_pgm",
      [](const sa::Matrix& M, int pool, double clip) {
        return sa::format_pgm(sa::render(M, {pool, clip}));
      },
      py::arg("M"), py::arg("pool") = 8, py::arg("clip") = 0.05);
}
