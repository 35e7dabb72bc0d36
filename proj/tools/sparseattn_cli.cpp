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

// sparseattn: generate targets, build attention approximations, run sweeps.
//
// Exit codes: 0 success / verification passed, 1 verification failed,
// 2 usage or validation error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparseattn/attention.hpp"
#include "sparseattn/concentration.hpp"
#include "sparseattn/construct.hpp"
#include "sparseattn/matrices.hpp"
#include "sparseattn/pipeline.hpp"
#include "sparseattn/render.hpp"
#include "sparseattn/sweep.hpp"
#include "sparseattn/verify.hpp"

namespace {

namespace sa = sparseattn;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int thread_count(int flag) { return flag > 0 ? flag : sa::default_thread_count(); }

// ---- generate ---------------------------------------------------------------

struct GenerateArgs {
  sa::ApproxParams params;
  std::uint64_t seed = 0;
  std::string out;
};

int run_generate(const GenerateArgs& args) {
  try {
    args.params.check();
  } catch (const sa::Error& e) {
    throw UsageError(e.what());
  }
  const auto A = sa::generate(args.params, args.seed);
  const auto report = sa::validate(A, args.params);
  if (!report.passed) {
    for (const auto& v : report.violations)
      std::cerr << "invalid: " << v.invariant << " row " << v.row << " col "
                << v.col << ": " << v.detail << '\n';
    return kExitUsage;
  }
  if (args.out.empty() || args.out == "-")
    std::cout << sa::format_coo(A);
  else
    sa::write_coo(A, args.out);
  return kExitOk;
}

// ---- approx -----------------------------------------------------------------

struct ApproxArgs {
  std::string in;
  int d = 0;
  int d_hid = 0;
  double eps1 = 0.15;
  double eps2 = 1.41;
  double q = 1.0;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
  std::string dump_logits;
  std::string dump_m;
  std::string dump_inputs;
};

int run_approx(const ApproxArgs& args) {
  if (args.d <= 0 || args.d % 2 != 0)
    throw UsageError("--d must be a positive even integer");
  if (!(args.q > 0.0)) throw UsageError("--q must be positive");
  const auto A = sa::read_coo(args.in);
  const int L = A.size();
  const sa::ApproxParams params{L, A.k(), A.gamma(), args.eps1, args.eps2, A.causal()};
  try {
    params.check();
  } catch (const sa::Error& e) {
    throw UsageError(e.what());
  }
  if (args.d > 2 * L) throw UsageError("--d must not exceed 2L");
  const int d_hid = args.d_hid > 0 ? args.d_hid : args.d;
  if (d_hid < args.d || d_hid > 2 * L)
    throw UsageError("--dhid must satisfy d <= dhid <= 2L");
  const auto validation = sa::validate(A, params);
  if (!validation.passed) {
    for (const auto& v : validation.violations)
      std::cerr << "invalid input: " << v.invariant << " row " << v.row
                << " col " << v.col << ": " << v.detail << '\n';
    return kExitUsage;
  }

  const sa::Pipeline pipe(A, args.eps1, args.eps2, A.causal());
  const auto budget = sa::redraw_budget(args.q, L);
  const auto found = pipe.search(args.d, args.seed, budget, thread_count(args.threads));
  const std::int64_t t = found.pass_index.value_or(budget - 1);
  const auto ev = pipe.evaluate(args.d, sa::redraw_seed(args.seed, args.d, t));

  nlohmann::json j = sa::to_json(ev.report);
  j["redraw"] = found.pass_index ? nlohmann::json(*found.pass_index) : nlohmann::json(nullptr);
  j["redraws_used"] = found.redraws_used;
  j["L"] = L;
  j["d"] = args.d;
  j["d_hid"] = d_hid;
  j["eps1"] = args.eps1;
  j["eps2"] = args.eps2;
  j["q"] = args.q;
  j["seed"] = args.seed;
  j["causal"] = A.causal();
  const std::string text = j.dump(2) + "\n";
  if (args.out.empty() || args.out == "-") {
    std::cout << text;
  } else {
    std::ofstream(args.out, std::ios::binary) << text;
  }

  if (!args.dump_logits.empty()) sa::write_dense(ev.Z, args.dump_logits);
  if (!args.dump_m.empty()) {
    const auto M = A.causal() ? sa::csam(ev.Z) : sa::sam(ev.Z);
    sa::write_dense(M.M, args.dump_m);
  }
  if (!args.dump_inputs.empty()) {
    const auto pair = sa::compress(pipe.factorization(), ev.Y, args.d);
    sa::write_attention_inputs(sa::assemble(pair, d_hid), args.dump_inputs);
  }
  return ev.report.passed ? kExitOk : kExitFail;
}

// ---- sweep / qsweep ---------------------------------------------------------

struct SweepArgs {
  std::string config;
  std::string out;
  int threads = 0;
};

int run_sweep_cmd(const SweepArgs& args, bool q_mode) {
  sa::ParsedConfig parsed;
  try {
    parsed = sa::read_sweep_config(args.config);
    parsed.config.check();
  } catch (const sa::Error& e) {
    throw UsageError(e.what());
  }
  if (q_mode && parsed.q_values.empty())
    throw UsageError("qsweep config needs a nonempty q_values list");

  sa::SweepOptions opts;
  opts.csv_path = args.out;
  opts.threads = thread_count(args.threads);
  opts.on_record = [](const sa::SweepRecord& r) {
    std::cerr << "L=" << r.L << " trial=" << r.trial << " q=" << r.q
              << " d_min=" << r.d_min << " redraws=" << r.redraws_used << '\n';
  };
  const auto outcome = q_mode ? sa::q_sweep(parsed.config, parsed.q_values, opts)
                              : sa::run_sweep(parsed.config, opts);
  for (const auto& f : outcome.failures) std::cerr << "failed: " << f << '\n';
  if (outcome.resumed)
    std::cerr << "resumed " << outcome.resumed << " completed rows\n";
  if (!q_mode) {
    try {
      const auto fit = sa::log_fit(outcome.records);
      std::cerr << "fit: d_min = " << fit.a << " + " << fit.b << " log L (r2 = "
                << fit.r2 << ")\n";
    } catch (const sa::Error&) {
    }
  }
  return outcome.failures.empty() ? kExitOk : kExitFail;
}

// ---- render -----------------------------------------------------------------

struct RenderArgs {
  std::string in;
  std::string out;
  sa::RenderSpec spec;
};

int run_render(const RenderArgs& args) {
  std::ifstream in(args.in);
  if (!in) throw UsageError("cannot open " + args.in);
  std::string header;
  while (std::getline(in, header) && header.find_first_not_of(" \t\r") == std::string::npos) {
  }
  std::istringstream hs(header);
  std::vector<std::string> tokens;
  for (std::string tok; hs >> tok;) tokens.push_back(tok);
  in.close();

  const sa::Matrix m = tokens.size() == 4 ? sa::read_coo(args.in).to_dense()
                                          : sa::read_dense(args.in);
  sa::GrayImage img;
  try {
    img = sa::render(m, args.spec);
  } catch (const sa::Error& e) {
    throw UsageError(e.what());
  }
  sa::write_pgm(img, args.out);
  return kExitOk;
}

// ---- jlt-bench --------------------------------------------------------------

struct BenchArgs {
  sa::BenchConfig cfg;
  std::string out;
  std::string mse_out;
  int threads = 0;
};

int run_bench(const BenchArgs& args) {
  try {
    args.cfg.check();
  } catch (const sa::Error& e) {
    throw UsageError(e.what());
  }
  const auto result = sa::run_jlt_bench(args.cfg, thread_count(args.threads));
  std::ostringstream csv;
  csv << sa::kBenchCsvHeader << '\n';
  for (const auto& row : result.rows) csv << sa::format_bench_row(row) << '\n';
  if (args.out.empty() || args.out == "-")
    std::cout << csv.str();
  else
    std::ofstream(args.out, std::ios::binary) << csv.str();

  if (!args.mse_out.empty()) {
    std::ofstream mse(args.mse_out, std::ios::binary);
    mse << "p,m,mse_orthogonal,mse_iid,mean_diff,se_diff\n";
    for (const auto& c : result.mse)
      mse << c.p << ',' << c.m << ',' << sa::format_double(c.mse_orthogonal) << ','
          << sa::format_double(c.mse_iid) << ',' << sa::format_double(c.mean_diff)
          << ',' << sa::format_double(c.se_diff) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate sparse stochastic matrices with fixed-weight self-attention"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample a target matrix A and write it as COO text");
  generate->add_option("--L", gen.params.L, "Sequence length")->required();
  generate->add_option("--k", gen.params.k, "Max nonzeros per row and column")->required();
  generate->add_option("--gamma", gen.params.gamma, "Within-row variation bound")->capture_default_str();
  generate->add_flag("--causal", gen.params.causal, "Lower-triangular target");
  generate->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  generate->add_option("--out", gen.out, "Output COO path (default: stdout)");

  ApproxArgs ap;
  auto* approx = app.add_subcommand("approx", "Build attention inputs for a COO target and verify them");
  approx->add_option("--in", ap.in, "Input COO file")->required();
  approx->add_option("--d", ap.d, "Attention width (even)")->required();
  approx->add_option("--dhid", ap.d_hid, "Hidden size, d <= dhid <= 2L (default: d)");
  approx->add_option("--eps1", ap.eps1, "Zero-ratio threshold")->capture_default_str();
  approx->add_option("--eps2", ap.eps2, "Nonzero-ratio log tolerance")->capture_default_str();
  approx->add_option("--q", ap.q, "Redraw budget factor: round(q L) draws")->capture_default_str();
  approx->add_option("--seed", ap.seed, "Base seed for the draws")->capture_default_str();
  approx->add_option("--threads", ap.threads, "Worker threads (default: SPARSEATTN_THREADS or all cores)");
  approx->add_option("--out", ap.out, "JSON report path (default: stdout)");
  approx->add_option("--dump-logits", ap.dump_logits, "Write the logit matrix Z (dense text)");
  approx->add_option("--dump-m", ap.dump_m, "Write the attention matrix M (dense text)");
  approx->add_option("--dump-inputs", ap.dump_inputs, "Write X, WQ and WK (dense text)");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Measure d_min across sequence lengths");
  sweep->add_option("--config", sw.config, "key = value config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", sw.out, "CSV output (appended, resumable)")->required();
  sweep->add_option("--threads", sw.threads, "Worker threads");

  SweepArgs qs;
  auto* qsweep = app.add_subcommand("qsweep", "Measure d_min across redraw budgets q");
  qsweep->add_option("--config", qs.config, "key = value config file with q_values")->required()->check(CLI::ExistingFile);
  qsweep->add_option("--out", qs.out, "CSV output (appended, resumable)")->required();
  qsweep->add_option("--threads", qs.threads, "Worker threads");

  RenderArgs rd;
  auto* render = app.add_subcommand("render", "Render a COO or dense matrix as a pooled PGM image");
  render->add_option("--in", rd.in, "COO or dense text matrix")->required();
  render->add_option("--out", rd.out, "Output PGM path")->required();
  render->add_option("--pool", rd.spec.pool, "Max-pool window")->capture_default_str();
  render->add_option("--clip", rd.spec.clip, "Clip level in (0, 1]")->capture_default_str();

  BenchArgs bn;
  auto* bench = app.add_subcommand("jlt-bench", "Benchmark dot-product concentration of random projections");
  bench->add_option("--p-grid", bn.cfg.p_grid, "Ambient dimensions")->delimiter(',')->capture_default_str();
  bench->add_option("--m-grid", bn.cfg.m_grid, "Projection counts")->delimiter(',')->capture_default_str();
  bench->add_option("--eps-grid", bn.cfg.eps_grid, "Relative deviations")->delimiter(',')->capture_default_str();
  bench->add_option("--n-samples", bn.cfg.n_samples, "Monte Carlo draws per cell")->capture_default_str();
  bench->add_option("--sigma", bn.cfg.sigma, "Projection scale")->capture_default_str();
  bench->add_option("--seed", bn.cfg.seed, "Random seed")->capture_default_str();
  bench->add_option("--threads", bn.threads, "Worker threads");
  bench->add_option("--out", bn.out, "CSV output (default: stdout)");
  bench->add_option("--mse-out", bn.mse_out, "Optional CSV of paired MSE comparisons");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*approx) return run_approx(ap);
    if (*sweep) return run_sweep_cmd(sw, false);
    if (*qsweep) return run_sweep_cmd(qs, true);
    if (*render) return run_render(rd);
    if (*bench) return run_bench(bn);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const sa::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
