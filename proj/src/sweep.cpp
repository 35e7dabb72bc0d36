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

#include "sparseattn/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

namespace sparseattn {
namespace {

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
std::optional<T> parse(std::string_view token) {
  T value{};
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || token.empty()) return std::nullopt;
  return value;
}

// Done-set key: (L, trial, q).
using RecordKey = std::tuple<int, int, double>;

class CsvAppender {
 public:
  // Opens path for appending; returns the rows already present. A trailing
  // partial line left by an interrupted run is dropped.
  std::vector<SweepRecord> open(const std::filesystem::path& path) {
    std::vector<SweepRecord> existing;
    if (std::filesystem::exists(path) && std::filesystem::file_size(path) > 0) {
      std::string text;
      {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
      }
      if (text.back() != '\n') {
        const auto cut = text.find_last_of('\n');
        text.resize(cut == std::string::npos ? 0 : cut + 1);
        std::filesystem::resize_file(path, text.size());
      }
      if (!text.empty()) existing = read_records(path);
    }
    out_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::app);
    if (!*out_) throw Error("cannot open " + path.string() + " for appending");
    if (std::filesystem::file_size(path) == 0) {
      *out_ << kSweepCsvHeader << '\n';
      out_->flush();
    }
    return existing;
  }

  void append(const SweepRecord& r) {
    if (!out_) return;
    *out_ << format_record(r) << '\n';
    out_->flush();
  }

 private:
  std::unique_ptr<std::ofstream> out_;
};

SweepRecord search_dmin(const Pipeline& pipe, const SweepConfig& cfg, double q,
                        std::uint64_t seed, int trial, int threads) {
  const int L = pipe.target().size();
  ApproxParams params = cfg.params;
  params.L = L;
  SweepRecord rec;
  rec.L = L;
  rec.trial = trial;
  rec.q = q;
  rec.theoretical_d = theoretical_d(params, L);
  rec.seed = seed;
  const std::int64_t budget = redraw_budget(q, L);
  for (int d : cfg.d_grid_for(L)) {
    const auto found = pipe.search(d, seed, budget, threads);
    rec.redraws_used += found.redraws_used;
    if (found.pass_index) {
      rec.d_min = d;
      return rec;
    }
  }
  return rec;
}

SweepOutcome sweep_impl(const SweepConfig& cfg, std::span<const double> q_values,
                        const SweepOptions& opts) {
  cfg.check();
  for (double q : q_values)
    if (!(q > 0.0)) throw Error("q values must be positive");

  SweepOutcome outcome;
  CsvAppender csv;
  std::map<RecordKey, SweepRecord> done;
  if (!opts.csv_path.empty()) {
    for (const auto& r : csv.open(opts.csv_path))
      done.emplace(RecordKey{r.L, r.trial, r.q}, r);
  }

  for (int L : cfg.L_grid) {
    ApproxParams params = cfg.params;
    params.L = L;
    for (int trial = 0; trial < cfg.trials_per_L; ++trial) {
      const std::uint64_t seed = trial_seed(cfg.master_seed, L, trial);
      std::unique_ptr<Pipeline> pipe;
      bool failed = false;
      for (double q : q_values) {
        if (auto it = done.find({L, trial, q}); it != done.end()) {
          outcome.records.push_back(it->second);
          ++outcome.resumed;
          continue;
        }
        if (failed) continue;
        try {
          if (!pipe) pipe = std::make_unique<Pipeline>(generate(params, seed), params.eps1,
                                                       params.eps2, params.causal);
          SweepRecord rec = search_dmin(*pipe, cfg, q, seed, trial, opts.threads);
          csv.append(rec);
          if (opts.on_record) opts.on_record(rec);
          outcome.records.push_back(rec);
        } catch (const Error& e) {
          failed = true;
          outcome.failures.push_back("L=" + std::to_string(L) + " trial=" +
                                     std::to_string(trial) + ": " + e.what());
        }
      }
    }
  }
  return outcome;
}

}  // namespace

void SweepConfig::check() const {
  if (L_grid.empty()) throw Error("L_grid is empty");
  for (int L : L_grid) {
    ApproxParams p = params;
    p.L = L;
    p.check();
  }
  if (d_lower < 2) throw Error("d_lower must be >= 2");
  if (d_upper < d_lower) throw Error("d_upper must be >= d_lower");
  if (d_points < 1) throw Error("d_points must be >= 1");
  if (!(q > 0.0)) throw Error("q must be positive");
  if (trials_per_L < 1) throw Error("trials_per_L must be >= 1");
}

std::vector<int> SweepConfig::d_grid() const {
  std::vector<int> grid;
  for (int n = 0; n < d_points; ++n) {
    const double v = d_points == 1
                         ? d_lower
                         : d_lower + (d_upper - d_lower) * static_cast<double>(n) /
                                         (d_points - 1);
    grid.push_back(2 * static_cast<int>(std::lround(v / 2.0)));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<int> SweepConfig::d_grid_for(int L) const {
  std::vector<int> grid = d_grid();
  for (int& d : grid) d = std::min(d, 2 * L);
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

double theoretical_d(const ApproxParams& params, int L) {
  const double k = params.k;
  const double spread =
      std::max(std::log(params.gamma) - std::log(params.eps1) + params.eps2, 1.0);
  const double log_factor =
      2.0 * std::log(static_cast<double>(L)) + std::log(L - 1.0) + std::log(2.0);
  return 32.0 / (params.eps2 * params.eps2) * k * k * spread * spread * log_factor;
}

std::uint64_t trial_seed(std::uint64_t master_seed, int L, int trial) {
  return hash64({master_seed, static_cast<std::uint64_t>(L),
                 static_cast<std::uint64_t>(trial)});
}

SweepRecord find_dmin(const SparseStochasticMatrix& A, const SweepConfig& cfg,
                      std::uint64_t seed, int trial, int threads) {
  const Pipeline pipe(A, cfg.params.eps1, cfg.params.eps2, cfg.params.causal);
  return search_dmin(pipe, cfg, cfg.q, seed, trial, threads);
}

SweepOutcome run_sweep(const SweepConfig& cfg, const SweepOptions& opts) {
  const double q[] = {cfg.q};
  return sweep_impl(cfg, q, opts);
}

SweepOutcome q_sweep(const SweepConfig& cfg, std::span<const double> q_values,
                     const SweepOptions& opts) {
  if (q_values.empty()) throw Error("q_values is empty");
  return sweep_impl(cfg, q_values, opts);
}

LogFit log_fit(std::span<const SweepRecord> records) {
  std::vector<double> x, y;
  std::set<int> distinct;
  for (const auto& r : records) {
    if (!r.found()) continue;
    x.push_back(std::log(static_cast<double>(r.L)));
    y.push_back(r.d_min);
    distinct.insert(r.L);
  }
  if (distinct.size() < 2)
    throw Error("log_fit needs found d_min at >= 2 distinct L");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LogFit fit;
  fit.b = sxy / sxx;
  fit.a = my - fit.b * mx;
  if (syy == 0.0) {
    fit.r2 = 1.0;
  } else {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - (fit.a + fit.b * x[i]);
      ss_res += e * e;
    }
    fit.r2 = 1.0 - ss_res / syy;
  }
  return fit;
}

std::string format_record(const SweepRecord& r) {
  return std::to_string(r.L) + "," + std::to_string(r.trial) + "," +
         shortest(r.q) + "," + std::to_string(r.d_min) + "," +
         shortest(r.theoretical_d) + "," + std::to_string(r.redraws_used) +
         "," + std::to_string(r.seed);
}

std::vector<SweepRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::vector<SweepRecord> out;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (line_no == 1) {
      if (t != kSweepCsvHeader)
        throw Error(path.string() + ": unexpected CSV header '" + std::string(t) + "'");
      continue;
    }
    if (t.empty()) continue;
    const auto f = split(t, ',');
    auto bad = [&] {
      return Error(path.string() + ":" + std::to_string(line_no) + ": malformed row");
    };
    if (f.size() != 7) throw bad();
    const auto L = parse<int>(f[0]);
    const auto trial = parse<int>(f[1]);
    const auto q = parse<double>(f[2]);
    const auto d_min = parse<int>(f[3]);
    const auto th = parse<double>(f[4]);
    const auto used = parse<std::int64_t>(f[5]);
    const auto seed = parse<std::uint64_t>(f[6]);
    if (!L || !trial || !q || !d_min || !th || !used || !seed) throw bad();
    out.push_back({*L, *trial, *q, *d_min, *th, *used, *seed});
  }
  return out;
}

ParsedConfig parse_sweep_config(const std::string& text) {
  ParsedConfig parsed;
  SweepConfig& cfg = parsed.config;
  std::vector<std::string> errors;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back(where + "expected 'key = value'");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      errors.push_back(where + "duplicate key '" + key + "'");
      continue;
    }
    auto bad_value = [&] { errors.push_back(where + "bad value for '" + key + "'"); };
    auto set_int = [&](int& dst) {
      if (auto v = parse<int>(value)) dst = *v; else bad_value();
    };
    auto set_double = [&](double& dst) {
      if (auto v = parse<double>(value)) dst = *v; else bad_value();
    };

    if (key == "k") set_int(cfg.params.k);
    else if (key == "gamma") set_double(cfg.params.gamma);
    else if (key == "eps1") set_double(cfg.params.eps1);
    else if (key == "eps2") set_double(cfg.params.eps2);
    else if (key == "causal") {
      if (value == "1" || value == "true") cfg.params.causal = true;
      else if (value == "0" || value == "false") cfg.params.causal = false;
      else bad_value();
    } else if (key == "L_grid") {
      cfg.L_grid.clear();
      if (value.empty()) continue;
      for (auto tok : split(value, ',')) {
        if (auto v = parse<int>(tok)) cfg.L_grid.push_back(*v);
        else { bad_value(); break; }
      }
    } else if (key == "q_values") {
      parsed.q_values.clear();
      if (value.empty()) continue;
      for (auto tok : split(value, ',')) {
        if (auto v = parse<double>(tok)) parsed.q_values.push_back(*v);
        else { bad_value(); break; }
      }
    } else if (key == "d_lower") set_int(cfg.d_lower);
    else if (key == "d_upper") set_int(cfg.d_upper);
    else if (key == "d_points") set_int(cfg.d_points);
    else if (key == "q") set_double(cfg.q);
    else if (key == "trials_per_L") set_int(cfg.trials_per_L);
    else if (key == "master_seed") {
      if (auto v = parse<std::uint64_t>(value)) cfg.master_seed = *v; else bad_value();
    } else {
      errors.push_back(where + "unknown key '" + key + "'");
    }
  }
  if (!errors.empty()) {
    std::string msg = "invalid sweep config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw Error(msg);
  }
  return parsed;
}

ParsedConfig read_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_sweep_config(ss.str());
}

}  // namespace sparseattn
