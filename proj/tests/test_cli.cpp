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


#include <doctest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#ifndef SPARSEATTN_CLI_PATH
#error "SPARSEATTN_CLI_PATH must name the sparseattn executable"
#endif

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "sparseattn_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const char* name) { return (workdir() / name).string(); }

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + SPARSEATTN_CLI_PATH + "\" " + args +
                          " > " + path("stdout.txt") + " 2> " + path("stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const std::string& text) {
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and usage errors") {
  CHECK(run("--help") == 0);
  CHECK(run("") == 2);
  CHECK(run("nonsense") == 2);
  CHECK(run("generate --L 8 --k 0") == 2);
  CHECK(slurp(path("stderr.txt")).find("k must satisfy") != std::string::npos);
  CHECK(run("generate --L 8") == 2);
}

TEST_CASE("generate writes COO to stdout or a file") {
  REQUIRE(run("generate --L 3 --k 1 --causal --seed 5") == 0);
  const auto text = slurp(path("stdout.txt"));
  CHECK(text.rfind("3 1 1.0000000000000000e+00 1\n0 0 1.0000000000000000e+00\n", 0) == 0);
  REQUIRE(run("generate --L 32 --k 2 --gamma 2 --seed 1 --out " + path("a.coo")) == 0);
  CHECK(count_lines(slurp(path("a.coo"))) >= 33);
}

TEST_CASE("approx: exact width passes, odd width is a usage error") {
  REQUIRE(run("generate --L 32 --k 2 --gamma 2 --seed 1 --out " + path("a.coo")) == 0);
  CHECK(run("approx --in " + path("a.coo") + " --d 15") == 2);
  CHECK(run("approx --in " + path("missing.coo") + " --d 16") == 2);

  REQUIRE(run("approx --in " + path("a.coo") + " --d 64 --threads 1 --out " +
              path("r.json") + " --dump-logits " + path("z.txt") + " --dump-m " +
              path("m.txt") + " --dump-inputs " + path("in.txt")) == 0);
  const auto j = nlohmann::json::parse(slurp(path("r.json")));
  CHECK(j["passed"] == true);
  CHECK(j["redraw"] == 0);
  CHECK(j["redraws_used"] == 1);
  CHECK(j["L"] == 32);
  CHECK(j["d"] == 64);
  CHECK(j["d_hid"] == 64);
  CHECK(j["first_violation"].is_null());
  CHECK(slurp(path("z.txt")).rfind("32 32\n", 0) == 0);
  CHECK(slurp(path("m.txt")).rfind("32 32\n", 0) == 0);
  CHECK(slurp(path("in.txt")).rfind("# X\n32 64\n", 0) == 0);
}

TEST_CASE("approx: failing verification exits 1 with a violation") {
  REQUIRE(run("generate --L 64 --k 2 --gamma 2 --seed 3 --out " + path("b.coo")) == 0);
  CHECK(run("approx --in " + path("b.coo") + " --d 2 --eps2 0.2 --q 0.02 --threads 1") == 1);
  const auto j = nlohmann::json::parse(slurp(path("stdout.txt")));
  CHECK(j["passed"] == false);
  CHECK(j["first_violation"].is_object());
}

TEST_CASE("sweep output is resumable") {
  {
    std::ofstream cfg(path("s.cfg"));
    cfg << "k = 1\nL_grid = 16, 24\nd_lower = 4\nd_upper = 48\nd_points = 12\n"
           "trials_per_L = 2\nmaster_seed = 4\n";
  }
  REQUIRE(run("sweep --config " + path("s.cfg") + " --out " + path("s.csv") +
              " --threads 1") == 0);
  const auto first = slurp(path("s.csv"));
  CHECK(count_lines(first) == 5);
  CHECK(first.rfind("L,trial,q,d_min,theoretical_d,redraws_used,seed\n", 0) == 0);
  REQUIRE(run("sweep --config " + path("s.cfg") + " --out " + path("s.csv")) == 0);
  CHECK(slurp(path("s.csv")) == first);
  CHECK(slurp(path("stderr.txt")).find("resumed 4") != std::string::npos);

  {
    std::ofstream bad(path("bad.cfg"));
    bad << "k = 1\nwhat = 3\n";
  }
  CHECK(run("sweep --config " + path("bad.cfg") + " --out " + path("x.csv")) == 2);
}

TEST_CASE("qsweep writes one row per (L, trial, q)") {
  {
    std::ofstream cfg(path("q.cfg"));
    cfg << "k = 1\nL_grid = 16\nd_lower = 4\nd_upper = 32\nd_points = 8\n"
           "trials_per_L = 2\nq_values = 0.5, 1, 2\n";
  }
  REQUIRE(run("qsweep --config " + path("q.cfg") + " --out " + path("q.csv")) == 0);
  CHECK(count_lines(slurp(path("q.csv"))) == 1 + 2 * 3);
}

TEST_CASE("render writes a PGM") {
  REQUIRE(run("generate --L 32 --k 2 --gamma 2 --seed 1 --out " + path("a.coo")) == 0);
  REQUIRE(run("render --in " + path("a.coo") + " --out " + path("a.pgm") + " --pool 4") == 0);
  CHECK(slurp(path("a.pgm")).rfind("P2\n8 8\n255\n", 0) == 0);
  CHECK(run("render --in " + path("a.coo") + " --out " + path("a.pgm") + " --pool 5") == 2);
}

TEST_CASE("jlt-bench default grid and validation") {
  REQUIRE(run("jlt-bench --n-samples 50 --threads 1 --out " + path("j.csv") + " --mse-out " +
              path("mse.csv")) == 0);
  const auto text = slurp(path("j.csv"));
  CHECK(count_lines(text) == 1 + 48);
  CHECK(text.rfind("p,m,epsilon,mode,empirical_tail,theoretical_tail,n_samples\n", 0) == 0);
  CHECK(count_lines(slurp(path("mse.csv"))) == 1 + 8);
  CHECK(run("jlt-bench --n-samples 0") == 2);
  CHECK(run("jlt-bench --m-grid 300") == 2);
}

}  // TEST_SUITE
