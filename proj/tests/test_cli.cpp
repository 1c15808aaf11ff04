//
// Copyright 2026 The privdep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "privdep/simulate.hpp"

namespace {

const char* cli_path() { return PRIVDEP_CLI_PATH; }

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

RunResult run_cli(const std::string& args) {
  const std::string out_file =
      std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
      "/privdep_cli_stdout.txt";
  const std::string command =
      std::string(cli_path()) + " " + args + " > " + out_file + " 2>/dev/null";
  const int status = std::system(command.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_file);
  std::stringstream buffer;
  buffer << in.rdbuf();
  result.stdout_text = buffer.str();
  return result;
}

std::string write_sample_csv() {
  const std::string path =
      std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
      "/privdep_cli_sample.csv";
  const privdep::TauModel model = privdep::build_tau("F2", 6);
  privdep::Rng rng(2024);
  const privdep::DataMatrix data = privdep::sample_copula(model, 250, rng);
  std::ofstream out(path);
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.d(); ++j) {
      out << data.values(i, j) << (j + 1 == data.d() ? '\n' : ',');
    }
  }
  return path;
}

}  // namespace

TEST_CASE("cli test subcommand emits the fixed JSON schema") {
  const std::string csv = write_sample_csv();
  const RunResult run = run_cli("test " + csv +
                                " --delta 0.4 --rho 1 --seed 9 --B 100");
  REQUIRE(run.exit_code == 0);
  const nlohmann::json doc = nlohmann::json::parse(run.stdout_text);
  for (const char* key : {"decision", "branch", "delta", "deltaHat", "normDP",
                          "quantile", "extremal", "ledger"}) {
    CHECK(doc.contains(key));
  }
  CHECK(doc["delta"] == 0.4);
  CHECK(doc["deltaHat"].is_null());
  CHECK(doc["ledger"]["declared"]["rho"] == 1.0);
  // delta defaults to 1/n.
  CHECK(doc["ledger"]["declared"]["delta"] == doctest::Approx(1.0 / 250.0));
}

TEST_CASE("cli reruns with the same seed are byte identical") {
  const std::string csv = write_sample_csv();
  const std::string args = "test " + csv + " --delta 0.45 --rho 1 --seed 42";
  const RunResult a = run_cli(args);
  const RunResult b = run_cli(args);
  REQUIRE(a.exit_code == 0);
  CHECK(a.stdout_text == b.stdout_text);
  const RunResult c = run_cli("test " + csv +
                              " --delta 0.45 --rho 1 --seed 43");
  CHECK(a.stdout_text != c.stdout_text);
}

TEST_CASE("cli verify reproduces recorded decisions") {
  const std::string csv = write_sample_csv();
  const std::string tmp =
      std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp");
  const std::string result_path = tmp + "/privdep_cli_result.json";
  const RunResult run = run_cli("test " + csv +
                                " --delta 0.4 --rho 1 --seed 5 --out " +
                                result_path);
  REQUIRE(run.exit_code == 0);
  const RunResult verify = run_cli("verify " + result_path);
  CHECK(verify.exit_code == 0);
  CHECK(verify.stdout_text.rfind("consistent", 0) == 0);
}

TEST_CASE("cli test accepts a threshold grid") {
  const std::string csv = write_sample_csv();
  const RunResult run =
      run_cli("test " + csv + " --delta 0.6,0.5,0.4 --rho 1 --seed 9 --B 100");
  REQUIRE(run.exit_code == 0);
  const nlohmann::json doc = nlohmann::json::parse(run.stdout_text);
  CHECK(doc["delta"] == 0.6);
  CHECK_FALSE(doc["deltaHat"].is_null());
}

TEST_CASE("cli scan reports deltaHat") {
  const std::string csv = write_sample_csv();
  const RunResult run = run_cli("scan " + csv + " --rho 1 --seed 17 --B 100");
  REQUIRE(run.exit_code == 0);
  const nlohmann::json doc = nlohmann::json::parse(run.stdout_text);
  CHECK(doc["deltaHat"].is_number());
  CHECK(doc["delta"] == 0.99);
}

TEST_CASE("cli extremal emits the estimate schema") {
  const std::string csv = write_sample_csv();
  const RunResult run = run_cli("extremal " + csv + " --rho 1 --seed 3");
  REQUIRE(run.exit_code == 0);
  const nlohmann::json doc = nlohmann::json::parse(run.stdout_text);
  for (const char* key : {"outcome", "indices", "kHat", "truncated"}) {
    CHECK(doc.contains(key));
  }
  if (doc["outcome"] == "set") {
    for (const auto& index : doc["indices"]) {
      CHECK(index.get<int>() >= 1);
      CHECK(index.get<int>() <= 15);
    }
  }
}

TEST_CASE("cli exposes the alternative Gumbel scale reading") {
  const std::string csv = write_sample_csv();
  const std::string base = "test " + csv +
                           " --delta 0.4 --rho 1 --seed 13 --branch gumbel";
  const RunResult squared = run_cli(base);
  const RunResult literal = run_cli(base + " --gumbel-literal-scale");
  REQUIRE(squared.exit_code == 0);
  REQUIRE(literal.exit_code == 0);
  const double q_squared =
      nlohmann::json::parse(squared.stdout_text)["quantile"].get<double>();
  const double q_literal =
      nlohmann::json::parse(literal.stdout_text)["quantile"].get<double>();
  // The kendall kernel has unit bound, where the two readings agree.
  CHECK(q_squared == doctest::Approx(q_literal));
}

TEST_CASE("cli svt-cost reproduces the reference bound") {
  const RunResult run = run_cli("svt-cost --n 250 --p 31125 --sigma 0.1");
  REQUIRE(run.exit_code == 0);
  CHECK(run.stdout_text.find("24.2184") != std::string::npos);
}

TEST_CASE("cli simulate writes the CSV schema") {
  const std::string tmp =
      std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp");
  const std::string out_path = tmp + "/privdep_cli_power.csv";
  const RunResult run = run_cli(
      "simulate --model F2 --n 100 --d 6 --rho 1 --delta-grid 1.5 --reps 5 "
      "--B 60 --seed 1 --out " + out_path);
  REQUIRE(run.exit_code == 0);
  std::ifstream in(out_path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "model,n,d,rho,Delta,method,rejectRate,reps,seed");
}

TEST_CASE("cli exit codes") {
  CHECK(run_cli("test /no/such/file.csv --delta 0.4 --seed 1").exit_code == 4);
  CHECK(run_cli("test --delta 0.4").exit_code == 2);        // data missing
  CHECK(run_cli("frobnicate").exit_code == 2);              // unknown command
  const std::string csv = write_sample_csv();
  CHECK(run_cli("test " + csv + " --delta 0.4 --rho -1 --seed 1").exit_code ==
        2);
}
