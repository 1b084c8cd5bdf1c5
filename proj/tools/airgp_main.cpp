/*
 * Copyright 2026 The airgp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "airgp/cli_bench.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw std::runtime_error("cannot read config: " + path);
  }
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return buffer.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  os << text;
  os.flush();
  if (!os) {
    throw std::runtime_error("write failed: " + path);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed Gaussian-process radio maps with over-the-air aggregation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int trials = 0;
  bool no_timing = false;
  app.add_option("--config", config_path, "JSON experiment description");
  auto* seed_opt = app.add_option("--seed", seed, "base seed for all randomness");
  auto* trials_opt = app.add_option("--trials", trials, "trials per sweep point");
  app.add_option("--out", out_path,
                 "output file (sweep/bench/cost) or directory (demo)");
  app.add_flag("--no-timing", no_timing,
               "write zeros to the timing column so reruns are byte-identical");

  CLI::App* demo = app.add_subcommand(
      "demo", "one fused regression with per-node contributions and 95% band");
  CLI::App* sweep =
      app.add_subcommand("sweep", "Monte-Carlo accuracy sweep, results as CSV");
  CLI::App* bench = app.add_subcommand(
      "bench", "likelihood timing, centralized vs slowest-node distributed");
  CLI::App* cost = app.add_subcommand("cost", "uplink communication cost table");
  for (CLI::App* sub : {demo, sweep, bench, cost}) {
    sub->fallthrough();
  }

  std::vector<int> bench_n = {32, 64, 128, 256, 512};
  std::vector<int> bench_m = {1, 4, 16};
  bench->add_option("--n-values", bench_n, "dataset sizes to time")
      ->delimiter(',');
  bench->add_option("--m-values", bench_m, "network sizes to time")
      ->delimiter(',');

  int cost_n_in = 0, cost_n = 0, cost_m = 0, cost_t = 0, cost_t_multi = 0,
      cost_n_test = 0;
  auto* n_in_opt = cost->add_option("--n-in", cost_n_in, "input dimension");
  auto* n_opt = cost->add_option("--n", cost_n, "total samples");
  auto* m_opt = cost->add_option("--m", cost_m, "nodes");
  auto* t_opt = cost->add_option("--t", cost_t, "optimizer iteration budget");
  auto* t_multi_opt = cost->add_option("--t-multi", cost_t_multi, "restarts");
  auto* n_test_opt = cost->add_option("--n-test", cost_n_test, "test points");

  CLI11_PARSE(app, argc, argv);

  try {
    airgp::ExperimentSpec spec;
    if (!config_path.empty()) {
      spec = airgp::parse_experiment_json(read_file(config_path));
    }
    if (seed_opt->count() > 0) {
      spec.seed = seed;
    }
    if (trials_opt->count() > 0) {
      spec.scenario.trials = trials;
    }
    if (no_timing) {
      spec.measure_timing = false;
    }

    if (sweep->parsed()) {
      spec.output_path = out_path.empty()
                             ? (spec.output_path.empty() ? "sweep.csv" : spec.output_path)
                             : out_path;
      const std::vector<airgp::SweepRow> rows = airgp::run_sweep(spec);
      std::cout << "wrote " << rows.size() << " rows to " << spec.output_path << "\n";
    } else if (demo->parsed()) {
      const std::string dir = out_path.empty() ? "." : out_path;
      const airgp::DemoResult result = airgp::demo_regression(spec.seed);
      airgp::write_demo_files(result, dir);
      std::cout << "wrote " << dir << "/demo_prediction.csv and " << dir
                << "/demo_training.csv\n";
    } else if (bench->parsed()) {
      const std::vector<airgp::BenchRow> rows =
          airgp::bench_training_time(bench_n, bench_m, spec.seed);
      std::ostringstream os;
      airgp::write_bench_csv(rows, os);
      if (out_path.empty()) {
        std::cout << os.str();
      } else {
        write_text(out_path, os.str());
        std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
      }
    } else if (cost->parsed()) {
      airgp::CostModel model;
      model.n_in = 1;
      model.n = spec.scenario.n;
      model.m = spec.scenario.m;
      model.t = spec.scenario.t_max;
      model.t_multi = spec.scenario.t_multi;
      model.n_test = spec.scenario.n_test;
      if (n_in_opt->count() > 0) model.n_in = cost_n_in;
      if (n_opt->count() > 0) model.n = cost_n;
      if (m_opt->count() > 0) model.m = cost_m;
      if (t_opt->count() > 0) model.t = cost_t;
      if (t_multi_opt->count() > 0) model.t_multi = cost_t_multi;
      if (n_test_opt->count() > 0) model.n_test = cost_n_test;
      std::ostringstream os;
      airgp::write_cost_csv(model, os);
      if (out_path.empty()) {
        std::cout << os.str();
      } else {
        write_text(out_path, os.str());
        std::cout << "wrote cost table to " << out_path << "\n";
      }
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
