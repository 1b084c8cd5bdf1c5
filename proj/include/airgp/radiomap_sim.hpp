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

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "airgp/poe_expert.hpp"
#include "airgp/trainer.hpp"

namespace airgp {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

// Radio environment and experiment parameters. Power quantities are dB/dBm
// here and converted to linear scale where the channel needs them.
struct ScenarioConfig {
  // ground-truth field
  double eta = 3.0;          // path loss exponent
  double p_tx_dbm = 10.0;    // transmit power
  double sigma_db = 8.0;     // shadowing standard deviation
  double d_cor = 100.0;      // shadowing correlation distance, meters
  Eigen::Vector2d tx_location{0.0, 500.0};
  double span_min = 1.0;     // measurement line, meters
  double span_max = 1000.0;

  // experiment sizes
  int m = 4;
  int n = 128;
  int n_test = 10;
  int trials = 100;

  // multiple-access channel
  double gamma_bar_db = -50.0;
  double sigma_z2_dbm = -90.0;
  double p_max_dbm = 10.0;
  double l_min = -5000.0;  // likelihood truncation bounds, statistical CSI
  double l_max = 0.0;

  // training schedule
  int t_max = 600;
  int t_multi = 3;
  double conv_tol = 1e-4;

  void validate() const;
  ChannelParams channel_params() const;  // linear-scale conversion
  TrainConfig train_config(std::uint64_t seed) const;
};

// One world realization over train + test locations (train rows first).
struct GroundTruth {
  Matrix locations;  // K x 2
  Eigen::Index n_train = 0;
  Eigen::Vector2d tx_location{0.0, 0.0};
  Vector pathloss_db;   // deterministic component, dBm
  Vector shadowing_db;  // correlated zero-mean draw, dB
  Vector rx_power_dbm;  // sum of the two
};

// Linear prior over 10*log10(distance to transmitter): y ~ a - b * r.
// Degenerate designs (no spread in distance) fall back to the sample mean.
struct OlsPrior {
  double intercept = 0.0;
  double slope = 0.0;
  bool degenerate = false;

  Vector evaluate(const Matrix& inputs_1d, const Eigen::Vector2d& tx) const;
};

enum class Method {
  full_gpr,
  ideal_poe,
  aircomp_perfect,
  aircomp_statistical,
  pathloss,
};

const std::vector<Method>& all_methods();
std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct MethodOutcome {
  double rmse_db = 0.0;
  double train_time_s = 0.0;  // likelihood-evaluation time, see trainer
  long long rounds = 0;       // channel rounds consumed during training
  bool training_failed = false;
  Hyperparams theta;          // trained (or default for pathloss)
};

struct TrialRecord {
  std::uint64_t seed = 0;
  Vector train_locations;  // line coordinates used for measurements
  Vector test_locations;   // evaluation points, kept off the measurements
  std::map<Method, MethodOutcome> outcomes;
};

double shadowing_correlation(const Eigen::Vector2d& xi, const Eigen::Vector2d& xj,
                             double d_cor);

GroundTruth generate_field(const Matrix& locations, const ScenarioConfig& scenario,
                           std::uint64_t seed);

// Partitions the training half of a world into per-node datasets, input being
// the 1-D line coordinate, and fills each node's prior from its own OLS fit.
ExpertPool build_node_datasets(const GroundTruth& truth, int m,
                               PartitionStrategy assignment, std::uint64_t seed);

OlsPrior ols_prior(const LocalDataset& expert, const Eigen::Vector2d& tx);

PredictionResult pathloss_baseline(const ScenarioConfig& scenario, const Matrix& x_test);

double rmse(const Vector& predicted, const Vector& truth);

TrialRecord run_trial(const ScenarioConfig& scenario, const std::vector<Method>& methods,
                      std::uint64_t seed);

}  // namespace airgp
