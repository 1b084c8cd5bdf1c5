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

#include "airgp/radiomap_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace airgp {

namespace {

constexpr double kLn2 = 0.6931471805599453094;

// seed-stream tags for the independent random draws inside one trial
enum SeedTag : std::uint64_t {
  kTagLocations = 1,
  kTagField = 2,
  kTagPartition = 3,
  kTagTraining = 4,
  kTagObjectiveBase = 16,  // + method index
  kTagPredictBase = 64,    // + method index
};

double distance_to_tx(const Eigen::Vector2d& tx, double l) {
  return std::hypot(tx[0] - l, tx[1]);
}

Vector log_distance_regressor(const Matrix& inputs_1d, const Eigen::Vector2d& tx) {
  Vector r(inputs_1d.rows());
  for (Eigen::Index i = 0; i < inputs_1d.rows(); ++i) {
    const double d = distance_to_tx(tx, inputs_1d(i, 0));
    if (!(d > 0.0)) {
      throw std::invalid_argument("location coincides with the transmitter");
    }
    r[i] = 10.0 * std::log10(d);
  }
  return r;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!(eta > 0.0)) {
    throw std::invalid_argument("ScenarioConfig: path loss exponent must be positive");
  }
  if (!(sigma_db >= 0.0)) {
    throw std::invalid_argument("ScenarioConfig: shadowing std must be non-negative");
  }
  if (!(d_cor > 0.0)) {
    throw std::invalid_argument("ScenarioConfig: correlation distance must be positive");
  }
  if (!(span_min < span_max)) {
    throw std::invalid_argument("ScenarioConfig: empty measurement span");
  }
  if (m < 1 || n < m || n_test < 1 || trials < 1) {
    throw std::invalid_argument("ScenarioConfig: invalid experiment sizes");
  }
  if (n % m != 0) {
    std::fprintf(stderr,
                 "warning: N=%d not divisible by M=%d; last node absorbs %d extra\n",
                 n, m, n % m);
  }
  if (!(l_min < l_max)) {
    throw std::invalid_argument("ScenarioConfig: need l_min < l_max");
  }
  if (t_max < 1 || t_multi < 1 || !(conv_tol > 0.0)) {
    throw std::invalid_argument("ScenarioConfig: invalid training schedule");
  }
}

ChannelParams ScenarioConfig::channel_params() const {
  ChannelParams cp;
  cp.gamma_bar = Vector::Constant(m, db_to_linear(gamma_bar_db));
  cp.sigma_z2 = db_to_linear(sigma_z2_dbm);
  cp.p_max = db_to_linear(p_max_dbm);
  return cp;
}

TrainConfig ScenarioConfig::train_config(std::uint64_t seed) const {
  TrainConfig cfg;
  cfg.t_max = t_max;
  cfg.t_multi = t_multi;
  cfg.conv_tol = conv_tol;
  cfg.seed = seed;
  return cfg;
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {
      Method::full_gpr, Method::ideal_poe, Method::aircomp_perfect,
      Method::aircomp_statistical, Method::pathloss};
  return methods;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::full_gpr:
      return "full-gpr";
    case Method::ideal_poe:
      return "ideal-poe";
    case Method::aircomp_perfect:
      return "aircomp-perfect";
    case Method::aircomp_statistical:
      return "aircomp-statistical";
    case Method::pathloss:
      return "pathloss";
  }
  throw std::invalid_argument("unknown method");
}

Method method_from_name(const std::string& name) {
  for (Method m : all_methods()) {
    if (method_name(m) == name) {
      return m;
    }
  }
  throw std::invalid_argument("unknown method name: " + name);
}

double shadowing_correlation(const Eigen::Vector2d& xi, const Eigen::Vector2d& xj,
                             double d_cor) {
  if (!(d_cor > 0.0)) {
    throw std::invalid_argument("shadowing_correlation: d_cor must be positive");
  }
  return std::exp(-(xi - xj).norm() * kLn2 / d_cor);
}

GroundTruth generate_field(const Matrix& locations, const ScenarioConfig& scenario,
                           std::uint64_t seed) {
  scenario.validate();
  if (locations.rows() < 1 || locations.cols() != 2) {
    throw std::invalid_argument("generate_field: locations must be K x 2");
  }
  if (!locations.allFinite()) {
    throw std::invalid_argument("generate_field: non-finite location");
  }
  const Eigen::Index k = locations.rows();

  GroundTruth truth;
  truth.locations = locations;
  truth.n_train = k;
  truth.tx_location = scenario.tx_location;

  truth.pathloss_db.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double d = (scenario.tx_location - locations.row(i).transpose()).norm();
    if (!(d > 0.0)) {
      throw std::invalid_argument("generate_field: location coincides with transmitter");
    }
    truth.pathloss_db[i] = scenario.p_tx_dbm - 10.0 * scenario.eta * std::log10(d);
  }

  if (scenario.sigma_db == 0.0) {
    truth.shadowing_db = Vector::Zero(k);
  } else {
    Matrix cov(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      cov(i, i) = 1.0;
      for (Eigen::Index j = 0; j < i; ++j) {
        const double c = shadowing_correlation(locations.row(i).transpose(),
                                               locations.row(j).transpose(),
                                               scenario.d_cor);
        cov(i, j) = c;
        cov(j, i) = c;
      }
    }
    cov *= scenario.sigma_db * scenario.sigma_db;
    const PsdFactor factor(cov);  // same jitter ladder as the GP solver
    Rng rng(seed);
    Vector u(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      u[i] = rng.gaussian();
    }
    truth.shadowing_db = factor.matrix_l() * u;
  }

  truth.rx_power_dbm = truth.pathloss_db + truth.shadowing_db;
  return truth;
}

OlsPrior ols_prior(const LocalDataset& expert, const Eigen::Vector2d& tx) {
  expert.validate();
  const Vector r = log_distance_regressor(expert.inputs, tx);
  const Vector& y = expert.outputs;
  const double n = static_cast<double>(r.size());
  const double mean_r = r.mean();
  const double mean_y = y.mean();
  const double sxx = (r.array() - mean_r).square().sum();
  const double sxy = ((r.array() - mean_r) * (y.array() - mean_y)).sum();

  OlsPrior prior;
  if (r.size() < 2 || sxx <= 1e-12 * std::max(1.0, r.squaredNorm() / n)) {
    prior.intercept = mean_y;  // no usable spread in distance
    prior.slope = 0.0;
    prior.degenerate = true;
    return prior;
  }
  prior.slope = -sxy / sxx;  // y ~ a - b * r
  prior.intercept = mean_y + prior.slope * mean_r;
  return prior;
}

Vector OlsPrior::evaluate(const Matrix& inputs_1d, const Eigen::Vector2d& tx) const {
  const Vector r = log_distance_regressor(inputs_1d, tx);
  return Vector::Constant(r.size(), intercept) - slope * r;
}

ExpertPool build_node_datasets(const GroundTruth& truth, int m,
                               PartitionStrategy assignment, std::uint64_t seed) {
  if (truth.n_train < 1 || truth.n_train > truth.locations.rows()) {
    throw std::invalid_argument("build_node_datasets: invalid training count");
  }
  LocalDataset full;
  full.inputs = truth.locations.col(0).head(truth.n_train);
  full.outputs = truth.rx_power_dbm.head(truth.n_train);
  full.prior_mean = Vector::Zero(truth.n_train);

  ExpertPool pool = partition_dataset(full, m, assignment, seed);
  for (auto& expert : pool.experts) {
    const OlsPrior prior = ols_prior(expert, truth.tx_location);
    expert.prior_mean = prior.evaluate(expert.inputs, truth.tx_location);
  }
  return pool;
}

PredictionResult pathloss_baseline(const ScenarioConfig& scenario, const Matrix& x_test) {
  scenario.validate();
  PredictionResult out;
  out.mean.resize(x_test.rows());
  for (Eigen::Index j = 0; j < x_test.rows(); ++j) {
    const double d = distance_to_tx(scenario.tx_location, x_test(j, 0));
    if (!(d > 0.0)) {
      throw std::invalid_argument("pathloss_baseline: test point at the transmitter");
    }
    out.mean[j] = scenario.p_tx_dbm - 10.0 * scenario.eta * std::log10(d);
  }
  out.variance = Vector::Constant(x_test.rows(), scenario.sigma_db * scenario.sigma_db);
  return out;
}

double rmse(const Vector& predicted, const Vector& truth) {
  if (predicted.size() != truth.size() || predicted.size() < 1) {
    throw std::invalid_argument("rmse: length mismatch");
  }
  return std::sqrt((predicted - truth).squaredNorm() /
                   static_cast<double>(predicted.size()));
}

TrialRecord run_trial(const ScenarioConfig& scenario, const std::vector<Method>& methods,
                      std::uint64_t seed) {
  scenario.validate();
  if (methods.empty()) {
    throw std::invalid_argument("run_trial: no methods requested");
  }

  // measurement locations on the line, test points kept off the samples
  Rng loc_rng(derive_seed(seed, kTagLocations));
  Vector train_l(scenario.n);
  for (int i = 0; i < scenario.n; ++i) {
    train_l[i] = loc_rng.uniform(scenario.span_min, scenario.span_max);
  }
  Vector test_l(scenario.n_test);
  const long max_attempts = 100000L * scenario.n_test;
  long attempts = 0;
  for (int j = 0; j < scenario.n_test;) {
    const double cand = loc_rng.uniform(scenario.span_min, scenario.span_max);
    if (++attempts > max_attempts) {
      throw std::runtime_error("run_trial: could not place test points away from samples");
    }
    if ((train_l.array() - cand).abs().minCoeff() < 1.0) {
      continue;  // too close to a measurement
    }
    test_l[j++] = cand;
  }

  Matrix locations(scenario.n + scenario.n_test, 2);
  locations.col(0).head(scenario.n) = train_l;
  locations.col(0).tail(scenario.n_test) = test_l;
  locations.col(1).setZero();

  GroundTruth truth = generate_field(locations, scenario, derive_seed(seed, kTagField));
  truth.n_train = scenario.n;

  const Matrix x_test = test_l;
  const Vector truth_test = truth.rx_power_dbm.tail(scenario.n_test);

  const bool needs_pool =
      std::any_of(methods.begin(), methods.end(), [](Method m) {
        return m == Method::ideal_poe || m == Method::aircomp_perfect ||
               m == Method::aircomp_statistical;
      });
  const bool needs_full =
      std::any_of(methods.begin(), methods.end(),
                  [](Method m) { return m == Method::full_gpr; });

  const std::uint64_t partition_seed = derive_seed(seed, kTagPartition);
  ExpertPool pool, full_pool;
  if (needs_pool) {
    pool = build_node_datasets(truth, scenario.m, PartitionStrategy::random,
                               partition_seed);
  }
  if (needs_full) {
    full_pool = build_node_datasets(truth, 1, PartitionStrategy::random, partition_seed);
  }

  const TrainConfig cfg = scenario.train_config(derive_seed(seed, kTagTraining));

  TrialRecord record;
  record.seed = seed;
  record.train_locations = train_l;
  record.test_locations = test_l;
  for (Method method : methods) {
    MethodOutcome outcome;
    if (method == Method::pathloss) {
      outcome.rmse_db = rmse(pathloss_baseline(scenario, x_test).mean, truth_test);
      record.outcomes[method] = outcome;
      continue;
    }

    const ExpertPool& active = method == Method::full_gpr ? full_pool : pool;
    const int method_idx = static_cast<int>(method);

    TrainingMode mode = TrainingMode::ideal;
    ChannelParams cp;
    PowerPolicy policy;
    if (method == Method::aircomp_perfect || method == Method::aircomp_statistical) {
      cp = scenario.channel_params();
      if (method == Method::aircomp_perfect) {
        mode = TrainingMode::aircomp_perfect;
      } else {
        mode = TrainingMode::aircomp_statistical;
        policy.mode = CsiMode::statistical;
        policy.l_min = scenario.l_min;
        policy.l_max = scenario.l_max;
        policy.c_unbias = unbias_constant(ChannelModel::rayleigh);
      }
    }

    const TrainingObjective objective = make_objective(
        active, mode, cp, policy,
        derive_seed(seed, kTagObjectiveBase + static_cast<std::uint64_t>(method_idx)));
    try {
      const TrainResult tr = multistart_train(objective, cfg);
      outcome.theta = tr.theta_opt;
    } catch (const TrainingFailedError&) {
      outcome.training_failed = true;
      outcome.rmse_db = std::numeric_limits<double>::quiet_NaN();
      outcome.rounds = objective.rounds();
      outcome.train_time_s = objective.eval_seconds();
      record.outcomes[method] = outcome;
      continue;
    }
    outcome.rounds = objective.rounds();
    outcome.train_time_s = objective.eval_seconds();

    PredictionResult prediction;
    if (method == Method::full_gpr) {
      const Vector prior =
          ols_prior(active.experts[0], truth.tx_location).evaluate(x_test, truth.tx_location);
      prediction = gpr_predict(active.experts[0], outcome.theta, prior, x_test);
    } else {
      std::vector<Vector> priors;
      std::vector<LocalPrediction> locals;
      priors.reserve(active.experts.size());
      locals.reserve(active.experts.size());
      for (const auto& expert : active.experts) {
        const Vector prior =
            ols_prior(expert, truth.tx_location).evaluate(x_test, truth.tx_location);
        priors.push_back(prior);
        locals.push_back(local_predict(expert, outcome.theta, prior, x_test));
      }
      if (method == Method::ideal_poe) {
        prediction = poe_fuse(locals);
      } else {
        // over-the-air aggregation of the fusion sums (perfect-CSI rounds)
        ChannelState carrier;
        carrier.gamma_bar = cp.gamma_bar;
        carrier.h = ComplexVector::Ones(static_cast<int>(active.experts.size()));
        carrier.sigma_z2 = cp.sigma_z2;
        carrier.p_max = cp.p_max;
        prediction = aircomp_predict_round(
            locals, carrier,
            derive_seed(seed, kTagPredictBase + static_cast<std::uint64_t>(method_idx)));
      }
    }
    outcome.rmse_db = rmse(prediction.mean, truth_test);
    record.outcomes[method] = outcome;
  }
  return record;
}

}  // namespace airgp
