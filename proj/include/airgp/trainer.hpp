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
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "airgp/aircomp_channel.hpp"
#include "airgp/gp_core.hpp"
#include "airgp/poe_expert.hpp"

namespace airgp {

using Objective = std::function<double(const Hyperparams&)>;

struct InitRanges {
  std::pair<double, double> psi1{1e-1, 1e3};
  std::pair<double, double> psi2{1.0, 1e3};
  std::pair<double, double> sigma_eps{1e-2, 1e2};
};

struct TrainConfig {
  int t_max = 600;       // objective evaluations per start
  int t_multi = 3;       // independent restarts
  double conv_tol = 1e-4;
  InitRanges init_ranges;
  std::uint64_t seed = 0;

  void validate() const;
};

struct NelderMeadResult {
  Hyperparams theta;
  double value = 0.0;
  std::vector<double> trace;  // objective value per evaluation
  int evaluations = 0;
};

struct StartResult {
  Hyperparams theta0;
  Hyperparams theta;
  double value = 0.0;
  int evaluations = 0;
  std::vector<double> trace;
  bool failed = false;
  std::string error;
};

struct TrainResult {
  Hyperparams theta_opt;
  double best_objective = 0.0;
  std::vector<double> objective_trace;  // winning start, evaluation order
  int rounds_used = 0;                  // total evaluations across starts
  std::vector<StartResult> per_start;
};

class TrainingFailedError : public std::runtime_error {
 public:
  explicit TrainingFailedError(const std::string& what) : std::runtime_error(what) {}
};

Hyperparams draw_initial_theta(Rng& rng, const InitRanges& ranges);

// Derivative-free simplex maximization in the log-parameter space
// (log psi1, log psi2, log sigma_eps^2): reflection 1, expansion 2,
// contraction 0.5, shrink 0.5. Stops when the simplex objective spread falls
// below conv_tol or after t_max evaluations, whichever comes first. A vertex
// whose objective is non-finite is treated as -infinity.
NelderMeadResult nelder_mead(const Objective& objective, const Hyperparams& theta0,
                             int t_max, double conv_tol);

TrainResult multistart_train(const Objective& objective, const TrainConfig& config);

enum class TrainingMode { ideal, aircomp_perfect, aircomp_statistical };

struct ChannelParams {
  Vector gamma_bar;       // average gain per node, linear
  double sigma_z2 = 0.0;  // linear noise power
  double p_max = 1.0;     // linear power budget
};

struct ObjectiveRecord {
  int round = 0;
  Hyperparams theta;
  double decoded = 0.0;   // what the optimizer saw
  double true_sum = 0.0;  // error-free sum of local likelihoods
  double rho = 0.0;
};

// The training objective: sum of per-node log marginal likelihoods, either
// exact or carried through a simulated multiple-access round. Copies share
// state, so the functor can be handed to the optimizer by value while the
// caller keeps a handle for the trace. Each call in an AirComp mode consumes
// one channel round with fresh fading and noise.
class TrainingObjective {
 public:
  TrainingObjective(const ExpertPool& pool, TrainingMode mode,
                    const ChannelParams& channel, const PowerPolicy& policy,
                    std::uint64_t seed);

  double operator()(const Hyperparams& theta) const;

  TrainingMode mode() const;
  int rounds() const;                // channel rounds consumed so far
  int power_control_count() const;   // times rho was (re)computed
  double rho() const;                // last rho (statistical: the held rho)
  double eval_seconds() const;       // time spent in likelihood evaluations
                                     // only; channel simulation excluded
  const std::vector<ObjectiveRecord>& trace() const;
  void write_trace_csv(std::ostream& os) const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

TrainingObjective make_objective(const ExpertPool& pool, TrainingMode mode,
                                 const ChannelParams& channel,
                                 const PowerPolicy& policy, std::uint64_t seed);

}  // namespace airgp
