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

#include "airgp/trainer.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "airgp/csv.hpp"

namespace airgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinLogVar = -690.0;  // exp() underflows below this anyway

using LogCoord = Eigen::Vector3d;

LogCoord to_log(const Hyperparams& th) {
  LogCoord u;
  u[0] = std::log(th.psi1);
  u[1] = std::log(th.psi2);
  const double var = th.sigma_eps * th.sigma_eps;
  u[2] = var > 0.0 ? std::max(std::log(var), kMinLogVar) : kMinLogVar;
  return u;
}

Hyperparams from_log(const LogCoord& u) {
  Hyperparams th;
  th.psi1 = std::exp(u[0]);
  th.psi2 = std::exp(u[1]);
  th.sigma_eps = std::exp(0.5 * u[2]);
  return th;
}

}  // namespace

void TrainConfig::validate() const {
  if (t_max < 1) {
    throw std::invalid_argument("TrainConfig: t_max must be at least 1");
  }
  if (t_multi < 1) {
    throw std::invalid_argument("TrainConfig: t_multi must be at least 1");
  }
  if (!(conv_tol > 0.0)) {
    throw std::invalid_argument("TrainConfig: conv_tol must be positive");
  }
  for (const auto& r : {init_ranges.psi1, init_ranges.psi2, init_ranges.sigma_eps}) {
    if (!(r.first > 0.0) || !(r.second >= r.first)) {
      throw std::invalid_argument("TrainConfig: invalid init range");
    }
  }
}

Hyperparams draw_initial_theta(Rng& rng, const InitRanges& ranges) {
  auto log_uniform = [&](const std::pair<double, double>& r) {
    return std::exp(rng.uniform(std::log(r.first), std::log(r.second)));
  };
  Hyperparams th;
  th.psi1 = log_uniform(ranges.psi1);
  th.psi2 = log_uniform(ranges.psi2);
  th.sigma_eps = log_uniform(ranges.sigma_eps);
  return th;
}

NelderMeadResult nelder_mead(const Objective& objective, const Hyperparams& theta0,
                             int t_max, double conv_tol) {
  theta0.validate();
  if (t_max < 1) {
    throw std::invalid_argument("nelder_mead: t_max must be at least 1");
  }
  if (!(conv_tol > 0.0)) {
    throw std::invalid_argument("nelder_mead: conv_tol must be positive");
  }

  constexpr int kDim = 3;
  constexpr double kAlpha = 1.0;   // reflection
  constexpr double kGamma = 2.0;   // expansion
  constexpr double kRhoC = 0.5;    // contraction
  constexpr double kSigmaS = 0.5;  // shrink

  NelderMeadResult out;
  out.value = -kInf;

  // internally minimizes g = -f; non-finite f maps to +inf so the vertex
  // loses every comparison and gets replaced
  auto eval = [&](const LogCoord& u) -> double {
    const Hyperparams th = from_log(u);
    const double f = objective(th);
    out.trace.push_back(f);
    ++out.evaluations;
    if (std::isfinite(f) && f > out.value) {
      out.value = f;
      out.theta = th;
    }
    return std::isfinite(f) ? -f : kInf;
  };
  auto budget_left = [&] { return out.evaluations < t_max; };

  struct Vertex {
    LogCoord u;
    double g;
  };
  std::vector<Vertex> simplex;
  simplex.reserve(kDim + 1);

  const LogCoord u0 = to_log(theta0);
  simplex.push_back({u0, eval(u0)});
  for (int k = 0; k < kDim && budget_left(); ++k) {
    LogCoord u = u0;
    u[k] += 0.5;
    simplex.push_back({u, eval(u)});
  }

  if (simplex.size() < kDim + 1) {  // budget exhausted on the initial simplex
    if (!std::isfinite(out.value)) {
      out.theta = theta0;
    }
    return out;
  }

  auto by_value = [](const Vertex& a, const Vertex& b) { return a.g < b.g; };
  std::sort(simplex.begin(), simplex.end(), by_value);

  while (budget_left()) {
    const double spread = simplex.back().g - simplex.front().g;
    if (std::isfinite(spread) && spread < conv_tol) {
      break;
    }

    LogCoord centroid = LogCoord::Zero();
    for (int i = 0; i < kDim; ++i) {
      centroid += simplex[static_cast<std::size_t>(i)].u;
    }
    centroid /= kDim;
    Vertex& worst = simplex.back();

    const LogCoord xr = centroid + kAlpha * (centroid - worst.u);
    const double gr = eval(xr);

    if (gr < simplex.front().g) {
      if (budget_left()) {
        const LogCoord xe = centroid + kGamma * (xr - centroid);
        const double ge = eval(xe);
        worst = ge < gr ? Vertex{xe, ge} : Vertex{xr, gr};
      } else {
        worst = {xr, gr};
      }
    } else if (gr < simplex[kDim - 1].g) {
      worst = {xr, gr};
    } else {
      bool shrink = true;
      if (budget_left()) {
        if (gr < worst.g) {  // outside contraction
          const LogCoord xc = centroid + kRhoC * (xr - centroid);
          const double gc = eval(xc);
          if (gc <= gr) {
            worst = {xc, gc};
            shrink = false;
          }
        } else {  // inside contraction
          const LogCoord xc = centroid + kRhoC * (worst.u - centroid);
          const double gc = eval(xc);
          if (gc < worst.g) {
            worst = {xc, gc};
            shrink = false;
          }
        }
      } else {
        break;
      }
      if (shrink) {
        for (int i = 1; i <= kDim && budget_left(); ++i) {
          auto& v = simplex[static_cast<std::size_t>(i)];
          v.u = simplex.front().u + kSigmaS * (v.u - simplex.front().u);
          v.g = eval(v.u);
        }
      }
    }
    std::sort(simplex.begin(), simplex.end(), by_value);
  }

  if (!std::isfinite(out.value)) {  // nothing evaluated finite
    out.theta = theta0;
  }
  return out;
}

TrainResult multistart_train(const Objective& objective, const TrainConfig& config) {
  config.validate();
  Rng init_rng(config.seed);

  TrainResult out;
  out.best_objective = -kInf;
  int winner = -1;
  for (int s = 0; s < config.t_multi; ++s) {
    StartResult sr;
    sr.theta0 = draw_initial_theta(init_rng, config.init_ranges);
    try {
      const NelderMeadResult r =
          nelder_mead(objective, sr.theta0, config.t_max, config.conv_tol);
      sr.theta = r.theta;
      sr.value = r.value;
      sr.evaluations = r.evaluations;
      sr.trace = r.trace;
      sr.failed = !std::isfinite(r.value);
      if (sr.failed) {
        sr.error = "no finite objective value observed";
      }
    } catch (const std::exception& e) {
      sr.failed = true;
      sr.error = e.what();
    }
    out.rounds_used += sr.evaluations;
    if (!sr.failed && sr.value > out.best_objective) {
      out.best_objective = sr.value;
      out.theta_opt = sr.theta;
      winner = s;
    }
    out.per_start.push_back(std::move(sr));
  }

  if (winner < 0) {
    std::ostringstream msg;
    msg << "all " << config.t_multi << " training starts failed:";
    for (std::size_t s = 0; s < out.per_start.size(); ++s) {
      msg << " [start " << s << ": " << out.per_start[s].error << "]";
    }
    throw TrainingFailedError(msg.str());
  }
  out.objective_trace = out.per_start[static_cast<std::size_t>(winner)].trace;
  return out;
}

// ---------------------------------------------------------------------------
// Training objective
// ---------------------------------------------------------------------------

struct TrainingObjective::State {
  // immutable after construction
  TrainingMode mode;
  ChannelParams channel;
  PowerPolicy policy;
  std::vector<Matrix> distances;  // per-expert pairwise input distances
  std::vector<Vector> outputs;
  std::vector<Vector> prior_means;

  // consumed per call
  Rng fading_rng;
  Rng noise_rng;
  int rounds = 0;
  int power_control_evals = 0;
  double last_rho = 0.0;
  double eval_seconds = 0.0;
  std::vector<ObjectiveRecord> records;

  State(std::uint64_t seed)
      : fading_rng(derive_seed(seed, 0xcafe)), noise_rng(derive_seed(seed, 0xbeef)) {}
};

TrainingObjective::TrainingObjective(const ExpertPool& pool, TrainingMode mode,
                                     const ChannelParams& channel,
                                     const PowerPolicy& policy, std::uint64_t seed)
    : state_(std::make_shared<State>(seed)) {
  if (pool.experts.empty()) {
    throw std::invalid_argument("TrainingObjective: empty expert pool");
  }
  const int m = static_cast<int>(pool.experts.size());
  state_->mode = mode;
  state_->channel = channel;
  state_->policy = policy;

  if (mode != TrainingMode::ideal) {
    if (channel.gamma_bar.size() != m) {
      throw std::invalid_argument("TrainingObjective: one channel gain per node required");
    }
    if (!(channel.sigma_z2 >= 0.0) || !(channel.p_max > 0.0)) {
      throw std::invalid_argument("TrainingObjective: invalid channel parameters");
    }
  }
  if (mode == TrainingMode::aircomp_statistical) {
    if (!(policy.l_min < policy.l_max)) {
      throw std::invalid_argument("TrainingObjective: statistical mode needs l_min < l_max");
    }
    if (!(policy.c_unbias > 0.0)) {
      throw std::invalid_argument("TrainingObjective: c_unbias must be positive");
    }
    // one power-control computation per training run, held for every round
    state_->last_rho = power_control_statistical(channel.gamma_bar, channel.p_max,
                                                 policy.l_min, policy.l_max);
    state_->power_control_evals = 1;
  }

  state_->distances.reserve(pool.experts.size());
  state_->outputs.reserve(pool.experts.size());
  state_->prior_means.reserve(pool.experts.size());
  for (const auto& e : pool.experts) {
    e.validate();
    state_->distances.push_back(distance_matrix(e.inputs));
    state_->outputs.push_back(e.outputs);
    state_->prior_means.push_back(e.prior_mean);
  }
}

double TrainingObjective::operator()(const Hyperparams& theta) const {
  State& st = *state_;
  const int m = static_cast<int>(st.distances.size());

  Vector locals(m);
  bool all_finite = true;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < m; ++i) {
    double li;
    try {
      li = log_marginal_likelihood_from_distances(
          st.distances[static_cast<std::size_t>(i)],
          st.outputs[static_cast<std::size_t>(i)],
          st.prior_means[static_cast<std::size_t>(i)], theta);
    } catch (const SingularMatrixError&) {
      li = -std::numeric_limits<double>::infinity();
    }
    locals[i] = li;
    all_finite = all_finite && std::isfinite(li);
  }
  st.eval_seconds +=
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double true_sum = all_finite ? locals.sum() : -kInf;

  double result;
  double record_rho = 0.0;
  switch (st.mode) {
    case TrainingMode::ideal:
      result = true_sum;
      break;

    case TrainingMode::aircomp_perfect: {
      if (!all_finite) {  // nothing sensible to transmit; reject the vertex
        result = -kInf;
        break;
      }
      const ChannelState round = sample_channel(st.channel.gamma_bar, st.channel.sigma_z2,
                                                st.channel.p_max, st.fading_rng);
      std::vector<double> norms(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) {
        norms[static_cast<std::size_t>(i)] = std::abs(locals[i]);
      }
      const double rho = power_control_perfect(round, norms);
      ++st.power_control_evals;
      st.last_rho = rho;
      record_rho = rho;
      std::vector<ComplexVector> encoded(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) {
        encoded[static_cast<std::size_t>(i)] = encode_perfect(
            Vector::Constant(1, locals[i]), rho, round.gamma_bar[i], round.h[i]);
      }
      const ComplexVector y = aircomp_round(encoded, round, st.noise_rng);
      ++st.rounds;
      result = decode_perfect(y, rho)[0];
      break;
    }

    case TrainingMode::aircomp_statistical: {
      const double mid = 0.5 * (st.policy.l_max + st.policy.l_min);
      const ChannelState round = sample_channel(st.channel.gamma_bar, st.channel.sigma_z2,
                                                st.channel.p_max, st.fading_rng);
      const double rho = st.last_rho;
      record_rho = rho;
      std::vector<ComplexVector> encoded(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) {
        // a non-finite local value is clamped to the lower truncation bound
        const double li = std::isfinite(locals[i]) ? locals[i] : st.policy.l_min;
        const double centered = truncate_center(li, st.policy.l_min, st.policy.l_max);
        encoded[static_cast<std::size_t>(i)] = encode_statistical(
            Vector::Constant(1, centered), rho, round.gamma_bar[i], round.h[i]);
      }
      const ComplexVector y = aircomp_round(encoded, round, st.noise_rng);
      ++st.rounds;
      // undo the known centering shift so the decoded value estimates the
      // plain likelihood sum and stays comparable with the ideal objective
      result = decode_statistical(y, rho, st.policy.c_unbias)[0] + m * mid;
      break;
    }

    default:
      throw std::logic_error("TrainingObjective: unknown mode");
  }

  ObjectiveRecord rec;
  rec.round = static_cast<int>(st.records.size());
  rec.theta = theta;
  rec.decoded = result;
  rec.true_sum = true_sum;
  rec.rho = record_rho;
  st.records.push_back(rec);
  return result;
}

TrainingMode TrainingObjective::mode() const { return state_->mode; }

int TrainingObjective::rounds() const { return state_->rounds; }

int TrainingObjective::power_control_count() const { return state_->power_control_evals; }

double TrainingObjective::rho() const { return state_->last_rho; }

double TrainingObjective::eval_seconds() const { return state_->eval_seconds; }

const std::vector<ObjectiveRecord>& TrainingObjective::trace() const {
  return state_->records;
}

void TrainingObjective::write_trace_csv(std::ostream& os) const {
  os << "round,psi1,psi2,sigma_eps,decoded_objective,true_objective,rho\n";
  for (const auto& r : state_->records) {
    os << r.round << ',' << csv_double(r.theta.psi1) << ',' << csv_double(r.theta.psi2)
       << ',' << csv_double(r.theta.sigma_eps) << ',' << csv_double(r.decoded) << ','
       << csv_double(r.true_sum) << ',' << csv_double(r.rho) << '\n';
  }
}

TrainingObjective make_objective(const ExpertPool& pool, TrainingMode mode,
                                 const ChannelParams& channel,
                                 const PowerPolicy& policy, std::uint64_t seed) {
  return TrainingObjective(pool, mode, channel, policy, seed);
}

}  // namespace airgp
