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

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "airgp/trainer.hpp"
#include "doctest.h"

using namespace airgp;

namespace {

// squared log-distance bowl with a known optimum; smooth and unimodal
Objective log_bowl(double c1, double c2, double c3) {
  return [=](const Hyperparams& th) {
    const double d1 = std::log(th.psi1) - c1;
    const double d2 = std::log(th.psi2) - c2;
    const double d3 = std::log(th.sigma_eps) - c3;
    return -(d1 * d1 + d2 * d2 + d3 * d3);
  };
}

LocalDataset noisy_dataset(Rng& rng, int n, double out_scale, double span = 1000.0) {
  LocalDataset d;
  d.inputs.resize(n, 1);
  d.outputs.resize(n);
  d.prior_mean = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    d.inputs(i, 0) = rng.uniform(0.0, span);
    d.outputs[i] = out_scale * rng.gaussian();
  }
  return d;
}

ExpertPool gp_sample_pool(Rng& rng, int n, int m, const Hyperparams& th) {
  Matrix x(n, 1);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform(0.0, 1000.0);
  }
  Matrix k = kernel_matrix(x, th);
  k.diagonal().array() += 1e-9 * th.psi1;
  Vector u(n);
  for (int i = 0; i < n; ++i) {
    u[i] = rng.gaussian();
  }
  const Vector f = Eigen::LLT<Matrix>(k).matrixL() * u;

  LocalDataset full;
  full.inputs = x;
  full.outputs.resize(n);
  full.prior_mean = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    full.outputs[i] = f[i] + th.sigma_eps * rng.gaussian();
  }
  return partition_dataset(full, m, PartitionStrategy::random, rng.integer());
}

}  // namespace

TEST_CASE("nelder_mead converges on a smooth bowl") {
  const double c1 = std::log(2.0), c2 = std::log(80.0), c3 = std::log(0.5);
  const Hyperparams start{1.0, 10.0, 5.0};
  const NelderMeadResult r = nelder_mead(log_bowl(c1, c2, c3), start, 200, 1e-10);
  CHECK(r.evaluations <= 200);
  CHECK(std::abs(r.theta.psi1 - 2.0) < 1e-3 * 2.0);
  CHECK(std::abs(r.theta.psi2 - 80.0) < 1e-3 * 80.0);
  CHECK(std::abs(r.theta.sigma_eps - 0.5) < 1e-3 * 0.5);
  CHECK(r.value == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("nelder_mead respects a one-evaluation budget") {
  int calls = 0;
  Objective counting = [&](const Hyperparams& th) {
    ++calls;
    return -std::log(th.psi1) * std::log(th.psi1);
  };
  const Hyperparams start{3.0, 1.0, 1.0};
  const NelderMeadResult r = nelder_mead(counting, start, 1, 1e-4);
  CHECK(calls == 1);
  CHECK(r.evaluations == 1);
  CHECK(r.trace.size() == 1);
  CHECK(r.theta.psi1 == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("nelder_mead rejects non-finite vertices and keeps going") {
  Objective partial = [](const Hyperparams& th) {
    if (th.psi2 > 100.0) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    const double d = std::log(th.psi2) - std::log(50.0);
    return -d * d;
  };
  const Hyperparams start{1.0, 90.0, 1.0};  // first expansion walks into NaN land
  const NelderMeadResult r = nelder_mead(partial, start, 150, 1e-10);
  CHECK(std::isfinite(r.value));
  CHECK(std::abs(r.theta.psi2 - 50.0) < 1.0);
}

TEST_CASE("nelder_mead with an all-NaN objective returns the start") {
  Objective nan_obj = [](const Hyperparams&) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  const Hyperparams start{2.0, 3.0, 0.5};
  const NelderMeadResult r = nelder_mead(nan_obj, start, 50, 1e-4);
  CHECK(!std::isfinite(r.value));
  CHECK(r.theta.psi1 == doctest::Approx(2.0));
}

TEST_CASE("nelder_mead evaluates only positive parameters") {
  bool all_valid = true;
  Objective check_domain = [&](const Hyperparams& th) {
    all_valid = all_valid && th.psi1 > 0 && th.psi2 > 0 && th.sigma_eps >= 0;
    const double d = std::log(th.psi1) + 2.0;
    return -d * d;  // optimum at psi1 = e^-2, walks toward small values
  };
  nelder_mead(check_domain, Hyperparams{10.0, 1.0, 1.0}, 300, 1e-12);
  CHECK(all_valid);
}

TEST_CASE("multistart_train with one start equals a single run") {
  const Objective obj = log_bowl(std::log(3.0), std::log(30.0), std::log(0.3));
  TrainConfig cfg;
  cfg.t_max = 150;
  cfg.t_multi = 1;
  cfg.conv_tol = 1e-8;
  cfg.seed = 31337;
  const TrainResult tr = multistart_train(obj, cfg);

  Rng rng(cfg.seed);
  const Hyperparams theta0 = draw_initial_theta(rng, cfg.init_ranges);
  const NelderMeadResult nm = nelder_mead(obj, theta0, cfg.t_max, cfg.conv_tol);
  CHECK(tr.best_objective == nm.value);
  CHECK(tr.theta_opt.psi2 == nm.theta.psi2);
  CHECK(tr.rounds_used == nm.evaluations);
  CHECK(tr.objective_trace == nm.trace);
  REQUIRE(tr.per_start.size() == 1);
  CHECK(tr.per_start[0].theta0.psi1 == theta0.psi1);
}

TEST_CASE("multistart_train keeps the best of several starts") {
  const Objective obj = log_bowl(std::log(1.5), std::log(200.0), std::log(2.0));
  TrainConfig cfg;
  cfg.t_max = 120;
  cfg.t_multi = 3;
  cfg.conv_tol = 1e-8;
  cfg.seed = 99;
  const TrainResult tr = multistart_train(obj, cfg);
  REQUIRE(tr.per_start.size() == 3);
  int evals = 0;
  for (const auto& s : tr.per_start) {
    CHECK(!s.failed);
    CHECK(tr.best_objective >= s.value);
    CHECK(s.evaluations <= cfg.t_max);
    evals += s.evaluations;
  }
  CHECK(tr.rounds_used == evals);
  CHECK(tr.rounds_used <= cfg.t_max * cfg.t_multi);

  // the reported best is the max over the winning start's trace
  double best_in_trace = -std::numeric_limits<double>::infinity();
  for (double v : tr.objective_trace) {
    if (std::isfinite(v)) {
      best_in_trace = std::max(best_in_trace, v);
    }
  }
  CHECK(tr.best_objective == best_in_trace);
}

TEST_CASE("multistart_train reports failure when every start fails") {
  Objective nan_obj = [](const Hyperparams&) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  TrainConfig cfg;
  cfg.t_max = 10;
  cfg.t_multi = 2;
  cfg.seed = 5;
  CHECK_THROWS_AS(multistart_train(nan_obj, cfg), TrainingFailedError);
}

TEST_CASE("noiseless training recovers the length scale within a factor two") {
  // likelihood surfaces over small samples are flat, so only coarse recovery
  // of the kernel scale is tested (median across worlds)
  const Hyperparams truth{4.0, 50.0, 0.1};
  Rng rng(777);
  std::vector<double> recovered;
  for (int world = 0; world < 20; ++world) {
    const ExpertPool pool = gp_sample_pool(rng, 64, 2, truth);
    const TrainingObjective obj =
        make_objective(pool, TrainingMode::ideal, {}, {}, 1234 + world);
    TrainConfig cfg;
    cfg.t_max = 300;
    cfg.t_multi = 2;
    cfg.seed = 4000 + world;
    const TrainResult tr = multistart_train(obj, cfg);
    recovered.push_back(tr.theta_opt.psi2);
  }
  std::sort(recovered.begin(), recovered.end());
  const double median = recovered[recovered.size() / 2];
  CHECK(median >= truth.psi2 / 2.0);
  CHECK(median <= truth.psi2 * 2.0);
}

TEST_CASE("ideal objective on one expert equals the full likelihood") {
  Rng rng(42);
  LocalDataset full = noisy_dataset(rng, 20, 2.0);
  ExpertPool pool;
  pool.n_in = 1;
  pool.experts = {full};
  const TrainingObjective obj = make_objective(pool, TrainingMode::ideal, {}, {}, 1);
  for (int rep = 0; rep < 20; ++rep) {
    Hyperparams th;
    th.psi1 = std::exp(rng.uniform(-1.0, 3.0));
    th.psi2 = std::exp(rng.uniform(0.0, 6.0));
    th.sigma_eps = std::exp(rng.uniform(-2.0, 1.0));
    CHECK(obj(th) == doctest::Approx(log_marginal_likelihood(full, th)).epsilon(1e-12));
  }
  CHECK(obj.rounds() == 0);  // no channel involved
  CHECK(obj.trace().size() == 20);
  CHECK(obj.trace()[3].decoded == obj.trace()[3].true_sum);
}

TEST_CASE("noiseless perfect-CSI objective equals the ideal one pointwise") {
  Rng rng(43);
  const ExpertPool pool = gp_sample_pool(rng, 48, 4, Hyperparams{2.0, 100.0, 0.5});
  const TrainingObjective ideal = make_objective(pool, TrainingMode::ideal, {}, {}, 7);

  ChannelParams cp;
  cp.gamma_bar = Vector::Constant(4, 1e-5);
  cp.sigma_z2 = 0.0;
  cp.p_max = 10.0;
  const TrainingObjective air =
      make_objective(pool, TrainingMode::aircomp_perfect, cp, {}, 7);

  for (int rep = 0; rep < 20; ++rep) {
    Hyperparams th;
    th.psi1 = std::exp(rng.uniform(-1.0, 3.0));
    th.psi2 = std::exp(rng.uniform(1.0, 6.0));
    th.sigma_eps = std::exp(rng.uniform(-2.0, 1.0));
    const double want = ideal(th);
    const double got = air(th);
    CHECK(std::abs(got - want) <= 1e-8 * std::max(1.0, std::abs(want)));
  }
  CHECK(air.rounds() == 20);
  CHECK(air.trace().back().rho > 0.0);
}

TEST_CASE("statistical-CSI objective is unbiased when truncation does not bind") {
  Rng rng(44);
  // outputs scaled so each local likelihood sits around -1300: far from both
  // truncation bounds, and large enough that 1% of the ideal value clears
  // the fading-induced standard error of the mean
  ExpertPool pool;
  pool.n_in = 1;
  for (int i = 0; i < 4; ++i) {
    pool.experts.push_back(noisy_dataset(rng, 32, 9.0));
  }
  const Hyperparams th{1.0, 100.0, 1.0};

  const TrainingObjective ideal = make_objective(pool, TrainingMode::ideal, {}, {}, 3);
  const double exact = ideal(th);
  for (const auto& rec : ideal.trace()) {
    CHECK(rec.true_sum > -5000.0 * 4.0);
  }

  ChannelParams cp;
  cp.gamma_bar = Vector::Constant(4, 1.0);  // 0 dB
  cp.sigma_z2 = 1e-9;
  cp.p_max = 10.0;
  PowerPolicy policy;
  policy.mode = CsiMode::statistical;
  policy.l_min = -5000.0;
  policy.l_max = 0.0;
  policy.c_unbias = unbias_constant(ChannelModel::rayleigh);
  const TrainingObjective air =
      make_objective(pool, TrainingMode::aircomp_statistical, cp, policy, 3);

  const int calls = 10000;
  double sum = 0.0;
  for (int c = 0; c < calls; ++c) {
    sum += air(th);
  }
  const double mean = sum / calls;
  CHECK(std::abs(mean - exact) < 0.01 * std::abs(exact));
  CHECK(air.power_control_count() == 1);  // rho held for the whole run
  CHECK(air.rounds() == calls);
}

TEST_CASE("statistical-CSI training uses one power-control evaluation") {
  Rng rng(45);
  const ExpertPool pool = gp_sample_pool(rng, 32, 4, Hyperparams{2.0, 100.0, 0.5});
  ChannelParams cp;
  cp.gamma_bar = Vector::Constant(4, 1e-5);
  cp.sigma_z2 = 1e-9;
  cp.p_max = 10.0;
  PowerPolicy policy;
  policy.mode = CsiMode::statistical;
  policy.l_min = -5000.0;
  policy.l_max = 0.0;
  policy.c_unbias = unbias_constant(ChannelModel::rayleigh);
  const TrainingObjective obj =
      make_objective(pool, TrainingMode::aircomp_statistical, cp, policy, 11);

  TrainConfig cfg;
  cfg.t_max = 60;
  cfg.t_multi = 3;
  cfg.seed = 2;
  const TrainResult tr = multistart_train(obj, cfg);
  CHECK(obj.power_control_count() == 1);
  CHECK(obj.rounds() == tr.rounds_used);
  CHECK(tr.rounds_used <= cfg.t_max * cfg.t_multi);
  CHECK(obj.rho() > 0.0);
}

TEST_CASE("aircomp training is reproducible from its seed") {
  Rng rng(46);
  const ExpertPool pool = gp_sample_pool(rng, 32, 4, Hyperparams{2.0, 80.0, 0.3});
  ChannelParams cp;
  cp.gamma_bar = Vector::Constant(4, 1e-5);
  cp.sigma_z2 = 1e-9;
  cp.p_max = 10.0;

  auto run = [&] {
    const TrainingObjective obj =
        make_objective(pool, TrainingMode::aircomp_perfect, cp, {}, 909);
    TrainConfig cfg;
    cfg.t_max = 80;
    cfg.t_multi = 2;
    cfg.seed = 17;
    return multistart_train(obj, cfg);
  };
  const TrainResult a = run();
  const TrainResult b = run();
  CHECK(a.best_objective == b.best_objective);
  CHECK(a.theta_opt.psi1 == b.theta_opt.psi1);
  CHECK(a.theta_opt.psi2 == b.theta_opt.psi2);
  CHECK(a.theta_opt.sigma_eps == b.theta_opt.sigma_eps);
  CHECK(a.objective_trace == b.objective_trace);
}

TEST_CASE("objective trace CSV has one row per round") {
  Rng rng(47);
  ExpertPool pool;
  pool.n_in = 1;
  pool.experts = {noisy_dataset(rng, 8, 1.0)};
  const TrainingObjective obj = make_objective(pool, TrainingMode::ideal, {}, {}, 0);
  obj(Hyperparams{1.0, 10.0, 0.1});
  obj(Hyperparams{2.0, 20.0, 0.2});
  std::ostringstream os;
  obj.write_trace_csv(os);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);  // header + 2 rows
  CHECK(text.rfind("round,psi1,psi2,sigma_eps", 0) == 0);
}

TEST_CASE("draw_initial_theta respects its ranges") {
  Rng rng(48);
  InitRanges ranges;
  for (int i = 0; i < 200; ++i) {
    const Hyperparams th = draw_initial_theta(rng, ranges);
    CHECK(th.psi1 >= ranges.psi1.first);
    CHECK(th.psi1 <= ranges.psi1.second);
    CHECK(th.psi2 >= ranges.psi2.first);
    CHECK(th.psi2 <= ranges.psi2.second);
    CHECK(th.sigma_eps >= ranges.sigma_eps.first);
    CHECK(th.sigma_eps <= ranges.sigma_eps.second);
  }
}
