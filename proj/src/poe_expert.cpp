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

#include "airgp/poe_expert.hpp"

#include <algorithm>
#include <numeric>

#include "airgp/random.hpp"

namespace airgp {

Eigen::Index ExpertPool::total_points() const {
  Eigen::Index n = 0;
  for (const auto& e : experts) {
    n += e.size();
  }
  return n;
}

ExpertPool partition_dataset(const LocalDataset& full, int m,
                             PartitionStrategy strategy, std::uint64_t seed) {
  full.validate();
  const Eigen::Index n = full.size();
  if (m < 1) {
    throw std::invalid_argument("partition_dataset: M must be at least 1");
  }
  if (n < m) {
    throw std::invalid_argument("partition_dataset: fewer points than experts");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (strategy == PartitionStrategy::random) {
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng.engine());
  } else {
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return full.inputs(a, 0) < full.inputs(b, 0);
    });
  }

  ExpertPool pool;
  pool.n_in = full.inputs.cols();
  pool.experts.reserve(static_cast<std::size_t>(m));
  const Eigen::Index base = n / m;  // remainder goes to the last expert
  Eigen::Index start = 0;
  for (int i = 0; i < m; ++i) {
    const Eigen::Index count = (i == m - 1) ? n - start : base;
    LocalDataset part;
    part.inputs.resize(count, full.inputs.cols());
    part.outputs.resize(count);
    part.prior_mean.resize(count);
    for (Eigen::Index r = 0; r < count; ++r) {
      const Eigen::Index src = order[static_cast<std::size_t>(start + r)];
      part.inputs.row(r) = full.inputs.row(src);
      part.outputs[r] = full.outputs[src];
      part.prior_mean[r] = full.prior_mean[src];
    }
    pool.experts.push_back(std::move(part));
    start += count;
  }
  return pool;
}

double local_likelihood(const LocalDataset& expert, const Hyperparams& theta) {
  return log_marginal_likelihood(expert, theta);
}

LocalPrediction local_predict(const LocalDataset& expert, const Hyperparams& theta,
                              const Vector& prior_at_test, const Matrix& x_test) {
  const PredictionResult r = gpr_predict(expert, theta, prior_at_test, x_test);
  LocalPrediction out;
  out.mean = r.mean;
  out.variance = r.variance.cwiseMax(kVarianceFloor);
  return out;
}

PredictionResult poe_fuse(const std::vector<LocalPrediction>& locals) {
  if (locals.empty()) {
    throw std::invalid_argument("poe_fuse: no local predictions");
  }
  const Eigen::Index n = locals.front().mean.size();
  for (const auto& l : locals) {
    if (l.mean.size() != n || l.variance.size() != n) {
      throw std::invalid_argument("poe_fuse: local prediction lengths differ");
    }
  }

  if (locals.size() == 1) {  // identity; avoids double-inversion round-off
    return {locals[0].mean, locals[0].variance.cwiseMax(kVarianceFloor)};
  }

  Vector precision = Vector::Zero(n);
  Vector weighted_mean = Vector::Zero(n);
  for (const auto& l : locals) {  // fixed expert order keeps sums reproducible
    const Vector w = l.variance.cwiseMax(kVarianceFloor).cwiseInverse();
    precision += w;
    weighted_mean += w.cwiseProduct(l.mean);
  }

  PredictionResult out;
  out.variance = precision.cwiseInverse();
  out.mean = out.variance.cwiseProduct(weighted_mean);
  return out;
}

PredictionResult ideal_dgpr_predict(const ExpertPool& pool, const Hyperparams& theta,
                                    const std::vector<Vector>& priors_at_test,
                                    const Matrix& x_test) {
  if (pool.experts.empty()) {
    throw std::invalid_argument("ideal_dgpr_predict: empty pool");
  }
  if (priors_at_test.size() != pool.experts.size()) {
    throw std::invalid_argument("ideal_dgpr_predict: one prior vector per expert required");
  }
  std::vector<LocalPrediction> locals;
  locals.reserve(pool.experts.size());
  for (std::size_t i = 0; i < pool.experts.size(); ++i) {
    locals.push_back(local_predict(pool.experts[i], theta, priors_at_test[i], x_test));
  }
  return poe_fuse(locals);
}

}  // namespace airgp
