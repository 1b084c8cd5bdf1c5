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
#include <vector>

#include "airgp/gp_core.hpp"

namespace airgp {

// Floor applied to local predictive variances before forming precision
// weights: noise-free experts report exactly zero variance at their own
// training points, which would otherwise produce infinite weights.
inline constexpr double kVarianceFloor = 1e-12;

enum class PartitionStrategy { random, spatial_blocks };

// Disjoint per-node datasets covering one full training set.
struct ExpertPool {
  std::vector<LocalDataset> experts;
  Eigen::Index n_in = 0;

  std::size_t size() const { return experts.size(); }
  Eigen::Index total_points() const;
};

struct LocalPrediction {
  Vector mean;
  Vector variance;
};

// Splits a dataset into M disjoint near-equal parts; `random` shuffles before
// cutting, `spatial_blocks` sorts by the first input coordinate and cuts
// contiguous blocks. Any remainder lands on the last expert.
ExpertPool partition_dataset(const LocalDataset& full, int m,
                             PartitionStrategy strategy, std::uint64_t seed);

double local_likelihood(const LocalDataset& expert, const Hyperparams& theta);

LocalPrediction local_predict(const LocalDataset& expert, const Hyperparams& theta,
                              const Vector& prior_at_test, const Matrix& x_test);

// Precision-weighted product-of-experts fusion across local predictions.
PredictionResult poe_fuse(const std::vector<LocalPrediction>& locals);

// Error-free distributed prediction: local_predict per expert, then fusion.
PredictionResult ideal_dgpr_predict(const ExpertPool& pool, const Hyperparams& theta,
                                    const std::vector<Vector>& priors_at_test,
                                    const Matrix& x_test);

}  // namespace airgp
