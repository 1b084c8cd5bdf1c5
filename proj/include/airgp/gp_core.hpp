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

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace airgp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Exponential-kernel GP hyperparameters. psi2 is a length scale in input
// units, sigma_eps the observation noise standard deviation.
struct Hyperparams {
  double psi1 = 1.0;
  double psi2 = 1.0;
  double sigma_eps = 0.0;

  void validate() const;  // throws std::invalid_argument
};

// One node's regression data: inputs are rows, prior_mean holds the known
// (caller-supplied) mean function evaluated at the inputs.
struct LocalDataset {
  Matrix inputs;      // N x n_in
  Vector outputs;     // N
  Vector prior_mean;  // N

  Eigen::Index size() const { return outputs.size(); }
  void validate() const;
};

struct PredictionResult {
  Vector mean;
  Vector variance;
};

// Thrown when a kernel Gram matrix cannot be factorized even after the
// jitter ladder has been exhausted; carries the largest jitter attempted.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, double attempted_jitter)
      : std::runtime_error(what), jitter_(attempted_jitter) {}

  double attempted_jitter() const { return jitter_; }

 private:
  double jitter_;
};

// Cholesky factorization of a symmetric positive (semi-)definite matrix.
// If the plain factorization fails, a diagonal jitter of 1e-10 * mean(diag)
// is added and escalated by factors of 10 up to 1e-4 * mean(diag) before
// giving up with SingularMatrixError.
class PsdFactor {
 public:
  explicit PsdFactor(const Matrix& a);

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;
  double log_det() const;
  Matrix matrix_l() const;                   // lower-triangular factor
  double jitter() const { return jitter_; }  // 0 when no jitter was needed

 private:
  Eigen::LLT<Matrix> llt_;
  double jitter_ = 0.0;
};

double kernel_eval(const Vector& xi, const Vector& xj, const Hyperparams& psi);
Matrix kernel_matrix(const Matrix& x, const Hyperparams& psi);
Matrix kernel_cross(const Matrix& x, const Matrix& z, const Hyperparams& psi);

// Pairwise-distance path: training loops evaluate the likelihood many times
// on a fixed dataset, so the distance matrix is worth computing once.
Matrix distance_matrix(const Matrix& x);
Matrix cross_distance_matrix(const Matrix& x, const Matrix& z);
Matrix kernel_from_distances(const Matrix& dist, const Hyperparams& psi);

Vector psd_solve(const Matrix& a, const Vector& b);
Matrix psd_solve(const Matrix& a, const Matrix& b);

double log_marginal_likelihood(const LocalDataset& data, const Hyperparams& theta);
double log_marginal_likelihood_from_distances(const Matrix& dist,
                                              const Vector& outputs,
                                              const Vector& prior_mean,
                                              const Hyperparams& theta);

// Posterior mean and variance at the test inputs; prior_at_test supplies the
// mean function there. Variances are clamped at zero from below.
PredictionResult gpr_predict(const LocalDataset& data, const Hyperparams& theta,
                             const Vector& prior_at_test, const Matrix& x_test);

}  // namespace airgp
