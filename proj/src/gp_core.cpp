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

#include "airgp/gp_core.hpp"

#include <cmath>
#include <sstream>

namespace airgp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void require_finite(const Matrix& m, const char* name) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(name) + " contains non-finite values");
  }
}

}  // namespace

void Hyperparams::validate() const {
  if (!(psi1 > 0.0) || !std::isfinite(psi1)) {
    throw std::invalid_argument("psi1 must be positive and finite");
  }
  if (!(psi2 > 0.0) || !std::isfinite(psi2)) {
    throw std::invalid_argument("psi2 must be positive and finite");
  }
  if (!(sigma_eps >= 0.0) || !std::isfinite(sigma_eps)) {
    throw std::invalid_argument("sigma_eps must be non-negative and finite");
  }
}

void LocalDataset::validate() const {
  if (inputs.rows() == 0) {
    throw std::invalid_argument("dataset is empty");
  }
  if (outputs.size() != inputs.rows() || prior_mean.size() != inputs.rows()) {
    std::ostringstream msg;
    msg << "dataset shape mismatch: " << inputs.rows() << " inputs, "
        << outputs.size() << " outputs, " << prior_mean.size() << " prior means";
    throw std::invalid_argument(msg.str());
  }
  require_finite(inputs, "inputs");
  require_finite(outputs, "outputs");
  require_finite(prior_mean, "prior_mean");
}

double kernel_eval(const Vector& xi, const Vector& xj, const Hyperparams& psi) {
  psi.validate();
  if (xi.size() != xj.size()) {
    throw std::invalid_argument("kernel_eval: input dimensions differ");
  }
  if (!xi.allFinite() || !xj.allFinite()) {
    throw std::invalid_argument("kernel_eval: non-finite input");
  }
  return psi.psi1 * std::exp(-(xi - xj).norm() / psi.psi2);
}

Matrix distance_matrix(const Matrix& x) {
  require_finite(x, "inputs");
  const Eigen::Index n = x.rows();
  Matrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double dij = (x.row(i) - x.row(j)).norm();
      d(i, j) = dij;
      d(j, i) = dij;
    }
  }
  return d;
}

Matrix cross_distance_matrix(const Matrix& x, const Matrix& z) {
  require_finite(x, "inputs");
  require_finite(z, "inputs");
  if (x.cols() != z.cols()) {
    throw std::invalid_argument("cross_distance_matrix: input dimensions differ");
  }
  Matrix d(x.rows(), z.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.rows(); ++j) {
      d(i, j) = (x.row(i) - z.row(j)).norm();
    }
  }
  return d;
}

Matrix kernel_from_distances(const Matrix& dist, const Hyperparams& psi) {
  psi.validate();
  return psi.psi1 * (-dist / psi.psi2).array().exp();
}

Matrix kernel_matrix(const Matrix& x, const Hyperparams& psi) {
  return kernel_from_distances(distance_matrix(x), psi);
}

Matrix kernel_cross(const Matrix& x, const Matrix& z, const Hyperparams& psi) {
  return kernel_from_distances(cross_distance_matrix(x, z), psi);
}

PsdFactor::PsdFactor(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("PsdFactor: matrix is not square");
  }
  require_finite(a, "matrix");

  llt_.compute(a);
  if (llt_.info() == Eigen::Success) {
    return;
  }

  double scale = a.diagonal().mean();
  if (!(scale > 0.0)) {
    scale = 1.0;
  }
  const double max_jitter = 1e-4 * scale;
  double jitter = 1e-10 * scale;
  while (jitter <= max_jitter * (1.0 + 1e-12)) {
    Matrix aj = a;
    aj.diagonal().array() += jitter;
    llt_.compute(aj);
    if (llt_.info() == Eigen::Success) {
      jitter_ = jitter;
      return;
    }
    jitter *= 10.0;
  }

  std::ostringstream msg;
  msg << "matrix factorization failed with diagonal jitter up to " << max_jitter;
  throw SingularMatrixError(msg.str(), max_jitter);
}

Vector PsdFactor::solve(const Vector& b) const { return llt_.solve(b); }

Matrix PsdFactor::solve(const Matrix& b) const { return llt_.solve(b); }

double PsdFactor::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Matrix PsdFactor::matrix_l() const { return llt_.matrixL(); }

Vector psd_solve(const Matrix& a, const Vector& b) {
  if (a.rows() != b.size()) {
    throw std::invalid_argument("psd_solve: shape mismatch");
  }
  return PsdFactor(a).solve(b);
}

Matrix psd_solve(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("psd_solve: shape mismatch");
  }
  return PsdFactor(a).solve(b);
}

double log_marginal_likelihood_from_distances(const Matrix& dist,
                                              const Vector& outputs,
                                              const Vector& prior_mean,
                                              const Hyperparams& theta) {
  theta.validate();
  const Eigen::Index n = outputs.size();
  Matrix c = kernel_from_distances(dist, theta);
  c.diagonal().array() += theta.sigma_eps * theta.sigma_eps;
  const PsdFactor factor(c);
  const Vector r = outputs - prior_mean;
  return -0.5 * r.dot(factor.solve(r)) - 0.5 * factor.log_det() -
         0.5 * static_cast<double>(n) * kLog2Pi;
}

double log_marginal_likelihood(const LocalDataset& data, const Hyperparams& theta) {
  data.validate();
  return log_marginal_likelihood_from_distances(distance_matrix(data.inputs),
                                                data.outputs, data.prior_mean, theta);
}

PredictionResult gpr_predict(const LocalDataset& data, const Hyperparams& theta,
                             const Vector& prior_at_test, const Matrix& x_test) {
  data.validate();
  theta.validate();
  require_finite(x_test, "test inputs");
  if (x_test.cols() != data.inputs.cols()) {
    throw std::invalid_argument("gpr_predict: test input dimension differs from data");
  }
  if (prior_at_test.size() != x_test.rows()) {
    throw std::invalid_argument("gpr_predict: prior_at_test size differs from test inputs");
  }

  Matrix c = kernel_matrix(data.inputs, theta);
  c.diagonal().array() += theta.sigma_eps * theta.sigma_eps;
  const PsdFactor factor(c);

  const Matrix k_star = kernel_cross(data.inputs, x_test, theta);  // N x n_test
  const Vector residual = data.outputs - data.prior_mean;
  const Vector alpha = factor.solve(residual);
  const Matrix v = factor.solve(k_star);

  PredictionResult out;
  out.mean = prior_at_test + k_star.transpose() * alpha;
  const Eigen::ArrayXd quad = (k_star.array() * v.array()).colwise().sum().transpose();
  out.variance = (theta.psi1 - quad).max(0.0).matrix();
  return out;
}

}  // namespace airgp
