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

#include "airgp/aircomp_channel.hpp"

#include <cmath>
#include <limits>

namespace airgp {

namespace {

constexpr double kSqrtPiOver2 = 0.8862269254527580137;  // E[|h|], h ~ CN(0,1)

}  // namespace

void ChannelState::validate() const {
  if (gamma_bar.size() < 1 || h.size() != gamma_bar.size()) {
    throw std::invalid_argument("ChannelState: gain and fading sizes differ");
  }
  if (!gamma_bar.allFinite() || gamma_bar.minCoeff() < 0.0) {
    throw std::invalid_argument("ChannelState: gains must be finite and non-negative");
  }
  if (!h.allFinite()) {
    throw std::invalid_argument("ChannelState: non-finite fading");
  }
  // sigma_z2 = 0 is allowed: noiseless rounds are a supported limiting case
  if (!(sigma_z2 >= 0.0) || !std::isfinite(sigma_z2)) {
    throw std::invalid_argument("ChannelState: noise power must be >= 0");
  }
  if (!(p_max > 0.0) || !std::isfinite(p_max)) {
    throw std::invalid_argument("ChannelState: power budget must be positive");
  }
}

ChannelState sample_channel(const Vector& gamma_bar, double sigma_z2, double p_max,
                            Rng& rng) {
  ChannelState st;
  st.gamma_bar = gamma_bar;
  st.sigma_z2 = sigma_z2;
  st.p_max = p_max;
  st.h.resize(gamma_bar.size());
  for (Eigen::Index i = 0; i < gamma_bar.size(); ++i) {
    st.h[i] = rng.complex_gaussian();
  }
  st.validate();
  return st;
}

ChannelState sample_channel(int m, const Vector& gamma_bar, double sigma_z2,
                            double p_max, std::uint64_t seed) {
  if (m < 1 || gamma_bar.size() != m) {
    throw std::invalid_argument("sample_channel: need one gain per node, M >= 1");
  }
  Rng rng(seed);
  return sample_channel(gamma_bar, sigma_z2, p_max, rng);
}

double power_control_perfect(const ChannelState& channel,
                             const std::vector<double>& message_norms,
                             RoundMeta* meta) {
  channel.validate();
  if (message_norms.size() != static_cast<std::size_t>(channel.size())) {
    throw std::invalid_argument("power_control_perfect: one norm per node required");
  }
  const double sqrt_pmax = std::sqrt(channel.p_max);
  double sqrt_rho = std::numeric_limits<double>::infinity();
  for (int i = 0; i < channel.size(); ++i) {
    double norm = message_norms[static_cast<std::size_t>(i)];
    if (!(norm >= 0.0) || !std::isfinite(norm)) {
      throw std::invalid_argument("power_control_perfect: invalid message norm");
    }
    if (norm == 0.0) {
      // a silent node does not constrain the budget; keep it out of the min
      norm = std::numeric_limits<double>::epsilon();
      if (meta != nullptr) {
        ++meta->zero_norm_count;
      }
    }
    double mag = std::abs(channel.h[i]);
    if (mag < kDeepFadeFloor) {
      mag = kDeepFadeFloor;
      if (meta != nullptr) {
        ++meta->deep_fade_count;
      }
    }
    sqrt_rho = std::min(sqrt_rho, std::sqrt(channel.gamma_bar[i]) * mag * sqrt_pmax / norm);
  }
  const double rho = sqrt_rho * sqrt_rho;
  if (meta != nullptr) {
    meta->rho = rho;
  }
  return rho;
}

ComplexVector encode_perfect(const Vector& s, double rho, double gamma_bar_i,
                             std::complex<double> h_i) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("encode_perfect: invalid power scalar");
  }
  if (!(gamma_bar_i > 0.0)) {
    throw std::invalid_argument("encode_perfect: average gain must be positive");
  }
  if (std::abs(h_i) < kFadeInversionLimit) {
    throw DeepFadeError("encode_perfect: channel too deeply faded to invert");
  }
  const std::complex<double> c = std::sqrt(rho) / (std::sqrt(gamma_bar_i) * h_i);
  return c * s.cast<std::complex<double>>();
}

ComplexVector aircomp_round(const std::vector<ComplexVector>& encoded,
                            const ChannelState& channel, Rng& rng) {
  channel.validate();
  if (encoded.size() != static_cast<std::size_t>(channel.size())) {
    throw std::invalid_argument("aircomp_round: one message per node required");
  }
  const Eigen::Index len = encoded.front().size();
  for (const auto& x : encoded) {
    if (x.size() != len) {
      throw std::invalid_argument("aircomp_round: message lengths differ");
    }
  }

  ComplexVector y = ComplexVector::Zero(len);
  for (int i = 0; i < channel.size(); ++i) {
    y += std::sqrt(channel.gamma_bar[i]) * channel.h[i] *
         encoded[static_cast<std::size_t>(i)];
  }
  const double noise_scale = std::sqrt(channel.sigma_z2);
  for (Eigen::Index k = 0; k < len; ++k) {
    y[k] += noise_scale * rng.complex_gaussian();
  }
  return y;
}

ComplexVector aircomp_round(const std::vector<ComplexVector>& encoded,
                            const ChannelState& channel, std::uint64_t seed) {
  Rng rng(seed);
  return aircomp_round(encoded, channel, rng);
}

Vector decode_perfect(const ComplexVector& y, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("decode_perfect: power scalar must be positive");
  }
  return y.real() / std::sqrt(rho);
}

double truncate_center(double value, double l_min, double l_max) {
  if (!(l_min < l_max)) {
    throw std::invalid_argument("truncate_center: need l_min < l_max");
  }
  const double clamped = std::min(std::max(value, l_min), l_max);
  return clamped - 0.5 * (l_max + l_min);
}

double power_control_statistical(const Vector& gamma_bar, double p_max,
                                 double l_min, double l_max) {
  if (gamma_bar.size() < 1 || !gamma_bar.allFinite() || gamma_bar.minCoeff() <= 0.0) {
    throw std::invalid_argument("power_control_statistical: gains must be positive");
  }
  if (!(p_max > 0.0)) {
    throw std::invalid_argument("power_control_statistical: power budget must be positive");
  }
  if (!(l_min < l_max)) {
    throw std::invalid_argument("power_control_statistical: need l_min < l_max");
  }
  const double denom = std::abs(0.5 * (l_max + l_min));
  if (denom == 0.0) {
    throw std::invalid_argument(
        "power_control_statistical: truncation midpoint is zero, power is unbounded");
  }
  const double sqrt_rho =
      std::sqrt(gamma_bar.minCoeff()) * std::sqrt(p_max) / denom;
  return sqrt_rho * sqrt_rho;
}

ComplexVector encode_statistical(const Vector& s, double rho, double gamma_bar_i,
                                 std::complex<double> h_i) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("encode_statistical: invalid power scalar");
  }
  if (!(gamma_bar_i > 0.0)) {
    throw std::invalid_argument("encode_statistical: average gain must be positive");
  }
  const double mag = std::abs(h_i);
  // phase-only compensation; in a deep fade there is no phase to trust, so
  // fall back to unit phase (amplitude was never compensated in this mode)
  const std::complex<double> phase =
      mag < kFadeInversionLimit ? std::complex<double>(1.0, 0.0) : std::conj(h_i) / mag;
  const std::complex<double> c = std::sqrt(rho) / std::sqrt(gamma_bar_i) * phase;
  return c * s.cast<std::complex<double>>();
}

Vector decode_statistical(const ComplexVector& y, double rho, double c_unbias) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("decode_statistical: power scalar must be positive");
  }
  if (!(c_unbias > 0.0) || !std::isfinite(c_unbias)) {
    throw std::invalid_argument("decode_statistical: unbias constant must be positive");
  }
  return y.real() / (c_unbias * std::sqrt(rho));
}

double unbias_constant(ChannelModel model) {
  return model == ChannelModel::rayleigh ? kSqrtPiOver2 : 1.0;
}

PredictionResult aircomp_predict_round(const std::vector<LocalPrediction>& locals,
                                       const ChannelState& channel, std::uint64_t seed,
                                       PredictRoundMeta* meta) {
  channel.validate();
  if (locals.size() != static_cast<std::size_t>(channel.size())) {
    throw std::invalid_argument("aircomp_predict_round: one prediction per node required");
  }
  const Eigen::Index n = locals.front().mean.size();
  const int m = channel.size();

  // per-node messages: s0 = 1/sigma_i^2, s1 = mu_i/sigma_i^2
  std::vector<Vector> s0(static_cast<std::size_t>(m)), s1(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const auto& l = locals[static_cast<std::size_t>(i)];
    if (l.mean.size() != n || l.variance.size() != n) {
      throw std::invalid_argument("aircomp_predict_round: prediction lengths differ");
    }
    const Vector w = l.variance.cwiseMax(kVarianceFloor).cwiseInverse();
    s0[static_cast<std::size_t>(i)] = w;
    s1[static_cast<std::size_t>(i)] = w.cwiseProduct(l.mean);
  }

  Rng fading_rng(derive_seed(seed, 0xfade));
  Rng noise_rng(derive_seed(seed, 0x017e));

  auto run_round = [&](const std::vector<Vector>& msgs, RoundMeta* rm) -> Vector {
    ChannelState round_channel =
        sample_channel(channel.gamma_bar, channel.sigma_z2, channel.p_max, fading_rng);
    std::vector<double> norms(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      norms[static_cast<std::size_t>(i)] = msgs[static_cast<std::size_t>(i)].norm();
    }
    const double rho = power_control_perfect(round_channel, norms, rm);
    std::vector<ComplexVector> encoded(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      encoded[static_cast<std::size_t>(i)] =
          encode_perfect(msgs[static_cast<std::size_t>(i)], rho,
                         round_channel.gamma_bar[i], round_channel.h[i]);
      if (rm != nullptr) {
        rm->tx_power.push_back(encoded[static_cast<std::size_t>(i)].squaredNorm());
      }
    }
    const ComplexVector y = aircomp_round(encoded, round_channel, noise_rng);
    return decode_perfect(y, rho);
  };

  const Vector precision_sum =
      run_round(s0, meta != nullptr ? &meta->precision_round : nullptr);
  const Vector weighted_mean_sum =
      run_round(s1, meta != nullptr ? &meta->mean_round : nullptr);

  PredictionResult out;
  out.variance = precision_sum.cwiseMax(kPrecisionFloor).cwiseInverse();
  out.mean = out.variance.cwiseProduct(weighted_mean_sum);
  return out;
}

}  // namespace airgp
