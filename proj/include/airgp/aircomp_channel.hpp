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

#include <complex>
#include <cstdint>
#include <vector>

#include "airgp/gp_core.hpp"
#include "airgp/poe_expert.hpp"
#include "airgp/random.hpp"

namespace airgp {

using ComplexVector = Eigen::VectorXcd;

// |h| below this is treated as a deep fade inside power control, where the
// min over nodes would otherwise drive the power scalar to zero and stall a
// whole training run on one bad draw.
inline constexpr double kDeepFadeFloor = 1e-6;

// |h| below this cannot be inverted at all; encoding raises / substitutes.
inline constexpr double kFadeInversionLimit = 1e-12;

// Floor on decoded precision sums before inversion at the fusion step.
inline constexpr double kPrecisionFloor = 1e-12;

enum class CsiMode { perfect, statistical };
enum class ChannelModel { rayleigh, awgn };

// One multiple-access channel realization: average gains, instantaneous
// fading, noise power, and the per-node transmit power budget. All powers
// are linear (mW), not dB.
struct ChannelState {
  Vector gamma_bar;          // average channel power gains, one per node
  ComplexVector h;           // instantaneous fading, CN(0,1) per node
  double sigma_z2 = 0.0;     // total complex noise variance per element
  double p_max = 1.0;

  int size() const { return static_cast<int>(gamma_bar.size()); }
  void validate() const;
};

struct PowerPolicy {
  double rho = 0.0;
  CsiMode mode = CsiMode::perfect;
  double l_min = 0.0;
  double l_max = 0.0;
  double c_unbias = 1.0;
};

// Diagnostics for one superposition round.
struct RoundMeta {
  double rho = 0.0;
  std::vector<double> tx_power;  // ||x_i||^2 per node, filled by callers that encode
  int deep_fade_count = 0;       // |h_i| floored during power control
  int zero_norm_count = 0;       // zero-length messages excluded from the min
};

class DeepFadeError : public std::runtime_error {
 public:
  explicit DeepFadeError(const std::string& what) : std::runtime_error(what) {}
};

ChannelState sample_channel(int m, const Vector& gamma_bar, double sigma_z2,
                            double p_max, std::uint64_t seed);
ChannelState sample_channel(const Vector& gamma_bar, double sigma_z2, double p_max,
                            Rng& rng);

// Full-inversion power control: sqrt(rho) = min_i sqrt(gamma_i)|h_i|sqrt(Pmax)/||s_i||.
double power_control_perfect(const ChannelState& channel,
                             const std::vector<double>& message_norms,
                             RoundMeta* meta = nullptr);

ComplexVector encode_perfect(const Vector& s, double rho, double gamma_bar_i,
                             std::complex<double> h_i);

// Superposition with additive circular complex noise of total variance
// sigma_z2 per element; nodes are summed in index order.
ComplexVector aircomp_round(const std::vector<ComplexVector>& encoded,
                            const ChannelState& channel, std::uint64_t seed);
ComplexVector aircomp_round(const std::vector<ComplexVector>& encoded,
                            const ChannelState& channel, Rng& rng);

Vector decode_perfect(const ComplexVector& y, double rho);

double truncate_center(double value, double l_min, double l_max);

// Statistical-CSI power control, computed once per training run and held.
double power_control_statistical(const Vector& gamma_bar, double p_max,
                                 double l_min, double l_max);

// Phase-only compensation; the received per-node term is |h_i| * sqrt(rho) * s_i.
ComplexVector encode_statistical(const Vector& s, double rho, double gamma_bar_i,
                                 std::complex<double> h_i);

Vector decode_statistical(const ComplexVector& y, double rho, double c_unbias);

double unbias_constant(ChannelModel model);

struct PredictRoundMeta {
  RoundMeta precision_round;  // carries sum of 1/variance
  RoundMeta mean_round;       // carries sum of mean/variance
};

// Two sequential perfect-CSI rounds aggregating per-node precision vectors
// and precision-weighted means, fused to the product-of-experts posterior at
// the receiver. Fading and noise for both rounds derive from `seed`; the
// fading stored in `channel` is not reused.
PredictionResult aircomp_predict_round(const std::vector<LocalPrediction>& locals,
                                       const ChannelState& channel, std::uint64_t seed,
                                       PredictRoundMeta* meta = nullptr);

}  // namespace airgp
