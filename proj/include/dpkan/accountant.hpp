// Copyright 2026 The dpkan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Renyi-DP accounting for T compositions of the Poisson-subsampled Gaussian
// mechanism, conversion to (epsilon, delta), and noise calibration.
//
// For sampling rate q and noise multiplier sigma the order-alpha RDP of one
// step is log(A_alpha) / (alpha - 1) with
//   A_alpha = E_{z ~ N(0, sigma^2)} [((1 - q) + q * exp((2z - 1) / (2 sigma^2)))^alpha].
// Integer orders use the exact binomial expansion; fractional orders use the
// two-sided erfc series. All sums run in log space.

#ifndef DPKAN_ACCOUNTANT_HPP
#define DPKAN_ACCOUNTANT_HPP

#include <cstdint>
#include <vector>

namespace dpkan {

struct MechanismParams {
  double noise_multiplier = 1.0;
  double sampling_rate = 1.0;
  std::int64_t steps = 0;
};

struct PrivacySpend {
  double epsilon = 0.0;
  double delta = 0.0;
  double optimal_order = 0.0;  // arg-min order of the conversion
};

/// {1.25, 1.5, ..., 64} in steps of 0.25, then every integer 65..512.
const std::vector<double>& default_orders();

/// RDP of `params.steps` compositions at every order.
std::vector<double> rdp_subsampled_gaussian(const MechanismParams& params,
                                            const std::vector<double>& orders);

/// Single-step log(A_alpha); exposed for tests.
double log_a_subsampled_gaussian(double q, double sigma, double alpha);

enum class DpConversion {
  /// epsilon = rdp + log(1/delta) / (alpha - 1).
  kClassic,
  /// epsilon = rdp + log((alpha - 1) / alpha) - (log(delta) + log(alpha)) / (alpha - 1)
  /// (Balle et al., 2020). Never larger than kClassic for alpha > 1.
  kTight,
};

/// epsilon minimized over the order grid.
PrivacySpend rdp_to_dp(const std::vector<double>& rdp, const std::vector<double>& orders,
                       double delta, DpConversion conversion = DpConversion::kClassic);

/// q = B/N, T = epochs * ceil(N/B), default order grid, kTight conversion.
PrivacySpend compute_epsilon(double noise_multiplier, std::int64_t batch_size,
                             std::int64_t dataset_size, std::int64_t epochs, double delta);

/// Same accounting for an explicit step count (kTight conversion).
PrivacySpend compute_epsilon_steps(double noise_multiplier, double sampling_rate,
                                   std::int64_t steps, double delta);

inline constexpr double kSigmaSearchLo = 1e-2;
inline constexpr double kSigmaSearchHi = 1e3;

/// Sigma in [kSigmaSearchLo, kSigmaSearchHi] whose epsilon matches
/// `target_epsilon` to 1e-4 relative, found by bisection on log(sigma).
/// Throws InfeasibleError when the target lies outside what the search range
/// can reach.
double calibrate_sigma(double target_epsilon, double delta, std::int64_t batch_size,
                       std::int64_t dataset_size, std::int64_t epochs);

}  // namespace dpkan

#endif  // DPKAN_ACCOUNTANT_HPP
