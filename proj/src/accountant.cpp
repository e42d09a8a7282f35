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

#include "dpkan/accountant.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dpkan/error.hpp"

namespace dpkan {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log(exp(a) - exp(b)) for a >= b.
double log_sub(double a, double b) {
  if (b == kNegInf) return a;
  if (a <= b) return kNegInf;
  const double d = a - b;
  if (d > 700.0) return a;
  return std::log(std::expm1(d)) + b;
}

double log_erfc(double x) {
  if (x < 25.0) return std::log(std::erfc(x));
  // Asymptotic expansion; erfc underflows past x ~ 26.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / (2.0 * x2) + 3.0 / (4.0 * x2 * x2) - 15.0 / (8.0 * x2 * x2 * x2);
  return -x2 - std::log(x) - 0.5 * std::log(std::numbers::pi) + std::log(series);
}

double log_a_integer(double q, double sigma, long alpha) {
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double lg_alpha = std::lgamma(static_cast<double>(alpha) + 1.0);
  double log_a = kNegInf;
  for (long i = 0; i <= alpha; ++i) {
    const double di = static_cast<double>(i);
    const double log_coef = lg_alpha - std::lgamma(di + 1.0) -
                            std::lgamma(static_cast<double>(alpha - i) + 1.0);
    const double s = log_coef + di * log_q + static_cast<double>(alpha - i) * log_1mq +
                     (di * di - di) / (2.0 * sigma * sigma);
    log_a = log_add(log_a, s);
  }
  return log_a;
}

double log_a_fractional(double q, double sigma, double alpha) {
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double z0 = sigma * sigma * std::log(1.0 / q - 1.0) + 0.5;
  const double root2_sigma = std::sqrt(2.0) * sigma;
  double log_a0 = kNegInf;
  double log_a1 = kNegInf;
  double log_abs_coef = 0.0;  // log |binom(alpha, i)|
  bool coef_positive = true;
  for (int i = 0; i < 100000; ++i) {
    const double di = static_cast<double>(i);
    const double j = alpha - di;
    const double log_t0 = log_abs_coef + di * log_q + j * log_1mq;
    const double log_t1 = log_abs_coef + j * log_q + di * log_1mq;
    const double log_e0 = std::log(0.5) + log_erfc((di - z0) / root2_sigma);
    const double log_e1 = std::log(0.5) + log_erfc((z0 - j) / root2_sigma);
    const double log_s0 = log_t0 + (di * di - di) / (2.0 * sigma * sigma) + log_e0;
    const double log_s1 = log_t1 + (j * j - j) / (2.0 * sigma * sigma) + log_e1;
    if (coef_positive) {
      log_a0 = log_add(log_a0, log_s0);
      log_a1 = log_add(log_a1, log_s1);
    } else {
      log_a0 = log_sub(log_a0, log_s0);
      log_a1 = log_sub(log_a1, log_s1);
    }
    if (std::max(log_s0, log_s1) < -30.0) break;
    // binom(alpha, i + 1) = binom(alpha, i) * (alpha - i) / (i + 1)
    const double ratio = (alpha - di) / (di + 1.0);
    log_abs_coef += std::log(std::abs(ratio));
    if (ratio < 0.0) coef_positive = !coef_positive;
  }
  return log_add(log_a0, log_a1);
}

void check_mechanism(double q, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ArgumentError("accountant: noise multiplier must be positive");
  }
  if (!(q > 0.0 && q <= 1.0)) throw ArgumentError("accountant: sampling rate must lie in (0, 1]");
}

}  // namespace

const std::vector<double>& default_orders() {
  static const std::vector<double> orders = [] {
    std::vector<double> o;
    for (int k = 5; k <= 256; ++k) o.push_back(0.25 * k);  // 1.25 .. 64
    for (int a = 65; a <= 512; ++a) o.push_back(static_cast<double>(a));
    return o;
  }();
  return orders;
}

double log_a_subsampled_gaussian(double q, double sigma, double alpha) {
  check_mechanism(q, sigma);
  if (!(alpha > 1.0)) throw ArgumentError("accountant: RDP orders must exceed 1");
  if (q == 1.0) return alpha * (alpha - 1.0) / (2.0 * sigma * sigma);
  if (alpha == std::floor(alpha)) return log_a_integer(q, sigma, static_cast<long>(alpha));
  return log_a_fractional(q, sigma, alpha);
}

std::vector<double> rdp_subsampled_gaussian(const MechanismParams& params,
                                            const std::vector<double>& orders) {
  check_mechanism(params.sampling_rate, params.noise_multiplier);
  if (params.steps < 0) throw ArgumentError("accountant: step count must be nonnegative");
  std::vector<double> rdp;
  rdp.reserve(orders.size());
  for (double alpha : orders) {
    if (!(alpha > 1.0)) throw ArgumentError("accountant: RDP orders must exceed 1");
    if (params.steps == 0) {
      rdp.push_back(0.0);
      continue;
    }
    const double single =
        log_a_subsampled_gaussian(params.sampling_rate, params.noise_multiplier, alpha) /
        (alpha - 1.0);
    rdp.push_back(static_cast<double>(params.steps) * single);
  }
  return rdp;
}

PrivacySpend rdp_to_dp(const std::vector<double>& rdp, const std::vector<double>& orders,
                       double delta, DpConversion conversion) {
  if (rdp.empty() || orders.empty()) throw ArgumentError("rdp_to_dp: empty order grid");
  if (rdp.size() != orders.size()) throw ArgumentError("rdp_to_dp: length mismatch");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("rdp_to_dp: delta must lie in (0, 1)");
  PrivacySpend best{std::numeric_limits<double>::infinity(), delta, 0.0};
  const double log_inv_delta = std::log(1.0 / delta);
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (!(orders[i] > 1.0)) throw ArgumentError("rdp_to_dp: orders must exceed 1");
    const double a = orders[i];
    const double eps = conversion == DpConversion::kClassic
                           ? rdp[i] + log_inv_delta / (a - 1.0)
                           : rdp[i] + std::log1p(-1.0 / a) +
                                 (log_inv_delta - std::log(a)) / (a - 1.0);
    if (eps < best.epsilon) {
      best.epsilon = eps;
      best.optimal_order = orders[i];
    }
  }
  best.epsilon = std::max(best.epsilon, 0.0);
  return best;
}

PrivacySpend compute_epsilon_steps(double noise_multiplier, double sampling_rate,
                                   std::int64_t steps, double delta) {
  const auto& orders = default_orders();
  return rdp_to_dp(rdp_subsampled_gaussian({noise_multiplier, sampling_rate, steps}, orders),
                   orders, delta, DpConversion::kTight);
}

PrivacySpend compute_epsilon(double noise_multiplier, std::int64_t batch_size,
                             std::int64_t dataset_size, std::int64_t epochs, double delta) {
  if (batch_size < 1 || dataset_size < 1 || batch_size > dataset_size) {
    throw ArgumentError("compute_epsilon: need 1 <= batch_size <= dataset_size");
  }
  if (epochs < 0) throw ArgumentError("compute_epsilon: epochs must be nonnegative");
  const double q = static_cast<double>(batch_size) / static_cast<double>(dataset_size);
  const std::int64_t steps_per_epoch = (dataset_size + batch_size - 1) / batch_size;
  return compute_epsilon_steps(noise_multiplier, q, epochs * steps_per_epoch, delta);
}

double calibrate_sigma(double target_epsilon, double delta, std::int64_t batch_size,
                       std::int64_t dataset_size, std::int64_t epochs) {
  if (!(target_epsilon > 0.0)) throw ArgumentError("calibrate_sigma: target must be positive");
  auto eps_at = [&](double sigma) {
    return compute_epsilon(sigma, batch_size, dataset_size, epochs, delta).epsilon;
  };
  const double eps_floor = eps_at(kSigmaSearchHi);
  const double eps_ceiling = eps_at(kSigmaSearchLo);
  if (target_epsilon < eps_floor) {
    throw InfeasibleError("calibrate_sigma: target epsilon " + std::to_string(target_epsilon) +
                          " is below the reachable floor " + std::to_string(eps_floor));
  }
  if (target_epsilon > eps_ceiling) {
    throw InfeasibleError("calibrate_sigma: target epsilon " + std::to_string(target_epsilon) +
                          " exceeds epsilon at the smallest searched sigma (" +
                          std::to_string(eps_ceiling) + ")");
  }
  // epsilon is decreasing in sigma; bisect on log(sigma).
  double lo = std::log(kSigmaSearchLo);
  double hi = std::log(kSigmaSearchHi);
  double best = kSigmaSearchHi;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double sigma = std::exp(mid);
    const double eps = eps_at(sigma);
    if (std::abs(eps - target_epsilon) / target_epsilon < 1e-4) return sigma;
    if (eps > target_epsilon) {
      lo = mid;
    } else {
      hi = mid;
      best = sigma;
    }
  }
  return best;
}

}  // namespace dpkan
