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

// Dense linear algebra aliases and the seedable random source shared by every
// other module.

#ifndef DPKAN_NUMERICS_HPP
#define DPKAN_NUMERICS_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "dpkan/error.hpp"

namespace dpkan {

using Index = Eigen::Index;

template <typename Scalar>
using DenseMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = DenseMatrix<double>;
using Vector = DenseVector<double>;

template <typename Derived>
std::string shape_string(const Eigen::EigenBase<Derived>& m) {
  return "(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
}

/// Matrix product with an explicit shape check.
template <typename DerivedA, typename DerivedB>
DenseMatrix<typename DerivedA::Scalar> matmul(const Eigen::MatrixBase<DerivedA>& a,
                                              const Eigen::MatrixBase<DerivedB>& b) {
  static_assert(std::is_same_v<typename DerivedA::Scalar, typename DerivedB::Scalar>,
                "matmul operands must share a scalar type");
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: cannot multiply " + shape_string(a) + " by " +
                     shape_string(b));
  }
  return a * b;
}

template <typename Derived>
typename Derived::Scalar l2_norm(const Eigen::MatrixBase<Derived>& v) {
  return v.norm();
}

/// Named, independent random streams derived from one root seed.
enum class Stream : std::uint64_t {
  kInit = 1,
  kShuffle = 2,
  kNoise = 3,
  kSampling = 4,
  kData = 5,
  kSplit = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// One deterministic random stream. Every distribution is implemented here
/// from raw 64-bit words so sequences do not depend on the standard library's
/// implementation-defined distributions.
class Generator {
 public:
  explicit Generator(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ArgumentError("Generator::below: empty range");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal draw by the Box-Muller transform; the second value of
  /// each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Root seed plus one independent Generator per Stream.
class RngState {
 public:
  explicit RngState(std::uint64_t seed)
      : seed_(seed),
        streams_{make(Stream::kInit), make(Stream::kShuffle), make(Stream::kNoise),
                 make(Stream::kSampling), make(Stream::kData), make(Stream::kSplit)} {}

  std::uint64_t seed() const { return seed_; }

  Generator& stream(Stream s) { return streams_[static_cast<std::size_t>(s) - 1]; }

  static std::uint64_t derive_seed(std::uint64_t root, Stream s) {
    return splitmix64(root ^ splitmix64(static_cast<std::uint64_t>(s)));
  }

 private:
  Generator make(Stream s) const { return Generator(derive_seed(seed_, s)); }

  std::uint64_t seed_;
  std::array<Generator, 6> streams_;
};

/// n i.i.d. draws from N(0, stddev^2).
template <typename Scalar = double>
DenseVector<Scalar> gaussian_sample(Generator& rng, Index n, Scalar stddev) {
  if (!(stddev >= Scalar(0))) {
    throw ArgumentError("gaussian_sample: standard deviation must be nonnegative");
  }
  DenseVector<Scalar> out(n);
  if (stddev == Scalar(0)) {
    out.setZero();
    return out;
  }
  for (Index i = 0; i < n; ++i) out[i] = stddev * static_cast<Scalar>(rng.normal());
  return out;
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace dpkan

#endif  // DPKAN_NUMERICS_HPP
