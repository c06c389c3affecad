#pragma once

#include <Eigen/Core>
#include <complex>
#include <numbers>

#include "specmdp/errors.hpp"

namespace specmdp::detail {

inline bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 FFT, forward transform
/// X_j = sum_k x_k exp(-2 pi i j k / n). Power-of-two length only.
template <typename Scalar>
void fft_pow2(Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>& x) {
  const Eigen::Index n = x.size();
  if (!is_power_of_two(n)) throw ValidationError("fft_pow2: length not a power of two");

  // bit-reversal permutation
  for (Eigen::Index i = 1, j = 0; i < n; ++i) {
    Eigen::Index bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  for (Eigen::Index len = 2; len <= n; len <<= 1) {
    const Scalar ang = Scalar(-2) * std::numbers::pi_v<Scalar> / Scalar(len);
    const std::complex<Scalar> wlen(std::cos(ang), std::sin(ang));
    for (Eigen::Index i = 0; i < n; i += len) {
      std::complex<Scalar> w(1);
      for (Eigen::Index k = 0; k < len / 2; ++k) {
        const std::complex<Scalar> u = x[i + k];
        const std::complex<Scalar> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace specmdp::detail
