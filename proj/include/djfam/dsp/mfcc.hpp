#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "djfam/dsp/feature_config.hpp"

namespace djfam::dsp {

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Triangular HTK-mel filters, equally spaced in mel from 0 Hz to Nyquist.
/// Rows are filters, columns are FFT bins.
template <typename Scalar>
Eigen::MatrixX<Scalar> mel_filterbank(const FeatureConfig& cfg) {
  const int bins = cfg.num_bins();
  const double top = hz_to_mel(cfg.nyquist());
  Eigen::VectorXd edges(cfg.n_mels + 2);
  for (int i = 0; i < edges.size(); ++i) edges[i] = mel_to_hz(top * i / (cfg.n_mels + 1));

  Eigen::MatrixX<Scalar> fb = Eigen::MatrixX<Scalar>::Zero(cfg.n_mels, bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = k * cfg.bin_hz();
      if (f > lo && f <= mid) {
        fb(m, k) = Scalar((f - lo) / (mid - lo));
      } else if (f > mid && f < hi) {
        fb(m, k) = Scalar((hi - f) / (hi - mid));
      }
    }
  }
  return fb;
}

/// First `rows` rows of the orthonormal DCT-II matrix of size `n`.
template <typename Scalar>
Eigen::MatrixX<Scalar> dct2_matrix(int rows, int n) {
  Eigen::MatrixX<Scalar> d(rows, n);
  for (int k = 0; k < rows; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i) {
      d(k, i) = Scalar(scale * std::cos(std::numbers::pi * k * (2 * i + 1) / (2.0 * n)));
    }
  }
  return d;
}

/// Power spectrum -> mel energies -> floored natural log -> DCT-II.
template <typename Scalar>
class MfccTransform {
 public:
  using Coefficients = Eigen::Matrix<Scalar, kNumMfcc, 1>;

  explicit MfccTransform(const FeatureConfig& cfg)
      : filters_(mel_filterbank<Scalar>(cfg)),
        dct_(dct2_matrix<Scalar>(kNumMfcc, cfg.n_mels)),
        floor_(Scalar(cfg.log_floor)) {}

  template <typename Derived>
  Coefficients operator()(const Eigen::MatrixBase<Derived>& power) const {
    energies_.noalias() = filters_ * power;
    energies_ = energies_.array().max(floor_).log();
    return dct_ * energies_;
  }

  const Eigen::MatrixX<Scalar>& filters() const { return filters_; }

 private:
  Eigen::MatrixX<Scalar> filters_;
  Eigen::MatrixX<Scalar> dct_;
  Scalar floor_;
  mutable Eigen::VectorX<Scalar> energies_;
};

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, kNumMfcc, 1> mfcc(const Eigen::MatrixBase<Derived>& power,
                                                          const FeatureConfig& cfg) {
  using Scalar = typename Derived::Scalar;
  if (power.size() != cfg.num_bins()) {
    fail(ErrorCode::kInvalidArgument, "power spectrum must have frame_size/2 + 1 bins");
  }
  return MfccTransform<Scalar>(cfg)(power);
}

}  // namespace djfam::dsp
