#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "djfam/dsp/feature_config.hpp"

namespace djfam::dsp {

/// Fraction of adjacent sample pairs whose signs differ. Zero counts as
/// non-negative.
template <typename Derived>
typename Derived::Scalar zero_crossing_rate(const Eigen::MatrixBase<Derived>& frame) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = frame.size();
  if (n < 2) fail(ErrorCode::kInvalidArgument, "zero crossing rate needs at least two samples");
  Eigen::Index crossings = 0;
  bool prev_negative = frame(0) < Scalar(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    const bool negative = frame(i) < Scalar(0);
    crossings += negative != prev_negative;
    prev_negative = negative;
  }
  return Scalar(crossings) / Scalar(n - 1);
}

/// Periodic Hann window, w[n] = 0.5 - 0.5 cos(2 pi n / N).
template <typename Scalar>
Eigen::VectorX<Scalar> hann_window(Eigen::Index n) {
  Eigen::VectorX<Scalar> w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w[i] = Scalar(0.5) - Scalar(0.5) * std::cos(Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(i) / Scalar(n));
  }
  return w;
}

/// Frequency in Hz of every non-negative FFT bin.
template <typename Scalar>
Eigen::VectorX<Scalar> bin_frequencies(const FeatureConfig& cfg) {
  return Eigen::VectorX<Scalar>::LinSpaced(cfg.num_bins(), Scalar(0), Scalar(cfg.nyquist()));
}

/// Real-input FFT returning the N/2 + 1 non-negative frequency bins.
/// Holds plan state, so one instance per thread.
template <typename Scalar>
class RealFft {
 public:
  explicit RealFft(Eigen::Index n) : n_(n), out_(static_cast<std::size_t>(n / 2 + 1)) {
    fft_.SetFlag(Eigen::FFT<Scalar>::HalfSpectrum);
    fft_.SetFlag(Eigen::FFT<Scalar>::Unscaled);
  }

  template <typename Derived>
  void magnitudes(const Eigen::MatrixBase<Derived>& frame, Eigen::VectorX<Scalar>& mag) {
    eigen_assert(frame.size() == n_);
    buf_ = frame;
    fft_.fwd(out_.data(), buf_.data(), n_);
    mag.resize(n_ / 2 + 1);
    // sqrt(norm) rather than std::abs: hypot's overflow guard is slow and audio spectra cannot overflow.
    for (Eigen::Index k = 0; k <= n_ / 2; ++k) mag[k] = std::sqrt(std::norm(out_[static_cast<std::size_t>(k)]));
  }

 private:
  Eigen::Index n_;
  Eigen::FFT<Scalar> fft_;
  Eigen::VectorX<Scalar> buf_;
  std::vector<std::complex<Scalar>> out_;
};

template <typename Scalar>
struct SpectralDescriptors {
  Scalar centroid = 0;
  Scalar bandwidth = 0;
  Scalar rolloff = 0;
  Eigen::Matrix<Scalar, kNumContrastBands, 1> contrast = Eigen::Matrix<Scalar, kNumContrastBands, 1>::Zero();
};

/// Precomputed bin geometry for spectral descriptors of one FeatureConfig.
template <typename Scalar>
class SpectralAnalyzer {
 public:
  explicit SpectralAnalyzer(const FeatureConfig& cfg)
      : cfg_(cfg), freqs_(bin_frequencies<Scalar>(cfg)) {
    const auto edges = cfg.contrast_edges();
    const Eigen::Index bins = freqs_.size();
    Eigen::Index k = 0;
    for (int b = 0; b < kNumContrastBands; ++b) {
      const Eigen::Index begin = k;
      const bool last = b == kNumContrastBands - 1;
      while (k < bins && (last || freqs_[k] < Scalar(edges[b + 1]))) ++k;
      bands_[b] = {begin, k};
    }
  }

  /// Inclusive-exclusive bin range of contrast band `b`.
  std::pair<Eigen::Index, Eigen::Index> band(int b) const { return bands_[b]; }

  SpectralDescriptors<Scalar> operator()(const Eigen::VectorX<Scalar>& mag) const {
    SpectralDescriptors<Scalar> out;
    const Scalar total = mag.sum();
    if (!(total > Scalar(0))) return out;  // silence

    out.centroid = freqs_.dot(mag) / total;
    out.bandwidth = std::sqrt(((freqs_.array() - out.centroid).square() * mag.array()).sum() / total);

    const Scalar energy = mag.squaredNorm();
    const Scalar target = Scalar(cfg_.rolloff_fraction) * energy;
    Scalar cumulative = 0;
    for (Eigen::Index k = 0; k < mag.size(); ++k) {
      cumulative += mag[k] * mag[k];
      if (cumulative >= target) {
        out.rolloff = freqs_[k];
        break;
      }
    }

    const Scalar floor = Scalar(cfg_.log_floor);
    for (int b = 0; b < kNumContrastBands; ++b) {
      const auto [begin, end] = bands_[b];
      const Eigen::Index count = end - begin;
      if (count == 0) continue;
      const Eigen::Index q = std::max<Eigen::Index>(
          1, static_cast<Eigen::Index>(std::lround(cfg_.contrast_quantile * double(count))));
      scratch_.assign(mag.data() + begin, mag.data() + end);
      std::nth_element(scratch_.begin(), scratch_.begin() + (q - 1), scratch_.end());
      Scalar low = 0;
      for (Eigen::Index i = 0; i < q; ++i) low += scratch_[i];
      std::nth_element(scratch_.begin(), scratch_.end() - q, scratch_.end());
      Scalar high = 0;
      for (Eigen::Index i = count - q; i < count; ++i) high += scratch_[i];
      out.contrast[b] = std::log10((high / Scalar(q) + floor) / (low / Scalar(q) + floor));
    }
    return out;
  }

 private:
  FeatureConfig cfg_;
  Eigen::VectorX<Scalar> freqs_;
  std::array<std::pair<Eigen::Index, Eigen::Index>, kNumContrastBands> bands_{};
  mutable std::vector<Scalar> scratch_;
};

/// Centroid, bandwidth, roll-off and per-band contrast of one magnitude
/// spectrum. An all-zero spectrum yields all zeros.
template <typename Derived>
SpectralDescriptors<typename Derived::Scalar> spectral_descriptors(const Eigen::MatrixBase<Derived>& mag,
                                                                   const FeatureConfig& cfg) {
  using Scalar = typename Derived::Scalar;
  if (mag.size() != cfg.num_bins()) {
    fail(ErrorCode::kInvalidArgument, "magnitude spectrum must have frame_size/2 + 1 bins");
  }
  if ((mag.array() < Scalar(0)).any()) fail(ErrorCode::kInvalidArgument, "negative magnitude");
  const Eigen::VectorX<Scalar> m = mag;
  return SpectralAnalyzer<Scalar>(cfg)(m);
}

}  // namespace djfam::dsp
