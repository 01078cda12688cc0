#pragma once

#include <Eigen/Core>

#include "djfam/dsp/audio_clip.hpp"
#include "djfam/dsp/feature_config.hpp"
#include "djfam/dsp/framing.hpp"
#include "djfam/dsp/mfcc.hpp"
#include "djfam/dsp/spectral.hpp"
#include "djfam/dsp/stats.hpp"

namespace djfam::dsp {

/// Computes the 24 base features of single frames for a fixed config.
/// Not thread-safe; use one instance per thread.
template <typename Scalar>
class FrameAnalyzer {
 public:
  explicit FrameAnalyzer(const FeatureConfig& cfg)
      : window_(hann_window<Scalar>(cfg.frame_size)),
        fft_(cfg.frame_size),
        spectral_(cfg),
        mfcc_(cfg) {
    cfg.validate();
  }

  template <typename Derived>
  FrameFeatures<Scalar> operator()(const Eigen::MatrixBase<Derived>& frame) {
    FrameFeatures<Scalar> out;
    out[layout::kZcr] = zero_crossing_rate(frame);

    windowed_ = frame.cwiseProduct(window_);
    fft_.magnitudes(windowed_, mag_);
    const auto d = spectral_(mag_);
    out[layout::kCentroid] = d.centroid;
    out[layout::kBandwidth] = d.bandwidth;
    out[layout::kRolloff] = d.rolloff;
    out.template segment<kNumContrastBands>(layout::kContrast) = d.contrast;

    power_ = mag_.array().square();
    out.template segment<kNumMfcc>(layout::kMfcc) = mfcc_(power_);
    return out;
  }

 private:
  Eigen::VectorX<Scalar> window_;
  RealFft<Scalar> fft_;
  SpectralAnalyzer<Scalar> spectral_;
  MfccTransform<Scalar> mfcc_;
  Eigen::VectorX<Scalar> windowed_, mag_, power_;
};

/// Per-frame base features of a whole clip, one column per frame.
template <typename Scalar>
FrameFeatureMatrix<Scalar> frame_features(const AudioClip<Scalar>& clip, const FeatureConfig& cfg) {
  const auto frames = frame_signal(clip, cfg);
  FrameAnalyzer<Scalar> analyze(cfg);
  FrameFeatureMatrix<Scalar> out(kNumBaseFeatures, frames.size());
  for (Eigen::Index i = 0; i < frames.size(); ++i) out.col(i) = analyze(frames[i]);
  return out;
}

/// Full-track feature vector. Pure function of (samples, cfg).
template <typename Scalar>
FeatureVector<Scalar> featurize(const AudioClip<Scalar>& clip, const FeatureConfig& cfg) {
  return aggregate_stats<Scalar>(frame_features(clip, cfg), cfg.fingerprint());
}

}  // namespace djfam::dsp
