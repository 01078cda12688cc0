#pragma once

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "djfam/common/error.hpp"
#include "djfam/dsp/feature_config.hpp"

namespace djfam::dsp {

/// Mono audio, amplitudes in [-1, 1].
template <typename Scalar>
struct AudioClip {
  Eigen::VectorX<Scalar> samples;
  int sample_rate = 0;

  Eigen::Index size() const { return samples.size(); }
  double duration_s() const { return sample_rate > 0 ? double(samples.size()) / sample_rate : 0.0; }
};

using AudioClipd = AudioClip<double>;

template <typename Scalar>
void validate_clip(const AudioClip<Scalar>& clip, const FeatureConfig& cfg) {
  if (clip.sample_rate != cfg.sample_rate) {
    fail(ErrorCode::kInvalidArgument,
         "sample rate " + std::to_string(clip.sample_rate) + " does not match configured " +
             std::to_string(cfg.sample_rate));
  }
  if (clip.size() < cfg.frame_size) fail(ErrorCode::kInvalidArgument, "audio too short");
  for (Eigen::Index i = 0; i < clip.size(); ++i) {
    const Scalar x = clip.samples[i];
    if (!std::isfinite(x)) fail(ErrorCode::kInvalidArgument, "audio contains non-finite samples");
    if (x < Scalar(-1) || x > Scalar(1)) {
      fail(ErrorCode::kInvalidArgument, "audio sample outside [-1, 1]");
    }
  }
}

}  // namespace djfam::dsp
