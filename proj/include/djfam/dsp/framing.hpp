#pragma once

#include <Eigen/Core>

#include "djfam/dsp/audio_clip.hpp"
#include "djfam/dsp/feature_config.hpp"

namespace djfam::dsp {

/// Number of full frames in `n` samples; the trailing partial frame is dropped.
inline Eigen::Index frame_count(Eigen::Index n, const FeatureConfig& cfg) {
  if (n < cfg.frame_size) return 0;
  return (n - cfg.frame_size) / cfg.hop + 1;
}

/// Non-owning view of the overlapping frames of a clip. Frame `i` starts at
/// sample `i * hop`.
template <typename Scalar>
class FrameSequence {
 public:
  using FrameMap = Eigen::Map<const Eigen::VectorX<Scalar>>;

  FrameSequence(const Eigen::VectorX<Scalar>& samples, const FeatureConfig& cfg)
      : samples_(&samples),
        frame_size_(cfg.frame_size),
        hop_(cfg.hop),
        count_(frame_count(samples.size(), cfg)) {}

  Eigen::Index size() const { return count_; }
  Eigen::Index frame_size() const { return frame_size_; }
  Eigen::Index offset(Eigen::Index i) const { return i * hop_; }

  FrameMap operator[](Eigen::Index i) const {
    return FrameMap(samples_->data() + offset(i), frame_size_);
  }

 private:
  const Eigen::VectorX<Scalar>* samples_;
  Eigen::Index frame_size_;
  Eigen::Index hop_;
  Eigen::Index count_;
};

template <typename Scalar>
FrameSequence<Scalar> frame_signal(const AudioClip<Scalar>& clip, const FeatureConfig& cfg) {
  validate_clip(clip, cfg);
  return FrameSequence<Scalar>(clip.samples, cfg);
}

}  // namespace djfam::dsp
