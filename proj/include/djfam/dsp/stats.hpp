#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "djfam/common/error.hpp"
#include "djfam/dsp/feature_config.hpp"

namespace djfam::dsp {

template <typename Scalar>
using FrameFeatures = Eigen::Matrix<Scalar, kNumBaseFeatures, 1>;

/// One column of base features per analysis frame.
template <typename Scalar>
using FrameFeatureMatrix = Eigen::Matrix<Scalar, kNumBaseFeatures, Eigen::Dynamic>;

template <typename Scalar>
using FeatureValues = Eigen::Matrix<Scalar, kFeatureDims, 1>;

/// Per-song descriptor: [means | medians | population stds] of the 24 base
/// features. Only vectors with equal fingerprints are comparable.
template <typename Scalar>
struct FeatureVector {
  FeatureValues<Scalar> values = FeatureValues<Scalar>::Zero();
  std::string config_fingerprint;

  auto means() const { return values.template segment<kNumBaseFeatures>(layout::kMeanBlock); }
  auto medians() const { return values.template segment<kNumBaseFeatures>(layout::kMedianBlock); }
  auto stds() const { return values.template segment<kNumBaseFeatures>(layout::kStdBlock); }
};

using FeatureVectord = FeatureVector<double>;

/// Median; an even count averages the two middle values.
template <typename Scalar>
Scalar median(std::vector<Scalar> values) {
  if (values.empty()) fail(ErrorCode::kInvalidArgument, "median of empty set");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const Scalar upper = *mid;
  const Scalar lower = *std::max_element(values.begin(), mid);
  return lower + (upper - lower) / Scalar(2);
}

template <typename Scalar>
FeatureVector<Scalar> aggregate_stats(const FrameFeatureMatrix<Scalar>& frames, std::string fingerprint = {}) {
  const Eigen::Index n = frames.cols();
  if (n == 0) fail(ErrorCode::kInvalidArgument, "cannot aggregate zero frames");

  FeatureVector<Scalar> out;
  out.config_fingerprint = std::move(fingerprint);
  std::vector<Scalar> row(static_cast<std::size_t>(n));
  for (int d = 0; d < kNumBaseFeatures; ++d) {
    // Shifting by the first value keeps identical rows exact (std == 0).
    const Scalar shift = frames(d, 0);
    const auto deviations = (frames.row(d).array() - shift).eval();
    const Scalar offset = deviations.sum() / Scalar(n);
    const Scalar variance = (deviations - offset).square().sum() / Scalar(n);

    for (Eigen::Index i = 0; i < n; ++i) row[static_cast<std::size_t>(i)] = frames(d, i);
    out.values[layout::kMeanBlock + d] = shift + offset;
    out.values[layout::kMedianBlock + d] = median(row);
    out.values[layout::kStdBlock + d] = std::sqrt(variance);
  }
  return out;
}

}  // namespace djfam::dsp
