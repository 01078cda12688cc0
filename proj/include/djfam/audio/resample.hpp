#pragma once

#include <Eigen/Core>

namespace djfam::audio {

/// Linear-interpolation resampling. Output sample i sits at input position
/// i * from_rate / to_rate; the output stops at the last input sample.
Eigen::VectorXd resample_linear(const Eigen::VectorXd& input, int from_rate, int to_rate);

}  // namespace djfam::audio
