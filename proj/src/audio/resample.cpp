#include "djfam/audio/resample.hpp"

#include <cmath>

#include "djfam/common/error.hpp"

namespace djfam::audio {

Eigen::VectorXd resample_linear(const Eigen::VectorXd& input, int from_rate, int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) fail(ErrorCode::kInvalidArgument, "sample rates must be positive");
  if (from_rate == to_rate || input.size() == 0) return input;

  const Eigen::Index n = input.size();
  const auto out_len = static_cast<Eigen::Index>((n - 1) * static_cast<long double>(to_rate) / from_rate) + 1;
  Eigen::VectorXd out(out_len);
  for (Eigen::Index i = 0; i < out_len; ++i) {
    // Exact integer position avoids drift over long inputs.
    const long long num = static_cast<long long>(i) * from_rate;
    const Eigen::Index left = static_cast<Eigen::Index>(num / to_rate);
    const double frac = double(num % to_rate) / to_rate;
    out[i] = left + 1 < n ? input[left] + frac * (input[left + 1] - input[left]) : input[left];
  }
  return out;
}

}  // namespace djfam::audio
