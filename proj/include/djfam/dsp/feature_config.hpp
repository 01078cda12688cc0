#pragma once

#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include "djfam/common/error.hpp"
#include "djfam/common/hash.hpp"

namespace djfam::dsp {

inline constexpr int kNumMfcc = 13;
inline constexpr int kNumContrastBands = 7;
/// zcr, centroid, bandwidth, rolloff, 7 contrast bands, 13 MFCCs.
inline constexpr int kNumBaseFeatures = 4 + kNumContrastBands + kNumMfcc;
/// Means, medians and population standard deviations of the base features.
inline constexpr int kFeatureDims = 3 * kNumBaseFeatures;

/// Offsets of the base features inside one frame's feature column.
namespace layout {
inline constexpr int kZcr = 0;
inline constexpr int kCentroid = 1;
inline constexpr int kBandwidth = 2;
inline constexpr int kRolloff = 3;
inline constexpr int kContrast = 4;
inline constexpr int kMfcc = kContrast + kNumContrastBands;

/// Offsets of the three statistic blocks inside a FeatureVector.
inline constexpr int kMeanBlock = 0;
inline constexpr int kMedianBlock = kNumBaseFeatures;
inline constexpr int kStdBlock = 2 * kNumBaseFeatures;
}  // namespace layout

/// Short-time analysis parameters. The window is always a periodic Hann
/// window. Contrast bands are octaves from 200 Hz up to 6400 Hz, plus a
/// bottom band from 0 Hz and a top band ending at Nyquist.
struct FeatureConfig {
  int sample_rate = 22050;
  int frame_size = 2048;
  int hop = 512;
  int n_mels = 26;
  double rolloff_fraction = 0.85;
  double contrast_quantile = 0.02;
  double log_floor = 1e-10;

  int num_bins() const { return frame_size / 2 + 1; }
  double bin_hz() const { return static_cast<double>(sample_rate) / frame_size; }
  double nyquist() const { return sample_rate / 2.0; }

  std::array<double, kNumContrastBands + 1> contrast_edges() const {
    return {0.0, 200.0, 400.0, 800.0, 1600.0, 3200.0, 6400.0, nyquist()};
  }

  void validate() const {
    auto bad = [](const std::string& what) {
      fail(ErrorCode::kInvalidArgument, "invalid feature config: " + what);
    };
    if (frame_size < 2 || (frame_size & (frame_size - 1)) != 0) bad("frame_size must be a power of two");
    if (hop <= 0 || hop > frame_size) bad("hop must satisfy 0 < hop <= frame_size");
    if (!(rolloff_fraction > 0.0 && rolloff_fraction < 1.0)) bad("rolloff_fraction must be in (0, 1)");
    if (n_mels < kNumMfcc) bad("n_mels must be at least the number of MFCCs");
    if (!(contrast_quantile > 0.0 && contrast_quantile < 0.5)) bad("contrast_quantile must be in (0, 0.5)");
    if (!(log_floor > 0.0)) bad("log_floor must be positive");
    if (nyquist() <= 6400.0) bad("sample_rate too low for the top contrast band");
    if (bin_hz() >= 200.0) bad("frame_size too small to resolve the contrast bands");
  }

  /// Stable identity of every parameter that shapes a FeatureVector.
  std::string fingerprint() const {
    std::ostringstream os;
    os.precision(17);
    os << "hann;sr=" << sample_rate << ";n=" << frame_size << ";hop=" << hop << ";mels=" << n_mels
       << ";mfcc=" << kNumMfcc << ";rolloff=" << rolloff_fraction << ";q=" << contrast_quantile
       << ";floor=" << log_floor << ";bands=" << kNumContrastBands;
    Fnv1a h;
    h.update(os.str());
    return h.hex();
  }
};

}  // namespace djfam::dsp
