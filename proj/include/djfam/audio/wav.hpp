#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace djfam::audio {

enum class SampleFormat { kPcm8, kPcm16, kPcm24, kFloat32 };

/// Decoded PCM WAV. `channels` holds one vector per channel, scaled to [-1, 1].
struct WavData {
  int sample_rate = 0;
  std::vector<Eigen::VectorXd> channels;

  Eigen::Index frames() const { return channels.empty() ? 0 : channels.front().size(); }
  /// Average of all channels.
  Eigen::VectorXd mono() const;
};

/// Parses RIFF/WAVE bytes. Accepts PCM 8/16/24-bit, IEEE float 32-bit and
/// their WAVE_FORMAT_EXTENSIBLE forms, with one or two channels.
WavData decode_wav(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

WavData read_wav(const std::filesystem::path& path);

/// Interleaves and encodes `channels` (samples clamped to [-1, 1]).
std::vector<std::uint8_t> encode_wav(const std::vector<Eigen::VectorXd>& channels, int sample_rate,
                                     SampleFormat format = SampleFormat::kPcm16);

void write_wav(const std::filesystem::path& path, const std::vector<Eigen::VectorXd>& channels, int sample_rate,
               SampleFormat format = SampleFormat::kPcm16);

}  // namespace djfam::audio
