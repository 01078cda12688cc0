#include "djfam/audio/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "djfam/common/error.hpp"

namespace djfam::audio {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

[[noreturn]] void unsupported(const std::string& why) {
  fail(ErrorCode::kInvalidArgument, "unsupported audio: " + why);
}

std::uint32_t le32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}
std::uint16_t le16(const std::uint8_t* p) { return std::uint16_t(p[0] | p[1] << 8); }

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}
void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(std::uint8_t(v));
  out.push_back(std::uint8_t(v >> 8));
}
void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

double decode_sample(const std::uint8_t* p, SampleFormat fmt) {
  switch (fmt) {
    case SampleFormat::kPcm8:
      return (double(p[0]) - 128.0) / 128.0;
    case SampleFormat::kPcm16:
      return double(static_cast<std::int16_t>(le16(p))) / 32768.0;
    case SampleFormat::kPcm24: {
      std::int32_t v = std::int32_t(p[0]) | std::int32_t(p[1]) << 8 | std::int32_t(p[2]) << 16;
      if (v & 0x800000) v |= ~0xFFFFFF;
      return double(v) / 8388608.0;
    }
    case SampleFormat::kFloat32: {
      float f;
      const std::uint32_t bits = le32(p);
      std::memcpy(&f, &bits, sizeof f);
      return double(f);
    }
  }
  return 0.0;
}

int bytes_per_sample(SampleFormat fmt) {
  switch (fmt) {
    case SampleFormat::kPcm8: return 1;
    case SampleFormat::kPcm16: return 2;
    case SampleFormat::kPcm24: return 3;
    case SampleFormat::kFloat32: return 4;
  }
  return 0;
}

}  // namespace

Eigen::VectorXd WavData::mono() const {
  if (channels.empty()) return {};
  Eigen::VectorXd sum = channels.front();
  for (std::size_t c = 1; c < channels.size(); ++c) sum += channels[c];
  if (channels.size() > 1) sum /= double(channels.size());
  return sum;
}

WavData decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    unsupported("not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  SampleFormat fmt = SampleFormat::kPcm16;
  int channels = 0;
  int sample_rate = 0;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = std::min<std::size_t>(size, bytes.size() - body);

    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (available < 16) unsupported("truncated fmt chunk");
      const std::uint8_t* f = bytes.data() + body;
      std::uint16_t tag = le16(f);
      channels = le16(f + 2);
      sample_rate = static_cast<int>(le32(f + 4));
      const int bits = le16(f + 14);
      if (tag == kFormatExtensible) {
        if (available < 40) unsupported("truncated extensible fmt chunk");
        tag = le16(f + 24);  // first two bytes of the sub-format GUID
      }
      if (tag == kFormatPcm && bits == 8) {
        fmt = SampleFormat::kPcm8;
      } else if (tag == kFormatPcm && bits == 16) {
        fmt = SampleFormat::kPcm16;
      } else if (tag == kFormatPcm && bits == 24) {
        fmt = SampleFormat::kPcm24;
      } else if (tag == kFormatFloat && bits == 32) {
        fmt = SampleFormat::kFloat32;
      } else {
        unsupported("codec tag " + std::to_string(tag) + " with " + std::to_string(bits) + " bits");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.subspan(body, available);
      have_data = true;
    }
    pos = body + size + (size & 1);
  }

  if (!have_fmt) unsupported("missing fmt chunk");
  if (!have_data) unsupported("missing data chunk");
  if (channels < 1 || channels > 2) unsupported(std::to_string(channels) + " channels");
  if (sample_rate <= 0) unsupported("non-positive sample rate");

  const int width = bytes_per_sample(fmt);
  const std::size_t frame_bytes = std::size_t(width) * channels;
  const auto frames = static_cast<Eigen::Index>(data.size() / frame_bytes);

  WavData out;
  out.sample_rate = sample_rate;
  out.channels.assign(static_cast<std::size_t>(channels), Eigen::VectorXd(frames));
  for (Eigen::Index i = 0; i < frames; ++i) {
    const std::uint8_t* p = data.data() + std::size_t(i) * frame_bytes;
    for (int c = 0; c < channels; ++c) {
      double v = decode_sample(p + std::size_t(c) * width, fmt);
      if (!std::isfinite(v)) unsupported("non-finite float sample");
      out.channels[static_cast<std::size_t>(c)][i] = std::clamp(v, -1.0, 1.0);
    }
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

WavData read_wav(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_wav(bytes);
}

std::vector<std::uint8_t> encode_wav(const std::vector<Eigen::VectorXd>& channels, int sample_rate,
                                     SampleFormat format) {
  if (channels.empty()) fail(ErrorCode::kInvalidArgument, "no channels to encode");
  const int width = bytes_per_sample(format);
  const Eigen::Index frames = channels.front().size();
  const auto n_ch = static_cast<std::uint16_t>(channels.size());
  const std::uint32_t data_bytes = std::uint32_t(frames) * n_ch * std::uint32_t(width);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, 16);
  put16(out, format == SampleFormat::kFloat32 ? kFormatFloat : kFormatPcm);
  put16(out, n_ch);
  put32(out, std::uint32_t(sample_rate));
  put32(out, std::uint32_t(sample_rate) * n_ch * std::uint32_t(width));
  put16(out, static_cast<std::uint16_t>(n_ch * width));
  put16(out, static_cast<std::uint16_t>(8 * width));
  put_tag(out, "data");
  put32(out, data_bytes);

  for (Eigen::Index i = 0; i < frames; ++i) {
    for (const auto& ch : channels) {
      const double v = std::clamp(ch[i], -1.0, 1.0);
      switch (format) {
        case SampleFormat::kPcm8:
          out.push_back(static_cast<std::uint8_t>(std::clamp(std::lround(v * 128.0) + 128, 0L, 255L)));
          break;
        case SampleFormat::kPcm16:
          put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(std::lround(v * 32768.0), -32768L, 32767L))));
          break;
        case SampleFormat::kPcm24: {
          const auto s = static_cast<std::int32_t>(std::clamp(std::lround(v * 8388608.0), -8388608L, 8388607L));
          for (int b = 0; b < 3; ++b) out.push_back(std::uint8_t(s >> (8 * b)));
          break;
        }
        case SampleFormat::kFloat32: {
          const float f = static_cast<float>(v);
          std::uint32_t bits;
          std::memcpy(&bits, &f, sizeof bits);
          put32(out, bits);
          break;
        }
      }
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const std::vector<Eigen::VectorXd>& channels, int sample_rate,
               SampleFormat format) {
  const auto bytes = encode_wav(channels, sample_rate, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "short write to " + path.string());
}

}  // namespace djfam::audio
