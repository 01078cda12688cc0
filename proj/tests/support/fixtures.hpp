#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "djfam/audio/wav.hpp"
#include "djfam/catalog/catalog.hpp"
#include "djfam/common/time.hpp"
#include "signals.hpp"

namespace djfam::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("djfam-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Settable clock shared by reference with the code under test.
class ManualClock {
 public:
  explicit ManualClock(TimestampMs start = 1'700'000'000'000) : now_(start) {}
  Clock clock() {
    return [this] { return now_.load(); };
  }
  TimestampMs now() const { return now_.load(); }
  void set(TimestampMs t) { now_ = t; }
  void advance(TimestampMs ms) { now_ += ms; }

 private:
  std::atomic<TimestampMs> now_;
};

inline std::filesystem::path write_clip(const std::filesystem::path& path, const dsp::AudioClipd& clip,
                                        audio::SampleFormat format = audio::SampleFormat::kFloat32) {
  audio::write_wav(path, {clip.samples}, clip.sample_rate, format);
  return path;
}

inline catalog::SongMetadata song_meta(const std::string& id, const std::string& artist = "Artist",
                                       int year = 1990) {
  catalog::SongMetadata m;
  m.song_id = id;
  m.title = "Title " + id;
  m.artist = artist;
  m.release_year = year;
  m.genre = "pop";
  m.lyrics = "line one\nline two\nline three\nline four\nline five";
  return m;
}

/// Writes and ingests `count` synthetic songs with ids prefix-0..N-1 and
/// returns the ids.
inline std::vector<catalog::SongId> ingest_synthetic(catalog::Catalog& catalog, const TempDir& dir,
                                                     const std::string& prefix, int count, std::uint64_t seed,
                                                     double seconds = 1.0, int year = 1990) {
  std::vector<catalog::SongId> ids;
  for (int i = 0; i < count; ++i) {
    const std::string id = prefix + "-" + std::to_string(i);
    const auto path = write_clip(dir / (id + ".wav"), synthetic_song(seed + static_cast<std::uint64_t>(i), seconds));
    ids.push_back(catalog.ingest_song(path, song_meta(id, prefix + " artist " + std::to_string(i % 7), year)).song_id);
  }
  return ids;
}

}  // namespace djfam::test
