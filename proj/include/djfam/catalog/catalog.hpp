#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "djfam/catalog/record_store.hpp"
#include "djfam/dsp/feature_config.hpp"
#include "djfam/dsp/stats.hpp"
#include "json.hpp"

namespace djfam::catalog {

using SongId = std::string;
using UserId = std::string;

/// Descriptive fields supplied with each ingested song.
struct SongMetadata {
  std::optional<SongId> song_id;  // explicit id; derived from content when absent
  std::string title;
  std::string artist;
  int release_year = 0;
  std::string genre;
  std::string lyrics;
  int popularity_rank = 1;
  std::optional<SongId> cover_of;
  std::string album_art_ref;
};

struct Song {
  SongId id;
  SongMetadata meta;
  double duration_s = 0;
  std::string audio_path;
  std::string content_key;
  dsp::FeatureVectord features;
};

struct SongSummary {
  SongId song_id;
  std::string title;
  std::string artist;
  int release_year = 0;
  std::string genre;
  double duration_s = 0;
  std::string album_art_ref;
};

struct Playlist {
  UserId user_id;
  std::vector<SongId> song_ids;
};

struct MusicInfo {
  SongSummary song;
  std::string lyrics_excerpt;
  bool lyrics_truncated = false;  // client shows "Read More"
  std::optional<std::string> full_lyrics;
  std::optional<SongSummary> source_song;
  std::vector<SongSummary> other_hits;
  std::vector<SongSummary> covers;
  std::optional<SongSummary> original;
};

inline constexpr int kLyricsExcerptLines = 4;
inline constexpr std::size_t kMaxOtherHits = 3;

struct CatalogOptions {
  dsp::FeatureConfig features;
  std::size_t playlist_cap = 100;
};

/// Decoded, featurized song waiting to be committed. Produced without
/// touching catalog state so it can run on worker threads.
struct PreparedSong {
  Song song;
};

/// Identity of an ingestion request: hash of the audio bytes plus the
/// canonical metadata.
std::string content_key(std::span<const std::uint8_t> audio_bytes, const SongMetadata& meta);

/// Reads, downmixes, resamples and featurizes one audio file.
PreparedSong prepare_song(const std::filesystem::path& audio_path, const SongMetadata& meta,
                          const dsp::FeatureConfig& cfg);

/// As above, for file contents already in memory.
PreparedSong prepare_song(std::span<const std::uint8_t> bytes, const std::filesystem::path& audio_path,
                          const SongMetadata& meta, const dsp::FeatureConfig& cfg);

SongMetadata metadata_from_manifest(const nlohmann::json& entry);

struct IngestResult {
  SongId song_id;
  bool created = false;
};

/// Songs, feature vectors, playlists and cover relations. Mutations are
/// serialized; readers share a lock and see a consistent snapshot.
class Catalog {
 public:
  Catalog(std::unique_ptr<RecordStore> store, CatalogOptions options = {});

  const CatalogOptions& options() const { return options_; }

  IngestResult ingest_song(const std::filesystem::path& audio_path, const SongMetadata& meta);
  IngestResult commit(PreparedSong prepared);
  /// Id of an already-ingested song with this content key, if any.
  std::optional<SongId> find_by_content_key(const std::string& key) const;

  Playlist set_playlist(const UserId& user, const std::vector<SongId>& song_ids);
  Playlist playlist(const UserId& user) const;
  /// Bumped whenever the user's playlist is replaced.
  std::uint64_t playlist_version(const UserId& user) const;

  bool contains(const SongId& id) const;
  Song song(const SongId& id) const;
  SongSummary summary(const SongId& id) const;
  std::vector<SongId> song_ids() const;
  std::size_t size() const;

  MusicInfo music_info(const SongId& id, const std::optional<SongId>& source = std::nullopt,
                       bool full_lyrics = false) const;

  /// Rewrites the log as a snapshot of live state.
  void compact();

 private:
  void replay(const Record& r);
  const Song& require(const SongId& id) const;
  SongSummary summary_locked(const Song& s) const;
  void maybe_compact_locked();
  void compact_locked();

  std::unique_ptr<RecordStore> store_;
  CatalogOptions options_;
  mutable std::shared_mutex mu_;
  std::map<SongId, Song> songs_;
  std::map<std::string, SongId> by_content_key_;
  std::map<UserId, Playlist> playlists_;
  std::map<UserId, std::uint64_t> playlist_versions_;
  std::size_t log_records_ = 0;
};

void to_json(nlohmann::json& j, const SongSummary& s);
void to_json(nlohmann::json& j, const MusicInfo& m);
void to_json(nlohmann::json& j, const Playlist& p);

}  // namespace djfam::catalog
