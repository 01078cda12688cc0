#include "djfam/catalog/catalog.hpp"

#include <algorithm>
#include <mutex>
#include <set>
#include <sstream>

#include "djfam/audio/resample.hpp"
#include "djfam/audio/wav.hpp"
#include "djfam/common/error.hpp"
#include "djfam/common/hash.hpp"
#include "djfam/dsp/featurize.hpp"

namespace djfam::catalog {

using nlohmann::json;

namespace {

json metadata_json(const SongMetadata& m) {
  json j = {{"title", m.title},     {"artist", m.artist},   {"release_year", m.release_year},
            {"genre", m.genre},     {"lyrics", m.lyrics},   {"popularity_rank", m.popularity_rank},
            {"album_art_ref", m.album_art_ref}};
  if (m.song_id) j["song_id"] = *m.song_id;
  if (m.cover_of) j["cover_of"] = *m.cover_of;
  return j;
}

SongMetadata metadata_from_json(const json& j) {
  SongMetadata m;
  if (j.contains("song_id") && !j["song_id"].is_null()) m.song_id = j["song_id"].get<std::string>();
  m.title = j.value("title", "");
  m.artist = j.value("artist", "");
  m.release_year = j.value("release_year", 0);
  m.genre = j.value("genre", "");
  m.lyrics = j.value("lyrics", "");
  m.popularity_rank = j.value("popularity_rank", 1);
  if (j.contains("cover_of") && !j["cover_of"].is_null()) m.cover_of = j["cover_of"].get<std::string>();
  m.album_art_ref = j.value("album_art_ref", "");
  return m;
}

json song_record(const Song& s) {
  std::vector<double> values(s.features.values.data(), s.features.values.data() + dsp::kFeatureDims);
  return {{"type", "song"},
          {"id", s.id},
          {"meta", metadata_json(s.meta)},
          {"duration_s", s.duration_s},
          {"audio_path", s.audio_path},
          {"content_key", s.content_key},
          {"features", values},
          {"fingerprint", s.features.config_fingerprint}};
}

Song song_from_record(const json& r) {
  Song s;
  s.id = r.at("id").get<std::string>();
  s.meta = metadata_from_json(r.at("meta"));
  s.duration_s = r.at("duration_s").get<double>();
  s.audio_path = r.at("audio_path").get<std::string>();
  s.content_key = r.at("content_key").get<std::string>();
  const auto values = r.at("features").get<std::vector<double>>();
  if (values.size() != dsp::kFeatureDims) fail(ErrorCode::kIo, "stored feature vector has wrong size");
  for (int i = 0; i < dsp::kFeatureDims; ++i) s.features.values[i] = values[static_cast<std::size_t>(i)];
  s.features.config_fingerprint = r.at("fingerprint").get<std::string>();
  return s;
}

json playlist_record(const Playlist& p) {
  return {{"type", "playlist"}, {"user_id", p.user_id}, {"song_ids", p.song_ids}};
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

std::string content_key(std::span<const std::uint8_t> audio_bytes, const SongMetadata& meta) {
  Fnv1a h;
  h.update(audio_bytes);
  h.update(std::string_view("\0", 1));
  h.update(metadata_json(meta).dump());
  return h.hex();
}

SongMetadata metadata_from_manifest(const json& entry) {
  if (!entry.is_object()) fail(ErrorCode::kInvalidArgument, "manifest entry must be an object");
  for (const char* field : {"title", "artist", "release_year", "audio_path"}) {
    if (!entry.contains(field)) fail(ErrorCode::kInvalidArgument, std::string("manifest entry missing '") + field + "'");
  }
  try {
    return metadata_from_json(entry);
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed manifest entry: ") + e.what());
  }
}

PreparedSong prepare_song(const std::filesystem::path& audio_path, const SongMetadata& meta,
                          const dsp::FeatureConfig& cfg) {
  return prepare_song(audio::read_file(audio_path), audio_path, meta, cfg);
}

PreparedSong prepare_song(std::span<const std::uint8_t> bytes, const std::filesystem::path& audio_path,
                          const SongMetadata& meta, const dsp::FeatureConfig& cfg) {
  const auto wav = audio::decode_wav(bytes);

  dsp::AudioClipd clip;
  clip.sample_rate = cfg.sample_rate;
  clip.samples = audio::resample_linear(wav.mono(), wav.sample_rate, cfg.sample_rate);
  if (clip.size() < cfg.frame_size) fail(ErrorCode::kInvalidArgument, "audio too short");

  PreparedSong out;
  Song& s = out.song;
  s.meta = meta;
  s.content_key = content_key(bytes, meta);
  s.id = meta.song_id.value_or("song-" + s.content_key);
  s.duration_s = double(wav.frames()) / wav.sample_rate;
  s.audio_path = std::filesystem::absolute(audio_path).lexically_normal().string();
  s.features = dsp::featurize(clip, cfg);
  return out;
}

Catalog::Catalog(std::unique_ptr<RecordStore> store, CatalogOptions options)
    : store_(std::move(store)), options_(std::move(options)) {
  options_.features.validate();
  for (const auto& r : store_->load()) replay(r);
}

void Catalog::replay(const Record& r) {
  ++log_records_;
  const auto type = r.at("type").get<std::string>();
  if (type == "song") {
    Song s = song_from_record(r);
    by_content_key_[s.content_key] = s.id;
    songs_[s.id] = std::move(s);
  } else if (type == "playlist") {
    Playlist p{r.at("user_id").get<std::string>(), r.at("song_ids").get<std::vector<std::string>>()};
    ++playlist_versions_[p.user_id];
    playlists_[p.user_id] = std::move(p);
  }
}

const Song& Catalog::require(const SongId& id) const {
  auto it = songs_.find(id);
  if (it == songs_.end()) fail(ErrorCode::kNotFound, "unknown song '" + id + "'");
  return it->second;
}

IngestResult Catalog::ingest_song(const std::filesystem::path& audio_path, const SongMetadata& meta) {
  const auto bytes = audio::read_file(audio_path);
  if (auto existing = find_by_content_key(content_key(bytes, meta))) return {*existing, false};
  return commit(prepare_song(bytes, audio_path, meta, options_.features));
}

std::optional<SongId> Catalog::find_by_content_key(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = by_content_key_.find(key);
  if (it == by_content_key_.end()) return std::nullopt;
  return it->second;
}

IngestResult Catalog::commit(PreparedSong prepared) {
  Song& s = prepared.song;
  std::unique_lock lock(mu_);
  if (auto it = by_content_key_.find(s.content_key); it != by_content_key_.end()) return {it->second, false};

  if (s.meta.title.empty() || s.meta.artist.empty()) fail(ErrorCode::kInvalidArgument, "title and artist are required");
  if (s.meta.release_year < 1900 || s.meta.release_year > 2100) {
    fail(ErrorCode::kInvalidArgument, "implausible release_year " + std::to_string(s.meta.release_year));
  }
  if (s.meta.popularity_rank < 1) fail(ErrorCode::kInvalidArgument, "popularity_rank must be >= 1");
  if (songs_.contains(s.id)) fail(ErrorCode::kConflict, "song id '" + s.id + "' already used by different content");
  if (s.meta.cover_of) {
    if (*s.meta.cover_of == s.id) fail(ErrorCode::kInvalidArgument, "song cannot be a cover of itself");
    const Song& original = require(*s.meta.cover_of);
    // Covers always point at the root original, so chains and cycles cannot form.
    if (original.meta.cover_of) s.meta.cover_of = original.meta.cover_of;
  }
  if (s.features.config_fingerprint != options_.features.fingerprint()) {
    fail(ErrorCode::kInvalidArgument, "song featurized with a different feature config");
  }

  store_->append(song_record(s));
  ++log_records_;
  by_content_key_[s.content_key] = s.id;
  const SongId id = s.id;
  songs_[id] = std::move(s);
  return {id, true};
}

Playlist Catalog::set_playlist(const UserId& user, const std::vector<SongId>& song_ids) {
  std::unique_lock lock(mu_);
  if (user.empty()) fail(ErrorCode::kInvalidArgument, "user id required");
  if (song_ids.size() > options_.playlist_cap) {
    fail(ErrorCode::kInvalidArgument, "playlist exceeds cap of " + std::to_string(options_.playlist_cap) + " songs");
  }
  std::set<SongId> seen;
  for (const auto& id : song_ids) {
    if (!songs_.contains(id)) fail(ErrorCode::kNotFound, "unknown song '" + id + "'");
    if (!seen.insert(id).second) fail(ErrorCode::kInvalidArgument, "duplicate song '" + id + "' in playlist");
  }
  Playlist p{user, song_ids};
  store_->append(playlist_record(p));
  ++log_records_;
  ++playlist_versions_[user];
  playlists_[user] = p;
  maybe_compact_locked();
  return p;
}

Playlist Catalog::playlist(const UserId& user) const {
  std::shared_lock lock(mu_);
  auto it = playlists_.find(user);
  return it == playlists_.end() ? Playlist{user, {}} : it->second;
}

std::uint64_t Catalog::playlist_version(const UserId& user) const {
  std::shared_lock lock(mu_);
  auto it = playlist_versions_.find(user);
  return it == playlist_versions_.end() ? 0 : it->second;
}

bool Catalog::contains(const SongId& id) const {
  std::shared_lock lock(mu_);
  return songs_.contains(id);
}

Song Catalog::song(const SongId& id) const {
  std::shared_lock lock(mu_);
  return require(id);
}

SongSummary Catalog::summary_locked(const Song& s) const {
  return {s.id, s.meta.title, s.meta.artist, s.meta.release_year, s.meta.genre, s.duration_s, s.meta.album_art_ref};
}

SongSummary Catalog::summary(const SongId& id) const {
  std::shared_lock lock(mu_);
  return summary_locked(require(id));
}

std::vector<SongId> Catalog::song_ids() const {
  std::shared_lock lock(mu_);
  std::vector<SongId> ids;
  ids.reserve(songs_.size());
  for (const auto& [id, _] : songs_) ids.push_back(id);
  return ids;
}

std::size_t Catalog::size() const {
  std::shared_lock lock(mu_);
  return songs_.size();
}

MusicInfo Catalog::music_info(const SongId& id, const std::optional<SongId>& source, bool full_lyrics) const {
  std::shared_lock lock(mu_);
  const Song& s = require(id);
  MusicInfo info;
  info.song = summary_locked(s);

  const auto lines = split_lines(s.meta.lyrics);
  for (std::size_t i = 0; i < lines.size() && i < kLyricsExcerptLines; ++i) {
    if (i) info.lyrics_excerpt += '\n';
    info.lyrics_excerpt += lines[i];
  }
  info.lyrics_truncated = lines.size() > kLyricsExcerptLines;
  if (full_lyrics) info.full_lyrics = s.meta.lyrics;

  if (source) info.source_song = summary_locked(require(*source));

  std::vector<const Song*> hits;
  for (const auto& [other_id, other] : songs_) {
    if (other_id != id && other.meta.artist == s.meta.artist) hits.push_back(&other);
  }
  std::sort(hits.begin(), hits.end(), [](const Song* a, const Song* b) {
    if (a->meta.popularity_rank != b->meta.popularity_rank) return a->meta.popularity_rank < b->meta.popularity_rank;
    return a->id < b->id;
  });
  for (std::size_t i = 0; i < hits.size() && i < kMaxOtherHits; ++i) info.other_hits.push_back(summary_locked(*hits[i]));

  if (s.meta.cover_of) {
    info.original = summary_locked(require(*s.meta.cover_of));
  } else {
    for (const auto& [other_id, other] : songs_) {
      if (other.meta.cover_of == id) info.covers.push_back(summary_locked(other));
    }
  }
  return info;
}

void Catalog::maybe_compact_locked() {
  if (log_records_ > 2 * (songs_.size() + playlists_.size()) + 64) compact_locked();
}

void Catalog::compact() {
  std::unique_lock lock(mu_);
  compact_locked();
}

void Catalog::compact_locked() {
  std::vector<Record> snapshot;
  snapshot.reserve(songs_.size() + playlists_.size());
  // Originals before covers keeps replay order valid.
  for (const auto& [_, s] : songs_) {
    if (!s.meta.cover_of) snapshot.push_back(song_record(s));
  }
  for (const auto& [_, s] : songs_) {
    if (s.meta.cover_of) snapshot.push_back(song_record(s));
  }
  for (const auto& [_, p] : playlists_) snapshot.push_back(playlist_record(p));
  store_->rewrite(snapshot);
  log_records_ = snapshot.size();
}

void to_json(json& j, const SongSummary& s) {
  j = {{"song_id", s.song_id}, {"title", s.title},           {"artist", s.artist},
       {"release_year", s.release_year}, {"genre", s.genre}, {"duration_s", s.duration_s},
       {"album_art_ref", s.album_art_ref}};
}

void to_json(json& j, const MusicInfo& m) {
  j = {{"song", m.song},
       {"lyrics_excerpt", m.lyrics_excerpt},
       {"read_more", m.lyrics_truncated},
       {"other_hits", m.other_hits},
       {"covers", m.covers}};
  j["full_lyrics"] = m.full_lyrics ? json(*m.full_lyrics) : json(nullptr);
  j["source_song"] = m.source_song ? json(*m.source_song) : json(nullptr);
  j["original"] = m.original ? json(*m.original) : json(nullptr);
}

void to_json(json& j, const Playlist& p) { j = {{"user_id", p.user_id}, {"song_ids", p.song_ids}}; }

}  // namespace djfam::catalog
