#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "djfam/catalog/catalog.hpp"
#include "djfam/common/time.hpp"
#include "djfam/gateway/event_hub.hpp"
#include "djfam/messaging/messaging.hpp"
#include "djfam/recommender/recommender.hpp"
#include "json.hpp"

namespace djfam::gateway {

using catalog::SongId;
using catalog::UserId;
using recommender::Recommendation;

enum class Role { kParent, kChild };

std::string_view to_string(Role role);
Role role_from(std::string_view text);

struct Dyad {
  std::string dyad_id;
  std::string code;
  UserId parent;
  UserId child;

  const UserId& member(Role r) const { return r == Role::kParent ? parent : child; }
  bool has_member(const UserId& u) const { return u == parent || u == child; }
  const UserId& partner_of(const UserId& u) const { return u == parent ? child : parent; }
  Role role_of(const UserId& u) const { return u == parent ? Role::kParent : Role::kChild; }
  messaging::ThreadInfo thread() const { return {dyad_id, parent, child}; }
};

struct AuthSession {
  std::string token;
  UserId user_id;
  std::string dyad_id;
  Role role = Role::kParent;
  TimestampMs expires_at = 0;
};

/// What the playback screen shows: the track and the recommendations
/// listed beneath its album art.
struct PlaybackState {
  UserId user_id;
  SongId now_playing;
  TimestampMs started_at = 0;
  std::vector<Recommendation> recommendations;
};

struct PlaybackEvent {
  UserId user_id;
  SongId song_id;
  TimestampMs at = 0;
  /// The song was recommended to this user within the validity window.
  bool from_recommendation = false;
};

struct ServiceOptions {
  catalog::CatalogOptions catalog;
  recommender::RecommenderOptions recommender;
  messaging::MessagingOptions messaging;
  std::size_t top_k = recommender::kDefaultTopK;
  /// Exclude songs recommended in the user's last N playback requests.
  std::size_t no_repeat_window = 0;
  TimestampMs token_ttl_ms = kMsPerDay;
};

/// Backing logs for one service instance.
struct Stores {
  std::unique_ptr<catalog::RecordStore> catalog;
  std::unique_ptr<catalog::RecordStore> messages;
  std::unique_ptr<catalog::RecordStore> activity;
  std::unique_ptr<catalog::RecordStore> dyads;

  static Stores in_memory();
  static Stores in_directory(const std::filesystem::path& dir);
};

/// Everything behind the HTTP boundary; the CLI drives the same object.
class Service {
 public:
  Service(Stores stores, ServiceOptions options, Clock clock = system_clock());

  const ServiceOptions& options() const { return options_; }
  catalog::Catalog& catalog() { return catalog_; }
  const catalog::Catalog& catalog() const { return catalog_; }
  messaging::Messaging& messaging() { return messaging_; }
  const recommender::Recommender& recommender() const { return recommender_; }
  EventHub& events() { return events_; }
  TimestampMs now() const { return clock_(); }

  Dyad provision_dyad(const std::string& dyad_id, const UserId& parent, const UserId& child,
                      std::optional<std::string> code = std::nullopt);
  Dyad dyad(const std::string& dyad_id) const;
  std::optional<Dyad> dyad_of(const UserId& user) const;
  std::vector<Dyad> dyads() const;

  catalog::Playlist set_playlist(const UserId& user, const std::vector<SongId>& song_ids);

  AuthSession login(const std::string& dyad_code, const std::string& role);
  AuthSession authenticate(const std::string& token) const;

  /// Offline recommendation for `listener` playing `source`; the same path
  /// now_playing uses, without side effects.
  std::vector<Recommendation> recommend(const SongId& source, const UserId& listener, std::size_t k,
                                        const std::set<SongId>& exclusions = {}) const;

  PlaybackState now_playing(const AuthSession& session, const SongId& song_id);
  std::optional<PlaybackState> playback_state(const UserId& user) const;

  std::vector<catalog::SongSummary> playlist_summaries(const AuthSession& session, bool partner) const;
  catalog::MusicInfo music_info(const SongId& song, const std::optional<SongId>& source, bool full_lyrics) const;

  messaging::Message post_text(const AuthSession& session, const std::string& client_msg_id, const std::string& body);
  messaging::Message share(const AuthSession& session, const std::string& client_msg_id, const SongId& source,
                           const SongId& candidate);
  std::vector<messaging::Message> fetch(const AuthSession& session, std::int64_t since_seq);
  messaging::SessionReport session_report(const AuthSession& session, messaging::TimeWindow window,
                                          std::optional<std::int64_t> gap_s) const;

  std::vector<PlaybackEvent> playback_log(const std::string& dyad_id) const;

 private:
  void replay_dyad(const catalog::Record& r);
  void replay_activity(const catalog::Record& r);
  std::string random_token() const;

  ServiceOptions options_;
  Clock clock_;
  std::unique_ptr<catalog::RecordStore> activity_store_;
  std::unique_ptr<catalog::RecordStore> dyad_store_;
  catalog::Catalog catalog_;
  messaging::Messaging messaging_;
  recommender::Recommender recommender_;
  EventHub events_;

  mutable std::mutex mu_;
  std::map<std::string, Dyad> dyads_;
  std::map<std::string, std::string> dyad_by_code_;
  std::map<UserId, std::string> dyad_by_user_;
  std::map<std::string, AuthSession> sessions_;
  std::map<UserId, PlaybackState> playback_;
  std::map<UserId, std::deque<std::vector<SongId>>> recent_recs_;
  std::map<std::pair<UserId, SongId>, TimestampMs> recommended_at_;
  std::vector<PlaybackEvent> playback_log_;
};

void to_json(nlohmann::json& j, const PlaybackState& p);
void to_json(nlohmann::json& j, const Dyad& d);

}  // namespace djfam::gateway
