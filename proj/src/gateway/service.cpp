#include "djfam/gateway/service.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "djfam/common/error.hpp"

namespace djfam::gateway {

using nlohmann::json;

std::string_view to_string(Role role) { return role == Role::kParent ? "parent" : "child"; }

Role role_from(std::string_view text) {
  if (text == "parent") return Role::kParent;
  if (text == "child") return Role::kChild;
  fail(ErrorCode::kInvalidArgument, "role must be 'parent' or 'child'");
}

Stores Stores::in_memory() {
  return {std::make_unique<catalog::MemoryRecordStore>(), std::make_unique<catalog::MemoryRecordStore>(),
          std::make_unique<catalog::MemoryRecordStore>(), std::make_unique<catalog::MemoryRecordStore>()};
}

Stores Stores::in_directory(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  return {std::make_unique<catalog::FileRecordStore>(dir / "catalog.jsonl"),
          std::make_unique<catalog::FileRecordStore>(dir / "messages.jsonl"),
          std::make_unique<catalog::FileRecordStore>(dir / "activity.jsonl"),
          std::make_unique<catalog::FileRecordStore>(dir / "dyads.jsonl")};
}

Service::Service(Stores stores, ServiceOptions options, Clock clock)
    : options_(std::move(options)),
      clock_(std::move(clock)),
      activity_store_(std::move(stores.activity)),
      dyad_store_(std::move(stores.dyads)),
      catalog_(std::move(stores.catalog), options_.catalog),
      messaging_(std::move(stores.messages), clock_, options_.messaging),
      recommender_(catalog_, options_.recommender),
      events_(clock_) {
  for (const auto& r : dyad_store_->load()) replay_dyad(r);
  for (const auto& r : activity_store_->load()) replay_activity(r);
  messaging_.set_observer(&events_);
}

void Service::replay_dyad(const catalog::Record& r) {
  Dyad d{r.at("dyad_id").get<std::string>(), r.at("code").get<std::string>(), r.at("parent").get<std::string>(),
         r.at("child").get<std::string>()};
  dyad_by_code_[d.code] = d.dyad_id;
  dyad_by_user_[d.parent] = d.dyad_id;
  dyad_by_user_[d.child] = d.dyad_id;
  dyads_[d.dyad_id] = std::move(d);
}

void Service::replay_activity(const catalog::Record& r) {
  PlaybackEvent e{r.at("user_id").get<std::string>(), r.at("song_id").get<std::string>(), r.at("at").get<TimestampMs>(),
                  r.at("from_recommendation").get<bool>()};
  std::vector<SongId> recs;
  for (const auto& rec : r.at("recommendations")) {
    recs.push_back(rec.at("candidate_song_id").get<std::string>());
    recommended_at_[{e.user_id, recs.back()}] = e.at;
  }
  auto& recent = recent_recs_[e.user_id];
  recent.push_back(std::move(recs));
  while (recent.size() > options_.no_repeat_window) recent.pop_front();
  playback_log_.push_back(std::move(e));
}

std::string Service::random_token() const {
  static thread_local std::random_device device;
  std::string out;
  for (int i = 0; i < 4; ++i) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", device());
    out += buf;
  }
  return out;
}

Dyad Service::provision_dyad(const std::string& dyad_id, const UserId& parent, const UserId& child,
                             std::optional<std::string> code) {
  if (dyad_id.empty()) fail(ErrorCode::kInvalidArgument, "dyad id required");
  if (!code) {
    static constexpr char kAlphabet[] = "ABCDEFGHJKLMNPQRSTUVWXYZ23456789";
    std::random_device device;
    code.emplace();
    for (int i = 0; i < 8; ++i) code->push_back(kAlphabet[device() % (sizeof(kAlphabet) - 1)]);
  }
  Dyad d{dyad_id, *code, parent, child};
  {
    std::lock_guard lock(mu_);
    if (dyads_.contains(dyad_id)) fail(ErrorCode::kConflict, "dyad '" + dyad_id + "' already exists");
    if (dyad_by_code_.contains(d.code)) fail(ErrorCode::kConflict, "dyad code already in use");
    for (const auto* u : {&parent, &child}) {
      if (dyad_by_user_.contains(*u)) fail(ErrorCode::kConflict, "user '" + *u + "' already belongs to a dyad");
    }
    messaging_.ensure_thread(d.thread());
    dyad_store_->append(json(d));
    replay_dyad(json(d));
  }
  return d;
}

Dyad Service::dyad(const std::string& dyad_id) const {
  std::lock_guard lock(mu_);
  auto it = dyads_.find(dyad_id);
  if (it == dyads_.end()) fail(ErrorCode::kNotFound, "unknown dyad '" + dyad_id + "'");
  return it->second;
}

std::optional<Dyad> Service::dyad_of(const UserId& user) const {
  std::lock_guard lock(mu_);
  auto it = dyad_by_user_.find(user);
  if (it == dyad_by_user_.end()) return std::nullopt;
  return dyads_.at(it->second);
}

std::vector<Dyad> Service::dyads() const {
  std::lock_guard lock(mu_);
  std::vector<Dyad> out;
  for (const auto& [_, d] : dyads_) out.push_back(d);
  return out;
}

catalog::Playlist Service::set_playlist(const UserId& user, const std::vector<SongId>& song_ids) {
  return catalog_.set_playlist(user, song_ids);
}

AuthSession Service::login(const std::string& dyad_code, const std::string& role) {
  std::lock_guard lock(mu_);
  auto it = dyad_by_code_.find(dyad_code);
  if (it == dyad_by_code_.end()) fail(ErrorCode::kUnauthenticated, "unknown dyad code");
  Role r = Role::kParent;
  try {
    r = role_from(role);
  } catch (const Error&) {
    fail(ErrorCode::kUnauthenticated, "role '" + role + "' is not part of this dyad");
  }
  const Dyad& d = dyads_.at(it->second);
  AuthSession s{random_token(), d.member(r), d.dyad_id, r, clock_() + options_.token_ttl_ms};
  sessions_[s.token] = s;
  return s;
}

AuthSession Service::authenticate(const std::string& token) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(token);
  if (it == sessions_.end()) fail(ErrorCode::kUnauthenticated, "invalid token");
  if (clock_() >= it->second.expires_at) fail(ErrorCode::kUnauthenticated, "token expired");
  return it->second;
}

std::vector<Recommendation> Service::recommend(const SongId& source, const UserId& listener, std::size_t k,
                                               const std::set<SongId>& exclusions) const {
  const auto d = dyad_of(listener);
  if (!d) fail(ErrorCode::kNotFound, "user '" + listener + "' does not belong to a dyad");
  return recommender_.recommend(source, listener, d->partner_of(listener), k, exclusions);
}

PlaybackState Service::now_playing(const AuthSession& session, const SongId& song_id) {
  if (!catalog_.contains(song_id)) fail(ErrorCode::kNotFound, "unknown song '" + song_id + "'");

  std::set<SongId> exclusions;
  {
    std::lock_guard lock(mu_);
    for (const auto& batch : recent_recs_[session.user_id]) exclusions.insert(batch.begin(), batch.end());
  }
  PlaybackState state{session.user_id, song_id, clock_(), recommend(song_id, session.user_id, options_.top_k, exclusions)};
  messaging_.record_issued(session.user_id, state.recommendations);

  std::lock_guard lock(mu_);
  auto prior = recommended_at_.find({session.user_id, song_id});
  const bool from_rec =
      prior != recommended_at_.end() && state.started_at - prior->second <= options_.messaging.recommendation_ttl_ms;
  json record = {{"type", "playback"},
                 {"user_id", session.user_id},
                 {"song_id", song_id},
                 {"at", state.started_at},
                 {"from_recommendation", from_rec},
                 {"recommendations", state.recommendations}};
  activity_store_->append(record);
  replay_activity(record);
  playback_[session.user_id] = state;
  return state;
}

std::optional<PlaybackState> Service::playback_state(const UserId& user) const {
  std::lock_guard lock(mu_);
  auto it = playback_.find(user);
  if (it == playback_.end()) return std::nullopt;
  return it->second;
}

std::vector<catalog::SongSummary> Service::playlist_summaries(const AuthSession& session, bool partner) const {
  const Dyad d = dyad(session.dyad_id);
  const UserId& owner = partner ? d.partner_of(session.user_id) : session.user_id;
  std::vector<catalog::SongSummary> out;
  for (const auto& id : catalog_.playlist(owner).song_ids) out.push_back(catalog_.summary(id));
  return out;
}

catalog::MusicInfo Service::music_info(const SongId& song, const std::optional<SongId>& source,
                                       bool full_lyrics) const {
  return catalog_.music_info(song, source, full_lyrics);
}

messaging::Message Service::post_text(const AuthSession& session, const std::string& client_msg_id,
                                      const std::string& body) {
  return messaging_.post_message(session.dyad_id, session.user_id, client_msg_id, body);
}

messaging::Message Service::share(const AuthSession& session, const std::string& client_msg_id, const SongId& source,
                                  const SongId& candidate) {
  return messaging_.share_recommendation(session.dyad_id, session.user_id, source, candidate, client_msg_id);
}

std::vector<messaging::Message> Service::fetch(const AuthSession& session, std::int64_t since_seq) {
  return messaging_.fetch_thread(session.dyad_id, session.user_id, since_seq);
}

messaging::SessionReport Service::session_report(const AuthSession& session, messaging::TimeWindow window,
                                                 std::optional<std::int64_t> gap_s) const {
  return messaging_.count_sessions(session.dyad_id, window, gap_s);
}

std::vector<PlaybackEvent> Service::playback_log(const std::string& dyad_id) const {
  const Dyad d = dyad(dyad_id);
  std::lock_guard lock(mu_);
  std::vector<PlaybackEvent> out;
  for (const auto& e : playback_log_) {
    if (d.has_member(e.user_id)) out.push_back(e);
  }
  return out;
}

void to_json(json& j, const PlaybackState& p) {
  j = {{"user_id", p.user_id},
       {"now_playing", p.now_playing},
       {"started_at", p.started_at},
       {"recommendations", p.recommendations}};
}

void to_json(json& j, const Dyad& d) {
  j = {{"dyad_id", d.dyad_id}, {"code", d.code}, {"parent", d.parent}, {"child", d.child}};
}

}  // namespace djfam::gateway
