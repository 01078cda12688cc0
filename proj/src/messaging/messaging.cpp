#include "djfam/messaging/messaging.hpp"

#include <algorithm>

#include "djfam/common/error.hpp"

namespace djfam::messaging {

using nlohmann::json;

namespace {

std::size_t utf8_length(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

}  // namespace

std::string_view to_string(MessageKind kind) { return kind == MessageKind::kText ? "text" : "song_share"; }

MessageKind message_kind_from(std::string_view text) {
  if (text == "text") return MessageKind::kText;
  if (text == "song_share") return MessageKind::kSongShare;
  fail(ErrorCode::kInvalidArgument, "unknown message kind '" + std::string(text) + "'");
}

void to_json(json& j, const Message& m) {
  j = {{"seq", m.seq},
       {"sender", m.sender},
       {"server_time", m.server_time},
       {"client_msg_id", m.client_msg_id},
       {"kind", to_string(m.kind)},
       {"read_by", m.read_by}};
  if (m.kind == MessageKind::kText) {
    j["body"] = m.body;
  } else if (m.share) {
    j["share"] = {{"recommended_song_id", m.share->recommended_song_id},
                  {"source_song_id", m.share->source_song_id},
                  {"similarity", m.share->similarity}};
  }
}

void from_json(const json& j, Message& m) {
  m.seq = j.at("seq").get<std::int64_t>();
  m.sender = j.at("sender").get<std::string>();
  m.server_time = j.at("server_time").get<TimestampMs>();
  m.client_msg_id = j.at("client_msg_id").get<std::string>();
  m.kind = message_kind_from(j.at("kind").get<std::string>());
  m.read_by = j.value("read_by", std::set<UserId>{});
  m.body = j.value("body", "");
  if (j.contains("share")) {
    const auto& s = j["share"];
    m.share = SongShare{s.at("recommended_song_id").get<std::string>(), s.at("source_song_id").get<std::string>(),
                        s.at("similarity").get<double>()};
  }
}

Messaging::Messaging(std::unique_ptr<catalog::RecordStore> store, Clock clock, MessagingOptions options)
    : store_(std::move(store)), clock_(std::move(clock)), options_(options) {
  for (const auto& r : store_->load()) replay(r);
}

void Messaging::replay(const catalog::Record& r) {
  const auto type = r.at("type").get<std::string>();
  if (type == "thread") {
    ThreadInfo info{r.at("thread_id").get<std::string>(), r.at("parent").get<std::string>(),
                    r.at("child").get<std::string>()};
    threads_[info.thread_id].info = info;
  } else if (type == "message") {
    auto& t = require_thread(r.at("thread_id").get<std::string>());
    auto m = r.at("message").get<Message>();
    t.by_client_id[{m.sender, m.client_msg_id}] = t.messages.size();
    t.messages.push_back(std::move(m));
  } else if (type == "read") {
    auto& t = require_thread(r.at("thread_id").get<std::string>());
    const auto user = r.at("user").get<std::string>();
    const auto from = r.at("from_seq").get<std::int64_t>();
    const auto to = std::min<std::int64_t>(r.at("to_seq").get<std::int64_t>(), std::int64_t(t.messages.size()));
    for (auto s = from + 1; s <= to; ++s) t.messages[static_cast<std::size_t>(s - 1)].read_by.insert(user);
  } else if (type == "issued") {
    issued_[{r.at("user").get<std::string>(), r.at("source").get<std::string>(), r.at("candidate").get<std::string>()}] =
        Issued{r.at("similarity").get<double>(), r.at("rank").get<int>(), r.at("at").get<TimestampMs>()};
  }
}

void Messaging::ensure_thread(const ThreadInfo& info) {
  std::lock_guard lock(mu_);
  if (auto it = threads_.find(info.thread_id); it != threads_.end()) {
    const auto& existing = it->second.info;
    if (existing.parent != info.parent || existing.child != info.child) {
      fail(ErrorCode::kConflict, "thread '" + info.thread_id + "' already belongs to another dyad");
    }
    return;
  }
  if (info.parent.empty() || info.child.empty() || info.parent == info.child) {
    fail(ErrorCode::kInvalidArgument, "a dyad needs two distinct members");
  }
  store_->append({{"type", "thread"}, {"thread_id", info.thread_id}, {"parent", info.parent}, {"child", info.child}});
  threads_[info.thread_id].info = info;
}

ThreadInfo Messaging::thread_info(const ThreadId& thread_id) const {
  std::lock_guard lock(mu_);
  return require_thread(thread_id).info;
}

Messaging::Thread& Messaging::require_thread(const ThreadId& id) {
  auto it = threads_.find(id);
  if (it == threads_.end()) fail(ErrorCode::kNotFound, "unknown thread '" + id + "'");
  return it->second;
}

const Messaging::Thread& Messaging::require_thread(const ThreadId& id) const {
  auto it = threads_.find(id);
  if (it == threads_.end()) fail(ErrorCode::kNotFound, "unknown thread '" + id + "'");
  return it->second;
}

void Messaging::require_member(const Thread& t, const UserId& u) {
  if (!t.info.has_member(u)) fail(ErrorCode::kPermissionDenied, "user '" + u + "' is not a member of this thread");
}

Message Messaging::append(Thread& t, Message m) {
  m.seq = static_cast<std::int64_t>(t.messages.size()) + 1;
  const TimestampMs now = clock_();
  m.server_time = t.messages.empty() ? now : std::max(now, t.messages.back().server_time);
  store_->append({{"type", "message"}, {"thread_id", t.info.thread_id}, {"message", m}});
  t.by_client_id[{m.sender, m.client_msg_id}] = t.messages.size();
  t.messages.push_back(m);
  // Published under the lock so observers see appends in seq order; the
  // observer only enqueues.
  publish(t.info, m);
  return m;
}

void Messaging::publish(const ThreadInfo& info, const Message& m) {
  if (!observer_) return;
  observer_->message_appended(info, m);
  const UserId& partner = info.partner_of(m.sender);
  if (m.kind == MessageKind::kSongShare || !observer_->is_connected(partner)) {
    observer_->notify({partner, info.thread_id, m});
  }
}

Message Messaging::post_message(const ThreadId& thread_id, const UserId& sender, const std::string& client_msg_id,
                                const std::string& body) {
  std::lock_guard lock(mu_);
  auto& t = require_thread(thread_id);
  require_member(t, sender);
  if (client_msg_id.empty()) fail(ErrorCode::kInvalidArgument, "client_msg_id required");
  if (auto it = t.by_client_id.find({sender, client_msg_id}); it != t.by_client_id.end()) {
    return t.messages[it->second];
  }
  if (body.empty()) fail(ErrorCode::kInvalidArgument, "message body must not be empty");
  if (utf8_length(body) > kMaxBodyChars) fail(ErrorCode::kInvalidArgument, "message body exceeds 4000 characters");

  Message m;
  m.sender = sender;
  m.client_msg_id = client_msg_id;
  m.kind = MessageKind::kText;
  m.body = body;
  return append(t, std::move(m));
}

void Messaging::record_issued(const UserId& user, const std::vector<recommender::Recommendation>& recs) {
  std::lock_guard lock(mu_);
  const TimestampMs now = clock_();
  for (const auto& r : recs) {
    store_->append({{"type", "issued"},
                    {"user", user},
                    {"source", r.source_song_id},
                    {"candidate", r.candidate_song_id},
                    {"similarity", r.similarity},
                    {"rank", r.rank},
                    {"at", now}});
    issued_[{user, r.source_song_id, r.candidate_song_id}] = Issued{r.similarity, r.rank, now};
  }
}

std::optional<recommender::Recommendation> Messaging::find_issued(const UserId& user, const SongId& source,
                                                                  const SongId& candidate) const {
  std::lock_guard lock(mu_);
  auto it = issued_.find({user, source, candidate});
  if (it == issued_.end() || clock_() - it->second.issued_at > options_.recommendation_ttl_ms) return std::nullopt;
  return recommender::Recommendation{source, candidate, it->second.similarity, it->second.rank};
}

Message Messaging::share_recommendation(const ThreadId& thread_id, const UserId& user, const SongId& source,
                                        const SongId& candidate, const std::string& client_msg_id) {
  std::lock_guard lock(mu_);
  auto& t = require_thread(thread_id);
  require_member(t, user);
  if (client_msg_id.empty()) fail(ErrorCode::kInvalidArgument, "client_msg_id required");
  if (auto it = t.by_client_id.find({user, client_msg_id}); it != t.by_client_id.end()) {
    return t.messages[it->second];
  }
  auto rec = issued_.find({user, source, candidate});
  if (rec == issued_.end()) {
    fail(ErrorCode::kPermissionDenied, "no recommendation of '" + candidate + "' for '" + source + "' was issued to you");
  }
  if (clock_() - rec->second.issued_at > options_.recommendation_ttl_ms) {
    fail(ErrorCode::kPermissionDenied, "recommendation has expired");
  }

  Message m;
  m.sender = user;
  m.client_msg_id = client_msg_id;
  m.kind = MessageKind::kSongShare;
  m.share = SongShare{candidate, source, rec->second.similarity};
  return append(t, std::move(m));
}

std::vector<Message> Messaging::fetch_thread(const ThreadId& thread_id, const UserId& requester,
                                             std::int64_t since_seq) {
  std::lock_guard lock(mu_);
  auto& t = require_thread(thread_id);
  require_member(t, requester);
  const auto total = static_cast<std::int64_t>(t.messages.size());
  since_seq = std::clamp<std::int64_t>(since_seq, 0, total);

  bool changed = false;
  std::vector<Message> out;
  out.reserve(static_cast<std::size_t>(total - since_seq));
  for (auto s = since_seq + 1; s <= total; ++s) {
    auto& m = t.messages[static_cast<std::size_t>(s - 1)];
    changed |= m.read_by.insert(requester).second;
    out.push_back(m);
  }
  if (changed) {
    store_->append({{"type", "read"}, {"thread_id", thread_id}, {"user", requester}, {"from_seq", since_seq}, {"to_seq", total}});
  }
  return out;
}

std::vector<Message> Messaging::messages(const ThreadId& thread_id) const {
  std::lock_guard lock(mu_);
  return require_thread(thread_id).messages;
}

SessionReport Messaging::count_sessions(const ThreadId& thread_id, TimeWindow window,
                                        std::optional<std::int64_t> gap_threshold_s) const {
  std::vector<TimedSeq> timeline;
  {
    std::lock_guard lock(mu_);
    const auto& t = require_thread(thread_id);
    timeline.reserve(t.messages.size());
    for (const auto& m : t.messages) timeline.push_back({m.seq, m.server_time});
  }
  return messaging::count_sessions(timeline, window, gap_threshold_s.value_or(options_.session_gap_s));
}

}  // namespace djfam::messaging
