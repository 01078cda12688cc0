#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "djfam/catalog/record_store.hpp"
#include "djfam/common/time.hpp"
#include "djfam/messaging/sessions.hpp"
#include "djfam/recommender/similarity.hpp"
#include "json.hpp"

namespace djfam::messaging {

using UserId = std::string;
using SongId = std::string;
using ThreadId = std::string;

inline constexpr std::size_t kMaxBodyChars = 4000;
inline constexpr TimestampMs kRecommendationTtlMs = kMsPerDay;
inline constexpr const char* kShareCaption = "I received a recommendation for this song!";

enum class MessageKind { kText, kSongShare };

std::string_view to_string(MessageKind kind);
MessageKind message_kind_from(std::string_view text);

struct SongShare {
  SongId recommended_song_id;
  SongId source_song_id;
  double similarity = 0;

  bool operator==(const SongShare&) const = default;
};

struct Message {
  std::int64_t seq = 0;
  UserId sender;
  TimestampMs server_time = 0;
  std::string client_msg_id;
  MessageKind kind = MessageKind::kText;
  std::string body;                // text messages
  std::optional<SongShare> share;  // song-share messages
  std::set<UserId> read_by;

  bool operator==(const Message&) const = default;
};

/// One thread per parent-child dyad.
struct ThreadInfo {
  ThreadId thread_id;
  UserId parent;
  UserId child;

  bool has_member(const UserId& u) const { return u == parent || u == child; }
  const UserId& partner_of(const UserId& u) const { return u == parent ? child : parent; }
};

struct Notification {
  UserId recipient;
  ThreadId thread_id;
  Message message;
};

/// Receives append and notification events. Called after the append is
/// durable, outside the thread's lock.
class MessageObserver {
 public:
  virtual ~MessageObserver() = default;
  virtual void message_appended(const ThreadInfo& thread, const Message& message) = 0;
  virtual void notify(const Notification& notification) = 0;
  virtual bool is_connected(const UserId& user) const = 0;
};

struct MessagingOptions {
  std::int64_t session_gap_s = kDefaultSessionGapSeconds;
  TimestampMs recommendation_ttl_ms = kRecommendationTtlMs;
};

/// Asynchronous dyad chat. Every thread has a gap-free sequence; repeated
/// client_msg_ids from the same sender are absorbed.
class Messaging {
 public:
  Messaging(std::unique_ptr<catalog::RecordStore> store, Clock clock, MessagingOptions options = {});

  void set_observer(MessageObserver* observer) { observer_ = observer; }
  const MessagingOptions& options() const { return options_; }

  /// Creates the thread if absent; a no-op when it already matches.
  void ensure_thread(const ThreadInfo& info);
  ThreadInfo thread_info(const ThreadId& thread_id) const;

  Message post_message(const ThreadId& thread_id, const UserId& sender, const std::string& client_msg_id,
                       const std::string& body);

  /// Records recommendations shown to `user` so later shares can be checked.
  void record_issued(const UserId& user, const std::vector<recommender::Recommendation>& recs);
  /// The live record of (source -> candidate) issued to `user`, if any.
  std::optional<recommender::Recommendation> find_issued(const UserId& user, const SongId& source,
                                                         const SongId& candidate) const;

  Message share_recommendation(const ThreadId& thread_id, const UserId& user, const SongId& source,
                               const SongId& candidate, const std::string& client_msg_id);

  /// Messages with seq > since_seq, marked read by `requester`.
  std::vector<Message> fetch_thread(const ThreadId& thread_id, const UserId& requester, std::int64_t since_seq);

  /// Unmarked snapshot for analytics.
  std::vector<Message> messages(const ThreadId& thread_id) const;

  SessionReport count_sessions(const ThreadId& thread_id, TimeWindow window,
                               std::optional<std::int64_t> gap_threshold_s = std::nullopt) const;

 private:
  struct Thread {
    ThreadInfo info;
    std::vector<Message> messages;
    std::map<std::pair<UserId, std::string>, std::size_t> by_client_id;
  };
  struct Issued {
    double similarity = 0;
    int rank = 0;
    TimestampMs issued_at = 0;
  };
  using IssuedKey = std::tuple<UserId, SongId, SongId>;

  void replay(const catalog::Record& r);
  Thread& require_thread(const ThreadId& id);
  const Thread& require_thread(const ThreadId& id) const;
  static void require_member(const Thread& t, const UserId& u);
  Message append(Thread& t, Message m);
  void publish(const ThreadInfo& info, const Message& m);

  std::unique_ptr<catalog::RecordStore> store_;
  Clock clock_;
  MessagingOptions options_;
  MessageObserver* observer_ = nullptr;

  mutable std::mutex mu_;
  std::map<ThreadId, Thread> threads_;
  std::map<IssuedKey, Issued> issued_;
};

void to_json(nlohmann::json& j, const Message& m);
void from_json(const nlohmann::json& j, Message& m);

}  // namespace djfam::messaging
