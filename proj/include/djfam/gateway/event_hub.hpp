#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "djfam/common/time.hpp"
#include "djfam/messaging/messaging.hpp"
#include "json.hpp"

namespace djfam::gateway {

using messaging::UserId;

/// One push frame: {"id", "type": "message" | "notification", "payload"}.
struct Event {
  std::int64_t id = 0;
  std::string type;
  nlohmann::json payload;
};

void to_json(nlohmann::json& j, const Event& e);

/// Per-user event queues behind the push channel and the long-poll
/// fallback. Event ids are per user and strictly increasing.
class EventHub final : public messaging::MessageObserver {
 public:
  static constexpr std::size_t kMaxQueued = 10'000;

  explicit EventHub(Clock clock, TimestampMs presence_window_ms = 30'000);

  void message_appended(const messaging::ThreadInfo& thread, const messaging::Message& message) override;
  void notify(const messaging::Notification& notification) override;
  /// True while a stream is open or a long-poll was seen recently.
  bool is_connected(const UserId& user) const override;

  /// Events with id > `after`, waiting up to `wait` for the first one.
  std::vector<Event> poll(const UserId& user, std::int64_t after, std::chrono::milliseconds wait);

  /// Latest event id issued to `user` (0 if none).
  std::int64_t last_id(const UserId& user) const;

  /// Presence registration for a streaming connection.
  class Connection {
   public:
    Connection(EventHub& hub, UserId user);
    ~Connection();
    Connection(const Connection&) = delete;
    Connection& operator=(const Connection&) = delete;

   private:
    EventHub& hub_;
    UserId user_;
  };

  /// Wakes every waiter; later polls return immediately.
  void shutdown();
  bool is_shut_down() const;

 private:
  struct Queue {
    std::int64_t next_id = 1;
    std::deque<Event> events;
    int streams = 0;
    TimestampMs last_poll = -1;
  };

  void push_locked(const UserId& user, std::string type, nlohmann::json payload);

  Clock clock_;
  TimestampMs presence_window_ms_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<UserId, Queue> queues_;
  bool shutdown_ = false;
};

}  // namespace djfam::gateway
