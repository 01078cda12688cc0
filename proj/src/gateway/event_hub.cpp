#include "djfam/gateway/event_hub.hpp"

namespace djfam::gateway {

using nlohmann::json;

void to_json(json& j, const Event& e) { j = {{"id", e.id}, {"type", e.type}, {"payload", e.payload}}; }

EventHub::EventHub(Clock clock, TimestampMs presence_window_ms)
    : clock_(std::move(clock)), presence_window_ms_(presence_window_ms) {}

void EventHub::push_locked(const UserId& user, std::string type, json payload) {
  auto& q = queues_[user];
  q.events.push_back({q.next_id++, std::move(type), std::move(payload)});
  while (q.events.size() > kMaxQueued) q.events.pop_front();
}

void EventHub::message_appended(const messaging::ThreadInfo& thread, const messaging::Message& message) {
  {
    std::lock_guard lock(mu_);
    const json payload = {{"thread_id", thread.thread_id}, {"message", message}};
    push_locked(thread.parent, "message", payload);
    push_locked(thread.child, "message", payload);
  }
  cv_.notify_all();
}

void EventHub::notify(const messaging::Notification& n) {
  {
    std::lock_guard lock(mu_);
    const bool share = n.message.kind == messaging::MessageKind::kSongShare;
    push_locked(n.recipient, "notification",
                {{"thread_id", n.thread_id},
                 {"kind", messaging::to_string(n.message.kind)},
                 {"caption", share ? messaging::kShareCaption : "New message"},
                 {"from", n.message.sender},
                 {"seq", n.message.seq},
                 {"message", n.message}});
  }
  cv_.notify_all();
}

bool EventHub::is_connected(const UserId& user) const {
  std::lock_guard lock(mu_);
  auto it = queues_.find(user);
  if (it == queues_.end()) return false;
  const auto& q = it->second;
  return q.streams > 0 || (q.last_poll >= 0 && clock_() - q.last_poll <= presence_window_ms_);
}

std::vector<Event> EventHub::poll(const UserId& user, std::int64_t after, std::chrono::milliseconds wait) {
  std::unique_lock lock(mu_);
  queues_[user].last_poll = clock_();
  auto ready = [&] {
    const auto& q = queues_[user];
    return shutdown_ || (!q.events.empty() && q.events.back().id > after);
  };
  cv_.wait_for(lock, wait, ready);

  auto& q = queues_[user];
  q.last_poll = clock_();
  std::vector<Event> out;
  for (const auto& e : q.events) {
    if (e.id > after) out.push_back(e);
  }
  return out;
}

std::int64_t EventHub::last_id(const UserId& user) const {
  std::lock_guard lock(mu_);
  auto it = queues_.find(user);
  return it == queues_.end() ? 0 : it->second.next_id - 1;
}

void EventHub::shutdown() {
  {
    std::lock_guard lock(mu_);
    shutdown_ = true;
  }
  cv_.notify_all();
}

bool EventHub::is_shut_down() const {
  std::lock_guard lock(mu_);
  return shutdown_;
}

EventHub::Connection::Connection(EventHub& hub, UserId user) : hub_(hub), user_(std::move(user)) {
  std::lock_guard lock(hub_.mu_);
  ++hub_.queues_[user_].streams;
}

EventHub::Connection::~Connection() {
  std::lock_guard lock(hub_.mu_);
  --hub_.queues_[user_].streams;
}

}  // namespace djfam::gateway
