#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "djfam/common/error.hpp"
#include "djfam/messaging/messaging.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace djfam::messaging {
namespace {

constexpr TimestampMs kMinute = 60'000;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kIo;
}

class RecordingObserver : public MessageObserver {
 public:
  void message_appended(const ThreadInfo&, const Message& m) override { appended.push_back(m); }
  void notify(const Notification& n) override { notifications.push_back(n); }
  bool is_connected(const UserId& user) const override { return connected.contains(user); }

  std::vector<Message> appended;
  std::vector<Notification> notifications;
  std::set<UserId> connected;
};

class MessagingTest : public ::testing::Test {
 protected:
  MessagingTest() : messaging(std::make_unique<catalog::MemoryRecordStore>(), clock.clock()) {
    messaging.ensure_thread({"d1", "mom", "kid"});
  }

  void issue(const UserId& user, const SongId& source, const SongId& candidate, double sim = 0.9) {
    messaging.record_issued(user, {{source, candidate, sim, 1}});
  }

  test::ManualClock clock;
  Messaging messaging;
};

TEST_F(MessagingTest, SequenceIsGapFree) {
  for (int i = 0; i < 5; ++i) {
    const auto m = messaging.post_message("d1", i % 2 ? "kid" : "mom", "c" + std::to_string(i), "hi");
    EXPECT_EQ(m.seq, i + 1);
  }
  EXPECT_EQ(messaging.messages("d1").size(), 5u);
}

TEST_F(MessagingTest, DeduplicatesPerSender) {
  const auto a = messaging.post_message("d1", "mom", "x", "hello");
  clock.advance(1000);
  const auto b = messaging.post_message("d1", "mom", "x", "hello again");
  EXPECT_EQ(a, b);
  // The same client id from the other member is a different message.
  const auto c = messaging.post_message("d1", "kid", "x", "hey");
  EXPECT_EQ(c.seq, 2);
  EXPECT_EQ(messaging.messages("d1").size(), 2u);
}

TEST_F(MessagingTest, RejectsOutsidersAndBadBodies) {
  EXPECT_EQ(code_of([&] { messaging.post_message("d1", "stranger", "c", "hi"); }), ErrorCode::kPermissionDenied);
  EXPECT_EQ(code_of([&] { messaging.post_message("nope", "mom", "c", "hi"); }), ErrorCode::kNotFound);
  EXPECT_EQ(code_of([&] { messaging.post_message("d1", "mom", "c", ""); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { messaging.post_message("d1", "mom", "", "hi"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { messaging.post_message("d1", "mom", "c", std::string(4001, 'a')); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(messaging.post_message("d1", "mom", "c", std::string(4000, 'a')).seq, 1);
  // 4000 two-byte characters are still 4000 characters.
  std::string umlauts;
  for (int i = 0; i < 4000; ++i) umlauts += "\xc3\xbc";
  EXPECT_EQ(messaging.post_message("d1", "mom", "u", umlauts).seq, 2);
  EXPECT_EQ(code_of([&] { messaging.fetch_thread("d1", "stranger", 0); }), ErrorCode::kPermissionDenied);
}

TEST_F(MessagingTest, ThreadMembershipIsFixed) {
  EXPECT_NO_THROW(messaging.ensure_thread({"d1", "mom", "kid"}));
  EXPECT_EQ(code_of([&] { messaging.ensure_thread({"d1", "mom", "other"}); }), ErrorCode::kConflict);
  EXPECT_EQ(code_of([&] { messaging.ensure_thread({"d2", "same", "same"}); }), ErrorCode::kInvalidArgument);
}

TEST_F(MessagingTest, ServerTimeIsMonotonic) {
  messaging.post_message("d1", "mom", "a", "1");
  clock.advance(-5000);
  const auto m = messaging.post_message("d1", "mom", "b", "2");
  EXPECT_EQ(m.server_time, messaging.messages("d1")[0].server_time);
}

TEST_F(MessagingTest, ShareRequiresIssuedRecommendation) {
  EXPECT_EQ(code_of([&] { messaging.share_recommendation("d1", "mom", "s1", "c1", "m1"); }),
            ErrorCode::kPermissionDenied);
  issue("mom", "s1", "c1", 0.75);
  // Issued to mom, not to kid.
  EXPECT_EQ(code_of([&] { messaging.share_recommendation("d1", "kid", "s1", "c1", "k1"); }),
            ErrorCode::kPermissionDenied);
  const auto m = messaging.share_recommendation("d1", "mom", "s1", "c1", "m1");
  EXPECT_EQ(m.kind, MessageKind::kSongShare);
  ASSERT_TRUE(m.share);
  EXPECT_EQ(m.share->recommended_song_id, "c1");
  EXPECT_EQ(m.share->source_song_id, "s1");
  EXPECT_DOUBLE_EQ(m.share->similarity, 0.75);
  // Sharing again under a new client id is a second message; replaying is not.
  EXPECT_EQ(messaging.share_recommendation("d1", "mom", "s1", "c1", "m2").seq, 2);
  EXPECT_EQ(messaging.share_recommendation("d1", "mom", "s1", "c1", "m1").seq, 1);
}

TEST_F(MessagingTest, IssuedRecommendationsExpire) {
  issue("mom", "s1", "c1");
  clock.advance(kRecommendationTtlMs);
  EXPECT_TRUE(messaging.find_issued("mom", "s1", "c1"));
  clock.advance(1);
  EXPECT_FALSE(messaging.find_issued("mom", "s1", "c1"));
  EXPECT_EQ(code_of([&] { messaging.share_recommendation("d1", "mom", "s1", "c1", "m1"); }),
            ErrorCode::kPermissionDenied);
  issue("mom", "s1", "c1");  // reissue refreshes
  EXPECT_NO_THROW(messaging.share_recommendation("d1", "mom", "s1", "c1", "m1"));
}

TEST_F(MessagingTest, FetchSinceAndReadMarks) {
  for (int i = 0; i < 4; ++i) messaging.post_message("d1", "mom", std::to_string(i), "m" + std::to_string(i));
  const auto tail = messaging.fetch_thread("d1", "kid", 2);
  ASSERT_EQ(tail.size(), 2u);
  EXPECT_EQ(tail[0].seq, 3);
  EXPECT_TRUE(tail[0].read_by.contains("kid"));
  EXPECT_TRUE(messaging.fetch_thread("d1", "kid", 4).empty());
  EXPECT_EQ(messaging.fetch_thread("d1", "kid", -3).size(), 4u);
  EXPECT_EQ(messaging.fetch_thread("d1", "kid", 100).size(), 0u);
}

TEST_F(MessagingTest, NotificationsFollowPresence) {
  RecordingObserver obs;
  messaging.set_observer(&obs);
  obs.connected = {"kid"};
  messaging.post_message("d1", "mom", "a", "text while kid online");
  EXPECT_TRUE(obs.notifications.empty());
  obs.connected.clear();
  messaging.post_message("d1", "mom", "b", "text while kid offline");
  ASSERT_EQ(obs.notifications.size(), 1u);
  EXPECT_EQ(obs.notifications[0].recipient, "kid");

  obs.connected = {"kid"};
  issue("mom", "s", "c");
  messaging.share_recommendation("d1", "mom", "s", "c", "share");
  ASSERT_EQ(obs.notifications.size(), 2u);  // shares always notify
  EXPECT_EQ(obs.notifications[1].message.kind, MessageKind::kSongShare);
  EXPECT_EQ(obs.appended.size(), 3u);

  messaging.post_message("d1", "mom", "a", "replay");
  EXPECT_EQ(obs.appended.size(), 3u);  // duplicates publish nothing
}

TEST(MessagingPersistence, ReplaysLog) {
  test::TempDir dir;
  test::ManualClock clock;
  const auto path = dir / "messages.jsonl";
  {
    Messaging m(std::make_unique<catalog::FileRecordStore>(path), clock.clock());
    m.ensure_thread({"d1", "mom", "kid"});
    m.post_message("d1", "mom", "a", "hi");
    m.record_issued("kid", {{"s", "c", 0.5, 1}});
    m.share_recommendation("d1", "kid", "s", "c", "b");
    m.fetch_thread("d1", "kid", 0);
  }
  Messaging m(std::make_unique<catalog::FileRecordStore>(path), clock.clock());
  const auto msgs = m.messages("d1");
  ASSERT_EQ(msgs.size(), 2u);
  EXPECT_TRUE(msgs[0].read_by.contains("kid"));
  EXPECT_FALSE(msgs[0].read_by.contains("mom"));
  EXPECT_EQ(msgs[1].share->similarity, 0.5);
  EXPECT_EQ(m.post_message("d1", "mom", "a", "dup").seq, 1);  // dedup survives restart
  EXPECT_EQ(m.post_message("d1", "mom", "z", "new").seq, 3);
  EXPECT_TRUE(m.find_issued("kid", "s", "c"));
}

TEST(MessageJson, RoundTrip) {
  Message m;
  m.seq = 3;
  m.sender = "kid";
  m.server_time = 42;
  m.client_msg_id = "x";
  m.kind = MessageKind::kSongShare;
  m.share = SongShare{"c", "s", 0.25};
  m.read_by = {"mom"};
  const nlohmann::json j = m;
  EXPECT_EQ(j["kind"], "song_share");
  EXPECT_EQ(j.get<Message>(), m);
}

// Sessions

std::vector<TimedSeq> timeline(const std::vector<TimestampMs>& times) {
  std::vector<TimedSeq> out;
  for (std::size_t i = 0; i < times.size(); ++i) out.push_back({static_cast<std::int64_t>(i + 1), times[i]});
  return out;
}

TEST(Sessions, GapFixture) {
  // Gaps of 1 min, 29 min, 31 min and 2 h: the last two open new sessions.
  const TimestampMs t0 = 1'000'000;
  const auto msgs = timeline({t0, t0 + kMinute, t0 + 30 * kMinute, t0 + 61 * kMinute, t0 + 181 * kMinute});
  const auto report = count_sessions(msgs, {0, t0 + 1000 * kMinute});
  EXPECT_EQ(report.session_count(), 3u);
  EXPECT_EQ(report.sessions[0], (SessionSpan{1, 3, 3}));
  EXPECT_EQ(report.sessions[1], (SessionSpan{4, 4, 1}));
  EXPECT_EQ(report.sessions[2], (SessionSpan{5, 5, 1}));
}

TEST(Sessions, ThresholdIsExclusive) {
  const auto msgs = timeline({0, 1800 * 1000, 1800 * 1000 * 2 + 1});
  EXPECT_EQ(count_sessions(msgs, {0, 10'000'000}).session_count(), 2u);
  EXPECT_EQ(count_sessions(msgs, {0, 10'000'000}, 1801).session_count(), 1u);
}

TEST(Sessions, EmptyAndWindowed) {
  EXPECT_EQ(count_sessions({}, {0, 100}).session_count(), 0u);
  const auto msgs = timeline({0, 10, 20});
  EXPECT_EQ(count_sessions(msgs, {10, 20}).session_count(), 1u);
  EXPECT_EQ(count_sessions(msgs, {10, 20}).sessions[0], (SessionSpan{2, 2, 1}));
  EXPECT_EQ(count_sessions(msgs, {30, 40}).session_count(), 0u);
  EXPECT_THROW(count_sessions(msgs, {0, 10}, -1), Error);
}

TEST(Sessions, MatchesLinearScan) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = static_cast<int>(rng() % 80);
    std::vector<TimestampMs> times;
    TimestampMs t = static_cast<TimestampMs>(rng() % 1'000'000);
    for (int i = 0; i < n; ++i) {
      // Mix of short gaps, gaps near the threshold and long ones.
      const std::uint64_t kind = rng() % 3;
      t += kind == 0 ? static_cast<TimestampMs>(rng() % 60'000)
                     : kind == 1 ? 1'790'000 + static_cast<TimestampMs>(rng() % 20'001)
                                 : static_cast<TimestampMs>(rng() % 20'000'000);
      times.push_back(t);
    }
    const std::int64_t gap_s = 1800;
    const auto got = count_sessions(timeline(times), {std::numeric_limits<TimestampMs>::min(),
                                                      std::numeric_limits<TimestampMs>::max()}, gap_s);
    ASSERT_EQ(static_cast<int>(got.session_count()), test::linear_scan_sessions(times, gap_s * 1000)) << trial;
    std::int64_t covered = 0;
    for (const auto& s : got.sessions) covered += s.message_count;
    EXPECT_EQ(covered, n);
  }
}

TEST(Sessions, Json) {
  const nlohmann::json j = count_sessions(timeline({0, 5}), {0, 100}, 60);
  EXPECT_EQ(j["session_count"], 1);
  EXPECT_EQ(j["gap_threshold_s"], 60);
  EXPECT_EQ(j["window"]["end"], 100);
}

}  // namespace
}  // namespace djfam::messaging
