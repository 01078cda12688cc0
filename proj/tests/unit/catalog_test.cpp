#include <fstream>

#include <gtest/gtest.h>

#include "djfam/common/error.hpp"
#include "djfam/catalog/catalog.hpp"
#include "fixtures.hpp"

namespace djfam::catalog {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kIo;
}

TEST(FileRecordStore, AppendLoadAndRewrite) {
  test::TempDir dir;
  const auto path = dir / "log.jsonl";
  {
    FileRecordStore store(path);
    EXPECT_TRUE(store.load().empty());
    store.append({{"n", 1}});
    store.append({{"n", 2}});
  }
  FileRecordStore store(path);
  auto records = store.load();
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[1]["n"], 2);
  store.rewrite({{{"n", 9}}});
  store.append({{"n", 10}});
  records = FileRecordStore(path).load();
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0]["n"], 9);
  EXPECT_EQ(records[1]["n"], 10);
}

TEST(FileRecordStore, IgnoresTornTail) {
  test::TempDir dir;
  const auto path = dir / "log.jsonl";
  {
    std::ofstream out(path);
    out << "{\"n\":1}\n{\"n\":2}\n{\"n\":";
  }
  EXPECT_EQ(FileRecordStore(path).load().size(), 2u);
}

TEST(FileRecordStore, CorruptMiddleLineIsAnError) {
  test::TempDir dir;
  const auto path = dir / "log.jsonl";
  {
    std::ofstream out(path);
    out << "{\"n\":1}\ngarbage\n{\"n\":2}\n";
  }
  EXPECT_THROW(FileRecordStore(path).load(), Error);
}

class CatalogTest : public ::testing::Test {
 protected:
  CatalogTest() : catalog(std::make_unique<MemoryRecordStore>()) {}

  std::filesystem::path wav(const std::string& name, std::uint64_t seed, double seconds = 0.5) {
    return test::write_clip(dir / name, test::synthetic_song(seed, seconds), audio::SampleFormat::kPcm16);
  }

  test::TempDir dir;
  Catalog catalog;
};

TEST_F(CatalogTest, IngestIsIdempotent) {
  const auto path = wav("a.wav", 1);
  const auto first = catalog.ingest_song(path, test::song_meta("a"));
  EXPECT_TRUE(first.created);
  EXPECT_EQ(first.song_id, "a");
  const auto again = catalog.ingest_song(path, test::song_meta("a"));
  EXPECT_FALSE(again.created);
  EXPECT_EQ(again.song_id, "a");
  EXPECT_EQ(catalog.size(), 1u);

  const auto song = catalog.song("a");
  EXPECT_NEAR(song.duration_s, 0.5, 1e-3);
  EXPECT_EQ(song.features.config_fingerprint, catalog.options().features.fingerprint());
}

TEST_F(CatalogTest, DerivesIdFromContent) {
  auto meta = test::song_meta("x");
  meta.song_id.reset();
  const auto id = catalog.ingest_song(wav("x.wav", 2), meta).song_id;
  EXPECT_EQ(id.rfind("song-", 0), 0u);
  EXPECT_TRUE(catalog.contains(id));
}

TEST_F(CatalogTest, RejectsShortAndUnsupportedAudio) {
  const auto shortest = test::write_clip(dir / "short.wav", test::tone(440, 2047.0 / 22050));
  try {
    catalog.ingest_song(shortest, test::song_meta("s"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    EXPECT_STREQ(e.what(), "audio too short");
  }
  {
    std::ofstream out(dir / "song.mp3", std::ios::binary);
    out << "ID3\x04garbage-not-a-wav-file";
  }
  EXPECT_EQ(code_of([&] { catalog.ingest_song(dir / "song.mp3", test::song_meta("m")); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { catalog.ingest_song(dir / "missing.wav", test::song_meta("m")); }), ErrorCode::kIo);
  EXPECT_EQ(catalog.size(), 0u);
}

TEST_F(CatalogTest, ResamplesOtherRates) {
  const auto clip = test::synthetic_song(3, 0.5, 44100);
  const auto path = test::write_clip(dir / "hi.wav", clip);
  EXPECT_TRUE(catalog.ingest_song(path, test::song_meta("hi")).created);
  EXPECT_NEAR(catalog.song("hi").duration_s, 0.5, 1e-3);
}

TEST_F(CatalogTest, ValidatesMetadata) {
  const auto path = wav("v.wav", 4);
  auto meta = test::song_meta("v");
  meta.title.clear();
  EXPECT_EQ(code_of([&] { catalog.ingest_song(path, meta); }), ErrorCode::kInvalidArgument);
  meta = test::song_meta("v", "A", 1850);
  EXPECT_EQ(code_of([&] { catalog.ingest_song(path, meta); }), ErrorCode::kInvalidArgument);
  meta = test::song_meta("v");
  meta.popularity_rank = 0;
  EXPECT_EQ(code_of([&] { catalog.ingest_song(path, meta); }), ErrorCode::kInvalidArgument);
  meta = test::song_meta("v");
  meta.cover_of = "nope";
  EXPECT_EQ(code_of([&] { catalog.ingest_song(path, meta); }), ErrorCode::kNotFound);

  catalog.ingest_song(path, test::song_meta("v"));
  auto clash = test::song_meta("v", "Other");
  EXPECT_EQ(code_of([&] { catalog.ingest_song(wav("w.wav", 5), clash); }), ErrorCode::kConflict);
}

TEST_F(CatalogTest, ManifestEntries) {
  const nlohmann::json entry = {{"title", "T"}, {"artist", "A"}, {"release_year", 1977}, {"audio_path", "t.wav"},
                                {"cover_of", "orig"}, {"popularity_rank", 2}};
  const auto meta = metadata_from_manifest(entry);
  EXPECT_EQ(meta.title, "T");
  EXPECT_EQ(meta.release_year, 1977);
  EXPECT_EQ(meta.cover_of, "orig");
  EXPECT_FALSE(meta.song_id);
  EXPECT_THROW(metadata_from_manifest({{"title", "T"}}), Error);
  EXPECT_THROW(metadata_from_manifest({{"title", 3}, {"artist", "A"}, {"release_year", 1}, {"audio_path", "x"}}),
               Error);
}

TEST_F(CatalogTest, PlaylistRules) {
  const auto ids = test::ingest_synthetic(catalog, dir, "s", 3, 10, 0.2);
  const auto p = catalog.set_playlist("u", ids);
  EXPECT_EQ(p.song_ids, ids);
  EXPECT_EQ(catalog.playlist("u").song_ids, ids);
  EXPECT_EQ(catalog.playlist_version("u"), 1u);
  EXPECT_TRUE(catalog.playlist("nobody").song_ids.empty());

  try {
    catalog.set_playlist("u", {ids[0], "ghost"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
  EXPECT_EQ(code_of([&] { catalog.set_playlist("u", {ids[0], ids[0]}); }), ErrorCode::kInvalidArgument);
  // Failed updates leave the playlist untouched.
  EXPECT_EQ(catalog.playlist("u").song_ids, ids);
  EXPECT_EQ(catalog.playlist_version("u"), 1u);
  catalog.set_playlist("u", {});
  EXPECT_TRUE(catalog.playlist("u").song_ids.empty());
}

TEST_F(CatalogTest, PlaylistCap) {
  const auto ids = test::ingest_synthetic(catalog, dir, "s", 101, 20, 0.1);
  const std::vector<SongId> hundred(ids.begin(), ids.begin() + 100);
  EXPECT_EQ(catalog.set_playlist("u", hundred).song_ids.size(), 100u);
  EXPECT_EQ(code_of([&] { catalog.set_playlist("u", ids); }), ErrorCode::kInvalidArgument);
}

TEST_F(CatalogTest, MusicInfo) {
  for (int i = 0; i < 5; ++i) {
    auto meta = test::song_meta("hit-" + std::to_string(i), "Band");
    meta.popularity_rank = 5 - i;
    catalog.ingest_song(wav("hit" + std::to_string(i) + ".wav", 30 + i, 0.2), meta);
  }
  auto cover = test::song_meta("cover", "Tribute");
  cover.cover_of = "hit-0";
  catalog.ingest_song(wav("cover.wav", 40, 0.2), cover);

  const auto info = catalog.music_info("hit-0", std::string("cover"), false);
  EXPECT_EQ(info.song.song_id, "hit-0");
  ASSERT_EQ(info.other_hits.size(), 3u);
  EXPECT_EQ(info.other_hits[0].song_id, "hit-4");  // most popular first
  EXPECT_EQ(info.other_hits[2].song_id, "hit-2");
  EXPECT_EQ(info.lyrics_excerpt, "line one\nline two\nline three\nline four");
  EXPECT_TRUE(info.lyrics_truncated);
  EXPECT_FALSE(info.full_lyrics);
  ASSERT_TRUE(info.source_song);
  EXPECT_EQ(info.source_song->song_id, "cover");
  ASSERT_EQ(info.covers.size(), 1u);
  EXPECT_EQ(info.covers[0].song_id, "cover");
  EXPECT_FALSE(info.original);

  const auto c = catalog.music_info("cover", std::nullopt, true);
  ASSERT_TRUE(c.original);
  EXPECT_EQ(c.original->song_id, "hit-0");
  EXPECT_TRUE(c.other_hits.empty());
  ASSERT_TRUE(c.full_lyrics);

  const nlohmann::json j = info;
  EXPECT_EQ(j["read_more"], true);
  EXPECT_TRUE(j["full_lyrics"].is_null());
  EXPECT_EQ(j["other_hits"].size(), 3u);
  EXPECT_THROW(catalog.music_info("nope"), Error);
}

TEST_F(CatalogTest, CoverOfCoverPointsAtOriginal) {
  catalog.ingest_song(wav("o.wav", 50, 0.2), test::song_meta("orig"));
  auto c1 = test::song_meta("c1");
  c1.cover_of = "orig";
  catalog.ingest_song(wav("c1.wav", 51, 0.2), c1);
  auto c2 = test::song_meta("c2");
  c2.cover_of = "c1";
  catalog.ingest_song(wav("c2.wav", 52, 0.2), c2);
  EXPECT_EQ(catalog.song("c2").meta.cover_of, "orig");
  EXPECT_EQ(catalog.music_info("orig").covers.size(), 2u);
}

TEST(CatalogPersistence, ReloadsAndCompacts) {
  test::TempDir dir;
  const auto path = dir / "catalog.jsonl";
  std::vector<SongId> ids;
  Song before;
  {
    Catalog catalog(std::make_unique<FileRecordStore>(path));
    ids = test::ingest_synthetic(catalog, dir, "s", 4, 60, 0.2);
    auto cover = test::song_meta("cover");
    cover.cover_of = ids[0];
    catalog.ingest_song(test::write_clip(dir / "cover.wav", test::synthetic_song(99, 0.2)), cover);
    for (int i = 0; i < 100; ++i) catalog.set_playlist("u", {ids[static_cast<std::size_t>(i % 4)]});
    catalog.set_playlist("u", ids);
    before = catalog.song(ids[1]);
  }
  std::size_t lines = 0;
  {
    std::ifstream in(path);
    for (std::string l; std::getline(in, l);) ++lines;
  }
  EXPECT_LT(lines, 80u);  // well below the 105 records written

  Catalog reloaded(std::make_unique<FileRecordStore>(path));
  EXPECT_EQ(reloaded.size(), 5u);
  EXPECT_EQ(reloaded.playlist("u").song_ids, ids);
  EXPECT_EQ(reloaded.song("cover").meta.cover_of, ids[0]);
  const auto after = reloaded.song(ids[1]);
  EXPECT_EQ(after.features.values, before.features.values);  // exact round trip
  EXPECT_EQ(after.content_key, before.content_key);
  reloaded.compact();
  EXPECT_EQ(Catalog(std::make_unique<FileRecordStore>(path)).size(), 5u);
}

}  // namespace
}  // namespace djfam::catalog
