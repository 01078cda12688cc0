#include <algorithm>
#include <random>
#include <set>

#include "criteria.hpp"
#include "djfam/catalog/catalog.hpp"
#include "djfam/recommender/recommender.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace djfam::acceptance {

namespace {

std::vector<double> as_vector(const dsp::FeatureValues<double>& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

Outcome top_k_oracle() {
  constexpr int kSongs = 1200;
  const std::string fingerprint = dsp::FeatureConfig{}.fingerprint();
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> normal(0.0, 1.0);

  catalog::CatalogOptions opts;
  opts.playlist_cap = 200;
  catalog::Catalog cat(std::make_unique<catalog::MemoryRecordStore>(), opts);
  std::vector<std::string> ids;
  std::vector<std::vector<double>> vectors;
  for (int i = 0; i < kSongs; ++i) {
    dsp::FeatureVectord v;
    v.config_fingerprint = fingerprint;
    if (i >= 20 && rng() % 8 == 0) {
      v.values = cat.song(ids[rng() % ids.size()]).features.values;  // exact duplicate: forces ties
    } else {
      for (int d = 0; d < dsp::kFeatureDims; ++d) v.values[d] = (d % 24 == 0) ? 7.5 : normal(rng) * (1 + d % 5);
    }
    catalog::PreparedSong p;
    p.song.id = "song-" + std::to_string(100000 + (i * 7919) % 900000);  // ids unrelated to insertion order
    p.song.meta.song_id = p.song.id;
    p.song.meta.title = p.song.id;
    p.song.meta.artist = "a";
    p.song.meta.release_year = 2000;
    p.song.content_key = p.song.id;
    p.song.features = v;
    cat.commit(std::move(p));
    ids.push_back("song-" + std::to_string(100000 + (i * 7919) % 900000));
    vectors.push_back(as_vector(v.values));
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;

  const recommender::Recommender rec(cat);
  Checks checks;
  int ties_exercised = 0, k5_trials = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto shuffled = ids;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const std::size_t partner_n = 1 + rng() % 200;
    const std::size_t listener_n = rng() % 101;
    std::vector<std::string> partner(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(partner_n));
    std::vector<std::string> listener(shuffled.begin() + static_cast<std::ptrdiff_t>(partner_n),
                                      shuffled.begin() + static_cast<std::ptrdiff_t>(partner_n + listener_n));
    // Sometimes a song sits in both playlists.
    if (!listener.empty() && rng() % 4 == 0) listener.push_back(partner[rng() % partner.size()]);
    cat.set_playlist("listener", listener);
    cat.set_playlist("partner", partner);

    std::string source;
    switch (rng() % 3) {
      case 0: source = listener.empty() ? shuffled.back() : listener[rng() % listener.size()]; break;
      case 1: source = partner[rng() % partner.size()]; break;
      default: source = shuffled.back();
    }
    std::set<std::string> exclusions;
    for (std::uint64_t e = rng() % 4; e > 0; --e) exclusions.insert(partner[rng() % partner.size()]);
    const std::size_t k = rng() % 3 == 0 ? 5 : rng() % 13;

    // Oracle: z-score over the distinct union, score every eligible candidate, full sort.
    std::set<std::string> scope(listener.begin(), listener.end());
    scope.insert(partner.begin(), partner.end());
    std::vector<std::vector<double>> corpus;
    for (const auto& id : scope) corpus.push_back(vectors[index[id]]);
    const test::ReferenceStandardizer z(corpus);
    const auto q = z(vectors[index[source]]);
    std::vector<test::Scored> scored;
    for (const auto& id : partner) {
      if (id == source || exclusions.contains(id)) continue;
      scored.push_back({id, test::reference_cosine(q, z(vectors[index[id]]))});
    }
    const auto want = test::brute_force_top_k(scored, k);
    const auto got = rec.recommend(source, "listener", "partner", k, exclusions);

    for (std::size_t i = 1; i < want.size(); ++i) ties_exercised += want[i].similarity == want[i - 1].similarity;
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) {
      same = got[i].candidate_song_id == want[i].id && got[i].rank == static_cast<int>(i + 1) &&
             got[i].source_song_id == source && std::abs(got[i].similarity - want[i].similarity) <= 1e-12;
    }
    checks.expect(same, "trial " + std::to_string(trial) + " differs from brute force");
    if (k == 5 && scored.size() >= 5) {
      ++k5_trials;
      checks.expect(got.size() == 5, "k=5 returned " + std::to_string(got.size()));
    }
  }

  // Duplicate audio under a different id and metadata, ingested from real files.
  test::TempDir dir;
  catalog::Catalog audio_cat(std::make_unique<catalog::MemoryRecordStore>());
  const auto parent = test::ingest_synthetic(audio_cat, dir, "p", 10, 700, 2.0, 1980);
  auto child = test::ingest_synthetic(audio_cat, dir, "c", 10, 800, 2.0, 2015);
  const auto dup = audio_cat.ingest_song(dir / "p-3.wav", test::song_meta("dup", "Cover Artist", 2020)).song_id;
  child.push_back(dup);
  audio_cat.set_playlist("parent", parent);
  audio_cat.set_playlist("child", child);
  const auto dup_recs = recommender::Recommender(audio_cat).recommend(parent[3], "parent", "child", 5);
  const bool dup_first = !dup_recs.empty() && dup_recs[0].candidate_song_id == dup && dup_recs[0].rank == 1 &&
                         std::abs(dup_recs[0].similarity - 1.0) <= 1e-9;
  checks.expect(dup_first, "duplicate audio not ranked first with similarity 1");
  checks.expect(dup_recs.size() == 5, "k=5 on an 11-song pool returned " + std::to_string(dup_recs.size()));

  std::ostringstream os;
  os << "1000 trials (pools <= 200, " << ties_exercised << " adjacent ties, " << k5_trials
     << " k=5 trials) vs brute force; duplicate audio rank 1, similarity 1 - "
     << (dup_recs.empty() ? 1.0 : 1.0 - dup_recs[0].similarity) << "; " << checks.summary();
  return {checks.ok(), os.str()};
}

}  // namespace djfam::acceptance
