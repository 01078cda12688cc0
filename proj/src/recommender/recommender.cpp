#include "djfam/recommender/recommender.hpp"

#include <algorithm>

namespace djfam::recommender {

Recommender::Recommender(const catalog::Catalog& catalog, RecommenderOptions options)
    : catalog_(catalog), options_(options) {}

CorpusStats<double> Recommender::dyad_stats(const UserId& a, const UserId& b) const {
  const auto key = std::minmax(a, b);
  const auto va = catalog_.playlist_version(key.first);
  const auto vb = catalog_.playlist_version(key.second);
  {
    std::lock_guard lock(cache_mu_);
    auto it = cache_.find(key);
    if (it != cache_.end() && it->second.version_a == va && it->second.version_b == vb) return it->second.stats;
  }

  std::set<SongId> scope;
  for (const auto& user : {key.first, key.second}) {
    for (const auto& id : catalog_.playlist(user).song_ids) scope.insert(id);
  }
  std::vector<dsp::FeatureVectord> vectors;
  vectors.reserve(scope.size());
  for (const auto& id : scope) vectors.push_back(catalog_.song(id).features);
  std::vector<const dsp::FeatureVectord*> ptrs;
  for (const auto& v : vectors) ptrs.push_back(&v);
  auto stats = corpus_stats<double>(ptrs);

  std::lock_guard lock(cache_mu_);
  cache_[key] = {va, vb, stats};
  return stats;
}

std::vector<Recommendation> Recommender::recommend(const SongId& source, const UserId& listener, const UserId& partner,
                                                   std::size_t k, const std::set<SongId>& exclusions) const {
  const auto source_song = catalog_.song(source);

  std::vector<Candidate<double>> pool;
  std::string fingerprint = source_song.features.config_fingerprint;
  for (const auto& id : catalog_.playlist(partner).song_ids) {
    if (exclusions.contains(id) || (options_.exclude_source && id == source)) continue;
    auto song = catalog_.song(id);
    if (song.features.config_fingerprint != fingerprint) {
      fail(ErrorCode::kInvalidArgument, "song '" + id + "' was featurized with a different config than '" + source + "'");
    }
    pool.push_back({id, song.features.values});
  }
  if (pool.empty() || k == 0) return {};

  FeatureValues<double> query = source_song.features.values;
  if (!options_.raw_cosine) {
    const auto stats = dyad_stats(listener, partner);
    if (stats.config_fingerprint != fingerprint) {
      fail(ErrorCode::kInvalidArgument, "playlists were featurized with a different config than '" + source + "'");
    }
    query = stats.apply(query);
    for (auto& c : pool) c.values = stats.apply(c.values);
  }
  return rank_top_k<double>(source, query, pool, k);
}

void to_json(nlohmann::json& j, const Recommendation& r) {
  j = {{"source_song_id", r.source_song_id},
       {"candidate_song_id", r.candidate_song_id},
       {"similarity", r.similarity},
       {"rank", r.rank}};
}

}  // namespace djfam::recommender
