#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "djfam/catalog/catalog.hpp"
#include "djfam/recommender/similarity.hpp"
#include "json.hpp"

namespace djfam::recommender {

using catalog::SongId;
using catalog::UserId;

inline constexpr std::size_t kDefaultTopK = 5;

struct RecommenderOptions {
  /// Compare raw feature vectors instead of z-scored ones.
  bool raw_cosine = false;
  /// Drop the playing song from its own candidate pool.
  bool exclude_source = true;
};

/// Cross-generation recommendation: candidates come only from the partner's
/// playlist, scored against the playing song.
class Recommender {
 public:
  Recommender(const catalog::Catalog& catalog, RecommenderOptions options = {});

  /// Top-`k` songs from `partner`'s playlist (minus `exclusions` and the
  /// source) for `listener`, who is playing `source`. Vectors are z-scored
  /// over the union of both playlists unless `raw_cosine` is set.
  std::vector<Recommendation> recommend(const SongId& source, const UserId& listener, const UserId& partner,
                                        std::size_t k = kDefaultTopK,
                                        const std::set<SongId>& exclusions = {}) const;

  /// Statistics over the union of both users' playlists; cached until
  /// either playlist changes.
  CorpusStats<double> dyad_stats(const UserId& a, const UserId& b) const;

  const RecommenderOptions& options() const { return options_; }

 private:
  struct CacheEntry {
    std::uint64_t version_a = 0;
    std::uint64_t version_b = 0;
    CorpusStats<double> stats;
  };

  const catalog::Catalog& catalog_;
  RecommenderOptions options_;
  mutable std::mutex cache_mu_;
  mutable std::map<std::pair<UserId, UserId>, CacheEntry> cache_;
};

void to_json(nlohmann::json& j, const Recommendation& r);

}  // namespace djfam::recommender
