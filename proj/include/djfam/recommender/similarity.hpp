#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "djfam/common/error.hpp"
#include "djfam/dsp/stats.hpp"

namespace djfam::recommender {

using dsp::FeatureValues;
using dsp::FeatureVector;
using dsp::kFeatureDims;

/// Dimensions whose corpus std falls below this are treated as constant.
inline constexpr double kDegenerateStd = 1e-12;

/// Per-dimension population mean and std over a set of feature vectors.
template <typename Scalar>
struct CorpusStats {
  FeatureValues<Scalar> mean = FeatureValues<Scalar>::Zero();
  FeatureValues<Scalar> std = FeatureValues<Scalar>::Zero();
  std::string config_fingerprint;

  bool degenerate(int d) const { return !(std[d] >= Scalar(kDegenerateStd)); }

  /// z-scores `v`; degenerate dimensions map to 0.
  FeatureValues<Scalar> apply(const FeatureValues<Scalar>& v) const {
    FeatureValues<Scalar> z;
    for (int d = 0; d < kFeatureDims; ++d) z[d] = degenerate(d) ? Scalar(0) : (v[d] - mean[d]) / std[d];
    return z;
  }
};

template <typename Scalar>
void require_same_fingerprint(std::span<const FeatureVector<Scalar>* const> vectors) {
  for (const auto* v : vectors) {
    if (v->config_fingerprint != vectors.front()->config_fingerprint) {
      fail(ErrorCode::kInvalidArgument, "feature vectors computed with different configs (" +
                                            vectors.front()->config_fingerprint + " vs " +
                                            v->config_fingerprint + ")");
    }
  }
}

template <typename Scalar>
CorpusStats<Scalar> corpus_stats(std::span<const FeatureVector<Scalar>* const> vectors) {
  if (vectors.empty()) fail(ErrorCode::kInvalidArgument, "cannot standardize an empty set");
  require_same_fingerprint(vectors);

  const auto n = static_cast<Eigen::Index>(vectors.size());
  Eigen::Matrix<Scalar, kFeatureDims, Eigen::Dynamic> m(kFeatureDims, n);
  for (Eigen::Index i = 0; i < n; ++i) m.col(i) = vectors[static_cast<std::size_t>(i)]->values;

  CorpusStats<Scalar> stats;
  stats.config_fingerprint = vectors.front()->config_fingerprint;
  stats.mean = m.rowwise().mean();
  stats.std = ((m.colwise() - stats.mean).array().square().rowwise().sum() / Scalar(n)).sqrt();
  return stats;
}

/// z-scores every vector against the statistics of the whole set.
template <typename Scalar>
std::pair<std::vector<FeatureValues<Scalar>>, CorpusStats<Scalar>> standardize(
    std::span<const FeatureVector<Scalar>* const> vectors) {
  auto stats = corpus_stats(vectors);
  std::vector<FeatureValues<Scalar>> out;
  out.reserve(vectors.size());
  for (const auto* v : vectors) out.push_back(stats.apply(v->values));
  return {std::move(out), std::move(stats)};
}

/// dot(a, b) / (|a| |b|); 0 when either vector has zero norm.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) fail(ErrorCode::kInvalidArgument, "cosine similarity of unequal dimensions");
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  return std::clamp(a.dot(b) / (na * nb), Scalar(-1), Scalar(1));
}

struct Recommendation {
  std::string source_song_id;
  std::string candidate_song_id;
  double similarity = 0;
  int rank = 0;

  bool operator==(const Recommendation&) const = default;
};

template <typename Scalar>
struct Candidate {
  std::string song_id;
  FeatureValues<Scalar> values;
};

/// Ranks candidates by similarity to `source` (descending, ties by
/// ascending song id) and returns the first `k` with ranks 1..n.
template <typename Scalar>
std::vector<Recommendation> rank_top_k(const std::string& source_id, const FeatureValues<Scalar>& source,
                                       std::span<const Candidate<Scalar>> candidates, std::size_t k) {
  struct Scored {
    double similarity;
    const std::string* id;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (const auto& c : candidates) scored.push_back({double(cosine_similarity(source, c.values)), &c.song_id});

  const auto better = [](const Scored& a, const Scored& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return *a.id < *b.id;
  };
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), better);

  std::vector<Recommendation> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({source_id, *scored[i].id, scored[i].similarity, static_cast<int>(i + 1)});
  }
  return out;
}

}  // namespace djfam::recommender
