#pragma once

#include <set>
#include <utility>
#include <vector>

#include "affsup/matrix.hpp"

namespace affsup {

struct RankedPair {
  std::size_t i = 0, j = 0;  // i < j
  double score = 0.0;
};

using PairSet = std::set<std::pair<std::size_t, std::size_t>>;

// Off-diagonal entries as unordered pairs, score = max of the two
// orientations, sorted by descending score with ascending (i, j) tie-break.
// At most k pairs are returned.
template <class T>
std::vector<RankedPair> rank_pairs(const Matrix<T>& raw, std::size_t k);

struct RecallQuery {
  std::size_t k = 1;
  std::vector<RankedPair> predicted;  // deduplicated and re-ranked internally
  PairSet truth;                      // unordered pairs
};

// |truth intersected with top-k predictions| / |truth|. Empty truth raises
// UndefinedMetricError.
double recall_at_k(const RecallQuery& q);

// Scene-level recall: fraction of ground-truth pairs covered when the top-k
// ranked proposal pairs are mapped through the proposal->gt match (entries of
// -1 are unmatched).
double covered_recall_at_k(const std::vector<RankedPair>& ranked_proposal_pairs,
                           const std::vector<int>& match, const PairSet& truth,
                           std::size_t k);

// Mean within-class pairwise distance divided by mean between-class pairwise
// distance; lower means better separation.
double scatter_ratio(const MatF& features, const std::vector<int>& labels);

}  // namespace affsup
