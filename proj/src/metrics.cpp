#include "affsup/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "affsup/kernels.hpp"

namespace affsup {

namespace {

bool rank_order(const RankedPair& a, const RankedPair& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.i != b.i) return a.i < b.i;
  return a.j < b.j;
}

}  // namespace

template <class T>
std::vector<RankedPair> rank_pairs(const Matrix<T>& raw, std::size_t k) {
  if (raw.rows() != raw.cols() || raw.rows() < 2)
    throw ShapeError("rank_pairs: need a square matrix with N >= 2");
  const std::size_t n = raw.rows();
  std::vector<RankedPair> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      pairs.push_back({i, j,
                       std::max(static_cast<double>(raw(i, j)),
                                static_cast<double>(raw(j, i)))});
  std::sort(pairs.begin(), pairs.end(), rank_order);
  if (pairs.size() > k) pairs.resize(k);
  return pairs;
}

double recall_at_k(const RecallQuery& q) {
  if (q.truth.empty()) throw UndefinedMetricError("recall_at_k: empty truth");
  if (q.k == 0) throw ConfigError("recall_at_k: k must be >= 1");
  // Deduplicate unordered pairs keeping the higher score.
  std::map<std::pair<std::size_t, std::size_t>, double> best;
  for (const auto& p : q.predicted) {
    const std::pair<std::size_t, std::size_t> key =
        std::minmax(p.i, p.j);
    auto [it, inserted] = best.emplace(key, p.score);
    if (!inserted && p.score > it->second) it->second = p.score;
  }
  std::vector<RankedPair> ranked;
  ranked.reserve(best.size());
  for (const auto& [key, score] : best)
    ranked.push_back({key.first, key.second, score});
  std::sort(ranked.begin(), ranked.end(), rank_order);
  if (ranked.size() > q.k) ranked.resize(q.k);
  std::size_t hits = 0;
  for (const auto& p : ranked)
    if (q.truth.count({p.i, p.j})) ++hits;
  return static_cast<double>(hits) / q.truth.size();
}

double covered_recall_at_k(const std::vector<RankedPair>& ranked_proposal_pairs,
                           const std::vector<int>& match, const PairSet& truth,
                           std::size_t k) {
  if (truth.empty())
    throw UndefinedMetricError("covered_recall_at_k: empty truth");
  PairSet covered;
  const std::size_t limit = std::min(k, ranked_proposal_pairs.size());
  for (std::size_t r = 0; r < limit; ++r) {
    const auto& p = ranked_proposal_pairs[r];
    const int a = match[p.i];
    const int b = match[p.j];
    if (a < 0 || b < 0 || a == b) continue;
    const std::pair<std::size_t, std::size_t> key = std::minmax(
        static_cast<std::size_t>(a), static_cast<std::size_t>(b));
    if (truth.count(key)) covered.insert(key);
  }
  return static_cast<double>(covered.size()) / truth.size();
}

double scatter_ratio(const MatF& features, const std::vector<int>& labels) {
  if (features.rows() != labels.size() || features.rows() < 2)
    throw ShapeError("scatter_ratio: bad inputs");
  double within = 0.0, between = 0.0;
  std::size_t n_within = 0, n_between = 0;
  for (std::size_t i = 0; i < features.rows(); ++i)
    for (std::size_t j = i + 1; j < features.rows(); ++j) {
      const double d = std::sqrt(static_cast<double>(
          kernels::sq_l2(features.row(i), features.row(j), features.cols())));
      if (labels[i] == labels[j]) {
        within += d;
        ++n_within;
      } else {
        between += d;
        ++n_between;
      }
    }
  if (n_within == 0 || n_between == 0)
    throw UndefinedMetricError("scatter_ratio: need within and between pairs");
  return (within / n_within) / (between / n_between);
}

template std::vector<RankedPair> rank_pairs(const MatF&, std::size_t);
template std::vector<RankedPair> rank_pairs(const MatD&, std::size_t);

}  // namespace affsup
