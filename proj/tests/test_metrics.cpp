#include <doctest.h>

#include "affsup/metrics.hpp"
#include "affsup/rng.hpp"

using namespace affsup;

TEST_CASE("rank_pairs examples") {
  // N=2: a single pair regardless of k
  const MatD two(2, 2, {0.0, 3.0, -1.0, 0.0});
  const auto one = rank_pairs(two, 100);
  REQUIRE(one.size() == 1);
  CHECK(one[0].i == 0);
  CHECK(one[0].j == 1);
  CHECK(one[0].score == doctest::Approx(3.0));  // symmetrized by max

  // global max entry tops the list
  MatD inc(3, 3);
  double v = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) inc(i, j) = v += 1.0;
  const auto top = rank_pairs(inc, 1);
  REQUIRE(top.size() == 1);
  CHECK(top[0].i == 1);  // entry (2,1)=8 symmetrizes into pair (1,2)
  CHECK(top[0].j == 2);

  // equal scores -> ascending lexicographic order
  const auto ties = rank_pairs(MatD(4, 4, 1.0), 6);
  REQUIRE(ties.size() == 6);
  CHECK(ties[0].i == 0);
  CHECK(ties[0].j == 1);
  CHECK(ties[1].j == 2);
  CHECK(ties[2].j == 3);
  CHECK(ties[3].i == 1);
  CHECK(ties[5].i == 2);

  CHECK_THROWS_AS(rank_pairs(MatD(1, 1), 3), ShapeError);
}

TEST_CASE("rank_pairs is invariant under constant shifts") {
  RngStream rng(3);
  MatD raw(6, 6);
  rng.fill_uniform(raw, -2.0, 2.0);
  const auto base = rank_pairs(raw, 15);
  MatD shifted = raw;
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted.data()[i] += 123.0;
  const auto moved = rank_pairs(shifted, 15);
  REQUIRE(base.size() == moved.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(base[i].i == moved[i].i);
    CHECK(base[i].j == moved[i].j);
  }
}

TEST_CASE("recall_at_k examples") {
  RecallQuery q;
  q.predicted = {{0, 1, 5.0}, {1, 2, 4.0}, {0, 3, 3.0}};
  q.truth = {{0, 1}, {1, 2}};
  q.k = 3;
  CHECK(recall_at_k(q) == doctest::Approx(1.0));  // truth fully covered
  q.k = 1;
  CHECK(recall_at_k(q) == doctest::Approx(0.5));  // top pair only
  q.truth = {{2, 3}};
  q.k = 3;
  CHECK(recall_at_k(q) == doctest::Approx(0.0));  // disjoint

  q.truth.clear();
  CHECK_THROWS_AS(recall_at_k(q), UndefinedMetricError);
}

TEST_CASE("recall_at_k dedupes unordered pairs keeping the max score") {
  RecallQuery q;
  q.predicted = {{1, 0, 1.0}, {0, 1, 9.0}, {2, 1, 5.0}};
  q.truth = {{1, 2}};
  q.k = 1;
  // (0,1) keeps score 9 and outranks (1,2); top-1 misses the truth
  CHECK(recall_at_k(q) == doctest::Approx(0.0));
  q.k = 2;
  CHECK(recall_at_k(q) == doctest::Approx(1.0));
}

TEST_CASE("recall_at_k is monotone in k") {
  RngStream rng(17);
  RecallQuery q;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = i + 1; j < 10; ++j)
      q.predicted.push_back({i, j, rng.uniform()});
  for (int t = 0; t < 8; ++t)
    q.truth.insert(std::minmax<std::size_t>(rng.below(10), 1 + rng.below(9)));
  double prev = 0.0;
  for (std::size_t k = 1; k <= q.predicted.size(); ++k) {
    q.k = k;
    const double r = recall_at_k(q);
    CHECK(r >= prev);
    prev = r;
  }
  CHECK(prev == doctest::Approx(1.0));
}

TEST_CASE("covered_recall_at_k maps proposal pairs through the match") {
  // proposals 0,1 -> gt 0; proposals 2,3 -> gt 1; proposal 4 unmatched
  const std::vector<int> match = {0, 0, 1, 1, -1};
  const PairSet truth = {{0, 1}};
  std::vector<RankedPair> ranked = {
      {0, 1, 9.0},  // same gt, no relation
      {0, 4, 8.0},  // unmatched
      {1, 2, 7.0},  // covers (0,1)
      {2, 3, 6.0},
  };
  CHECK(covered_recall_at_k(ranked, match, truth, 2) == doctest::Approx(0.0));
  CHECK(covered_recall_at_k(ranked, match, truth, 3) == doctest::Approx(1.0));
  CHECK_THROWS_AS(covered_recall_at_k(ranked, match, {}, 3),
                  UndefinedMetricError);
}

TEST_CASE("scatter_ratio prefers separated classes") {
  // tight clusters far apart
  MatF tight(4, 2, {0.0f, 0.0f, 0.1f, 0.0f, 5.0f, 5.0f, 5.1f, 5.0f});
  const std::vector<int> labels = {0, 0, 1, 1};
  const double separated = scatter_ratio(tight, labels);
  // interleaved points
  MatF mixed(4, 2, {0.0f, 0.0f, 5.0f, 5.0f, 0.1f, 0.0f, 5.1f, 5.0f});
  const double blended = scatter_ratio(mixed, labels);
  CHECK(separated < blended);
  CHECK(separated < 0.1);

  CHECK_THROWS_AS(scatter_ratio(tight, {0, 0, 0, 0}), UndefinedMetricError);
}
