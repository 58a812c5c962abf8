#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "minmean/deviation.hpp"
#include "minmean/error.hpp"

using namespace minmean;

namespace {

double h_inverse_bisect(double x) {
  double lo = 1.0, hi = 2.0 * x + 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid - std::log(mid) < x ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double T_reference(double x) {
  const double zeta2 = M_PI * M_PI / 6;
  return 2.0 * h_inverse_bisect(1.0 + (h_inverse_bisect(1.0 + x) + std::log(zeta2)) / 2.0);
}

RunState gaussian_state(std::vector<std::int64_t> n, std::vector<double> means, double gamma = 0.0) {
  std::vector<double> sums(n.size());
  for (std::size_t a = 0; a < n.size(); ++a) sums[a] = means[a] * static_cast<double>(n[a]);
  return RunState::from_statistics(FamilyModel::gaussian(), gamma, std::move(n), std::move(sums));
}

}  // namespace

TEST_CASE("h and its inverse") {
  CHECK(h_inverse(1.0) == 1.0);
  CHECK(h_inverse(3.9957) == doctest::Approx(5.744).epsilon(1e-3));
  CHECK(h_inverse(3.9957) == doctest::Approx(h_inverse_bisect(3.9957)).epsilon(1e-12));
  CHECK_THROWS_AS(h_inverse(0.5), DomainError);
  CHECK_THROWS_AS(h(0.5), DomainError);
  for (double lx = 0.0; lx <= 6.0; lx += 0.05) {
    const double x = std::pow(10.0, lx);
    const double u = h_inverse(x);
    CHECK(std::abs(h(u) - x) <= 1e-10 * std::max(1.0, x));
    if (x > 1) CHECK(u <= x + std::log(x + std::sqrt(2 * (x - 1))) + 1e-12);
  }
}

TEST_CASE("threshold T") {
  CHECK(threshold_T(std::log(20.0)) == doctest::Approx(11.79).epsilon(1e-3));
  CHECK(threshold_T(std::log(200.0)) == doctest::Approx(14.95).epsilon(1e-3));
  CHECK_THROWS_AS(threshold_T(0.03), DomainError);
  double prev = 0.0;
  for (double x = 0.04; x < 60; x *= 1.1) {
    const double t = threshold_T(x);
    CHECK(t == doctest::Approx(T_reference(x)).epsilon(1e-10));
    CHECK(t >= 6.0);
    CHECK(t >= prev);
    prev = t;
  }
  CHECK(stopping_threshold(1, std::log(20.0)) == doctest::Approx(11.79).epsilon(1e-3));
  CHECK(stopping_threshold(100, std::log(200.0)) == doctest::Approx(20.12).epsilon(1e-3));
}

TEST_CASE("subset priors") {
  const auto box = SubsetPrior::singletons(4);
  CHECK(box.weight(std::vector<std::size_t>{2}) == doctest::Approx(0.25));
  CHECK(box.weight(std::vector<std::size_t>{1, 2}) == 0.0);

  const auto agg = SubsetPrior::size_uniform(5);
  double total = 0.0;
  for (unsigned mask = 1; mask < 32; ++mask) {
    Subset s;
    for (std::size_t a = 0; a < 5; ++a) if (mask >> a & 1u) s.push_back(a);
    total += agg.weight(s);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(agg.weight(std::vector<std::size_t>{0, 3}) == doctest::Approx(1.0 / 50));

  const auto custom = SubsetPrior::custom(3, {{{0, 1}, 0.5}, {{2}, 0.5}});
  CHECK(custom.weight(std::vector<std::size_t>{1, 0}) == doctest::Approx(0.5));
  CHECK(custom.weight(std::vector<std::size_t>{0}) == 0.0);
  CHECK_THROWS(SubsetPrior::custom(3, {{{0}, 0.4}}));
  CHECK_THROWS(SubsetPrior::custom(3, {{{5}, 1.0}}));
}

TEST_CASE("aggregate statistics") {
  const auto st = gaussian_state({3, 5}, {0.2, 0.4});
  const auto s = aggregate_stat(st, std::vector<std::size_t>{0, 1});
  CHECK(s.pooled_count == 8);
  CHECK(s.pooled_mean == doctest::Approx(0.325));
  const auto r = aggregate_stat(st, std::vector<std::size_t>{1, 0});
  CHECK(r.pooled_mean == doctest::Approx(s.pooled_mean));
  const auto one = aggregate_stat(st, std::vector<std::size_t>{1});
  CHECK(one.pooled_count == 5);
  CHECK(one.pooled_mean == doctest::Approx(0.4));
  CHECK_THROWS_AS(aggregate_stat(st, std::vector<std::size_t>{}), ArgumentError);
  RunState fresh(FamilyModel::gaussian(), 2, 0.0);
  CHECK_THROWS_AS(aggregate_stat(fresh, std::vector<std::size_t>{0}), ArgumentError);
}

TEST_CASE("ucb_min with singleton prior is the smallest box bound") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> m(-1, 1);
  std::uniform_int_distribution<int> n(1, 300);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + trial % 6;
    std::vector<std::int64_t> counts(k);
    std::vector<double> means(k);
    for (std::size_t a = 0; a < k; ++a) {
      counts[a] = n(rng);
      means[a] = m(rng);
    }
    const auto st = gaussian_state(counts, means);
    const double delta = 0.1;
    double box_min = INFINITY, box_max = -INFINITY;
    for (std::size_t a = 0; a < k; ++a) {
      box_min = std::min(box_min, box_bound(st, a, std::log(k / delta), Bound::Upper));
      box_max = std::max(box_max, box_bound(st, a, std::log(k / delta), Bound::Lower));
    }
    const auto prior = SubsetPrior::singletons(k);
    CHECK(ucb_min(st, prior, delta, ConfidenceSide::MinUpper) == doctest::Approx(box_min).epsilon(1e-8));
    CHECK(ucb_min(st, prior, delta, ConfidenceSide::MaxLower) == doctest::Approx(box_max).epsilon(1e-8));
  }
}

TEST_CASE("aggregate bound beats box with many equal arms") {
  std::vector<std::int64_t> counts(14, 36);
  std::vector<double> sums(14);
  for (std::size_t a = 0; a < 10; ++a) sums[a] = 0.1 * 36;
  for (std::size_t a = 10; a < 14; ++a) sums[a] = (0.2 + 0.1 * (a - 10)) * 36;
  const auto st = RunState::from_statistics(FamilyModel::bernoulli(), 0.15, counts, sums);
  const double agg = ucb_min(st, SubsetPrior::size_uniform(14), 0.1, ConfidenceSide::MinUpper);
  const double box = ucb_min(st, SubsetPrior::singletons(14), 0.1, ConfidenceSide::MinUpper);
  CHECK(agg < box);
  CHECK(agg > 0.1);
}

TEST_CASE("aggregate bound is the tightest q keeping every subset statistic under its threshold") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> m(-1, 1);
  std::uniform_int_distribution<int> n(1, 200);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t k = 2 + trial % 5;
    std::vector<std::int64_t> counts(k);
    std::vector<double> means(k);
    for (std::size_t a = 0; a < k; ++a) {
      counts[a] = n(rng);
      means[a] = m(rng);
    }
    const auto st = gaussian_state(counts, means);
    const SubsetThresholds th(SubsetPrior::size_uniform(k), 0.1);
    const double u = ucb_min(st, th, ConfidenceSide::MinUpper, SubsetSearch::Exhaustive);
    // Direct check over the powerset: at q slightly below u, no subset is rejected; above, one is.
    auto rejected = [&](double q) {
      for (unsigned mask = 1; mask < (1u << k); ++mask) {
        Subset s;
        for (std::size_t a = 0; a < k; ++a) if (mask >> a & 1u) s.push_back(a);
        const auto agg = aggregate_stat(st, s);
        const double stat = agg.pooled_count * divergence_directed(st.family(), agg.pooled_mean, q, DivergenceSide::Plus);
        if (stat > stopping_threshold(agg.pooled_count, std::log(1 / (0.1 * th.prior().weight(s))))) return true;
      }
      return false;
    };
    CHECK_FALSE(rejected(u - 1e-6));
    CHECK(rejected(u + 1e-6));
  }
}

TEST_CASE("nested search never fires where brute force does not") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> m(-0.6, 0.4);
  std::uniform_int_distribution<int> n(1, 150);
  int agree = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t k = 1 + trial % 8;
    std::vector<std::int64_t> counts(k);
    std::vector<double> means(k);
    for (std::size_t a = 0; a < k; ++a) {
      counts[a] = n(rng);
      means[a] = m(rng);
    }
    const auto st = gaussian_state(counts, means);
    const SubsetThresholds th(SubsetPrior::size_uniform(k), 0.05);
    const auto nested = search_low_subsets(st, th, 0.0, SubsetSearch::Nested);
    const auto brute = search_low_subsets(st, th, 0.0, SubsetSearch::Exhaustive);
    CHECK(brute.margin >= nested.margin - 1e-12);
    if (nested.fired) CHECK(brute.fired);
    agree += nested.fired == brute.fired;
  }
  CHECK(agree >= 390);
}

TEST_CASE("exhaustive search is limited in size") {
  std::vector<std::int64_t> counts(13, 5);
  std::vector<double> means(13, -0.1);
  const auto st = gaussian_state(counts, means);
  const SubsetThresholds th(SubsetPrior::size_uniform(13), 0.05);
  CHECK_THROWS_AS(search_low_subsets(st, th, 0.0, SubsetSearch::Exhaustive), ArgumentError);
}

TEST_CASE("time-uniform deviation at small scale") {
  // 2000 paths of length 2000, x = ln 10: the crossing fraction stays far below 0.1.
  Rng rng(31);
  std::normal_distribution<double> z;
  const double t_x = threshold_T(std::log(10.0));
  int plus = 0, minus = 0;
  for (int run = 0; run < 2000; ++run) {
    double s = 0.0;
    bool hit_p = false, hit_m = false;
    for (int n = 1; n <= 2000 && !(hit_p && hit_m); ++n) {
      s += z(rng);
      const double mean = s / n;
      const double stat = n * 0.5 * mean * mean - 3 * std::log(1 + std::log(static_cast<double>(n)));
      if (stat >= t_x) (mean < 0 ? hit_p : hit_m) = true;
    }
    plus += hit_p;
    minus += hit_m;
  }
  CHECK(plus / 2000.0 <= 0.1);
  CHECK(minus / 2000.0 <= 0.1);
}
