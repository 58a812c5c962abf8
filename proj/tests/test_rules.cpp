#include <doctest.h>

#include <cmath>
#include <vector>

#include "minmean/error.hpp"
#include "minmean/rules.hpp"

using namespace minmean;

namespace {

RunState gaussian_state(std::vector<std::int64_t> n, std::vector<double> means, double gamma = 0.0) {
  std::vector<double> sums(n.size());
  for (std::size_t a = 0; a < n.size(); ++a) sums[a] = means[a] * static_cast<double>(n[a]);
  return RunState::from_statistics(FamilyModel::gaussian(), gamma, std::move(n), std::move(sums));
}

std::vector<double> linspace(double lo, double hi, int k) {
  std::vector<double> v(k);
  for (int i = 0; i < k; ++i) v[i] = lo + (hi - lo) * i / (k - 1);
  return v;
}

}  // namespace

TEST_CASE("LCB selection") {
  CHECK(select_lcb(gaussian_state({5, 5}, {0.3, 0.3}), 0.1) == 0);
  CHECK(select_lcb(gaussian_state({5, 5}, {-5, 0}), 0.1) == 0);
  CHECK(select_lcb(gaussian_state({1, 100}, {0, 0}), 0.1) == 0);
  CHECK(select_lcb(gaussian_state({100, 1}, {0, 0}), 0.1) == 1);
}

TEST_CASE("Thompson selection") {
  Rng rng(1);
  CHECK(select_thompson(gaussian_state({3}, {2.0}), rng) == 0);
  int first = 0;
  const auto st = gaussian_state({1'000'000, 1'000'000}, {-1, 1});
  for (int i = 0; i < 10000; ++i) first += select_thompson(st, rng) == 0;
  CHECK(first >= 9990);
  Rng r1(5), r2(5);
  const auto mixed = gaussian_state({3, 4, 2}, {0.1, 0.0, 0.2});
  for (int i = 0; i < 20; ++i) CHECK(select_thompson(mixed, r1) == select_thompson(mixed, r2));
}

TEST_CASE("round robin plays the least drawn arm") {
  CHECK(select_round_robin(gaussian_state({3, 2, 2}, {0, 0, 0})) == 1);
}

TEST_CASE("Murphy sampling accepts only vectors in the conditioning event") {
  Rng rng(2);
  const auto st = gaussian_state({4, 6, 3}, {0.4, 0.2, 0.9});
  for (auto mode : {MurphyMode::Rejection, MurphyMode::Exact, MurphyMode::Auto}) {
    for (int i = 0; i < 500; ++i) {
      const auto d = murphy_draw(st, default_prior(st.family()), rng, 100000, mode);
      REQUIRE_FALSE(d.fallback);
      REQUIRE(d.theta.size() == 3);
      double m = INFINITY;
      std::size_t arg = 0;
      for (std::size_t a = 0; a < 3; ++a) if (d.theta[a] < m) { m = d.theta[a]; arg = a; }
      CHECK(m < 0.0);
      CHECK(d.arm == arg);
    }
  }
  CHECK(select_murphy(gaussian_state({9}, {3.0}), rng) == 0);
}

TEST_CASE("Murphy sampling on a deep low state accepts immediately") {
  Rng rng(3);
  const auto st = gaussian_state({1000, 1000}, {-2, -1});
  int first = 0;
  for (int i = 0; i < 1000; ++i) first += select_murphy(st, rng) == 0;
  CHECK(first >= 990);
}

TEST_CASE("exact and rejection Murphy draws have the same law") {
  const auto st = gaussian_state({5, 8, 4}, {0.5, 0.3, 0.8});
  const int n = 40000;
  std::vector<double> freq_r(3), freq_e(3);
  double mean_r = 0, mean_e = 0;
  Rng r1(10), r2(20);
  for (int i = 0; i < n; ++i) {
    const auto a = murphy_draw(st, default_prior(st.family()), r1, 1'000'000, MurphyMode::Rejection);
    const auto b = murphy_draw(st, default_prior(st.family()), r2, 1'000'000, MurphyMode::Exact);
    freq_r[a.arm] += 1.0 / n;
    freq_e[b.arm] += 1.0 / n;
    mean_r += a.theta[0] / n;
    mean_e += b.theta[0] / n;
  }
  for (std::size_t a = 0; a < 3; ++a) {
    const double se = std::sqrt(2 * freq_r[a] * (1 - freq_r[a]) / n);
    CHECK(std::abs(freq_r[a] - freq_e[a]) <= 4 * se + 1e-9);
  }
  CHECK(std::abs(mean_r - mean_e) <= 0.02);
}

TEST_CASE("Murphy fallback follows posterior mass below gamma") {
  // P(H_<) is astronomically small, so a cap of 1 is always exhausted.
  const auto st = gaussian_state({50, 50}, {0.6, 0.8});
  Rng rng(4);
  const int n = 20000;
  int first = 0, fallbacks = 0;
  for (int i = 0; i < n; ++i) {
    const auto d = murphy_draw(st, default_prior(st.family()), rng, 1, MurphyMode::Exact);
    fallbacks += d.fallback;
    first += d.arm == 0;
  }
  CHECK(fallbacks == n);
  const double p0 = posterior_prob_below(st.posterior(0, default_prior(st.family())), 0.0);
  const double p1 = posterior_prob_below(st.posterior(1, default_prior(st.family())), 0.0);
  const double target = p0 / (p0 + p1);
  CHECK(std::abs(first / double(n) - target) <= 4 * std::sqrt(target * (1 - target) / n));
}

TEST_CASE("stopping clause examples") {
  CHECK(check_stop_greater(gaussian_state({100}, {1.0}), 0.05));
  CHECK_FALSE(check_stop_greater(gaussian_state({20}, {1.0}), 0.05));
  CHECK_FALSE(check_stop_greater(gaussian_state({1000, 1000}, {-0.1, 5}), 0.05));

  for (auto kind : {StoppingKind::Box, StoppingKind::Aggregate, StoppingKind::GLRT}) {
    const auto r = check_stop_less(gaussian_state({100, 100}, {0.5, 1.0}), 0.05, kind);
    CHECK_FALSE(r.fired);
    CHECK_FALSE(r.witness.has_value());
  }

  // One arm with 100 d+(mu, 0) = 25 among ten arms.
  std::vector<std::int64_t> n(10, 100);
  std::vector<double> means(10, 1.0);
  means[3] = -std::sqrt(0.5);
  const auto st = gaussian_state(n, means);
  const auto box = check_stop_less(st, 0.05, StoppingKind::Box);
  CHECK(box.fired);
  CHECK(box.witness == Subset{3});
  const double agg_threshold = stopping_threshold(100, std::log(2000.0));
  CHECK(agg_threshold == doctest::Approx(5.171 + threshold_T(std::log(2000.0))).epsilon(1e-3));
  CHECK(check_stop_less(st, 0.05, StoppingKind::Aggregate).fired == (25 >= agg_threshold));
}

TEST_CASE("GLRT construction and witness") {
  CHECK_THROWS_AS(StoppingRule(StoppingKind::GLRT, 0.5, 20), ConfigError);
  RuleConfig rc;
  rc.stopping = StoppingKind::GLRT;
  rc.delta = 0.5;
  CHECK_THROWS_AS(rc.validate(20), ConfigError);
  const auto r = check_stop_less(gaussian_state({400, 400, 50}, {-0.5, -0.4, 1.0}), 0.05, StoppingKind::GLRT);
  CHECK(r.fired);
  CHECK(r.witness == Subset{0, 1});
}

TEST_CASE("rule config validation") {
  RuleConfig rc;
  rc.delta = 1.0;
  CHECK_THROWS_AS(rc.validate(3), ConfigError);
  rc.delta = 0.1;
  rc.horizon_cap = 2;
  CHECK_THROWS_AS(rc.validate(3), ConfigError);
  rc.horizon_cap = 3;
  CHECK_NOTHROW(rc.validate(3));
}

TEST_CASE("episode on an easy single arm") {
  const BanditInstance inst{FamilyModel::gaussian(), {-10}, 0.0};
  RuleConfig rc;
  rc.delta = 0.05;
  int quick = 0;
  for (int i = 0; i < 200; ++i) {
    Rng rng(1000 + i);
    const auto res = run_episode(inst, rc, rng);
    CHECK(res.verdict.recommendation == Recommendation::Below);
    CHECK(res.verdict.fired_clause == FiredClause::TauLess);
    quick += res.verdict.stopped_at <= 25;
  }
  CHECK(quick >= 198);
}

TEST_CASE("horizon cap equal to K is always inconclusive") {
  const BanditInstance inst{FamilyModel::gaussian(), {-0.1, 0.2, 0.3}, 0.0};
  for (auto s : {SamplingRule::Murphy, SamplingRule::LCB, SamplingRule::Thompson}) {
    RuleConfig rc;
    rc.sampling = s;
    rc.delta = 1e-3;
    rc.horizon_cap = 3;
    Rng rng(7);
    const auto res = run_episode(inst, rc, rng);
    CHECK(res.verdict.recommendation == Recommendation::Inconclusive);
    CHECK(res.verdict.fired_clause == FiredClause::Horizon);
    CHECK(res.verdict.stopped_at == 3);
  }
}

TEST_CASE("episodes are reproducible and consistent") {
  const BanditInstance inst{FamilyModel::gaussian(), linspace(0.5, 1.0, 5), 0.0};
  for (auto s : {SamplingRule::Murphy, SamplingRule::LCB, SamplingRule::Thompson, SamplingRule::RoundRobin}) {
    RuleConfig rc;
    rc.sampling = s;
    rc.delta = 0.1;
    Rng a(77), b(77);
    const auto r1 = run_episode(inst, rc, a, true);
    const auto r2 = run_episode(inst, rc, b, true);
    CHECK(r1.verdict.stopped_at == r2.verdict.stopped_at);
    CHECK(r1.counts == r2.counts);
    REQUIRE(r1.trace.size() == r2.trace.size());
    for (std::size_t i = 0; i < r1.trace.size(); ++i) CHECK(r1.trace[i].observation == r2.trace[i].observation);
    std::int64_t total = 0;
    for (auto c : r1.counts) total += c;
    CHECK(total == r1.verdict.stopped_at);
    CHECK(r1.verdict.recommendation == Recommendation::Above);
    CHECK(r1.verdict.fired_clause == FiredClause::TauGreater);
  }
}

TEST_CASE("removing subsets from the search never speeds up stopping") {
  const BanditInstance inst{FamilyModel::gaussian(), {-0.3, -0.2, -0.1, 0.4, 0.6, 0.8}, 0.0};
  for (int rep = 0; rep < 60; ++rep) {
    Rng rng(500 + rep);
    RunState st(inst.family, inst.arm_count(), inst.gamma);
    const StoppingRule nested(StoppingKind::Aggregate, 0.05, inst.arm_count(), SubsetSearch::Nested);
    const StoppingRule brute(StoppingKind::Aggregate, 0.05, inst.arm_count(), SubsetSearch::Exhaustive);
    std::int64_t t_nested = -1, t_brute = -1;
    for (std::int64_t t = 1; t <= 20000 && t_nested < 0; ++t) {
      const std::size_t arm = select_round_robin(st);
      st.record(arm, draw_observation(inst.family, inst.means[arm], rng));
      if (!st.initialized()) continue;
      if (t_brute < 0 && brute.evaluate(st).less) t_brute = t;
      if (nested.evaluate(st).less) t_nested = t;
    }
    REQUIRE(t_nested > 0);
    CHECK(t_brute > 0);
    CHECK(t_brute <= t_nested);
  }
}

TEST_CASE("parsing rule names") {
  CHECK(parse_sampling_rule("MS") == SamplingRule::Murphy);
  CHECK(parse_sampling_rule("TS") == SamplingRule::Thompson);
  CHECK(parse_sampling_rule("lcb") == SamplingRule::LCB);
  CHECK(parse_stopping_kind("Agg") == StoppingKind::Aggregate);
  CHECK(parse_stopping_kind("GLRT") == StoppingKind::GLRT);
  CHECK_THROWS(parse_stopping_kind("nope"));
}
