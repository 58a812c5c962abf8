#include "minmean/expfam.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include "minmean/error.hpp"

namespace minmean {
namespace {

namespace bm = boost::math;
using Policy = bm::policies::policy<bm::policies::promote_double<false>,
                                    bm::policies::overflow_error<bm::policies::ignore_error>,
                                    bm::policies::underflow_error<bm::policies::ignore_error>>;
using NormalDist = bm::normal_distribution<double, Policy>;
using BetaDist = bm::beta_distribution<double, Policy>;
using GammaDist = bm::gamma_distribution<double, Policy>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// x ln(x / y) with the 0 ln 0 = 0 convention.
double xlog_ratio(double x, double y) { return x > 0.0 ? x * std::log(x / y) : 0.0; }

void require_theta(FamilyModel family, double theta) {
  if (!family.contains(theta)) {
    throw DomainError("divergence: theta=" + std::to_string(theta) + " outside the open " +
                      std::string(family.name()) + " mean domain");
  }
}

void require_mu(FamilyModel family, double mu) {
  if (!family.contains_closure(mu)) {
    throw DomainError("divergence: mu=" + std::to_string(mu) + " outside the " + std::string(family.name()) +
                      " mean domain");
  }
}

// Uniform on the open interval (0, 1).
double open_uniform(Rng& rng) {
  double u = 0.0;
  while (u == 0.0) u = std::generate_canonical<double, 53>(rng);
  return u;
}

template <class F>
auto with_distribution(const ArmPosterior& post, F&& f) {
  if (!post.proper()) {
    throw StateError("posterior for " + std::string(post.family.name()) + " arm with count " +
                     std::to_string(post.count) + " is improper");
  }
  const double n = static_cast<double>(post.count);
  switch (post.family.kind()) {
    case Family::GaussianUnitVariance: {
      const double precision = post.prior.b + n;
      const double mean = (post.prior.a * post.prior.b + post.sum) / precision;
      return f(NormalDist(mean, 1.0 / std::sqrt(precision)));
    }
    case Family::Bernoulli:
      return f(BetaDist(post.prior.a + post.sum, post.prior.b + n - post.sum));
    case Family::Poisson:
    default:
      return f(GammaDist(post.prior.a + post.sum, 1.0 / (post.prior.b + n)));
  }
}

}  // namespace

double FamilyModel::domain_inf() const { return kind_ == Family::GaussianUnitVariance ? -kInf : 0.0; }

double FamilyModel::domain_sup() const { return kind_ == Family::Bernoulli ? 1.0 : kInf; }

bool FamilyModel::contains(double mean) const {
  return std::isfinite(mean) && mean > domain_inf() && mean < domain_sup();
}

bool FamilyModel::contains_closure(double mean) const {
  return std::isfinite(mean) && mean >= domain_inf() && mean <= domain_sup();
}

std::string_view FamilyModel::name() const {
  switch (kind_) {
    case Family::GaussianUnitVariance:
      return "gaussian";
    case Family::Bernoulli:
      return "bernoulli";
    case Family::Poisson:
      return "poisson";
  }
  return "unknown";
}

FamilyModel parse_family(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "gaussian" || lower == "normal") return FamilyModel::gaussian();
  if (lower == "bernoulli") return FamilyModel::bernoulli();
  if (lower == "poisson") return FamilyModel::poisson();
  throw ArgumentError("unknown family '" + std::string(text) + "' (expected gaussian, bernoulli or poisson)");
}

double divergence(FamilyModel family, double mu, double theta) {
  require_theta(family, theta);
  require_mu(family, mu);
  double d = 0.0;
  switch (family.kind()) {
    case Family::GaussianUnitVariance:
      d = 0.5 * (mu - theta) * (mu - theta);
      break;
    case Family::Bernoulli:
      d = xlog_ratio(mu, theta) + xlog_ratio(1.0 - mu, 1.0 - theta);
      break;
    case Family::Poisson:
      d = xlog_ratio(mu, theta) + theta - mu;
      break;
  }
  return std::max(d, 0.0);
}

double divergence_directed(FamilyModel family, double mu, double theta, DivergenceSide side) {
  const double d = divergence(family, mu, theta);
  if (side == DivergenceSide::Plus) return mu <= theta ? d : 0.0;
  return mu >= theta ? d : 0.0;
}

double invert_divergence(FamilyModel family, double mu_hat, double n, double budget, Bound bound) {
  if (!(budget >= 0.0)) throw ArgumentError("invert_divergence: budget must be >= 0");
  if (!(n > 0.0)) throw ArgumentError("invert_divergence: count must be positive");
  require_mu(family, mu_hat);
  const double target = budget / n;
  const bool upper = bound == Bound::Upper;

  if (family.kind() == Family::GaussianUnitVariance) {
    const double width = std::sqrt(2.0 * target);
    return upper ? mu_hat + width : mu_hat - width;
  }
  if (target == 0.0) return mu_hat;

  const double edge = upper ? family.domain_sup() : family.domain_inf();
  if (mu_hat == edge) return edge;

  // d(mu_hat, .) grows away from mu_hat; `inner` stays on the mu_hat side of the root.
  double inner = mu_hat;
  double outer = edge;
  if (!std::isfinite(outer)) {
    outer = mu_hat + std::max(1.0, mu_hat);
    while (divergence(family, mu_hat, outer) < target) {
      inner = outer;
      outer *= 2.0;
      if (!std::isfinite(outer)) return edge;
    }
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = inner + 0.5 * (outer - inner);
    if (mid == inner || mid == outer) break;
    if (divergence(family, mu_hat, mid) >= target) {
      outer = mid;
    } else {
      inner = mid;
    }
    const double width = std::abs(outer - inner);
    if (width <= 1e-9 && width <= 1e-12 * std::max(std::abs(outer), std::abs(inner))) break;
  }
  return outer;
}

PriorParams default_prior(FamilyModel family) {
  if (family.kind() == Family::GaussianUnitVariance) return {0.0, 0.0};
  return {1.0, 1.0};
}

bool ArmPosterior::proper() const {
  const double n = static_cast<double>(count);
  switch (family.kind()) {
    case Family::GaussianUnitVariance:
      return prior.b + n > 0.0;
    case Family::Bernoulli:
      return prior.a + sum > 0.0 && prior.b + n - sum > 0.0;
    case Family::Poisson:
      return prior.a + sum > 0.0 && prior.b + n > 0.0;
  }
  return false;
}

double ArmPosterior::mean() const {
  return with_distribution(*this, [](const auto& dist) { return bm::mean(dist); });
}

double ArmPosterior::variance() const {
  return with_distribution(*this, [](const auto& dist) { return bm::variance(dist); });
}

double posterior_sample(const ArmPosterior& post, Rng& rng) {
  if (!post.proper()) {
    throw StateError("posterior_sample: improper posterior (count " + std::to_string(post.count) + ")");
  }
  const double n = static_cast<double>(post.count);
  switch (post.family.kind()) {
    case Family::GaussianUnitVariance: {
      const double precision = post.prior.b + n;
      const double mean = (post.prior.a * post.prior.b + post.sum) / precision;
      return std::normal_distribution<double>(mean, 1.0 / std::sqrt(precision))(rng);
    }
    case Family::Bernoulli: {
      const double x = std::gamma_distribution<double>(post.prior.a + post.sum, 1.0)(rng);
      const double y = std::gamma_distribution<double>(post.prior.b + n - post.sum, 1.0)(rng);
      const double draw = x / (x + y);
      if (!(draw > 0.0)) return std::numeric_limits<double>::min();
      if (!(draw < 1.0)) return std::nextafter(1.0, 0.0);
      return draw;
    }
    case Family::Poisson: {
      const double draw = std::gamma_distribution<double>(post.prior.a + post.sum, 1.0 / (post.prior.b + n))(rng);
      return draw > 0.0 ? draw : std::numeric_limits<double>::min();
    }
  }
  return 0.0;
}

double posterior_prob_below(const ArmPosterior& post, double gamma) {
  return with_distribution(post, [&](const auto& dist) {
    const auto [lo, hi] = bm::support(dist);
    if (gamma <= lo) return 0.0;
    if (gamma >= hi) return 1.0;
    return bm::cdf(dist, gamma);
  });
}

double posterior_prob_above(const ArmPosterior& post, double gamma) {
  return with_distribution(post, [&](const auto& dist) {
    const auto [lo, hi] = bm::support(dist);
    if (gamma <= lo) return 1.0;
    if (gamma >= hi) return 0.0;
    return bm::cdf(bm::complement(dist, gamma));
  });
}

double posterior_sample_truncated(const ArmPosterior& post, double gamma, Tail tail, Rng& rng) {
  return with_distribution(post, [&](const auto& dist) {
    const auto [lo, hi] = bm::support(dist);
    if (tail == Tail::Below) {
      const double mass = gamma <= lo ? 0.0 : gamma >= hi ? 1.0 : bm::cdf(dist, gamma);
      if (!(mass > 0.0)) throw StateError("posterior_sample_truncated: no posterior mass below threshold");
      const double x = bm::quantile(dist, open_uniform(rng) * mass);
      return std::min(x, std::nextafter(gamma, -kInf));
    }
    const double mass = gamma <= lo ? 1.0 : gamma >= hi ? 0.0 : bm::cdf(bm::complement(dist, gamma));
    if (!(mass > 0.0)) throw StateError("posterior_sample_truncated: no posterior mass above threshold");
    const double x = bm::quantile(bm::complement(dist, open_uniform(rng) * mass));
    return std::max(x, gamma);
  });
}

double draw_observation(FamilyModel family, double mean, Rng& rng) {
  switch (family.kind()) {
    case Family::GaussianUnitVariance:
      return std::normal_distribution<double>(mean, 1.0)(rng);
    case Family::Bernoulli:
      return std::bernoulli_distribution(mean)(rng) ? 1.0 : 0.0;
    case Family::Poisson:
      return static_cast<double>(std::poisson_distribution<std::int64_t>(mean)(rng));
  }
  return 0.0;
}

}  // namespace minmean
