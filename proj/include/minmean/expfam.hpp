#pragma once
//
// One-parameter exponential families in mean parameterization.
//
// Three kinds are supported: unit-variance Gaussian, Bernoulli and Poisson.
// Every operation here is a pure function of its arguments; randomness comes
// in through an explicitly passed engine.
//
#include <cstdint>
#include <random>
#include <string_view>

namespace minmean {

using Rng = std::mt19937_64;

enum class Family { GaussianUnitVariance, Bernoulli, Poisson };

class FamilyModel {
 public:
  constexpr explicit FamilyModel(Family kind = Family::GaussianUnitVariance) : kind_(kind) {}

  static constexpr FamilyModel gaussian() { return FamilyModel(Family::GaussianUnitVariance); }
  static constexpr FamilyModel bernoulli() { return FamilyModel(Family::Bernoulli); }
  static constexpr FamilyModel poisson() { return FamilyModel(Family::Poisson); }

  constexpr Family kind() const { return kind_; }

  /// Endpoints of the open interval of valid means.
  double domain_inf() const;
  double domain_sup() const;

  /// True iff `mean` lies in the open mean domain.
  bool contains(double mean) const;
  /// True iff `mean` is a possible empirical mean (closure of the domain, finite).
  bool contains_closure(double mean) const;

  std::string_view name() const;

  friend constexpr bool operator==(FamilyModel, FamilyModel) = default;

 private:
  Family kind_;
};

/// Parses "gaussian", "bernoulli" or "poisson" (case-insensitive).
FamilyModel parse_family(std::string_view text);

enum class DivergenceSide { Plus, Minus };
enum class Bound { Upper, Lower };

/// KL divergence d(mu, theta) between the members with means mu and theta.
///
/// `mu` may sit on a finite domain endpoint (empirical means of Bernoulli
/// arms hit 0 and 1, Poisson arms hit 0); the value is then the continuous
/// limit. `theta` must lie in the open domain, otherwise DomainError.
double divergence(FamilyModel family, double mu, double theta);

/// d+(mu, theta) = d(mu, theta) 1{mu <= theta};  d-(mu, theta) = d(mu, theta) 1{mu >= theta}.
double divergence_directed(FamilyModel family, double mu, double theta, DivergenceSide side);

/// Returns the boundary q on the requested side of `mu_hat` with n * d(mu_hat, q) = budget.
///
/// The result is capped at the domain endpoint when the budget cannot be
/// reached (e.g. Bernoulli q -> 1). Gaussian uses the closed form; the other
/// families bisect on the monotone branch.
double invert_divergence(FamilyModel family, double mu_hat, double n, double budget, Bound bound);

/// Conjugate prior hyperparameters.
///
/// Bernoulli: Beta(a, b). Poisson: Gamma(shape a, rate b). Gaussian: normal
/// prior with mean a and precision b, where b = 0 is the flat (improper) prior.
struct PriorParams {
  double a = 0.0;
  double b = 0.0;
};

PriorParams default_prior(FamilyModel family);

struct ArmPosterior {
  FamilyModel family;
  std::int64_t count = 0;
  double sum = 0.0;
  PriorParams prior;

  ArmPosterior(FamilyModel f, std::int64_t n, double s) : family(f), count(n), sum(s), prior(default_prior(f)) {}
  ArmPosterior(FamilyModel f, std::int64_t n, double s, PriorParams p) : family(f), count(n), sum(s), prior(p) {}

  bool proper() const;
  /// Analytic mean of the posterior over the arm's mean. Throws StateError if improper.
  double mean() const;
  double variance() const;
};

/// One draw from the conjugate posterior of the arm's mean.
double posterior_sample(const ArmPosterior& post, Rng& rng);

/// Posterior probability that the arm's mean is strictly below `gamma`.
double posterior_prob_below(const ArmPosterior& post, double gamma);
/// Posterior probability of the complement, computed without cancellation.
double posterior_prob_above(const ArmPosterior& post, double gamma);

enum class Tail { Below, Above };

/// Draw from the posterior restricted to {mean < gamma} or {mean >= gamma}, by inversion.
/// Throws StateError when the restricted region has zero posterior mass.
double posterior_sample_truncated(const ArmPosterior& post, double gamma, Tail tail, Rng& rng);

/// One observation from the family member with the given mean.
double draw_observation(FamilyModel family, double mean, Rng& rng);

}  // namespace minmean
