#pragma once
//
// Sample-complexity lower bounds and oracle allocations for testing whether
// the smallest of K means is below or above a threshold.
//
#include <cstddef>
#include <vector>

#include "minmean/expfam.hpp"

namespace minmean {

enum class Hypothesis { Below, Above };

struct BanditInstance {
  FamilyModel family;
  std::vector<double> means;
  double gamma = 0.0;

  std::size_t arm_count() const { return means.size(); }
  double min_mean() const;
  /// Throws ArgumentError when K = 0 or a mean / gamma leaves the open domain.
  void validate() const;
  /// Below when min mean < gamma, Above when > gamma. Throws DegenerateInstanceError on equality.
  Hypothesis hypothesis() const;
};

struct OracleSolution {
  double characteristic_time = 0.0;
  std::vector<double> weights;
  Hypothesis side = Hypothesis::Below;
  /// Arms attaining the minimum mean (0-based).
  std::vector<std::size_t> minimizers;
};

/// Characteristic time T* and oracle weights w*. Tied minimizers on the
/// "below" side share the mass uniformly.
OracleSolution oracle_solution(const BanditInstance& instance);

/// Bernoulli relative entropy kl(x, y) for x, y in (0, 1).
double kl_binary(double x, double y);

/// T*(mu) kl(delta, 1 - delta).
double generic_lower_bound(const BanditInstance& instance, double delta);

/// Per-arm expected-draw bound 2(1 - 2 delta K^3) / (27 K^2 k) for symmetric
/// tests, k = max_a d(mu_a, gamma). Clamped at 0.
double min_draws_bound(const BanditInstance& instance, double delta);

/// Lower bound for symmetric tests when min mean < gamma; combines the
/// generic bound with the per-arm draw floor. Throws ArgumentError on the "above" side.
double boosted_lower_bound(const BanditInstance& instance, double delta);

/// Normalized counts N_a(tau) / ln(1/delta) that LCB with Box stopping
/// converges to on Gaussian instances with a single arm below gamma:
/// 2 / (mu_a + gamma - 2 mu_1)^2 off the low arm and 1 / d(mu_1, gamma) on it.
std::vector<double> lcb_predicted_weights(const BanditInstance& instance, double delta);

}  // namespace minmean
