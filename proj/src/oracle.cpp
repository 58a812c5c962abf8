#include "minmean/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "minmean/error.hpp"

namespace minmean {

double BanditInstance::min_mean() const {
  if (means.empty()) throw ArgumentError("bandit instance has no arms");
  return *std::min_element(means.begin(), means.end());
}

void BanditInstance::validate() const {
  if (means.empty()) throw ArgumentError("bandit instance has no arms");
  for (std::size_t a = 0; a < means.size(); ++a) {
    if (!family.contains(means[a])) {
      throw ArgumentError("mean of arm " + std::to_string(a + 1) + " (" + std::to_string(means[a]) +
                          ") is outside the " + std::string(family.name()) + " domain");
    }
  }
  if (!family.contains(gamma)) {
    throw ArgumentError("threshold " + std::to_string(gamma) + " is outside the " + std::string(family.name()) +
                        " domain");
  }
}

Hypothesis BanditInstance::hypothesis() const {
  const double lowest = min_mean();
  if (lowest == gamma) throw DegenerateInstanceError("minimum mean equals the threshold; no test can stop");
  return lowest < gamma ? Hypothesis::Below : Hypothesis::Above;
}

OracleSolution oracle_solution(const BanditInstance& instance) {
  instance.validate();
  OracleSolution sol;
  sol.side = instance.hypothesis();
  const std::size_t k = instance.arm_count();
  const double lowest = instance.min_mean();
  for (std::size_t a = 0; a < k; ++a) {
    if (instance.means[a] == lowest) sol.minimizers.push_back(a);
  }
  sol.weights.assign(k, 0.0);

  if (sol.side == Hypothesis::Below) {
    sol.characteristic_time = 1.0 / divergence(instance.family, lowest, instance.gamma);
    const double share = 1.0 / static_cast<double>(sol.minimizers.size());
    for (auto a : sol.minimizers) sol.weights[a] = share;
    return sol;
  }

  double total = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    sol.weights[a] = 1.0 / divergence(instance.family, instance.means[a], instance.gamma);
    total += sol.weights[a];
  }
  for (auto& w : sol.weights) w /= total;
  sol.characteristic_time = total;
  return sol;
}

double kl_binary(double x, double y) {
  if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0)) {
    throw DomainError("kl_binary: arguments must lie in (0, 1)");
  }
  return divergence(FamilyModel::bernoulli(), x, y);
}

namespace {

// kl(delta, 1 - delta) without forming 1 - delta, which rounds to 1 for tiny delta.
double kl_symmetric(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  return (1.0 - 2.0 * delta) * (std::log1p(-delta) - std::log(delta));
}

}  // namespace

double generic_lower_bound(const BanditInstance& instance, double delta) {
  return oracle_solution(instance).characteristic_time * kl_symmetric(delta);
}

double min_draws_bound(const BanditInstance& instance, double delta) {
  instance.validate();
  const double k = static_cast<double>(instance.arm_count());
  double worst = 0.0;
  for (double mu : instance.means) worst = std::max(worst, divergence(instance.family, mu, instance.gamma));
  if (worst == 0.0) return 0.0;
  const double value = 2.0 * (1.0 - 2.0 * delta * k * k * k) / (27.0 * k * k * worst);
  return std::max(value, 0.0);
}

double boosted_lower_bound(const BanditInstance& instance, double delta) {
  instance.validate();
  if (instance.hypothesis() != Hypothesis::Below) {
    throw ArgumentError("boosted lower bound is only available when the minimum mean is below the threshold");
  }
  const double lowest = divergence(instance.family, instance.min_mean(), instance.gamma);
  const double floor = min_draws_bound(instance, delta);
  double slack = 0.0;
  for (double mu : instance.means) {
    slack += 1.0 - divergence_directed(instance.family, mu, instance.gamma, DivergenceSide::Plus) / lowest;
  }
  return kl_symmetric(delta) / lowest + floor * slack;
}

std::vector<double> lcb_predicted_weights(const BanditInstance& instance, double delta) {
  instance.validate();
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in (0, 1)");
  if (instance.family.kind() != Family::GaussianUnitVariance) {
    throw UnsupportedError("LCB predicted weights are only derived for the Gaussian family");
  }
  const auto below = std::count_if(instance.means.begin(), instance.means.end(),
                                   [&](double mu) { return mu < instance.gamma; });
  if (below != 1) throw UnsupportedError("LCB predicted weights need exactly one arm below the threshold");

  const double low = instance.min_mean();
  std::vector<double> out(instance.arm_count());
  for (std::size_t a = 0; a < out.size(); ++a) {
    const double mu = instance.means[a];
    if (mu == low) {
      out[a] = 1.0 / divergence(instance.family, low, instance.gamma);
    } else {
      const double gap = mu + instance.gamma - 2.0 * low;
      out[a] = 2.0 / (gap * gap);
    }
  }
  return out;
}

}  // namespace minmean
