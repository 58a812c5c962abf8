#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "minmean/expfam.hpp"

namespace minmean {

/// Sufficient statistics of one episode: per-arm draw counts and observation sums.
class RunState {
 public:
  RunState(FamilyModel family, std::size_t arms, double gamma);

  /// Builds a state directly from counts and sums (round = sum of counts).
  static RunState from_statistics(FamilyModel family, double gamma, std::vector<std::int64_t> counts,
                                  std::vector<double> sums);

  void record(std::size_t arm, double observation);

  FamilyModel family() const { return family_; }
  double gamma() const { return gamma_; }
  std::int64_t round() const { return round_; }
  std::size_t arm_count() const { return counts_.size(); }
  std::int64_t count(std::size_t arm) const { return counts_[arm]; }
  double sum(std::size_t arm) const { return sums_[arm]; }
  /// Empirical mean; requires count(arm) >= 1.
  double mean(std::size_t arm) const;
  /// Every arm has been drawn at least once.
  bool initialized() const;

  std::span<const std::int64_t> counts() const { return counts_; }
  std::span<const double> sums() const { return sums_; }

  ArmPosterior posterior(std::size_t arm, PriorParams prior) const {
    return ArmPosterior(family_, counts_[arm], sums_[arm], prior);
  }

 private:
  FamilyModel family_;
  double gamma_;
  std::int64_t round_ = 0;
  std::vector<std::int64_t> counts_;
  std::vector<double> sums_;
};

}  // namespace minmean
