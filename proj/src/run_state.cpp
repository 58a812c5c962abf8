#include "minmean/run_state.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "minmean/error.hpp"

namespace minmean {

RunState::RunState(FamilyModel family, std::size_t arms, double gamma)
    : family_(family), gamma_(gamma), counts_(arms, 0), sums_(arms, 0.0) {
  if (arms == 0) throw ArgumentError("run state needs at least one arm");
}

RunState RunState::from_statistics(FamilyModel family, double gamma, std::vector<std::int64_t> counts,
                                   std::vector<double> sums) {
  if (counts.size() != sums.size()) throw ArgumentError("counts and sums differ in length");
  RunState state(family, counts.size(), gamma);
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a] < 0) throw ArgumentError("negative count for arm " + std::to_string(a + 1));
  }
  state.round_ = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  state.counts_ = std::move(counts);
  state.sums_ = std::move(sums);
  return state;
}

void RunState::record(std::size_t arm, double observation) {
  if (arm >= counts_.size()) throw ArgumentError("arm index " + std::to_string(arm) + " out of range");
  ++counts_[arm];
  sums_[arm] += observation;
  ++round_;
}

double RunState::mean(std::size_t arm) const {
  if (counts_[arm] < 1) throw ArgumentError("arm " + std::to_string(arm + 1) + " has not been observed");
  return sums_[arm] / static_cast<double>(counts_[arm]);
}

bool RunState::initialized() const {
  return std::all_of(counts_.begin(), counts_.end(), [](std::int64_t n) { return n >= 1; });
}

}  // namespace minmean
