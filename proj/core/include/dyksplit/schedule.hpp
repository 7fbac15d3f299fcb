#ifndef DYKSPLIT_SCHEDULE_HPP
#define DYKSPLIT_SCHEDULE_HPP

#include <cstdint>
#include <functional>
#include <vector>

namespace dyksplit {

/// Produces the index sets S_{n,w} visited in sweep n, slot w (both 1-based).
/// `universe` is the number of dual indices to cover each sweep: r when the
/// halfspace slot is never scheduled, r+1 when it is.
struct BlockSchedule {
  enum class Kind { Cyclic, RandomPermutation, Explicit, Custom };

  Kind kind = Kind::Cyclic;
  int universe = 0;
  int wbar = 0;  // slots per sweep; 0 means universe
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> pattern;  // Explicit: reused every sweep
  std::function<std::vector<int>(int, int)> custom;

  // Constants for the sqrt-growth budget on multi-element slots checked by
  // validate_schedule: count over the first n sweeps <= m1*sqrt(n) + m2.
  double growth_m1 = 1.0;
  double growth_m2 = 8.0;

  int slots_per_sweep() const { return wbar > 0 ? wbar : universe; }

  /// S_{n,w}; members are 1-based indices in [1, universe].
  std::vector<int> at(int n, int w) const;

  static BlockSchedule cyclic(int universe, int wbar = 0);
  static BlockSchedule random_permutation(int universe, std::uint64_t seed);
  static BlockSchedule explicit_pattern(int universe,
                                        std::vector<std::vector<int>> pattern);
  static BlockSchedule custom_rule(
      int universe, int wbar,
      std::function<std::vector<int>(int, int)> rule);
};

/// Outcome of enumerating a schedule over a finite horizon. Coverage and the
/// sqrt-growth budget yield verdicts; the tail-block counts (slots touching
/// more than one index above r1) are reported descriptively since "finitely
/// many" cannot be falsified on a finite horizon.
struct ScheduleReport {
  int horizon = 0;
  bool coverage_ok = true;
  std::vector<int> uncovered_sweeps;
  long multi_element_slots = 0;
  long multi_tail_slots = 0;
  int last_multi_tail_sweep = -1;
  bool growth_bound_ok = true;
  int first_growth_violation = -1;

  bool ok() const { return coverage_ok && growth_bound_ok; }
};

/// Pure check over sweeps 1..horizon. `r1` is the count of full-domain
/// blocks; indices above it are the ones the tail-block rule restricts.
/// Malformed slot sets (empty, out of range) are hard errors.
ScheduleReport validate_schedule(const BlockSchedule& s, int horizon, int r1);

}  // namespace dyksplit

#endif  // DYKSPLIT_SCHEDULE_HPP
