#include "dyksplit/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "dyksplit/errors.hpp"

namespace dyksplit {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Pinned Fisher-Yates so permutation schedules are reproducible across
// standard libraries (std::shuffle is not specified bit-for-bit).
std::vector<int> sweep_permutation(int universe, std::uint64_t seed, int n) {
  std::vector<int> perm(universe);
  for (int i = 0; i < universe; ++i) perm[i] = i + 1;
  std::mt19937_64 rng(splitmix64(seed ^ (0x517cc1b727220a95ULL * static_cast<std::uint64_t>(n))));
  for (int i = universe - 1; i > 0; --i) {
    const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

}  // namespace

std::vector<int> BlockSchedule::at(int n, int w) const {
  switch (kind) {
    case Kind::Cyclic:
      return {(w - 1) % universe + 1};
    case Kind::RandomPermutation:
      return {sweep_permutation(universe, seed, n)[(w - 1) % universe]};
    case Kind::Explicit:
      return pattern[static_cast<std::size_t>((w - 1) % static_cast<int>(pattern.size()))];
    case Kind::Custom:
      return custom(n, w);
  }
  throw NumericalError("schedule: unknown kind");
}

BlockSchedule BlockSchedule::cyclic(int universe, int wbar) {
  if (universe < 1) throw SpecError("schedule: universe must be positive");
  BlockSchedule s;
  s.kind = Kind::Cyclic;
  s.universe = universe;
  s.wbar = wbar;
  return s;
}

BlockSchedule BlockSchedule::random_permutation(int universe,
                                                std::uint64_t seed) {
  if (universe < 1) throw SpecError("schedule: universe must be positive");
  BlockSchedule s;
  s.kind = Kind::RandomPermutation;
  s.universe = universe;
  s.seed = seed;
  return s;
}

BlockSchedule BlockSchedule::explicit_pattern(
    int universe, std::vector<std::vector<int>> pattern) {
  if (universe < 1) throw SpecError("schedule: universe must be positive");
  if (pattern.empty()) throw SpecError("schedule: empty explicit pattern");
  BlockSchedule s;
  s.kind = Kind::Explicit;
  s.universe = universe;
  s.wbar = static_cast<int>(pattern.size());
  s.pattern = std::move(pattern);
  return s;
}

BlockSchedule BlockSchedule::custom_rule(
    int universe, int wbar, std::function<std::vector<int>(int, int)> rule) {
  if (universe < 1) throw SpecError("schedule: universe must be positive");
  if (wbar < 1) throw SpecError("schedule: wbar must be positive");
  BlockSchedule s;
  s.kind = Kind::Custom;
  s.universe = universe;
  s.wbar = wbar;
  s.custom = std::move(rule);
  return s;
}

ScheduleReport validate_schedule(const BlockSchedule& s, int horizon, int r1) {
  if (horizon < 1) throw SpecError("validate_schedule: horizon must be >= 1");
  ScheduleReport rep;
  rep.horizon = horizon;
  const int wbar = s.slots_per_sweep();
  long multi_cum = 0;
  for (int n = 1; n <= horizon; ++n) {
    std::vector<char> seen(static_cast<std::size_t>(s.universe) + 1, 0);
    for (int w = 1; w <= wbar; ++w) {
      const std::vector<int> slot = s.at(n, w);
      if (slot.empty()) {
        throw NumericalError("schedule: generator produced an empty slot");
      }
      int tail = 0;
      for (int idx : slot) {
        if (idx < 1 || idx > s.universe) {
          throw NumericalError("schedule: index " + std::to_string(idx) +
                               " outside [1, " + std::to_string(s.universe) +
                               "]");
        }
        seen[static_cast<std::size_t>(idx)] = 1;
        if (idx > r1) ++tail;
      }
      if (slot.size() > 1) {
        ++rep.multi_element_slots;
        ++multi_cum;
      }
      if (tail > 1) {
        ++rep.multi_tail_slots;
        rep.last_multi_tail_sweep = n;
      }
    }
    bool covered = true;
    for (int idx = 1; idx <= s.universe; ++idx) {
      if (!seen[static_cast<std::size_t>(idx)]) covered = false;
    }
    if (!covered) {
      rep.coverage_ok = false;
      rep.uncovered_sweeps.push_back(n);
    }
    if (rep.growth_bound_ok &&
        static_cast<double>(multi_cum) >
            s.growth_m1 * std::sqrt(static_cast<double>(n)) + s.growth_m2) {
      rep.growth_bound_ok = false;
      rep.first_growth_violation = n;
    }
  }
  return rep;
}

}  // namespace dyksplit
