#ifndef DYKSPLIT_PROBLEM_HPP
#define DYKSPLIT_PROBLEM_HPP

#include <vector>

#include "dyksplit/blocks.hpp"
#include "dyksplit/vector.hpp"

namespace dyksplit {

/// One problem instance: minimize 0.5*||x - x0||^2 + sum_i h_i(x) over R^dim.
/// Blocks are ordered by kind: indices [0, r1) are full-domain, [r1, r2) are
/// open-domain, [r2, r) are indicators. (The outer-loop driver reads the same
/// struct without the built-in quadratic; x0 is then the starting center.)
struct ProblemSpec {
  std::size_t dim = 0;
  Vector x0;
  std::vector<BlockPtr> blocks;
  int r1 = 0;
  int r2 = 0;

  int r() const { return static_cast<int>(blocks.size()); }
  bool is_indicator(int i) const { return i >= r2; }

  /// Throws SpecError on partition/dimension violations (needs r >= 2,
  /// 0 <= r1 <= r2 <= r, kinds matching the partition, compatible dims).
  void validate() const;
};

/// Builds a spec from an ordered block list, deriving r1/r2 from the kinds.
/// The list must already be sorted full-domain, open-domain, indicator.
ProblemSpec make_spec(std::size_t dim, Vector x0, std::vector<BlockPtr> blocks);

/// sum_i h_i(x); +inf outside the common domain.
double objective_sum(const ProblemSpec& spec, const Vector& x);

/// 0.5*||x - x0||^2 + sum_i h_i(x).
double primal_value(const ProblemSpec& spec, const Vector& x);

}  // namespace dyksplit

#endif  // DYKSPLIT_PROBLEM_HPP
