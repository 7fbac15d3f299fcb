#ifndef DYKSPLIT_ENGINE_HPP
#define DYKSPLIT_ENGINE_HPP

#include <deque>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "dyksplit/dual_state.hpp"
#include "dyksplit/problem.hpp"
#include "dyksplit/schedule.hpp"

namespace dyksplit {

struct EngineConfig {
  /// Aggregation bound on indicator multipliers; +inf disables the fold.
  double bound_m = std::numeric_limits<double>::infinity();

  BlockSchedule schedule;

  /// Whether the halfspace slot r+1 ever appears in the schedule. Must match
  /// schedule.universe (r+1 when enabled, r when not).
  bool shqp_enabled = false;

  /// How the outer-approximation set for a halfspace-slot touch is chosen:
  /// the previous halfspace alone, or the previous halfspace intersected with
  /// the most recent cuts generated by indicator prox touches.
  enum class CtildePolicy { PreviousH, HPlusRecentK };
  CtildePolicy ctilde_policy = CtildePolicy::PreviousH;
  int recent_k = 2;

  /// Joint (multi-index) updates run inner exact coordinate passes until the
  /// iterate moves less than inner_tol*(1+||v||); exceeding the cap signals
  /// that the subproblem has no attainable minimizer.
  double inner_tol = 1e-12;
  long inner_max_iter = 100000;

  /// Relative slack for the nondecreasing-dual-value assertion.
  double monotonicity_slack = 1e-10;

  /// Max halfspaces the active-set projection accepts.
  int projection_cap = 8;

  /// Sweeps enumerated by the schedule pre-check in run().
  int validate_horizon = 64;
};

struct SweepRecord {
  int n = 0;
  double dual_value = 0.0;  // F at sweep end, before aggregation
  double vstep_sq = 0.0;    // sum over slots of ||v_after - v_before||^2
  double gap_bound = std::numeric_limits<double>::quiet_NaN();
  Vector x_snapshot;
};

struct StopRule {
  int max_sweeps = 500;
  double vstep_tol = 0.0;  // stop once vstep_sq <= vstep_tol
  double gap_tol = -1.0;   // stop once gap <= gap_tol (needs x_ref); off if < 0
  std::optional<Vector> x_ref;
};

struct RunResult {
  DualState state;
  std::vector<SweepRecord> trace;
  int sweeps = 0;
};

/// Euclidean projection of y onto the intersection of halfspaces, by
/// enumerating active subsets in increasing cardinality and accepting the
/// first primal-feasible candidate with nonnegative multipliers. Exact for
/// small lists (hard cap on the list length). Returns (x, y - x). An empty
/// intersection raises InfeasibleError.
std::pair<Vector, Vector> project_halfspace_intersection(
    const Vector& y, const std::vector<Halfspace>& hs, int cap = 8);

/// One run of the extended splitting loop. Strictly sequential; independent
/// runs share nothing and may execute in parallel.
class DykstraEngine {
 public:
  DykstraEngine(ProblemSpec spec, EngineConfig config,
                std::vector<Vector> z_start = {});

  const ProblemSpec& spec() const { return spec_; }
  const EngineConfig& config() const { return config_; }
  const DualState& state() const { return state_; }
  int sweeps_done() const { return n_; }

  double dual_value() const { return state_.dual_value(spec_.blocks); }

  /// Outer-approximation set for the next halfspace-slot touch under the
  /// configured policy. Every member contains the feasible core by
  /// construction. Empty collection = whole space.
  std::vector<Halfspace> choose_ctilde() const;

  /// One dual block update over 1-based indices (r+1 = halfspace slot).
  /// Multi-index sets run the inner exact coordinate loop. Asserts the dual
  /// value does not decrease and gains at least half the squared v-step.
  void block_update(const std::vector<int>& indices);
  void block_update(const std::vector<int>& indices,
                    const std::vector<Halfspace>& ctilde);

  /// End-of-sweep fold: rescales indicator multipliers onto the ball of
  /// radius M, folds the excess into the halfspace slot and rebuilds the
  /// halfspace by aggregation. Identity when M = +inf or nothing exceeds M.
  void aggregate();

  /// Full sweep (all slots + aggregation); appends and returns the record.
  SweepRecord sweep();

  RunResult run(const StopRule& stop);

  const std::vector<SweepRecord>& trace() const { return trace_; }

  /// x^{n,w} after each slot of the most recent sweep.
  const std::vector<Vector>& last_sweep_slot_x() const { return slot_x_; }

  double total_vstep_sq() const { return total_vstep_sq_; }

 private:
  void touch(int i, const std::vector<Halfspace>& ctilde);
  void assert_dual_progress(bool have_before, double f_before,
                            const Vector& v_before) const;

  ProblemSpec spec_;
  EngineConfig config_;
  DualState state_;
  std::deque<Halfspace> recent_cuts_;
  std::vector<SweepRecord> trace_;
  std::vector<Vector> slot_x_;
  double total_vstep_sq_ = 0.0;
  int n_ = 0;
};

/// Convenience wrapper: schedule pre-check, sweeps until the stop rule fires.
RunResult run_dykstra(const ProblemSpec& spec, const EngineConfig& config,
                      const StopRule& stop,
                      const std::vector<Vector>& z_start = {});

}  // namespace dyksplit

#endif  // DYKSPLIT_ENGINE_HPP
