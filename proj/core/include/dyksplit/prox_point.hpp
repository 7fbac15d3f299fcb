#ifndef DYKSPLIT_PROX_POINT_HPP
#define DYKSPLIT_PROX_POINT_HPP

#include <vector>

#include "dyksplit/engine.hpp"
#include "dyksplit/problem.hpp"

namespace dyksplit {

/// Evidence that one inner splitting run approximately minimized
/// sum h_i + indicators + 0.5*||. - x_prev||^2, precise enough to shift the
/// proximal center. z[0] is the aggregated constraint multiplier (the sum of
/// the indicator and halfspace-slot multipliers), zeroed when it already
/// vanished below delta (case 1); z[1..r2] are the smooth-block multipliers.
/// e[i] are the perturbations: x_j + e[i] is the witness where z[i] is a
/// subgradient, with e[0] reaching the boundary of the outer set D.
struct KKTCertificate {
  int outer_index = 0;
  double delta = 0.0;
  int case_tag = 1;  // 1: constraint multiplier vanished, 2: halfspace built
  Vector x_j;
  Vector x_prev;
  std::vector<Vector> z;  // r2+1 entries, z[0] aggregated
  std::vector<Vector> e;  // r2+1 entries
  Halfspace outer_set;    // D_j; degenerate = whole space
  double residual = 0.0;        // ||(x_j - x_prev) + sum z||
  double feas_residual = 0.0;   // max_i ||x_j - last indicator touch||
  double max_slot_drift = 0.0;  // max_w ||x_j - x^{n,w}|| in accepted sweep
  int sweeps_used = 0;
  std::vector<Vector> c_touch;  // indicator last-touch witnesses, r - r2
  std::vector<Vector> slot_x;   // x^{n,w} of the accepted sweep
};

struct OuterConfig {
  double delta0 = 1e-2;  // delta_j = delta0 * gamma^j
  double gamma = 0.5;
  int max_outer = 40;
  double final_delta = 0.0;  // stop after the step where delta_j <= this
  int inner_sweep_cap = 4000;
  double case1_factor = 1.0;  // case 1 fires when ||z0|| <= factor * delta

  /// Template for the inner runs. A default-constructed schedule
  /// (universe 0) is replaced by a cyclic one per subproblem. The default
  /// leaves the halfspace slot unscheduled and M infinite, so the outer set
  /// of a case-2 certificate is built from indicator cuts alone.
  EngineConfig engine;
};

struct OuterResult {
  Vector x_final;
  std::vector<KKTCertificate> certificates;
};

/// Runs the splitting engine on spec_j (whose x0 is the current proximal
/// center) until every certificate condition holds at level delta: slot
/// drift, perturbation norms, shifted-stationarity residual and feasibility
/// residual all <= delta. Throws CertificateTimeout with the best partial
/// residuals when the sweep cap is reached first.
KKTCertificate inner_solve_with_certificate(const ProblemSpec& spec_j,
                                            double delta,
                                            const OuterConfig& config);

/// Minimizes sum h_i(x) (no built-in quadratic; indicator blocks carry the
/// constraints, whose intersection the caller asserts is compact) by the
/// shifted-center loop: x_j comes from an inner run on
/// sum h_i + 0.5*||. - x_{j-1}||^2 with tolerance delta_j -> 0.
OuterResult outer_run(const ProblemSpec& problem, const OuterConfig& config);

/// Recomputes every certificate condition from the stored raw data:
/// residual arithmetic, perturbation norms, subgradient inclusions via prox
/// fixed points, normal-cone membership at the outer set, indicator
/// witnesses, slot drift. Optional feasible samples are checked to lie in
/// the outer set. Throws NumericalError naming the first failed condition.
void validate_certificate(const ProblemSpec& problem,
                          const KKTCertificate& cert,
                          const std::vector<Vector>& feasible_samples = {});

}  // namespace dyksplit

#endif  // DYKSPLIT_PROX_POINT_HPP
