#ifndef DYKSPLIT_DUAL_STATE_HPP
#define DYKSPLIT_DUAL_STATE_HPP

#include <vector>

#include "dyksplit/blocks.hpp"
#include "dyksplit/halfspace.hpp"
#include "dyksplit/problem.hpp"
#include "dyksplit/vector.hpp"

namespace dyksplit {

/// Full dual iterate of the splitting loop. Entries z[0..r-1] are the block
/// multipliers, z[r] is the multiplier of the outer halfspace `hs`. The sums
/// v = sum z and x = x0 - v are recomputed from scratch after every commit,
/// so the identities hold to machine precision. Single-writer: one engine run
/// owns one state.
struct DualState {
  Vector x0;
  std::vector<Vector> z;             // r+1 entries
  Vector v;                          // sum of z
  Vector x;                          // x0 - v
  std::vector<double> conj;          // r cached conjugate values h_i*(z_i)
  std::vector<char> touched;         // r flags: block has a prox witness
  Halfspace hs;                      // current outer halfspace
  std::vector<Vector> last_touch_x;  // r+1 witnesses x^{n,p(n,i)}

  int r() const { return static_cast<int>(conj.size()); }

  /// Recomputes v and x from z.
  void refresh_sums();

  /// True when every block either has a witness or sits at z_i = 0, so the
  /// dual objective is well defined (possibly -inf).
  bool dual_value_available() const;

  /// F_H(z) = -0.5*||v - x0||^2 - sum h_i*(z_i) - support_H(z[r])
  ///        + 0.5*||x0||^2.
  /// Untouched blocks at z_i = 0 contribute their exact h_i*(0), which may be
  /// +inf (making F = -inf). An untouched block with z_i != 0 or an infinite
  /// halfspace support is a hard error.
  double dual_value(const std::vector<BlockPtr>& blocks) const;

  /// Recompute-and-compare checks: v = sum z and x = x0 - v within
  /// 1e-12*(1+||v||), finiteness, and the witness identity
  /// h_i(xw) + conj_i = <xw, z_i> within 1e-9*(1+||xw||*||z_i||) for every
  /// touched block. Throws NumericalError on violation.
  void check_invariants(const std::vector<BlockPtr>& blocks) const;
};

/// Fresh state for a problem: z[r] = 0, halfspace degenerate (whole space),
/// v and x derived from z_start (zeros when omitted). Blocks start untouched;
/// starting from a nonzero z_start leaves the dual value unavailable until
/// each such block is visited once.
DualState init_state(const ProblemSpec& spec,
                     const std::vector<Vector>& z_start = {});

/// Duality-gap certificate: primal(x_ref) - F(z), which upper-bounds
/// 0.5*||x_ref - x||^2 for any feasible x_ref. Infeasible x_ref is an error.
double report_gap(const ProblemSpec& spec, const DualState& state,
                  const Vector& x_ref);

}  // namespace dyksplit

#endif  // DYKSPLIT_DUAL_STATE_HPP
