#include "dyksplit/dual_state.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dyksplit/errors.hpp"

namespace dyksplit {

void DualState::refresh_sums() {
  Vector sum = Vector::zeros(x0.dim());
  for (const Vector& zi : z) sum += zi;
  v = std::move(sum);
  x = x0 - v;
}

bool DualState::dual_value_available() const {
  for (int i = 0; i < r(); ++i) {
    if (!touched[i] && norm(z[i]) != 0.0) return false;
  }
  return true;
}

double DualState::dual_value(const std::vector<BlockPtr>& blocks) const {
  double conj_sum = 0.0;
  for (int i = 0; i < r(); ++i) {
    if (touched[i]) {
      conj_sum += conj[i];
    } else {
      if (norm(z[i]) != 0.0) {
        throw NumericalError(
            "dual_value: block " + std::to_string(i + 1) +
            " has a nonzero multiplier but no conjugate witness yet");
      }
      const double c0 = blocks[i]->conjugate_at_zero();
      if (!std::isfinite(c0)) return -std::numeric_limits<double>::infinity();
      conj_sum += c0;
    }
  }
  const double support = halfspace_support(hs, z.back());
  if (!std::isfinite(support)) {
    throw NumericalError(
        "dual_value: halfspace multiplier is not aligned with the halfspace "
        "normal (broken engine invariant)");
  }
  return -0.5 * norm_sq(v - x0) - conj_sum - support + 0.5 * norm_sq(x0);
}

void DualState::check_invariants(const std::vector<BlockPtr>& blocks) const {
  const double tol = 1e-12 * (1.0 + norm(v));
  Vector sum = Vector::zeros(x0.dim());
  for (const Vector& zi : z) {
    if (!is_finite(zi)) throw NumericalError("dual state: non-finite multiplier");
    sum += zi;
  }
  if (dist(sum, v) > tol) {
    throw NumericalError("dual state: cached v does not equal sum of z");
  }
  if (dist(x0 - v, x) > tol) {
    throw NumericalError("dual state: cached x does not equal x0 - v");
  }
  if (!is_finite(x)) throw NumericalError("dual state: non-finite iterate");
  for (int i = 0; i < r(); ++i) {
    if (!touched[i]) continue;
    const Vector& xw = last_touch_x[i];
    const double lhs = blocks[i]->value(xw) + conj[i];
    const double rhs = dot(xw, z[i]);
    const double ftol = 1e-9 * (1.0 + norm(xw) * norm(z[i]));
    if (!(std::abs(lhs - rhs) <= ftol)) {
      throw NumericalError("dual state: conjugate witness identity violated "
                           "at block " + std::to_string(i + 1));
    }
  }
}

DualState init_state(const ProblemSpec& spec,
                     const std::vector<Vector>& z_start) {
  spec.validate();
  const int r = spec.r();
  DualState st;
  st.x0 = spec.x0;
  st.z.assign(static_cast<std::size_t>(r) + 1, Vector::zeros(spec.dim));
  if (!z_start.empty()) {
    if (static_cast<int>(z_start.size()) != r) {
      throw DimensionError("init: z_start must have one entry per block");
    }
    for (int i = 0; i < r; ++i) {
      require_dim(z_start[i], spec.dim, "init z_start entry");
      if (!is_finite(z_start[i])) throw SpecError("init: z_start not finite");
      st.z[i] = z_start[i];
    }
  }
  st.conj.assign(r, 0.0);
  st.touched.assign(r, 0);
  st.hs = Halfspace::whole_space();
  st.last_touch_x.assign(static_cast<std::size_t>(r) + 1,
                         Vector::zeros(spec.dim));
  st.refresh_sums();
  return st;
}

double report_gap(const ProblemSpec& spec, const DualState& state,
                  const Vector& x_ref) {
  const double pv = primal_value(spec, x_ref);
  if (!std::isfinite(pv)) {
    throw InfeasibleError("report_gap: reference point is infeasible");
  }
  const double gap = pv - state.dual_value(spec.blocks);
  const double lower = 0.5 * norm_sq(x_ref - state.x);
  if (!(gap >= lower - 1e-9 * (1.0 + std::abs(pv)))) {
    throw NumericalError("report_gap: sandwich inequality violated");
  }
  return gap;
}

}  // namespace dyksplit
