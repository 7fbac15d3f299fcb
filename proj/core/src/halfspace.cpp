#include "dyksplit/halfspace.hpp"

#include <cmath>
#include <limits>

#include "dyksplit/errors.hpp"

namespace dyksplit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative slack for "z is a nonnegative multiple of the normal".
constexpr double kPropTol = 1e-9;
}  // namespace

bool Halfspace::contains(const Vector& x, double tol) const {
  if (degenerate) return true;
  return dot(normal, x) <= offset + tol;
}

double halfspace_support(const Halfspace& h, const Vector& z) {
  const double zn = norm(z);
  if (h.degenerate) {
    return zn == 0.0 ? 0.0 : kInf;
  }
  if (zn == 0.0) return 0.0;
  const double aa = norm_sq(h.normal);
  const double lambda = dot(z, h.normal) / aa;
  if (lambda < -kPropTol) return kInf;
  // Residual of z against lambda * normal, relative to |z|.
  double resid_sq = 0.0;
  for (std::size_t i = 0; i < z.dim(); ++i) {
    const double r = z[i] - lambda * h.normal[i];
    resid_sq += r * r;
  }
  if (std::sqrt(resid_sq) > kPropTol * zn) return kInf;
  return (lambda < 0.0 ? 0.0 : lambda) * h.offset;
}

Halfspace halfspace_from_point(const Vector& normal,
                               const Vector& boundary_point) {
  if (norm(normal) == 0.0) return Halfspace::whole_space();
  Halfspace h;
  h.normal = normal;
  h.offset = dot(normal, boundary_point);
  h.degenerate = false;
  return h;
}

Halfspace aggregate_halfspaces(const std::vector<WeightedHalfspace>& parts) {
  if (parts.empty()) return Halfspace::whole_space();
  Vector total;
  double offset = 0.0;
  bool have_dim = false;
  for (const auto& [h, z] : parts) {
    const double s = halfspace_support(h, z);
    if (!std::isfinite(s)) {
      throw NumericalError(
          "aggregate_halfspaces: part weight is not a nonnegative multiple of "
          "its halfspace normal (infinite support)");
    }
    offset += s;
    if (!have_dim) {
      total = Vector::zeros(z.dim());
      have_dim = true;
    }
    total += z;
  }
  if (norm(total) == 0.0) return Halfspace::whole_space();
  Halfspace out;
  out.normal = total;
  out.offset = offset;
  out.degenerate = false;
  return out;
}

}  // namespace dyksplit
