#ifndef DYKSPLIT_HALFSPACE_HPP
#define DYKSPLIT_HALFSPACE_HPP

#include <utility>
#include <vector>

#include "dyksplit/vector.hpp"

namespace dyksplit {

/// A halfspace {x : <normal, x> <= offset}, or the whole space when
/// `degenerate` is set. The degenerate form is an explicit flag so that the
/// "no cut yet" state is representable exactly.
struct Halfspace {
  Vector normal;
  double offset = 0.0;
  bool degenerate = true;  // default-constructed halfspace is the whole space

  static Halfspace whole_space() { return Halfspace{}; }

  /// Membership test; degenerate halfspaces contain everything. `tol` is an
  /// absolute slack added to the offset.
  bool contains(const Vector& x, double tol = 0.0) const;
};

/// Support value sup_{x in H} <z, x>. Finite iff z is a nonnegative multiple
/// lambda * normal (then the value is lambda * offset); +infinity otherwise.
/// For a degenerate H the value is 0 when z = 0 and +infinity otherwise.
/// The proportionality test uses a relative tolerance on the residual.
double halfspace_support(const Halfspace& h, const Vector& z);

/// Halfspace with the given outward normal whose boundary passes through
/// `boundary_point`: {x : <x - boundary_point, normal> <= 0}. A zero normal
/// yields the degenerate whole-space form.
Halfspace halfspace_from_point(const Vector& normal,
                               const Vector& boundary_point);

/// One (halfspace, weight) pair fed to aggregate_halfspaces. The weight must
/// be a nonnegative multiple of the halfspace's normal.
using WeightedHalfspace = std::pair<Halfspace, Vector>;

/// Combines halfspaces H_k with weights z_k into a single halfspace with
/// normal sum(z_k) and offset sum(support_{H_k}(z_k)). The result contains
/// the intersection of the parts, and its support at the summed normal is at
/// most the summed supports (equality when the normals are independent).
/// A part whose support is infinite is a hard error; a zero total normal
/// yields the degenerate form.
Halfspace aggregate_halfspaces(const std::vector<WeightedHalfspace>& parts);

}  // namespace dyksplit

#endif  // DYKSPLIT_HALFSPACE_HPP
