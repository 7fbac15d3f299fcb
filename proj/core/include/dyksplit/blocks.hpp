#ifndef DYKSPLIT_BLOCKS_HPP
#define DYKSPLIT_BLOCKS_HPP

#include <memory>
#include <string>
#include <vector>

#include "dyksplit/halfspace.hpp"
#include "dyksplit/vector.hpp"

namespace dyksplit {

/// How a block behaves at the boundary of its domain. FullDomain blocks are
/// finite everywhere, OpenDomain blocks blow up to +inf on the boundary of an
/// open domain, Indicator blocks are {0, +inf} membership functions.
enum class BlockKind { FullDomain, OpenDomain, Indicator };

/// Output of a proximal step: x minimizes shape(.) + (rho/2)||. - y||^2 and
/// z = rho * (y - x) is a subgradient of the shape at x.
struct ProxResult {
  Vector x;
  Vector z;
};

/// Flat introspection record for a catalog block; consumed by the reference
/// solvers and the instance generator. Field use per shape:
///   affine:     scalar=b, primary=c
///   quadratic:  scalar=mu, primary=a
///   l1:         scalar=lambda
///   logbarrier: primary=lower
///   box:        primary=lower, secondary=upper
///   ball:       scalar=radius, primary=center
///   halfspace:  scalar=offset, primary=normal
///   affineset:  rows=rows, secondary=rhs
struct BlockParams {
  std::string shape;
  double scalar = 0.0;
  Vector primary;
  Vector secondary;
  std::vector<Vector> rows;
};

/// One convex summand h_i of a problem. Immutable after construction; prox is
/// a pure function, so blocks may be shared freely across threads.
class FunctionBlock {
 public:
  virtual ~FunctionBlock() = default;

  virtual BlockKind kind() const = 0;

  /// Fixed dimension implied by the parameters, or 0 when any dimension fits.
  virtual std::size_t dim() const = 0;

  /// Extended-real value; +inf outside the domain. Indicator membership uses
  /// a small relative tolerance so that exact boundary points stay inside.
  virtual double value(const Vector& x) const = 0;

  /// Requires rho > 0 and finite y.
  virtual ProxResult prox(const Vector& y, double rho) const = 0;

  /// Conjugate at the origin, h*(0) = -inf h. May be +inf (e.g. a nonzero
  /// affine block). Used for dual values at not-yet-touched blocks.
  virtual double conjugate_at_zero() const = 0;

  virtual std::string describe() const = 0;

  virtual BlockParams params() const = 0;

  /// Conjugate value h*(z) evaluated through the witness identity
  /// h*(z) = <x, z> - h(x), valid when z is a subgradient at x. This is the
  /// only conjugate evaluation the solver ever needs; a witness outside the
  /// domain is a hard error.
  double conjugate_at(const Vector& z, const Vector& x_witness) const;

 protected:
  void check_prox_args(const Vector& y, double rho) const;
};

using BlockPtr = std::shared_ptr<const FunctionBlock>;

// Catalog constructors. Parameter sanity violations throw SpecError.
BlockPtr make_affine(Vector c, double b);                    // <c,x> + b
BlockPtr make_quadratic(double mu, Vector a);                // (mu/2)||x-a||^2
BlockPtr make_l1(double lambda);                             // lambda*||x||_1
BlockPtr make_log_barrier(Vector lower);                     // -sum log(x-l)
BlockPtr make_box(Vector lower, Vector upper);               // indicator [l,u]
BlockPtr make_ball(Vector center, double radius);            // ||x-c|| <= r
BlockPtr make_halfspace_block(Vector normal, double offset); // <a,x> <= b
BlockPtr make_affine_set(std::vector<Vector> rows, Vector rhs);  // Ax = b

}  // namespace dyksplit

#endif  // DYKSPLIT_BLOCKS_HPP
