#ifndef DYKSPLIT_ORACLE_HPP
#define DYKSPLIT_ORACLE_HPP

#include <string>
#include <vector>

#include "dyksplit/problem.hpp"
#include "dyksplit/vector.hpp"

namespace dyksplit {
namespace oracle {

/// Reference answer from a brute-force solver. certified_tol bounds both the
/// distance of x_star to the true minimizer and the objective error; the
/// first-order method reports it honestly from a duality-gap certificate.
struct OracleResult {
  Vector x_star;
  double obj_star = 0.0;
  enum class Method { ActiveSetEnum, LongHorizonFirstOrder, VertexEnum };
  Method method = Method::ActiveSetEnum;
  double certified_tol = 0.0;
};

std::string method_name(OracleResult::Method m);

// Projectors written independently of the prox catalog, so reference answers
// never flow through the code paths they are meant to check.
Vector project_box(const Vector& y, const Vector& lower, const Vector& upper);
Vector project_ball(const Vector& y, const Vector& center, double radius);
Vector project_halfspace(const Vector& y, const Vector& normal, double offset);
Vector project_affine_rows(const Vector& y, const std::vector<Vector>& rows,
                           const Vector& rhs);

/// Exact projection of x0 onto the intersection of polyhedral indicator
/// blocks (boxes, halfspaces, affine sets), by enumeration of active
/// constraint subsets. At most 12 inequality rows after box expansion.
OracleResult solve_projection_polyhedron(const Vector& x0,
                                         const std::vector<BlockPtr>& sets);

/// Reference minimizer of 0.5*||x - x0||^2 + sum h_i(x). Exact active-set
/// enumeration when every block is quadratic/affine/polyhedral and the row
/// budget allows; otherwise a long-horizon first-order run on progressively
/// tighter smoothings, with a duality-gap certificate.
OracleResult solve_regularized_sum(const ProblemSpec& spec);

/// The long-horizon first-order route of solve_regularized_sum, exposed so
/// the two oracle methods can be cross-checked against each other.
OracleResult solve_regularized_sum_first_order(const ProblemSpec& spec);

/// Reference minimizer of sum h_i(x) alone (no built-in quadratic): exact
/// active-set enumeration when the blocks contribute positive curvature,
/// vertex enumeration for linear objectives over compact polyhedra. Throws
/// SpecError for block mixes outside those families.
OracleResult solve_unregularized(const ProblemSpec& spec);

}  // namespace oracle
}  // namespace dyksplit

#endif  // DYKSPLIT_ORACLE_HPP
