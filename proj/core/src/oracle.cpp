#include "dyksplit/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "dyksplit/errors.hpp"

namespace dyksplit {
namespace oracle {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string method_name(OracleResult::Method m) {
  switch (m) {
    case OracleResult::Method::ActiveSetEnum:
      return "active-set-enum";
    case OracleResult::Method::LongHorizonFirstOrder:
      return "long-horizon-first-order";
    case OracleResult::Method::VertexEnum:
      return "vertex-enum";
  }
  return "?";
}

Vector project_box(const Vector& y, const Vector& lower, const Vector& upper) {
  Vector x(y.dim());
  for (std::size_t i = 0; i < y.dim(); ++i) {
    x[i] = y[i] < lower[i] ? lower[i] : (y[i] > upper[i] ? upper[i] : y[i]);
  }
  return x;
}

Vector project_ball(const Vector& y, const Vector& center, double radius) {
  Vector d = y - center;
  const double n = norm(d);
  if (n <= radius) return y;
  return center + (radius / n) * d;
}

Vector project_halfspace(const Vector& y, const Vector& normal, double offset) {
  const double gap = dot(normal, y) - offset;
  if (gap <= 0.0) return y;
  return y - (gap / norm_sq(normal)) * normal;
}

Vector project_affine_rows(const Vector& y, const std::vector<Vector>& rows,
                           const Vector& rhs) {
  const std::size_t k = rows.size();
  const std::size_t d = y.dim();
  Eigen::MatrixXd a(k, d);
  Eigen::VectorXd g(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < d; ++j) a(i, j) = rows[i][j];
    g(i) = dot(rows[i], y) - rhs[i];
  }
  // Normal-equations route: y - A^T (A A^T)^+ (A y - b).
  Eigen::MatrixXd gram = a * a.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const double thresh = 1e-12 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  Eigen::VectorXd w = eig.eigenvectors().transpose() * g;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    w(i) = eig.eigenvalues()(i) > thresh ? w(i) / eig.eigenvalues()(i) : 0.0;
  }
  Eigen::VectorXd mult = eig.eigenvectors() * w;
  Eigen::VectorXd corr = a.transpose() * mult;
  Vector x(d);
  for (std::size_t j = 0; j < d; ++j) x[j] = y[j] - corr(j);
  return x;
}

namespace {

// <a, x> <= b rows plus <q, x> = e rows extracted from polyhedral blocks.
struct LinearRows {
  std::vector<Vector> ineq_a;
  std::vector<double> ineq_b;
  std::vector<Vector> eq_a;
  std::vector<double> eq_b;
};

// Appends the rows of one block; false when the block is not polyhedral.
bool linearize(const FunctionBlock& blk, std::size_t dim, LinearRows& out) {
  const BlockParams p = blk.params();
  if (p.shape == "halfspace") {
    out.ineq_a.push_back(p.primary);
    out.ineq_b.push_back(p.scalar);
    return true;
  }
  if (p.shape == "box") {
    for (std::size_t j = 0; j < dim; ++j) {
      Vector up = Vector::zeros(dim);
      up[j] = 1.0;
      out.ineq_a.push_back(up);
      out.ineq_b.push_back(p.secondary[j]);
      Vector lo = Vector::zeros(dim);
      lo[j] = -1.0;
      out.ineq_a.push_back(lo);
      out.ineq_b.push_back(-p.primary[j]);
    }
    return true;
  }
  if (p.shape == "affineset") {
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
      out.eq_a.push_back(p.rows[i]);
      out.eq_b.push_back(p.secondary[i]);
    }
    return true;
  }
  return false;
}

std::vector<unsigned> masks_by_cardinality(int m) {
  std::vector<unsigned> masks;
  masks.reserve(1u << m);
  for (unsigned mask = 0; mask < (1u << m); ++mask) masks.push_back(mask);
  std::stable_sort(masks.begin(), masks.end(), [](unsigned a, unsigned b) {
    const int pa = __builtin_popcount(a);
    const int pb = __builtin_popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  return masks;
}

bool rows_feasible(const LinearRows& rows, const Vector& x) {
  for (std::size_t j = 0; j < rows.ineq_a.size(); ++j) {
    const double tol = 1e-9 * (1.0 + std::abs(rows.ineq_b[j]) +
                               norm(rows.ineq_a[j]) * norm(x));
    if (dot(rows.ineq_a[j], x) > rows.ineq_b[j] + tol) return false;
  }
  for (std::size_t j = 0; j < rows.eq_a.size(); ++j) {
    const double tol = 1e-9 * (1.0 + std::abs(rows.eq_b[j]) +
                               norm(rows.eq_a[j]) * norm(x));
    if (std::abs(dot(rows.eq_a[j], x) - rows.eq_b[j]) > tol) return false;
  }
  return true;
}

// Minimize (kappa/2)||x||^2 - <p, x> over the rows, kappa > 0, by active-set
// enumeration. Every KKT-consistent candidate is the global minimizer.
Vector quadratic_over_rows(double kappa, const Vector& p,
                           const LinearRows& rows) {
  const int m = static_cast<int>(rows.ineq_a.size());
  const int ne = static_cast<int>(rows.eq_a.size());
  const std::size_t d = p.dim();
  if (m > 20) {
    throw SpecError("oracle: too many inequality rows for enumeration");
  }
  for (unsigned mask : masks_by_cardinality(m)) {
    std::vector<int> act;
    for (int j = 0; j < m; ++j) {
      if (mask & (1u << j)) act.push_back(j);
    }
    const int k = static_cast<int>(act.size()) + ne;
    Vector x(d);
    Eigen::VectorXd mult;
    if (k == 0) {
      for (std::size_t t = 0; t < d; ++t) x[t] = p[t] / kappa;
    } else {
      Eigen::MatrixXd c(k, d);
      Eigen::VectorXd e(k);
      for (int a = 0; a < static_cast<int>(act.size()); ++a) {
        for (std::size_t t = 0; t < d; ++t) c(a, t) = rows.ineq_a[act[a]][t];
        e(a) = rows.ineq_b[act[a]];
      }
      for (int a = 0; a < ne; ++a) {
        const int rr = static_cast<int>(act.size()) + a;
        for (std::size_t t = 0; t < d; ++t) c(rr, t) = rows.eq_a[a][t];
        e(rr) = rows.eq_b[a];
      }
      Eigen::VectorXd pm(d);
      for (std::size_t t = 0; t < d; ++t) pm(t) = p[t];
      Eigen::MatrixXd gram = c * c.transpose();
      Eigen::VectorXd rhs = c * pm - kappa * e;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(
          gram, Eigen::ComputeThinU | Eigen::ComputeThinV);
      svd.setThreshold(1e-12);
      mult = svd.solve(rhs);
      if ((gram * mult - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) continue;
      Eigen::VectorXd xm = (pm - c.transpose() * mult) / kappa;
      for (std::size_t t = 0; t < d; ++t) x[t] = xm(t);
      const double ltol = 1e-9 * (1.0 + mult.cwiseAbs().maxCoeff());
      bool ok = true;
      for (int a = 0; a < static_cast<int>(act.size()); ++a) {
        if (mult(a) < -ltol) ok = false;
      }
      if (!ok) continue;
    }
    if (rows_feasible(rows, x)) return x;
  }
  throw InfeasibleError("oracle: empty polyhedron (no KKT candidate)");
}

// Minimize -<p, x> over the rows by enumerating basic feasible candidates.
// Assumes a compact feasible region (the minimum sits at a vertex).
Vector linear_over_rows(const Vector& p, const LinearRows& rows) {
  const int m = static_cast<int>(rows.ineq_a.size());
  const int ne = static_cast<int>(rows.eq_a.size());
  const std::size_t d = p.dim();
  if (m > 20) {
    throw SpecError("oracle: too many inequality rows for enumeration");
  }
  bool found = false;
  double best = kInf;
  Vector best_x;
  for (unsigned mask : masks_by_cardinality(m)) {
    std::vector<int> act;
    for (int j = 0; j < m; ++j) {
      if (mask & (1u << j)) act.push_back(j);
    }
    const int k = static_cast<int>(act.size()) + ne;
    if (k == 0) continue;
    Eigen::MatrixXd c(k, d);
    Eigen::VectorXd e(k);
    for (int a = 0; a < static_cast<int>(act.size()); ++a) {
      for (std::size_t t = 0; t < d; ++t) c(a, t) = rows.ineq_a[act[a]][t];
      e(a) = rows.ineq_b[act[a]];
    }
    for (int a = 0; a < ne; ++a) {
      const int rr = static_cast<int>(act.size()) + a;
      for (std::size_t t = 0; t < d; ++t) c(rr, t) = rows.eq_a[a][t];
      e(rr) = rows.eq_b[a];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        c, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    Eigen::VectorXd xm = svd.solve(e);
    if ((c * xm - e).norm() > 1e-9 * (1.0 + e.norm())) continue;
    Vector x(d);
    for (std::size_t t = 0; t < d; ++t) x[t] = xm(t);
    if (!rows_feasible(rows, x)) continue;
    const double obj = -dot(p, x);
    if (!found || obj < best - 1e-15 * (1.0 + std::abs(best))) {
      found = true;
      best = obj;
      best_x = x;
    }
  }
  if (!found) {
    throw InfeasibleError("oracle: no basic feasible point found");
  }
  return best_x;
}

// Point in the prox graph of one block at smoothing mu: returns u with
// (x - u)/mu a subgradient of the block at u. Formulas are written here on
// purpose, separate from the catalog.
Vector envelope_point(const BlockParams& p, const Vector& x, double mu) {
  const std::size_t d = x.dim();
  if (p.shape == "affine") {
    Vector u = x;
    for (std::size_t j = 0; j < d; ++j) u[j] -= mu * p.primary[j];
    return u;
  }
  if (p.shape == "quadratic") {
    Vector u(d);
    for (std::size_t j = 0; j < d; ++j) {
      u[j] = (x[j] + mu * p.scalar * p.primary[j]) / (1.0 + mu * p.scalar);
    }
    return u;
  }
  if (p.shape == "l1") {
    const double t = mu * p.scalar;
    Vector u(d);
    for (std::size_t j = 0; j < d; ++j) {
      u[j] = x[j] > t ? x[j] - t : (x[j] < -t ? x[j] + t : 0.0);
    }
    return u;
  }
  if (p.shape == "logbarrier") {
    Vector u(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double s = x[j] - p.primary[j];
      const double root = 0.5 * (s + std::sqrt(s * s + 4.0 * mu));
      u[j] = p.primary[j] + root;
    }
    return u;
  }
  if (p.shape == "box") return project_box(x, p.primary, p.secondary);
  if (p.shape == "ball") return project_ball(x, p.primary, p.scalar);
  if (p.shape == "halfspace") {
    return project_halfspace(x, p.primary, p.scalar);
  }
  if (p.shape == "affineset") {
    return project_affine_rows(x, p.rows, p.secondary);
  }
  throw NumericalError("oracle: unknown block shape " + p.shape);
}

Vector feasibilize(const ProblemSpec& spec, Vector x) {
  std::vector<BlockParams> sets;
  for (int i = spec.r2; i < spec.r(); ++i) {
    sets.push_back(spec.blocks[i]->params());
  }
  if (sets.empty()) return x;
  for (long pass = 0; pass < 100000; ++pass) {
    double worst = 0.0;
    for (const BlockParams& p : sets) {
      Vector proj = envelope_point(p, x, 1.0);  // indicator: plain projection
      worst = std::max(worst, dist(x, proj));
      x = std::move(proj);
    }
    if (worst <= 1e-13 * (1.0 + norm(x))) break;
  }
  return x;
}

// Product-space Douglas-Rachford on
//   min sum_i [ h_i(u_i) + (1/2r)||u_i - x0||^2 ]  s.t.  u_1 = ... = u_r,
// which equals the regularized sum on the diagonal. Each component prox is a
// single catalog-independent formula, the diagonal projection is averaging,
// and the 1/r-strong convexity of each component makes the iteration contract
// linearly, so the fixed-point residual is an honest accuracy certificate.
OracleResult dr_first_order(const ProblemSpec& spec) {
  const std::size_t d = spec.dim;
  const int r = spec.r();
  std::vector<BlockParams> ps;
  for (const auto& b : spec.blocks) ps.push_back(b->params());

  // Step t = r: the component prox is argmin h_i(u) + (2/2r)||u - c_i||^2
  // with c_i the midpoint of x0 and the DR point.
  const double mu = static_cast<double>(r) / 2.0;
  std::vector<Vector> s(static_cast<std::size_t>(r), spec.x0);
  std::vector<Vector> px(static_cast<std::size_t>(r), Vector::zeros(d));
  Vector mean = spec.x0;
  double residual = kInf;
  const long cap = 150000;
  for (long it = 0; it < cap; ++it) {
    for (int i = 0; i < r; ++i) {
      Vector c(d);
      for (std::size_t j = 0; j < d; ++j) {
        c[j] = 0.5 * (spec.x0[j] + s[static_cast<std::size_t>(i)][j]);
      }
      px[static_cast<std::size_t>(i)] =
          envelope_point(ps[static_cast<std::size_t>(i)], c, mu);
    }
    mean = Vector::zeros(d);
    for (int i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        mean[j] += 2.0 * px[static_cast<std::size_t>(i)][j] -
                   s[static_cast<std::size_t>(i)][j];
      }
    }
    mean *= 1.0 / static_cast<double>(r);
    double resid_sq = 0.0;
    double scale_sq = 0.0;
    for (int i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        const double step = mean[j] - px[static_cast<std::size_t>(i)][j];
        s[static_cast<std::size_t>(i)][j] += step;
        resid_sq += step * step;
        scale_sq += s[static_cast<std::size_t>(i)][j] *
                    s[static_cast<std::size_t>(i)][j];
      }
    }
    residual = std::sqrt(resid_sq);
    if (residual <= 1e-13 * (1.0 + std::sqrt(scale_sq))) break;
  }

  Vector x_feas = feasibilize(spec, mean);
  OracleResult res;
  res.obj_star = primal_value(spec, x_feas);
  res.x_star = std::move(x_feas);
  res.method = OracleResult::Method::LongHorizonFirstOrder;
  // Conservative residual-to-distance factor, exercised against the exact
  // enumeration route in the self-consistency tests.
  res.certified_tol = 50.0 * residual + 1e-12 * (1.0 + norm(res.x_star));
  return res;
}

}  // namespace

OracleResult solve_projection_polyhedron(const Vector& x0,
                                         const std::vector<BlockPtr>& sets) {
  LinearRows rows;
  for (const auto& b : sets) {
    if (b->kind() != BlockKind::Indicator || !linearize(*b, x0.dim(), rows)) {
      throw SpecError("oracle: projection reference needs polyhedral sets");
    }
  }
  if (rows.ineq_a.size() > 12) {
    throw SpecError("oracle: more than 12 inequality rows after expansion");
  }
  OracleResult res;
  res.x_star = quadratic_over_rows(1.0, x0, rows);
  res.obj_star = 0.5 * norm_sq(res.x_star - x0);
  res.method = OracleResult::Method::ActiveSetEnum;
  res.certified_tol = 1e-10;
  return res;
}

OracleResult solve_regularized_sum(const ProblemSpec& spec) {
  spec.validate();
  if (spec.dim > 20) {
    throw SpecError("oracle: reference solves are desk scale (dim <= 20)");
  }
  // Exact route when the instance is quadratic + polyhedral.
  LinearRows rows;
  double kappa = 1.0;
  Vector p = spec.x0;
  bool exact = true;
  for (const auto& b : spec.blocks) {
    const BlockParams bp = b->params();
    if (bp.shape == "quadratic") {
      kappa += bp.scalar;
      for (std::size_t j = 0; j < spec.dim; ++j) {
        p[j] += bp.scalar * bp.primary[j];
      }
    } else if (bp.shape == "affine") {
      for (std::size_t j = 0; j < spec.dim; ++j) p[j] -= bp.primary[j];
    } else if (!linearize(*b, spec.dim, rows)) {
      exact = false;
      break;
    }
  }
  if (exact && rows.ineq_a.size() <= 16) {
    OracleResult res;
    res.x_star = quadratic_over_rows(kappa, p, rows);
    res.obj_star = primal_value(spec, res.x_star);
    res.method = OracleResult::Method::ActiveSetEnum;
    res.certified_tol = 1e-10;
    return res;
  }
  return dr_first_order(spec);
}

OracleResult solve_regularized_sum_first_order(const ProblemSpec& spec) {
  spec.validate();
  if (spec.dim > 20) {
    throw SpecError("oracle: reference solves are desk scale (dim <= 20)");
  }
  return dr_first_order(spec);
}

OracleResult solve_unregularized(const ProblemSpec& spec) {
  spec.validate();
  if (spec.dim > 20) {
    throw SpecError("oracle: reference solves are desk scale (dim <= 20)");
  }
  LinearRows rows;
  double kappa = 0.0;
  Vector p = Vector::zeros(spec.dim);
  for (const auto& b : spec.blocks) {
    const BlockParams bp = b->params();
    if (bp.shape == "quadratic") {
      kappa += bp.scalar;
      for (std::size_t j = 0; j < spec.dim; ++j) {
        p[j] += bp.scalar * bp.primary[j];
      }
    } else if (bp.shape == "affine") {
      for (std::size_t j = 0; j < spec.dim; ++j) p[j] -= bp.primary[j];
    } else if (!linearize(*b, spec.dim, rows)) {
      throw SpecError(
          "oracle: unregularized reference supports quadratic/affine blocks "
          "over polyhedra only");
    }
  }
  OracleResult res;
  if (kappa > 0.0) {
    res.x_star = quadratic_over_rows(kappa, p, rows);
    res.method = OracleResult::Method::ActiveSetEnum;
  } else {
    res.x_star = linear_over_rows(p, rows);
    res.method = OracleResult::Method::VertexEnum;
  }
  res.obj_star = objective_sum(spec, res.x_star);
  res.certified_tol = 1e-10;
  return res;
}

}  // namespace oracle
}  // namespace dyksplit
