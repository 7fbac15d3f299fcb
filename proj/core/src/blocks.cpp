#include "dyksplit/blocks.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dyksplit/errors.hpp"

namespace dyksplit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double membership_tol(double scale) { return 1e-9 * (1.0 + std::abs(scale)); }
}  // namespace

void FunctionBlock::check_prox_args(const Vector& y, double rho) const {
  if (!(rho > 0.0)) throw NumericalError(describe() + ": prox weight must be positive");
  if (!is_finite(y)) throw NumericalError(describe() + ": prox center is not finite");
  if (dim() != 0) require_dim(y, dim(), "prox center");
}

double FunctionBlock::conjugate_at(const Vector& z, const Vector& x_witness) const {
  const double v = value(x_witness);
  if (!std::isfinite(v)) {
    throw NumericalError(describe() + ": conjugate witness lies outside the domain");
  }
  return dot(x_witness, z) - v;
}

// ---------------------------------------------------------------------------

namespace {

class AffineFn final : public FunctionBlock {
 public:
  AffineFn(Vector c, double b) : c_(std::move(c)), b_(b) {
    if (c_.dim() == 0) throw SpecError("affine: empty gradient");
    if (!is_finite(c_)) throw SpecError("affine: gradient not finite");
  }

  BlockKind kind() const override { return BlockKind::FullDomain; }
  std::size_t dim() const override { return c_.dim(); }

  double value(const Vector& x) const override { return dot(c_, x) + b_; }

  ProxResult prox(const Vector& y, double rho) const override {
    check_prox_args(y, rho);
    Vector x = y;
    for (std::size_t i = 0; i < x.dim(); ++i) x[i] -= c_[i] / rho;
    return {std::move(x), c_};
  }

  double conjugate_at_zero() const override {
    return norm(c_) == 0.0 ? -b_ : kInf;
  }

  std::string describe() const override { return "affine"; }

  BlockParams params() const override { return {"affine", b_, c_, {}, {}}; }

 private:
  Vector c_;
  double b_;
};

class QuadraticFn final : public FunctionBlock {
 public:
  QuadraticFn(double mu, Vector a) : mu_(mu), a_(std::move(a)) {
    if (!(mu > 0.0)) throw SpecError("quadratic: curvature must be positive");
    if (!is_finite(a_)) throw SpecError("quadratic: center not finite");
  }

  BlockKind kind() const override { return BlockKind::FullDomain; }
  std::size_t dim() const override { return a_.dim(); }

  double value(const Vector& x) const override {
    return 0.5 * mu_ * norm_sq(x - a_);
  }

  ProxResult prox(const Vector& y, double rho) const override {
    check_prox_args(y, rho);
    Vector x(y.dim());
    for (std::size_t i = 0; i < y.dim(); ++i) {
      x[i] = (rho * y[i] + mu_ * a_[i]) / (rho + mu_);
    }
    Vector z(y.dim());
    for (std::size_t i = 0; i < y.dim(); ++i) z[i] = rho * (y[i] - x[i]);
    return {std::move(x), std::move(z)};
  }

  double conjugate_at_zero() const override { return 0.0; }

  std::string describe() const override { return "quadratic"; }

  BlockParams params() const override { return {"quadratic", mu_, a_, {}, {}}; }

 private:
  double mu_;
  Vector a_;
};

class L1Norm final : public FunctionBlock {
 public:
  explicit L1Norm(double lambda) : lambda_(lambda) {
    if (!(lambda >= 0.0)) throw SpecError("l1: weight must be nonnegative");
  }

  BlockKind kind() const override { return BlockKind::FullDomain; }
  std::size_t dim() const override { return 0; }

  double value(const Vector& x) const override {
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return lambda_ * s;
  }

  ProxResult prox(const Vector& y, double rho) const override {
    check_prox_args(y, rho);
    const double t = lambda_ / rho;
    Vector x(y.dim());
    Vector z(y.dim());
    for (std::size_t i = 0; i < y.dim(); ++i) {
      if (y[i] > t) {
        x[i] = y[i] - t;
      } else if (y[i] < -t) {
        x[i] = y[i] + t;
      } else {
        x[i] = 0.0;
      }
      z[i] = rho * (y[i] - x[i]);
    }
    return {std::move(x), std::move(z)};
  }

  double conjugate_at_zero() const override { return 0.0; }

  std::string describe() const override { return "l1"; }

  BlockParams params() const override { return {"l1", lambda_, {}, {}, {}}; }

 private:
  double lambda_;
};

// Positive root of rho*u^2 - rho*s*u - 1 = 0, i.e. the stationarity equation
// of min_u -log(u) + (rho/2)(u - s)^2 on u > 0. Safeguarded Newton seeded by
// the quadratic formula; residual target 1e-12 relative, cap 200 iterations.
double barrier_prox_coord(double s, double rho) {
  const double disc = std::sqrt(s * s + 4.0 / rho);
  double u = (s >= 0.0) ? 0.5 * (s + disc) : (2.0 / rho) / (disc - s);
  double lo = 0.0;
  double hi = std::max(s, 0.0) + disc;
  for (int it = 0; it < 200; ++it) {
    const double g = rho * u * (u - s) - 1.0;
    const double scale = 1.0 + rho * u * u + rho * std::abs(s) * u;
    if (std::abs(g) <= 1e-12 * scale) return u;
    if (g > 0.0) {
      hi = u;
    } else {
      lo = u;
    }
    const double dg = rho * (2.0 * u - s);
    double next = dg > 0.0 ? u - g / dg : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    u = next;
  }
  throw NumericalError("logbarrier: scalar root-find did not converge");
}

class LogBarrier final : public FunctionBlock {
 public:
  explicit LogBarrier(Vector lower) : l_(std::move(lower)) {
    if (l_.dim() == 0) throw SpecError("logbarrier: empty lower bound");
    if (!is_finite(l_)) throw SpecError("logbarrier: lower bound not finite");
  }

  BlockKind kind() const override { return BlockKind::OpenDomain; }
  std::size_t dim() const override { return l_.dim(); }

  double value(const Vector& x) const override {
    require_dim(x, l_.dim(), "logbarrier value");
    double s = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) {
      const double d = x[i] - l_[i];
      if (d <= 0.0) return kInf;
      s -= std::log(d);
    }
    return s;
  }

  ProxResult prox(const Vector& y, double rho) const override {
    check_prox_args(y, rho);
    Vector x(y.dim());
    Vector z(y.dim());
    for (std::size_t i = 0; i < y.dim(); ++i) {
      const double u = barrier_prox_coord(y[i] - l_[i], rho);
      x[i] = l_[i] + u;
      z[i] = rho * (y[i] - x[i]);
    }
    return {std::move(x), std::move(z)};
  }

  double conjugate_at_zero() const override { return kInf; }  // inf h = -inf

  std::string describe() const override { return "logbarrier"; }

  BlockParams params() const override { return {"logbarrier", 0.0, l_, {}, {}}; }

 private:
  Vector l_;
};

class IndicatorBox final : public FunctionBlock {
 public:
  IndicatorBox(Vector lower, Vector upper)
      : l_(std::move(lower)), u_(std::move(upper)) {
    if (l_.dim() != u_.dim() || l_.dim() == 0) {
      throw SpecError("box: bound dimensions do not match");
    }
    for (std::size_t i = 0; i < l_.dim(); ++i) {
      if (!(l_[i] <= u_[i])) throw SpecError("box: lower bound exceeds upper");
    }
  }

  BlockKind kind() const override { return BlockKind::Indicator; }
  std::size_t dim() const override { return l_.dim(); }

  double value(const Vector& x) const override {
    require_dim(x, l_.dim(), "box value");
    for (std::size_t i = 0; i < x.dim(); ++i) {
      const double tol = membership_tol(std::max(std::abs(l_[i]), std::abs(u_[i])));
      if (x[i] < l_[i] - tol || x[i] > u_[i] + tol) return kInf;
    }
    return 0.0;
  }

  ProxResult prox(const Vector& y, double rho) const override {
    check_prox_args(y, rho);
    Vector x(y.dim());
    Vector z(y.dim());
    for (std::size_t i = 0; i < y.dim(); ++i) {
      x[i] = std::clamp(y[i], l_[i], u_[i]);
      z[i] = rho * (y[i] - x[i]);
    }
    return {std::move(x), std::move(z)};
  }

  double conjugate_at_zero() const override { return 0.0; }

  std::string describe() const override { return "box"; }

  BlockParams params() const override { return {"box", 0.0, l_, u_, {}}; }

 private:
  Vector l_, u_;
};

class IndicatorBall final : public FunctionBlock {
 public:
  IndicatorBall(Vector center, double radius)
      : c_(std::move(center)), r_(radius) {
    if (!(radius >= 0.0)) throw SpecError("ball: radius must be nonnegative");
    if (!is_finite(c_)) throw SpecError("ball: center not finite");
  }

  BlockKind kind() const override { return BlockKind::Indicator; }
  std::size_t dim() const override { return c_.dim(); }

  double value(const Vector& x) const override {
    require_dim(x, c_.dim(), "ball value");
    return dist(x, c_) <= r_ + membership_tol(r_) ? 0.0 : kInf;
  }

  ProxResult prox(const Vector& y, double rho) const override {
    check_prox_args(y, rho);
    Vector d = y - c_;
    const double n = norm(d);
    Vector x = n <= r_ ? y : c_ + (r_ / n) * d;
    Vector z(y.dim());
    for (std::size_t i = 0; i < y.dim(); ++i) z[i] = rho * (y[i] - x[i]);
    return {std::move(x), std::move(z)};
  }

  double conjugate_at_zero() const override { return 0.0; }

  std::string describe() const override { return "ball"; }

  BlockParams params() const override { return {"ball", r_, c_, {}, {}}; }

 private:
  Vector c_;
  double r_;
};

class IndicatorHalfspace final : public FunctionBlock {
 public:
  IndicatorHalfspace(Vector normal, double offset)
      : a_(std::move(normal)), b_(offset) {
    if (norm(a_) == 0.0) throw SpecError("halfspace: zero normal");
    if (!is_finite(a_)) throw SpecError("halfspace: normal not finite");
  }

  BlockKind kind() const override { return BlockKind::Indicator; }
  std::size_t dim() const override { return a_.dim(); }

  double value(const Vector& x) const override {
    require_dim(x, a_.dim(), "halfspace value");
    const double lhs = dot(a_, x);
    return lhs <= b_ + membership_tol(std::abs(b_) + norm(a_) * norm(x)) ? 0.0
                                                                         : kInf;
  }

  ProxResult prox(const Vector& y, double rho) const override {
    check_prox_args(y, rho);
    const double viol = dot(a_, y) - b_;
    Vector x = y;
    if (viol > 0.0) {
      const double step = viol / norm_sq(a_);
      for (std::size_t i = 0; i < y.dim(); ++i) x[i] -= step * a_[i];
    }
    Vector z(y.dim());
    for (std::size_t i = 0; i < y.dim(); ++i) z[i] = rho * (y[i] - x[i]);
    return {std::move(x), std::move(z)};
  }

  double conjugate_at_zero() const override { return 0.0; }

  std::string describe() const override { return "halfspace"; }

  BlockParams params() const override { return {"halfspace", b_, a_, {}, {}}; }

 private:
  Vector a_;
  double b_;
};

class IndicatorAffine final : public FunctionBlock {
 public:
  IndicatorAffine(std::vector<Vector> rows, Vector rhs)
      : rows_(std::move(rows)), rhs_(std::move(rhs)) {
    if (rows_.empty() || rows_.size() != rhs_.dim()) {
      throw SpecError("affineset: row/rhs count mismatch");
    }
    const std::size_t d = rows_.front().dim();
    for (const Vector& r : rows_) {
      if (r.dim() != d || !is_finite(r)) throw SpecError("affineset: bad row");
    }
    a_.resize(rows_.size(), d);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      for (std::size_t j = 0; j < d; ++j) a_(i, j) = rows_[i][j];
    }
  }

  BlockKind kind() const override { return BlockKind::Indicator; }
  std::size_t dim() const override { return rows_.front().dim(); }

  double value(const Vector& x) const override {
    require_dim(x, dim(), "affineset value");
    // scale-aware slack: the projection residual grows with ||A|| * ||x||
    const double tol = membership_tol(norm(rhs_) + a_.norm() * norm(x));
    return residual(x) <= tol ? 0.0 : kInf;
  }

  ProxResult prox(const Vector& y, double rho) const override {
    check_prox_args(y, rho);
    Eigen::Map<const Eigen::VectorXd> ym(y.data(), y.dim());
    Eigen::Map<const Eigen::VectorXd> bm(rhs_.data(), rhs_.dim());
    Eigen::VectorXd gap = a_ * ym - bm;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        a_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    Eigen::VectorXd corr = svd.solve(gap);
    Vector x(y.dim());
    for (std::size_t i = 0; i < y.dim(); ++i) x[i] = y[i] - corr(i);
    if (residual(x) > membership_tol(norm(rhs_) + a_.norm() * norm(x))) {
      throw InfeasibleError("affineset: inconsistent system, the set is empty");
    }
    Vector z(y.dim());
    for (std::size_t i = 0; i < y.dim(); ++i) z[i] = rho * (y[i] - x[i]);
    return {std::move(x), std::move(z)};
  }

  double conjugate_at_zero() const override { return 0.0; }

  std::string describe() const override { return "affineset"; }

  BlockParams params() const override { return {"affineset", 0.0, {}, rhs_, rows_}; }

 private:
  double residual(const Vector& x) const {
    Eigen::Map<const Eigen::VectorXd> xm(x.data(), x.dim());
    Eigen::Map<const Eigen::VectorXd> bm(rhs_.data(), rhs_.dim());
    return (a_ * xm - bm).norm();
  }

  std::vector<Vector> rows_;
  Vector rhs_;
  Eigen::MatrixXd a_;
};

}  // namespace

BlockPtr make_affine(Vector c, double b) {
  return std::make_shared<AffineFn>(std::move(c), b);
}
BlockPtr make_quadratic(double mu, Vector a) {
  return std::make_shared<QuadraticFn>(mu, std::move(a));
}
BlockPtr make_l1(double lambda) { return std::make_shared<L1Norm>(lambda); }
BlockPtr make_log_barrier(Vector lower) {
  return std::make_shared<LogBarrier>(std::move(lower));
}
BlockPtr make_box(Vector lower, Vector upper) {
  return std::make_shared<IndicatorBox>(std::move(lower), std::move(upper));
}
BlockPtr make_ball(Vector center, double radius) {
  return std::make_shared<IndicatorBall>(std::move(center), radius);
}
BlockPtr make_halfspace_block(Vector normal, double offset) {
  return std::make_shared<IndicatorHalfspace>(std::move(normal), offset);
}
BlockPtr make_affine_set(std::vector<Vector> rows, Vector rhs) {
  return std::make_shared<IndicatorAffine>(std::move(rows), std::move(rhs));
}

}  // namespace dyksplit
