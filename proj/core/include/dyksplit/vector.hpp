#ifndef DYKSPLIT_VECTOR_HPP
#define DYKSPLIT_VECTOR_HPP

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace dyksplit {

/// Dense coordinate vector, an element of R^d. All iterates, multipliers and
/// centers in one problem instance share the same dimension.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0) : c_(dim, fill) {}
  Vector(std::initializer_list<double> vals) : c_(vals) {}
  explicit Vector(std::vector<double> vals) : c_(std::move(vals)) {}

  static Vector zeros(std::size_t dim) { return Vector(dim, 0.0); }

  std::size_t dim() const { return c_.size(); }
  double& operator[](std::size_t i) { return c_[i]; }
  double operator[](std::size_t i) const { return c_[i]; }

  double* data() { return c_.data(); }
  const double* data() const { return c_.data(); }
  auto begin() { return c_.begin(); }
  auto end() { return c_.end(); }
  auto begin() const { return c_.begin(); }
  auto end() const { return c_.end(); }

  const std::vector<double>& coords() const { return c_; }

  Vector& operator+=(const Vector& o);
  Vector& operator-=(const Vector& o);
  Vector& operator*=(double s);

  bool operator==(const Vector& o) const { return c_ == o.c_; }

 private:
  std::vector<double> c_;
};

Vector operator+(Vector a, const Vector& b);
Vector operator-(Vector a, const Vector& b);
Vector operator*(double s, Vector a);
Vector operator-(Vector a);

/// Euclidean inner product. Dimension mismatch is a hard error.
double dot(const Vector& a, const Vector& b);

double norm_sq(const Vector& a);
double norm(const Vector& a);
double dist(const Vector& a, const Vector& b);

/// True iff every entry is finite (no NaN/Inf).
bool is_finite(const Vector& a);

/// Throws DimensionError unless a.dim() == expected.
void require_dim(const Vector& a, std::size_t expected, const char* what);

}  // namespace dyksplit

#endif  // DYKSPLIT_VECTOR_HPP
