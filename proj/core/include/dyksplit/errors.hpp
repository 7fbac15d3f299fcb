#ifndef DYKSPLIT_ERRORS_HPP
#define DYKSPLIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dyksplit {

// Base for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Mismatched vector dimensions or malformed in-memory problem data.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(what) {}
};

// Problem-file / schema violations. CLI exit code 2.
class SpecError : public Error {
 public:
  explicit SpecError(const std::string& what) : Error(what) {}
};

// Empty constraint intersections, inconsistent affine sets. CLI exit code 3.
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error(what) {}
};

// Solver failures: root-find caps, missing subproblem minimizers, broken
// internal invariants. CLI exit code 3.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

// Inner Dykstra loop hit its sweep cap before the shift certificate held.
class CertificateTimeout : public NumericalError {
 public:
  CertificateTimeout(const std::string& what, double best_residual,
                     double best_feas_residual, int sweeps_used)
      : NumericalError(what),
        best_residual(best_residual),
        best_feas_residual(best_feas_residual),
        sweeps_used(sweeps_used) {}

  double best_residual;
  double best_feas_residual;
  int sweeps_used;
};

}  // namespace dyksplit

#endif  // DYKSPLIT_ERRORS_HPP
