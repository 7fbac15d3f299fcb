#include "dyksplit/problem.hpp"

#include <string>

#include "dyksplit/errors.hpp"

namespace dyksplit {

void ProblemSpec::validate() const {
  if (dim == 0) throw SpecError("problem: dimension must be at least 1");
  if (x0.dim() != dim) throw SpecError("problem: x0 dimension mismatch");
  if (!is_finite(x0)) throw SpecError("problem: x0 not finite");
  const int n = r();
  if (n < 2) throw SpecError("problem: need at least 2 blocks");
  if (!(0 <= r1 && r1 <= r2 && r2 <= n)) {
    throw SpecError("problem: invalid block partition");
  }
  for (int i = 0; i < n; ++i) {
    const auto& b = blocks[i];
    if (!b) throw SpecError("problem: null block");
    if (b->dim() != 0 && b->dim() != dim) {
      throw SpecError("problem: block " + std::to_string(i + 1) + " (" +
                      b->describe() + ") has dimension " +
                      std::to_string(b->dim()) + ", expected " +
                      std::to_string(dim));
    }
    const BlockKind expect = i < r1   ? BlockKind::FullDomain
                             : i < r2 ? BlockKind::OpenDomain
                                      : BlockKind::Indicator;
    if (b->kind() != expect) {
      throw SpecError("problem: block " + std::to_string(i + 1) + " (" +
                      b->describe() + ") does not match the partition order");
    }
  }
}

ProblemSpec make_spec(std::size_t dim, Vector x0,
                      std::vector<BlockPtr> blocks) {
  ProblemSpec spec;
  spec.dim = dim;
  spec.x0 = std::move(x0);
  spec.blocks = std::move(blocks);
  int r1 = 0;
  int r2 = 0;
  for (const auto& b : spec.blocks) {
    if (!b) throw SpecError("problem: null block");
    if (b->kind() == BlockKind::FullDomain) ++r1;
    if (b->kind() != BlockKind::Indicator) ++r2;
  }
  spec.r1 = r1;
  spec.r2 = r2;
  spec.validate();
  return spec;
}

double objective_sum(const ProblemSpec& spec, const Vector& x) {
  double s = 0.0;
  for (const auto& b : spec.blocks) s += b->value(x);
  return s;
}

double primal_value(const ProblemSpec& spec, const Vector& x) {
  return 0.5 * norm_sq(x - spec.x0) + objective_sum(spec, x);
}

}  // namespace dyksplit
