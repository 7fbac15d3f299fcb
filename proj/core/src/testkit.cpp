#include "dyksplit/testkit.hpp"

#include <algorithm>
#include <cmath>

#include "dyksplit/errors.hpp"

namespace dyksplit {
namespace testkit {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

Vector uniform_vec(std::mt19937_64& rng, std::size_t d, double lo, double hi) {
  Vector v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

Vector unit_direction(std::mt19937_64& rng, std::size_t d) {
  while (true) {
    Vector v = uniform_vec(rng, d, -1.0, 1.0);
    const double n = norm(v);
    if (n > 1e-3) return (1.0 / n) * v;
  }
}

}  // namespace

InstanceGenerator::InstanceGenerator(std::uint64_t seed, GeneratorOptions opt)
    : rng_(seed ^ 0x6a09e667f3bcc908ULL), opt_(opt) {
  if (!(opt_.allow_full_domain || opt_.allow_open_domain ||
        opt_.allow_indicator)) {
    throw SpecError("generator: every block kind is disabled");
  }
}

GeneratedInstance InstanceGenerator::next() {
  const std::size_t d =
      static_cast<std::size_t>(uniform_int(rng_, opt_.min_dim, opt_.max_dim));
  const int total = uniform_int(rng_, opt_.min_blocks, opt_.max_blocks);
  const Vector planted = uniform_vec(rng_, d, -1.0, 1.0);

  std::vector<int> kinds;  // 0 full, 1 open, 2 indicator
  if (opt_.projection_only) {
    kinds.assign(static_cast<std::size_t>(total), 2);
  } else {
    std::vector<int> allowed;
    if (opt_.allow_full_domain) allowed.push_back(0);
    if (opt_.allow_open_domain) allowed.push_back(1);
    if (opt_.allow_indicator) allowed.push_back(2);
    for (int i = 0; i < total; ++i) {
      kinds.push_back(allowed[static_cast<std::size_t>(
          uniform_int(rng_, 0, static_cast<int>(allowed.size()) - 1))]);
    }
    std::sort(kinds.begin(), kinds.end());
  }

  std::vector<BlockPtr> blocks;
  for (int kind : kinds) {
    if (kind == 0) {
      switch (uniform_int(rng_, 0, 2)) {
        case 0:
          blocks.push_back(
              make_affine(uniform_vec(rng_, d, -0.5, 0.5), uniform(rng_, -1, 1)));
          break;
        case 1:
          blocks.push_back(make_quadratic(
              uniform(rng_, 0.3, 3.0),
              planted + uniform_vec(rng_, d, -0.8, 0.8)));
          break;
        default:
          blocks.push_back(make_l1(uniform(rng_, 0.05, 0.5)));
          break;
      }
    } else if (kind == 1) {
      Vector lower(d);
      for (std::size_t i = 0; i < d; ++i) {
        lower[i] = planted[i] - uniform(rng_, 0.4, 1.5);
      }
      blocks.push_back(make_log_barrier(std::move(lower)));
    } else {
      const int shape =
          opt_.polyhedral_only || opt_.projection_only
              ? uniform_int(rng_, 0, 1)
              : uniform_int(rng_, 0, 3);
      if (shape == 0) {
        Vector lo(d), hi(d);
        for (std::size_t i = 0; i < d; ++i) {
          lo[i] = planted[i] - uniform(rng_, 0.1, 1.2);
          hi[i] = planted[i] + uniform(rng_, 0.1, 1.2);
        }
        blocks.push_back(make_box(std::move(lo), std::move(hi)));
      } else if (shape == 1) {
        const Vector a = unit_direction(rng_, d);
        blocks.push_back(
            make_halfspace_block(a, dot(a, planted) + uniform(rng_, 0.1, 1.0)));
      } else if (shape == 2) {
        const double radius = uniform(rng_, 0.5, 1.5);
        Vector center =
            planted + uniform(rng_, 0.0, 0.6 * radius) * unit_direction(rng_, d);
        blocks.push_back(make_ball(std::move(center), radius));
      } else {
        const int k = d > 1 ? uniform_int(rng_, 1, std::min<int>(2, static_cast<int>(d) - 1)) : 1;
        std::vector<Vector> rows;
        Vector rhs(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
          rows.push_back(unit_direction(rng_, d));
          rhs[static_cast<std::size_t>(i)] = dot(rows.back(), planted);
        }
        blocks.push_back(make_affine_set(std::move(rows), std::move(rhs)));
      }
    }
  }

  const Vector x0 = planted + uniform_vec(rng_, d, -2.0, 2.0);
  GeneratedInstance inst{make_spec(d, x0, std::move(blocks)), planted};
  return inst;
}

GeneratedInstance generate(std::uint64_t seed, GeneratorOptions opt) {
  InstanceGenerator gen(seed, opt);
  return gen.next();
}

std::vector<Vector> sample_feasible_near(const ProblemSpec& spec,
                                         const Vector& anchor,
                                         std::uint64_t seed, int count,
                                         double radius) {
  std::mt19937_64 rng(seed ^ 0xbb67ae8584caa73bULL);
  auto in_core = [&](const Vector& x) {
    for (int i = spec.r1; i < spec.r(); ++i) {
      const auto& b = spec.blocks[i];
      if (b->kind() == BlockKind::OpenDomain) {
        const BlockParams p = b->params();  // closure of the barrier box
        for (std::size_t j = 0; j < x.dim(); ++j) {
          if (x[j] < p.primary[j]) return false;
        }
      } else if (!std::isfinite(b->value(x))) {
        return false;
      }
    }
    return true;
  };
  std::vector<Vector> out;
  for (int c = 0; c < count; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < 200; ++attempt) {
      Vector x = anchor + uniform_vec(rng, spec.dim, -radius, radius);
      if (in_core(x)) {
        out.push_back(std::move(x));
        placed = true;
        break;
      }
    }
    if (!placed) out.push_back(anchor);
  }
  return out;
}

}  // namespace testkit
}  // namespace dyksplit
