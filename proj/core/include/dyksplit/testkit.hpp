#ifndef DYKSPLIT_TESTKIT_HPP
#define DYKSPLIT_TESTKIT_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "dyksplit/problem.hpp"

namespace dyksplit {
namespace testkit {

/// A generated instance together with the point every constraint set and
/// open domain was built around. The planted point is feasible by
/// construction, so it can serve as the reference point in gap and
/// weak-duality checks without a feasibility phase.
struct GeneratedInstance {
  ProblemSpec spec;
  Vector planted;
};

struct GeneratorOptions {
  int min_dim = 1;
  int max_dim = 8;
  int min_blocks = 2;
  int max_blocks = 6;
  bool allow_full_domain = true;
  bool allow_open_domain = true;
  bool allow_indicator = true;
  /// Restrict indicator blocks to boxes and halfspaces (projection studies).
  bool polyhedral_only = false;
  /// Drop the smooth/barrier blocks entirely: pure projection instances.
  bool projection_only = false;
};

/// Deterministic sampler of random desk instances. Same seed, same sequence.
class InstanceGenerator {
 public:
  explicit InstanceGenerator(std::uint64_t seed, GeneratorOptions opt = {});

  GeneratedInstance next();

 private:
  std::mt19937_64 rng_;
  GeneratorOptions opt_;
};

/// One instance from a fresh generator at this seed.
GeneratedInstance generate(std::uint64_t seed, GeneratorOptions opt = {});

/// Jittered points inside every indicator set and inside the closure of
/// every open domain, drawn by rejection around the anchor. Falls back to
/// the anchor itself when rejection keeps failing.
std::vector<Vector> sample_feasible_near(const ProblemSpec& spec,
                                         const Vector& anchor,
                                         std::uint64_t seed, int count,
                                         double radius = 0.25);

}  // namespace testkit
}  // namespace dyksplit

#endif  // DYKSPLIT_TESTKIT_HPP
