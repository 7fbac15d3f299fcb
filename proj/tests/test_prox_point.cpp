#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dyksplit/errors.hpp"
#include "dyksplit/oracle.hpp"
#include "dyksplit/prox_point.hpp"
#include "dyksplit/testkit.hpp"

using namespace dyksplit;

namespace {
ProblemSpec lp_over_box(Vector start = Vector{0.8, 0.9}) {
  return make_spec(2, std::move(start),
                   {make_affine(Vector{1, 1}, 0.0),
                    make_box(Vector{0, 0}, Vector{1, 1})});
}

OuterConfig default_outer() {
  OuterConfig cfg;
  cfg.delta0 = 1e-2;
  cfg.gamma = 0.5;
  cfg.max_outer = 30;
  cfg.final_delta = 1e-5;
  return cfg;
}
}  // namespace

TEST_CASE("inner solve from an already-solved center is a case-1 certificate") {
  // minimize (mu/2)||x-a||^2 + box with a interior: T(a) = a, so starting the
  // subproblem at the minimizer yields an immediate tiny-residual certificate
  ProblemSpec problem = make_spec(2, Vector{0.3, 0.7},
                                  {make_quadratic(2.0, Vector{0.3, 0.7}),
                                   make_box(Vector{0, 0}, Vector{1, 1})});
  KKTCertificate cert =
      inner_solve_with_certificate(problem, 1e-6, default_outer());
  CHECK(cert.case_tag == 1);
  CHECK(cert.outer_set.degenerate);
  CHECK(cert.residual <= 1e-6);
  CHECK(cert.feas_residual <= 1e-6);
  CHECK(dist(cert.x_j, Vector{0.3, 0.7}) <= 1e-5);
  validate_certificate(problem, cert);
}

TEST_CASE("active constraints produce case-2 certificates with aligned normals") {
  ProblemSpec problem = lp_over_box();
  KKTCertificate cert =
      inner_solve_with_certificate(problem, 1e-4, default_outer());
  CHECK(cert.case_tag == 2);
  CHECK(!cert.outer_set.degenerate);
  CHECK(cert.residual <= 1e-4);
  // the aggregated multiplier is the outer set's normal by construction
  CHECK(dist(cert.z[0], cert.outer_set.normal) == 0.0);
  // subproblem KKT: z0 = x_prev - c - x_j up to delta (the affine block's
  // multiplier is exactly c)
  const Vector expect = cert.x_prev - Vector{1, 1} - cert.x_j;
  CHECK(dist(cert.z[0], expect) <= 1e-4 * (1.0 + norm(expect)));
  validate_certificate(problem, cert);

  const auto samples = testkit::sample_feasible_near(
      problem, Vector{0.5, 0.5}, 11, 60, 0.45);
  validate_certificate(problem, cert, samples);
}

TEST_CASE("disjoint boxes time out with a large feasibility residual") {
  ProblemSpec problem = make_spec(2, Vector{0.5, 0.5},
                                  {make_box(Vector{0, 0}, Vector{1, 1}),
                                   make_box(Vector{2, 2}, Vector{3, 3})});
  OuterConfig cfg = default_outer();
  cfg.inner_sweep_cap = 150;
  bool caught = false;
  try {
    inner_solve_with_certificate(problem, 1e-4, cfg);
  } catch (const CertificateTimeout& e) {
    caught = true;
    CHECK(e.best_feas_residual >= 0.3);
    CHECK(e.sweeps_used == 150);
  }
  CHECK(caught);
}

TEST_CASE("outer loop reaches the LP vertex") {
  ProblemSpec problem = lp_over_box();
  OuterResult res = outer_run(problem, default_outer());
  const auto ref = oracle::solve_unregularized(problem);
  CHECK(dist(res.x_final, ref.x_star) <= 1e-4);
  CHECK(res.certificates.back().delta <= 1e-5);
  for (const KKTCertificate& cert : res.certificates) {
    validate_certificate(problem, cert);
  }
}

TEST_CASE("one outer step approximates the prox when a quadratic is present") {
  ProblemSpec problem = make_spec(2, Vector{0.9, 0.1},
                                  {make_quadratic(2.0, Vector{0.3, 0.7}),
                                   make_box(Vector{0, 0}, Vector{1, 1})});
  OuterConfig cfg = default_outer();
  cfg.max_outer = 1;
  cfg.final_delta = 0.0;
  OuterResult res = outer_run(problem, cfg);
  REQUIRE(res.certificates.size() == 1);
  // prox_h(x0) is the solve of the regularized sum with center x0
  ProblemSpec reg = problem;
  const auto prox_ref = oracle::solve_regularized_sum(reg);
  CHECK(dist(res.x_final, prox_ref.x_star) <= 0.05);
}

TEST_CASE("starting at the minimizer stays near it") {
  ProblemSpec problem = make_spec(2, Vector{0.3, 0.7},
                                  {make_quadratic(2.0, Vector{0.3, 0.7}),
                                   make_box(Vector{0, 0}, Vector{1, 1})});
  OuterResult res = outer_run(problem, default_outer());
  for (const KKTCertificate& cert : res.certificates) {
    CHECK(dist(cert.x_j, Vector{0.3, 0.7}) <= 0.01);
  }
  CHECK(dist(res.x_final, Vector{0.3, 0.7}) <= 1e-4);
}

TEST_CASE("barrier objectives drive the iterate to the analytic corner") {
  // minimize -log(x) over [0.5, 2]: decreasing, so x* = 2
  ProblemSpec problem = make_spec(1, Vector{0.7},
                                  {make_log_barrier(Vector{0.0}),
                                   make_box(Vector{0.5}, Vector{2.0})});
  OuterResult res = outer_run(problem, default_outer());
  CHECK(std::abs(res.x_final[0] - 2.0) <= 1e-4);
  for (const KKTCertificate& cert : res.certificates) {
    validate_certificate(problem, cert);
  }
}

TEST_CASE("tampered certificates fail re-validation") {
  ProblemSpec problem = lp_over_box();
  KKTCertificate cert =
      inner_solve_with_certificate(problem, 1e-4, default_outer());

  KKTCertificate broken = cert;
  broken.residual *= 0.0;  // stored value no longer matches the fields
  if (cert.residual > 1e-13) {
    CHECK_THROWS_AS(validate_certificate(problem, broken), NumericalError);
  }

  KKTCertificate flipped = cert;
  flipped.z[0] = -1.0 * flipped.z[0];
  CHECK_THROWS_AS(validate_certificate(problem, flipped), NumericalError);

  KKTCertificate drifted = cert;
  drifted.x_j = drifted.x_j + Vector{0.5, 0};
  CHECK_THROWS_AS(validate_certificate(problem, drifted), NumericalError);
}

TEST_CASE("outer config validation") {
  ProblemSpec problem = lp_over_box();
  OuterConfig cfg = default_outer();
  cfg.gamma = 1.5;
  CHECK_THROWS_AS(outer_run(problem, cfg), SpecError);
  cfg = default_outer();
  cfg.delta0 = -1.0;
  CHECK_THROWS_AS(outer_run(problem, cfg), SpecError);
}
