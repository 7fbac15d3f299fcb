#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "dyksplit/engine.hpp"
#include "dyksplit/errors.hpp"
#include "dyksplit/oracle.hpp"
#include "dyksplit/testkit.hpp"

using namespace dyksplit;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

ProblemSpec wedge_spec(Vector x0 = Vector{1, 1}) {
  return make_spec(2, std::move(x0),
                   {make_halfspace_block(Vector{1, 0}, 0.0),
                    make_halfspace_block(Vector{0, 1}, 0.0)});
}

ProblemSpec acute_wedge_spec() {
  return make_spec(2, Vector{1, 2},
                   {make_halfspace_block(Vector{1, 0}, 0.0),
                    make_halfspace_block(Vector{-5, 1}, 0.0)});
}

EngineConfig cyclic_config(const ProblemSpec& spec, bool shqp = false) {
  EngineConfig cfg;
  cfg.shqp_enabled = shqp;
  cfg.schedule = BlockSchedule::cyclic(spec.r() + (shqp ? 1 : 0));
  return cfg;
}
}  // namespace

TEST_CASE("init state variants") {
  ProblemSpec spec = wedge_spec();
  DykstraEngine eng(spec, cyclic_config(spec));
  CHECK(norm(eng.state().v) == 0.0);
  CHECK(norm(eng.state().x - Vector{1, 1}) == 0.0);
  CHECK(eng.state().hs.degenerate);

  DykstraEngine warm(spec, cyclic_config(spec),
                     {Vector{0.25, 0}, Vector{0, 0.5}});
  CHECK(norm(warm.state().x - Vector{0.75, 0.5}) == 0.0);

  CHECK_THROWS_AS(
      DykstraEngine(spec, cyclic_config(spec), {Vector{1, 2, 3}, Vector{0, 0}}),
      DimensionError);
}

TEST_CASE("engine rejects mismatched schedule universes") {
  ProblemSpec spec = wedge_spec();
  EngineConfig cfg;
  cfg.shqp_enabled = true;
  cfg.schedule = BlockSchedule::cyclic(spec.r());  // should be r+1
  CHECK_THROWS_AS(DykstraEngine(spec, cfg), SpecError);
}

TEST_CASE("singleton updates reproduce the hand-projection sequence") {
  ProblemSpec spec = wedge_spec();
  DykstraEngine eng(spec, cyclic_config(spec));
  eng.block_update({1});
  CHECK(norm(eng.state().x - Vector{0, 1}) == 0.0);
  CHECK(norm(eng.state().z[0] - Vector{1, 0}) == 0.0);
  eng.block_update({2});
  CHECK(norm(eng.state().x - Vector{0, 0}) == 0.0);
  CHECK(norm(eng.state().z[1] - Vector{0, 1}) == 0.0);
  eng.state().check_invariants(spec.blocks);
}

TEST_CASE("joint update over every block solves the problem in one call") {
  ProblemSpec spec = wedge_spec();
  DykstraEngine eng(spec, cyclic_config(spec));
  eng.block_update({1, 2});
  const auto ref = oracle::solve_projection_polyhedron(spec.x0, spec.blocks);
  CHECK(dist(eng.state().x, ref.x_star) <= 1e-8);
}

TEST_CASE("feasible start is an exact fixed point") {
  ProblemSpec spec = wedge_spec(Vector{-0.5, -0.25});
  DykstraEngine eng(spec, cyclic_config(spec));
  RunResult res = eng.run(StopRule{});
  CHECK(res.sweeps == 1);
  CHECK(res.trace.front().vstep_sq == 0.0);
  CHECK(norm(res.state.x - Vector{-0.5, -0.25}) == 0.0);
}

TEST_CASE("choose_ctilde policies") {
  ProblemSpec spec = wedge_spec();
  EngineConfig cfg = cyclic_config(spec, true);
  cfg.ctilde_policy = EngineConfig::CtildePolicy::PreviousH;

  DykstraEngine eng(spec, cfg);
  CHECK(eng.choose_ctilde().empty());  // degenerate previous halfspace

  // first halfspace-slot touch on the whole space keeps the zero multiplier
  eng.block_update({3});
  CHECK(norm(eng.state().z[2]) == 0.0);
  CHECK(eng.state().hs.degenerate);

  EngineConfig cfg2 = cyclic_config(spec, true);
  cfg2.ctilde_policy = EngineConfig::CtildePolicy::HPlusRecentK;
  cfg2.recent_k = 2;
  DykstraEngine eng2(spec, cfg2);
  eng2.block_update({1});
  eng2.block_update({2});
  const auto ctilde = eng2.choose_ctilde();
  CHECK(ctilde.size() == 2);  // two indicator touches, degenerate H dropped
  // every member must contain the feasible core
  const auto samples = testkit::sample_feasible_near(spec, Vector{-0.5, -0.5},
                                                     5, 40, 0.4);
  for (const auto& h : ctilde) {
    for (const auto& s : samples) CHECK(h.contains(s, 1e-12));
  }

  // after one halfspace-slot touch, policy (a) returns that halfspace alone
  eng2.block_update({3});
  if (!eng2.state().hs.degenerate) {
    EngineConfig cfg3 = cfg2;
    cfg3.ctilde_policy = EngineConfig::CtildePolicy::PreviousH;
    // reuse the state through a fresh engine is overkill; check directly
    CHECK(eng2.state().hs.contains(Vector{-0.5, -0.5}, 1e-12));
  }
}

TEST_CASE("projection onto halfspace intersections") {
  const Halfspace h1 = halfspace_from_point(Vector{1, 0}, Vector{0, 0});
  const Halfspace h2 = halfspace_from_point(Vector{0, 1}, Vector{0, 0});

  SUBCASE("single halfspace closed form") {
    auto [x, z] = project_halfspace_intersection(Vector{2, 3}, {h1});
    CHECK(norm(x - Vector{0, 3}) == 0.0);
    CHECK(norm(z - Vector{2, 0}) == 0.0);
  }
  SUBCASE("interior point is untouched") {
    auto [x, z] = project_halfspace_intersection(Vector{-1, -2}, {h1, h2});
    CHECK(norm(x - Vector{-1, -2}) == 0.0);
    CHECK(norm(z) == 0.0);
  }
  SUBCASE("wedge needs both constraints active") {
    auto [x, z] = project_halfspace_intersection(Vector{1, 1}, {h1, h2});
    CHECK(norm(x - Vector{0, 0}) == 0.0);
    // multipliers are (1,1): z = 1*a1 + 1*a2
    CHECK(norm(z - Vector{1, 1}) == 0.0);
  }
  SUBCASE("empty intersection is infeasible") {
    const Halfspace opp = halfspace_from_point(Vector{-1, 0}, Vector{1, 0});
    CHECK_THROWS_AS(project_halfspace_intersection(Vector{0, 0}, {h1, opp}),
                    InfeasibleError);
  }
}

TEST_CASE("aggregation folds excess multipliers into the halfspace slot") {
  // 1-D: quadratic pull + one halfspace constraint x <= 0, center far right
  ProblemSpec spec = make_spec(1, Vector{4.0},
                               {make_quadratic(1.0, Vector{0.0}),
                                make_halfspace_block(Vector{1.0}, 0.0)});
  EngineConfig cfg = cyclic_config(spec);
  cfg.bound_m = 1.0;
  DykstraEngine eng(spec, cfg);
  eng.block_update({1});  // quadratic: y=4 -> x=2, z=2
  eng.block_update({2});  // halfspace: y=2 -> x=0, z=2
  CHECK(norm(eng.state().z[1] - Vector{2.0}) == 0.0);

  const Vector v_before = eng.state().v;
  const double sum_norm_before =
      norm(eng.state().z[0]) + norm(eng.state().z[1]) + norm(eng.state().z[2]);
  eng.aggregate();
  const DualState& st = eng.state();
  // alpha = 1/2: indicator multiplier clamped to M, excess moved to slot r+1
  CHECK(norm(st.z[1] - Vector{1.0}) <= 1e-15);
  CHECK(norm(st.z[2] - Vector{1.0}) <= 1e-15);
  CHECK(dist(st.v, v_before) <= 1e-12 * (1.0 + norm(v_before)));
  const double sum_norm_after =
      norm(st.z[0]) + norm(st.z[1]) + norm(st.z[2]);
  CHECK(sum_norm_after <= sum_norm_before + 1e-12);
  CHECK(!st.hs.degenerate);
  CHECK(st.hs.contains(Vector{-3.0}));   // contains the constraint set
  CHECK(!st.hs.contains(Vector{0.5}));
  st.check_invariants(spec.blocks);
}

TEST_CASE("aggregation with infinite or slack M is the identity") {
  ProblemSpec spec = wedge_spec();
  EngineConfig cfg = cyclic_config(spec);
  cfg.bound_m = kInf;
  DykstraEngine eng(spec, cfg);
  eng.block_update({1});
  const Vector z_before = eng.state().z[0];
  eng.aggregate();
  CHECK(norm(eng.state().z[0] - z_before) == 0.0);

  EngineConfig cfg2 = cyclic_config(spec);
  cfg2.bound_m = 10.0;  // well above every multiplier norm
  DykstraEngine eng2(spec, cfg2);
  eng2.block_update({1});
  const Vector z2 = eng2.state().z[0];
  eng2.aggregate();
  CHECK(norm(eng2.state().z[0] - z2) == 0.0);
  CHECK(eng2.state().hs.degenerate);
}

TEST_CASE("dual value at the wedge optimum equals the primal value") {
  ProblemSpec spec = wedge_spec();
  DykstraEngine eng(spec, cyclic_config(spec));
  StopRule stop;
  stop.max_sweeps = 50;
  RunResult res = eng.run(stop);
  CHECK(dist(res.state.x, Vector{0, 0}) <= 1e-6);
  // strong duality value: 0.5*||x0 - x*||^2 = 1
  CHECK(res.state.dual_value(spec.blocks) == doctest::Approx(1.0).epsilon(1e-6));
  // trace dual values are nondecreasing
  for (std::size_t i = 1; i < res.trace.size(); ++i) {
    CHECK(res.trace[i].dual_value >=
          res.trace[i - 1].dual_value - 1e-10 * (1 + std::abs(res.trace[i - 1].dual_value)));
  }
}

TEST_CASE("report_gap certificates") {
  // feasible center: gap at the zero dual vector is exactly primal(x0)
  ProblemSpec feasible = wedge_spec(Vector{-1, -1});
  DykstraEngine eng(feasible, cyclic_config(feasible));
  CHECK(report_gap(feasible, eng.state(), Vector{-1, -1}) ==
        doctest::Approx(0.0));

  ProblemSpec spec = wedge_spec();
  DykstraEngine eng2(spec, cyclic_config(spec));
  // zeros state, x_ref = (0,0): gap = primal(x_ref) - F(0) = 1 - 0
  CHECK(report_gap(spec, eng2.state(), Vector{0, 0}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(report_gap(spec, eng2.state(), Vector{1, 1}),
                  InfeasibleError);

  // sandwich along a run
  StopRule stop;
  stop.max_sweeps = 20;
  stop.x_ref = Vector{0, 0};
  RunResult res = run_dykstra(spec, cyclic_config(spec), stop);
  for (const SweepRecord& rec : res.trace) {
    CHECK(rec.gap_bound >= -1e-12);
  }
}

TEST_CASE("runs converge to the oracle projection") {
  ProblemSpec spec = acute_wedge_spec();
  const auto ref = oracle::solve_projection_polyhedron(spec.x0, spec.blocks);
  CHECK(dist(ref.x_star, Vector{0, 0}) <= 1e-10);

  StopRule stop;
  stop.max_sweeps = 500;

  RunResult plain = run_dykstra(spec, cyclic_config(spec), stop);
  CHECK(dist(plain.state.x, ref.x_star) <= 1e-6);

  EngineConfig shqp_cfg = cyclic_config(spec, true);
  shqp_cfg.ctilde_policy = EngineConfig::CtildePolicy::HPlusRecentK;
  RunResult accel = run_dykstra(spec, shqp_cfg, stop);
  CHECK(dist(accel.state.x, ref.x_star) <= 1e-6);
  // acceleration comparison is informational, both limits must agree
  CHECK(dist(accel.state.x, plain.state.x) <= 2e-6);
}

TEST_CASE("schedule pre-check failures abort run") {
  ProblemSpec spec = wedge_spec();
  EngineConfig cfg = cyclic_config(spec);
  cfg.schedule = BlockSchedule::explicit_pattern(2, {{1}});  // never visits 2
  DykstraEngine eng(spec, cfg);
  CHECK_THROWS_AS(eng.run(StopRule{}), SpecError);
}

TEST_CASE("joint update over disjoint sets hits the inner cap") {
  ProblemSpec spec = make_spec(1, Vector{0.5},
                               {make_box(Vector{0.0}, Vector{1.0}),
                                make_box(Vector{2.0}, Vector{3.0})});
  EngineConfig cfg = cyclic_config(spec);
  cfg.inner_max_iter = 50;
  DykstraEngine eng(spec, cfg);
  CHECK_THROWS_AS(eng.block_update({1, 2}), NumericalError);
}

TEST_CASE("schedules with early joint slots still reach the oracle") {
  // joint slots only in the first sweeps, so the sqrt-growth budget holds
  ProblemSpec spec = acute_wedge_spec();
  EngineConfig cfg = cyclic_config(spec);
  cfg.schedule = BlockSchedule::custom_rule(
      spec.r(), spec.r(), [](int n, int w) -> std::vector<int> {
        if (n <= 3 && w == 1) return {1, 2};
        return {(w - 1) % 2 + 1};
      });
  StopRule stop;
  stop.max_sweeps = 500;
  stop.vstep_tol = 1e-30;
  RunResult res = run_dykstra(spec, cfg, stop);
  const auto ref = oracle::solve_projection_polyhedron(spec.x0, spec.blocks);
  CHECK(dist(res.state.x, ref.x_star) <= 1e-6);
}

TEST_CASE("more slots than blocks is a valid schedule") {
  ProblemSpec spec = wedge_spec();
  EngineConfig cfg = cyclic_config(spec);
  cfg.schedule = BlockSchedule::cyclic(spec.r(), 2 * spec.r() + 1);
  StopRule stop;
  stop.max_sweeps = 50;
  RunResult res = run_dykstra(spec, cfg, stop);
  CHECK(dist(res.state.x, Vector{0, 0}) <= 1e-6);
}

TEST_CASE("previous-halfspace policy hands back the current cut") {
  ProblemSpec spec = acute_wedge_spec();
  EngineConfig cfg = cyclic_config(spec, true);
  cfg.ctilde_policy = EngineConfig::CtildePolicy::HPlusRecentK;
  DykstraEngine eng(spec, cfg);
  bool saw_cut = false;
  for (int n = 0; n < 30 && !saw_cut; ++n) {
    eng.sweep();
    saw_cut = !eng.state().hs.degenerate;
  }
  CHECK(saw_cut);  // acceleration actually produced a halfspace here

  // a previous-H engine over the same state returns exactly {H}
  EngineConfig cfg_a = cyclic_config(spec, true);
  cfg_a.ctilde_policy = EngineConfig::CtildePolicy::PreviousH;
  std::vector<Vector> warm(eng.state().z.begin(), eng.state().z.end() - 1);
  DykstraEngine replay(spec, cfg_a, warm);
  // state carries no halfspace yet, so the collection is empty; after the
  // halfspace becomes active it is the single member
  CHECK(replay.choose_ctilde().empty());
  const auto single = eng.state().hs;
  DykstraEngine probe(spec, cfg_a);
  probe.sweep();
  if (!probe.state().hs.degenerate) {
    const auto ct = probe.choose_ctilde();
    REQUIRE(ct.size() == 1);
    CHECK(ct.front().offset == probe.state().hs.offset);
    CHECK(norm(ct.front().normal - probe.state().hs.normal) == 0.0);
  }
  (void)single;
}

TEST_CASE("joint slots may include the halfspace index") {
  ProblemSpec spec = acute_wedge_spec();
  EngineConfig cfg = cyclic_config(spec, true);
  cfg.ctilde_policy = EngineConfig::CtildePolicy::HPlusRecentK;
  DykstraEngine eng(spec, cfg);
  eng.block_update({1});
  eng.block_update({2});
  eng.block_update({1, 2, 3});  // joint update with the halfspace slot
  eng.state().check_invariants(spec.blocks);
  // the joint solve is the whole regularized problem: x is the projection
  const auto ref = oracle::solve_projection_polyhedron(spec.x0, spec.blocks);
  CHECK(dist(eng.state().x, ref.x_star) <= 1e-6);
}

TEST_CASE("dual value starts at -inf when a block has h*(0) = +inf") {
  ProblemSpec spec = make_spec(2, Vector{0.5, 0.5},
                               {make_affine(Vector{1, 1}, 0.0),
                                make_box(Vector{0, 0}, Vector{1, 1})});
  DykstraEngine eng(spec, cyclic_config(spec));
  CHECK(eng.state().dual_value_available());
  CHECK(eng.dual_value() == -kInf);
  eng.sweep();
  CHECK(std::isfinite(eng.dual_value()));
}

TEST_CASE("config matrix soak: invariants across policies and folds") {
  testkit::InstanceGenerator gen(2718);
  for (int k = 0; k < 8; ++k) {
    testkit::GeneratedInstance inst = gen.next();
    for (bool shqp : {false, true}) {
      for (double m_bound : {kInf, 1.0}) {
        EngineConfig cfg = cyclic_config(inst.spec, shqp);
        cfg.bound_m = m_bound;
        if (shqp) {
          cfg.ctilde_policy = EngineConfig::CtildePolicy::HPlusRecentK;
        }
        DykstraEngine eng(inst.spec, cfg);
        double f_prev = -kInf;
        for (int n = 0; n < 15; ++n) {
          SweepRecord rec = eng.sweep();
          eng.state().check_invariants(inst.spec.blocks);
          if (std::isfinite(f_prev)) {
            CHECK(rec.dual_value >=
                  f_prev - 1e-10 * (1.0 + std::abs(f_prev)));
          }
          f_prev = rec.dual_value;
        }
      }
    }
  }
}

TEST_CASE("summed squared v-steps stay below the initial gap") {
  // sum_n vstep_sq(n) <= primal(x_ref) - F(z_start) for any feasible x_ref;
  // needs instances whose dual value is finite at the zero start
  testkit::GeneratorOptions opt;
  opt.allow_open_domain = false;  // barriers have h*(0) = +inf
  int used = 0;
  testkit::InstanceGenerator gen(909, opt);
  while (used < 8) {
    testkit::GeneratedInstance inst = gen.next();
    DykstraEngine eng(inst.spec, cyclic_config(inst.spec));
    if (!std::isfinite(eng.dual_value())) continue;  // nonzero affine block
    ++used;
    const double f0 = eng.dual_value();
    StopRule stop;
    stop.max_sweeps = 120;
    stop.vstep_tol = 1e-26;
    RunResult res = eng.run(stop);
    const double pv = primal_value(inst.spec, inst.planted);
    // each update gains at least half the squared v-step, so the telescoped
    // bound carries a factor 2
    CHECK(eng.total_vstep_sq() <= 2.0 * (pv - f0) + 1e-6);
    CHECK(res.sweeps >= 1);
  }
}

TEST_CASE("every halfspace after an accelerated touch contains the core") {
  testkit::InstanceGenerator gen(910);
  int used = 0;
  while (used < 6) {
    testkit::GeneratedInstance inst = gen.next();
    if (inst.spec.r2 == inst.spec.r()) continue;  // want indicator cuts
    ++used;
    EngineConfig cfg = cyclic_config(inst.spec, true);
    cfg.ctilde_policy = EngineConfig::CtildePolicy::HPlusRecentK;
    cfg.bound_m = 2.0;
    DykstraEngine eng(inst.spec, cfg);
    const auto samples = testkit::sample_feasible_near(
        inst.spec, inst.planted, used, 25, 0.2);
    for (int n = 0; n < 15; ++n) {
      eng.sweep();
      for (const Vector& s : samples) {
        CHECK(eng.state().hs.contains(s, 1e-9 * (1.0 + norm(s))));
      }
    }
  }
}

TEST_CASE("a corrupted halfspace multiplier is a hard error") {
  ProblemSpec spec = wedge_spec();
  DualState st = init_state(spec);
  st.hs = halfspace_from_point(Vector{1, 0}, Vector{0, 0});
  st.z.back() = Vector{0, 1};  // not aligned with the halfspace normal
  st.refresh_sums();
  CHECK_THROWS_AS(st.dual_value(spec.blocks), NumericalError);
}

TEST_CASE("engine invariants hold across random instances") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    testkit::GeneratedInstance inst = testkit::generate(seed);
    EngineConfig cfg = cyclic_config(inst.spec);
    DykstraEngine eng(inst.spec, cfg);
    double f_prev = -kInf;
    for (int n = 0; n < 25; ++n) {
      const double f_before =
          eng.state().dual_value_available() ? eng.dual_value() : -kInf;
      SweepRecord rec = eng.sweep();
      eng.state().check_invariants(inst.spec.blocks);
      if (std::isfinite(f_before)) {
        // per-update margins telescope to half the summed squared v-steps
        CHECK(rec.dual_value - f_before >=
              0.5 * rec.vstep_sq - 1e-8 * (1.0 + std::abs(f_before)));
      }
      if (std::isfinite(f_prev)) {
        CHECK(rec.dual_value >= f_prev - 1e-10 * (1.0 + std::abs(f_prev)));
      }
      f_prev = rec.dual_value;
      // weak duality against the planted feasible point
      const double pv = primal_value(inst.spec, inst.planted);
      CHECK(rec.dual_value <= pv + 1e-9 * (1.0 + std::abs(pv)));
    }
  }
}
