#include "dyksplit/prox_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dyksplit/errors.hpp"

namespace dyksplit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_outer_config(const OuterConfig& cfg) {
  if (!(cfg.delta0 > 0.0)) throw SpecError("outer: delta0 must be positive");
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) {
    throw SpecError("outer: gamma must lie in (0, 1)");
  }
  if (cfg.max_outer < 1 || cfg.inner_sweep_cap < 1) {
    throw SpecError("outer: iteration caps must be positive");
  }
  if (!(cfg.case1_factor > 0.0)) {
    throw SpecError("outer: case1_factor must be positive");
  }
}

struct SweepCheck {
  bool accepted = false;
  double worst = kInf;  // max of all certificate residuals this sweep
  KKTCertificate cert;
};

SweepCheck evaluate_sweep(const ProblemSpec& spec, const DykstraEngine& eng,
                          double delta, double case1_factor) {
  const DualState& st = eng.state();
  const int r = spec.r();
  const int r2 = spec.r2;
  const Vector& x_end = st.x;

  KKTCertificate cert;
  cert.delta = delta;
  cert.x_j = x_end;
  cert.x_prev = spec.x0;
  cert.sweeps_used = eng.sweeps_done();
  cert.slot_x = eng.last_sweep_slot_x();

  double drift = 0.0;
  for (const Vector& xw : cert.slot_x) drift = std::max(drift, dist(x_end, xw));
  cert.max_slot_drift = drift;

  Vector z0 = st.z[r];
  for (int i = r2; i < r; ++i) z0 += st.z[i];

  cert.z.resize(static_cast<std::size_t>(r2) + 1);
  cert.e.resize(static_cast<std::size_t>(r2) + 1);
  for (int i = 0; i < r2; ++i) {
    cert.z[static_cast<std::size_t>(i) + 1] = st.z[i];
    cert.e[static_cast<std::size_t>(i) + 1] = st.last_touch_x[i] - x_end;
  }

  if (norm(z0) <= case1_factor * delta) {
    cert.case_tag = 1;
    cert.z[0] = Vector::zeros(spec.dim);
    cert.e[0] = Vector::zeros(spec.dim);
    cert.outer_set = Halfspace::whole_space();
  } else {
    cert.case_tag = 2;
    std::vector<WeightedHalfspace> parts;
    if (norm(st.z[r]) > 0.0) parts.push_back({st.hs, st.z[r]});
    for (int i = r2; i < r; ++i) {
      if (norm(st.z[i]) > 0.0) {
        parts.push_back(
            {halfspace_from_point(st.z[i], st.last_touch_x[i]), st.z[i]});
      }
    }
    cert.outer_set = aggregate_halfspaces(parts);
    cert.z[0] = z0;
    // Perturbation to the boundary of the outer set.
    const double t = (dot(cert.outer_set.normal, x_end) - cert.outer_set.offset) /
                     norm_sq(cert.outer_set.normal);
    cert.e[0] = (-t) * cert.outer_set.normal;
  }

  Vector shift = cert.x_j - cert.x_prev;
  for (const Vector& zi : cert.z) shift += zi;
  cert.residual = norm(shift);

  double feas = 0.0;
  cert.c_touch.reserve(static_cast<std::size_t>(r - r2));
  for (int i = r2; i < r; ++i) {
    cert.c_touch.push_back(st.last_touch_x[i]);
    feas = std::max(feas, dist(x_end, st.last_touch_x[i]));
  }
  cert.feas_residual = feas;

  double worst = std::max({drift, cert.residual, feas, norm(cert.e[0])});
  for (const Vector& ei : cert.e) worst = std::max(worst, norm(ei));

  SweepCheck out;
  out.worst = worst;
  out.accepted = worst <= delta;
  out.cert = std::move(cert);
  return out;
}

}  // namespace

KKTCertificate inner_solve_with_certificate(const ProblemSpec& spec_j,
                                            double delta,
                                            const OuterConfig& config) {
  check_outer_config(config);
  if (!(delta > 0.0)) throw SpecError("inner solve: delta must be positive");
  spec_j.validate();

  EngineConfig ec = config.engine;
  if (ec.schedule.universe == 0) {
    ec.schedule =
        BlockSchedule::cyclic(spec_j.r() + (ec.shqp_enabled ? 1 : 0));
  }
  const ScheduleReport rep = validate_schedule(
      ec.schedule, std::min(config.inner_sweep_cap, 64), spec_j.r1);
  if (!rep.ok()) {
    throw SpecError("inner solve: schedule pre-check failed");
  }

  DykstraEngine eng(spec_j, ec);
  double best_worst = kInf;
  double best_residual = kInf;
  double best_feas = kInf;
  for (int n = 1; n <= config.inner_sweep_cap; ++n) {
    eng.sweep();
    SweepCheck chk = evaluate_sweep(spec_j, eng, delta, config.case1_factor);
    if (chk.accepted) return chk.cert;
    if (chk.worst < best_worst) {
      best_worst = chk.worst;
      best_residual = chk.cert.residual;
      best_feas = chk.cert.feas_residual;
    }
  }
  throw CertificateTimeout(
      "inner solve: no certificate at delta " + std::to_string(delta) +
          " within " + std::to_string(config.inner_sweep_cap) + " sweeps",
      best_residual, best_feas, config.inner_sweep_cap);
}

OuterResult outer_run(const ProblemSpec& problem, const OuterConfig& config) {
  check_outer_config(config);
  problem.validate();

  OuterResult out;
  Vector center = problem.x0;
  for (int j = 1; j <= config.max_outer; ++j) {
    const double delta_j = config.delta0 * std::pow(config.gamma, j);
    ProblemSpec spec_j = problem;
    spec_j.x0 = center;
    KKTCertificate cert =
        inner_solve_with_certificate(spec_j, delta_j, config);
    cert.outer_index = j;
    center = cert.x_j;
    out.certificates.push_back(std::move(cert));
    if (config.final_delta > 0.0 && delta_j <= config.final_delta) break;
  }
  out.x_final = center;
  return out;
}

void validate_certificate(const ProblemSpec& problem,
                          const KKTCertificate& cert,
                          const std::vector<Vector>& feasible_samples) {
  const int r2 = problem.r2;
  const double delta = cert.delta;
  auto fail = [](const std::string& what) {
    throw NumericalError("certificate: " + what);
  };

  if (static_cast<int>(cert.z.size()) != r2 + 1 ||
      static_cast<int>(cert.e.size()) != r2 + 1) {
    fail("multiplier/perturbation list has the wrong length");
  }

  // Shifted stationarity and its stored norm.
  Vector shift = cert.x_j - cert.x_prev;
  for (const Vector& zi : cert.z) shift += zi;
  if (std::abs(norm(shift) - cert.residual) > 1e-10 * (1.0 + cert.residual)) {
    fail("stored residual does not match the recomputed one");
  }
  if (!(cert.residual <= delta)) fail("stationarity residual exceeds delta");

  for (const Vector& ei : cert.e) {
    if (!(norm(ei) <= delta)) fail("perturbation norm exceeds delta");
  }

  // Subgradient inclusions via the prox fixed point: z in dh(w) iff
  // prox_h(w + z) = w.
  for (int i = 0; i < r2; ++i) {
    const Vector w = cert.x_j + cert.e[static_cast<std::size_t>(i) + 1];
    const ProxResult pr =
        problem.blocks[i]->prox(w + cert.z[static_cast<std::size_t>(i) + 1], 1.0);
    if (dist(pr.x, w) > 1e-8 * (1.0 + norm(w))) {
      fail("multiplier is not a subgradient at its witness (block " +
           std::to_string(i + 1) + ")");
    }
  }

  // Normal-cone membership of the aggregated multiplier.
  if (cert.case_tag == 1 || cert.outer_set.degenerate) {
    if (norm(cert.z[0]) != 0.0) {
      fail("whole-space outer set requires a zero aggregated multiplier");
    }
  } else {
    const Vector w0 = cert.x_j + cert.e[0];
    const double on_boundary =
        std::abs(dot(cert.outer_set.normal, w0) - cert.outer_set.offset);
    if (on_boundary > 1e-9 * (1.0 + std::abs(cert.outer_set.offset) +
                              norm(cert.outer_set.normal) * norm(w0))) {
      fail("witness is not on the outer set boundary");
    }
    if (!std::isfinite(halfspace_support(cert.outer_set, cert.z[0]))) {
      fail("aggregated multiplier is not aligned with the outer set normal");
    }
  }

  // Indicator witnesses: inside their sets and within delta of the center.
  if (static_cast<int>(cert.c_touch.size()) != problem.r() - r2) {
    fail("indicator witness list has the wrong length");
  }
  double feas = 0.0;
  for (int i = r2; i < problem.r(); ++i) {
    const Vector& w = cert.c_touch[static_cast<std::size_t>(i - r2)];
    if (!std::isfinite(problem.blocks[i]->value(w))) {
      fail("indicator witness lies outside its set (block " +
           std::to_string(i + 1) + ")");
    }
    feas = std::max(feas, dist(cert.x_j, w));
  }
  if (std::abs(feas - cert.feas_residual) > 1e-10 * (1.0 + feas)) {
    fail("stored feasibility residual does not match the recomputed one");
  }
  if (!(feas <= delta)) fail("feasibility residual exceeds delta");

  double drift = 0.0;
  for (const Vector& xw : cert.slot_x) drift = std::max(drift, dist(cert.x_j, xw));
  if (std::abs(drift - cert.max_slot_drift) > 1e-10 * (1.0 + drift)) {
    fail("stored slot drift does not match the recomputed one");
  }
  if (!(drift <= delta)) fail("slot drift exceeds delta");

  for (const Vector& s : feasible_samples) {
    if (!cert.outer_set.contains(s, 1e-9 * (1.0 + norm(s)))) {
      fail("a feasible sample escapes the outer set");
    }
  }
}

}  // namespace dyksplit
