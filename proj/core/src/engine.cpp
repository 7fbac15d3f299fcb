#include "dyksplit/engine.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "dyksplit/errors.hpp"

namespace dyksplit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Bitmasks of {0..m-1} ordered by increasing cardinality, then value.
// Deterministic tie-breaking keeps multiplier traces reproducible.
std::vector<unsigned> subset_order(int m) {
  std::vector<unsigned> masks;
  masks.reserve((1u << m) - 1);
  for (unsigned mask = 1; mask < (1u << m); ++mask) masks.push_back(mask);
  std::stable_sort(masks.begin(), masks.end(), [](unsigned a, unsigned b) {
    const int pa = __builtin_popcount(a);
    const int pb = __builtin_popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  return masks;
}
}  // namespace

std::pair<Vector, Vector> project_halfspace_intersection(
    const Vector& y, const std::vector<Halfspace>& hs, int cap) {
  std::vector<const Halfspace*> active;
  for (const Halfspace& h : hs) {
    if (!h.degenerate) active.push_back(&h);
  }
  const int m = static_cast<int>(active.size());
  if (m > cap) {
    throw NumericalError("project_halfspace_intersection: " +
                         std::to_string(m) + " halfspaces exceeds cap " +
                         std::to_string(cap));
  }
  auto feasible = [&](const Vector& x) {
    for (const Halfspace* h : active) {
      const double tol =
          1e-9 * (1.0 + std::abs(h->offset) + norm(h->normal) * norm(x));
      if (dot(h->normal, x) > h->offset + tol) return false;
    }
    return true;
  };
  if (m == 0 || feasible(y)) {
    return {y, Vector::zeros(y.dim())};
  }
  for (unsigned mask : subset_order(m)) {
    std::vector<int> idx;
    for (int j = 0; j < m; ++j) {
      if (mask & (1u << j)) idx.push_back(j);
    }
    const int k = static_cast<int>(idx.size());
    Eigen::MatrixXd gram(k, k);
    Eigen::VectorXd rhs(k);
    for (int a = 0; a < k; ++a) {
      const Halfspace& ha = *active[idx[a]];
      rhs(a) = dot(ha.normal, y) - ha.offset;
      for (int b = 0; b < k; ++b) {
        gram(a, b) = dot(ha.normal, active[idx[b]]->normal);
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        gram, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-12);
    Eigen::VectorXd lambda = svd.solve(rhs);
    if ((gram * lambda - rhs).norm() > 1e-10 * (1.0 + rhs.norm())) {
      continue;  // inconsistent active set
    }
    const double ltol = 1e-9 * (1.0 + lambda.cwiseAbs().maxCoeff());
    bool nonneg = true;
    for (int a = 0; a < k; ++a) {
      if (lambda(a) < -ltol) nonneg = false;
    }
    if (!nonneg) continue;
    Vector x = y;
    for (int a = 0; a < k; ++a) {
      const Halfspace& ha = *active[idx[a]];
      for (std::size_t t = 0; t < x.dim(); ++t) {
        x[t] -= lambda(a) * ha.normal[t];
      }
    }
    if (!feasible(x)) continue;
    return {x, y - x};
  }
  throw InfeasibleError(
      "project_halfspace_intersection: empty halfspace intersection");
}

DykstraEngine::DykstraEngine(ProblemSpec spec, EngineConfig config,
                             std::vector<Vector> z_start)
    : spec_(std::move(spec)), config_(std::move(config)) {
  spec_.validate();
  if (!(config_.bound_m > 0.0)) throw SpecError("engine: M must be positive");
  if (!(config_.inner_tol > 0.0)) {
    throw SpecError("engine: inner_tol must be positive");
  }
  if (config_.inner_max_iter < 1 || config_.projection_cap < 1) {
    throw SpecError("engine: iteration caps must be positive");
  }
  const int expected_universe = spec_.r() + (config_.shqp_enabled ? 1 : 0);
  if (config_.schedule.universe != expected_universe) {
    throw SpecError("engine: schedule universe " +
                    std::to_string(config_.schedule.universe) +
                    " does not match " + std::to_string(expected_universe) +
                    (config_.shqp_enabled ? " (r+1, halfspace slot scheduled)"
                                          : " (r, halfspace slot unscheduled)"));
  }
  if (config_.ctilde_policy == EngineConfig::CtildePolicy::HPlusRecentK &&
      config_.recent_k + 1 > config_.projection_cap) {
    throw SpecError("engine: recent_k exceeds the projection cap");
  }
  state_ = init_state(spec_, z_start);
}

std::vector<Halfspace> DykstraEngine::choose_ctilde() const {
  std::vector<Halfspace> out;
  if (!state_.hs.degenerate) out.push_back(state_.hs);
  if (config_.ctilde_policy == EngineConfig::CtildePolicy::HPlusRecentK) {
    int take = 0;
    for (auto it = recent_cuts_.rbegin();
         it != recent_cuts_.rend() && take < config_.recent_k; ++it, ++take) {
      out.push_back(*it);
    }
  }
  return out;
}

void DykstraEngine::touch(int i, const std::vector<Halfspace>& ctilde) {
  const int r = spec_.r();
  const Vector y = state_.x + state_.z[i];
  if (i == r) {
    auto [xp, zp] =
        project_halfspace_intersection(y, ctilde, config_.projection_cap);
    state_.z[r] = std::move(zp);
    state_.last_touch_x[r] = std::move(xp);
  } else {
    ProxResult pr = spec_.blocks[i]->prox(y, 1.0);
    state_.z[i] = pr.z;
    state_.conj[i] = spec_.blocks[i]->conjugate_at(pr.z, pr.x);
    state_.touched[i] = 1;
    state_.last_touch_x[i] = pr.x;
    if (spec_.is_indicator(i) && norm(pr.z) > 0.0) {
      recent_cuts_.push_back(halfspace_from_point(pr.z, pr.x));
      while (static_cast<int>(recent_cuts_.size()) >
             std::max(config_.recent_k, 1)) {
        recent_cuts_.pop_front();
      }
    }
  }
  state_.refresh_sums();
}

void DykstraEngine::assert_dual_progress(bool have_before, double f_before,
                                         const Vector& v_before) const {
  if (!have_before || !std::isfinite(f_before)) return;
  const double f_after = state_.dual_value(spec_.blocks);
  const double scale = 1.0 + std::abs(f_before);
  if (!(f_after >= f_before - config_.monotonicity_slack * scale)) {
    throw NumericalError("engine: dual value decreased across an update (" +
                         std::to_string(f_before) + " -> " +
                         std::to_string(f_after) + ")");
  }
  const double margin = 0.5 * norm_sq(state_.v - v_before);
  if (!(f_after - f_before >= margin - 1e-8 * scale)) {
    throw NumericalError(
        "engine: dual increase fell short of half the squared v-step");
  }
}

void DykstraEngine::block_update(const std::vector<int>& indices) {
  const int hs_slot = spec_.r() + 1;
  const bool wants_hs =
      std::find(indices.begin(), indices.end(), hs_slot) != indices.end();
  block_update(indices,
               wants_hs ? choose_ctilde() : std::vector<Halfspace>{});
}

void DykstraEngine::block_update(const std::vector<int>& indices,
                                 const std::vector<Halfspace>& ctilde) {
  const int r = spec_.r();
  if (indices.empty()) throw SpecError("block_update: empty index set");
  bool wants_hs = false;
  for (int idx : indices) {
    if (idx < 1 || idx > r + 1) {
      throw SpecError("block_update: index " + std::to_string(idx) +
                      " outside [1, r+1]");
    }
    if (idx == r + 1) wants_hs = true;
  }
  if (wants_hs && !config_.shqp_enabled) {
    throw SpecError("block_update: halfspace slot scheduled but shqp is off");
  }

  const bool have_before = state_.dual_value_available();
  const double f_before =
      have_before ? state_.dual_value(spec_.blocks) : 0.0;
  const Vector v_before = state_.v;

  if (indices.size() == 1) {
    touch(indices.front() - 1, ctilde);
  } else {
    // Joint subproblem over the set: inner exact coordinate passes until no
    // single touch moves the iterate. (Pass-end displacement alone can
    // vanish while the multipliers diverge, e.g. on empty intersections.)
    long pass = 0;
    while (true) {
      ++pass;
      double moved = 0.0;
      for (int idx : indices) {
        const Vector x_before = state_.x;
        touch(idx - 1, ctilde);
        moved = std::max(moved, dist(state_.x, x_before));
      }
      if (moved <= config_.inner_tol * (1.0 + norm(state_.v))) break;
      if (pass >= config_.inner_max_iter) {
        throw NumericalError(
            "block_update: no minimizer for the joint subproblem within the "
            "inner iteration cap");
      }
    }
  }
  if (wants_hs) {
    state_.hs = halfspace_from_point(state_.z[r], state_.last_touch_x[r]);
  }
  assert_dual_progress(have_before, f_before, v_before);
}

void DykstraEngine::aggregate() {
  const double m_bound = config_.bound_m;
  if (!std::isfinite(m_bound)) return;
  const int r = spec_.r();

  double sum_norm_before = 0.0;
  for (const Vector& zi : state_.z) sum_norm_before += norm(zi);
  double support_sum_before = halfspace_support(state_.hs, state_.z[r]);
  for (int i = spec_.r2; i < r; ++i) support_sum_before += state_.conj[i];
  const Vector v_before = state_.v;

  std::vector<WeightedHalfspace> parts;
  for (int i = spec_.r2; i < r; ++i) {
    const double zn = norm(state_.z[i]);
    if (zn <= m_bound) continue;
    const double alpha = m_bound / zn;
    // Scale both pieces directly: a subtraction z - alpha*z cancels badly
    // for alpha near 1 and the excess must stay parallel to z.
    Vector scaled = alpha * state_.z[i];
    Vector excess = (1.0 - alpha) * state_.z[i];
    parts.emplace_back(
        halfspace_from_point(state_.z[i], state_.last_touch_x[i]),
        std::move(excess));
    state_.z[i] = std::move(scaled);
    state_.conj[i] *= alpha;
  }
  if (parts.empty()) return;
  if (norm(state_.z[r]) > 0.0) {
    parts.insert(parts.begin(), {state_.hs, state_.z[r]});
  }
  Halfspace agg = aggregate_halfspaces(parts);
  state_.z[r] = agg.degenerate ? Vector::zeros(spec_.dim) : agg.normal;
  state_.hs = agg;
  state_.refresh_sums();

  // Postconditions of the fold.
  if (dist(state_.v, v_before) > 1e-12 * (1.0 + norm(v_before))) {
    throw NumericalError("aggregate: multiplier sum not preserved");
  }
  for (int i = spec_.r2; i < r; ++i) {
    if (norm(state_.z[i]) > m_bound * (1.0 + 1e-12)) {
      throw NumericalError("aggregate: indicator multiplier exceeds M");
    }
  }
  double support_sum_after = halfspace_support(state_.hs, state_.z[r]);
  for (int i = spec_.r2; i < r; ++i) support_sum_after += state_.conj[i];
  if (!(support_sum_after <=
        support_sum_before + 1e-12 * (1.0 + std::abs(support_sum_before)))) {
    throw NumericalError("aggregate: cached support sum increased");
  }
  double sum_norm_after = 0.0;
  for (const Vector& zi : state_.z) sum_norm_after += norm(zi);
  if (!(sum_norm_after <= sum_norm_before + 1e-12 * (1.0 + sum_norm_before))) {
    throw NumericalError("aggregate: multiplier norm sum increased");
  }
}

SweepRecord DykstraEngine::sweep() {
  ++n_;
  const int wbar = config_.schedule.slots_per_sweep();
  slot_x_.clear();
  slot_x_.reserve(static_cast<std::size_t>(wbar));
  double vstep_sq = 0.0;
  for (int w = 1; w <= wbar; ++w) {
    const std::vector<int> slot = config_.schedule.at(n_, w);
    const Vector v_before = state_.v;
    block_update(slot);
    vstep_sq += norm_sq(state_.v - v_before);
    slot_x_.push_back(state_.x);
  }

  SweepRecord rec;
  rec.n = n_;
  rec.dual_value = state_.dual_value(spec_.blocks);
  rec.vstep_sq = vstep_sq;
  rec.x_snapshot = state_.x;
  total_vstep_sq_ += vstep_sq;

  aggregate();

  // The fold may not lose dual value either.
  const double f_after = state_.dual_value(spec_.blocks);
  if (std::isfinite(rec.dual_value) &&
      !(f_after >= rec.dual_value - config_.monotonicity_slack *
                                        (1.0 + std::abs(rec.dual_value)))) {
    throw NumericalError("aggregate: dual value decreased across the fold");
  }

  if (!trace_.empty() && std::isfinite(trace_.back().dual_value) &&
      std::isfinite(rec.dual_value)) {
    const double prev = trace_.back().dual_value;
    if (!(rec.dual_value >=
          prev - config_.monotonicity_slack * (1.0 + std::abs(prev)))) {
      throw NumericalError("engine: dual value decreased across sweeps");
    }
  }
  trace_.push_back(rec);
  return trace_.back();
}

RunResult DykstraEngine::run(const StopRule& stop) {
  const int probe = std::max(1, std::min(stop.max_sweeps, config_.validate_horizon));
  const ScheduleReport rep =
      validate_schedule(config_.schedule, probe, spec_.r1);
  if (!rep.ok()) {
    std::string why = rep.coverage_ok ? "sqrt-growth budget exceeded"
                                      : "coverage violation";
    throw SpecError("run: schedule pre-check failed (" + why + ")");
  }
  if (stop.x_ref) {
    require_dim(*stop.x_ref, spec_.dim, "stop rule x_ref");
  }
  while (n_ < stop.max_sweeps) {
    sweep();
    SweepRecord& rec = trace_.back();
    if (stop.x_ref && state_.dual_value_available()) {
      rec.gap_bound = report_gap(spec_, state_, *stop.x_ref);
    }
    if (rec.vstep_sq <= stop.vstep_tol) break;
    if (stop.gap_tol >= 0.0 && stop.x_ref && rec.gap_bound <= stop.gap_tol) {
      break;
    }
  }
  return RunResult{state_, trace_, n_};
}

RunResult run_dykstra(const ProblemSpec& spec, const EngineConfig& config,
                      const StopRule& stop,
                      const std::vector<Vector>& z_start) {
  DykstraEngine engine(spec, config, z_start);
  return engine.run(stop);
}

}  // namespace dyksplit
