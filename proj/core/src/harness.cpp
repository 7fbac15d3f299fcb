#include "dyksplit/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "dyksplit/errors.hpp"
#include "dyksplit/oracle.hpp"

namespace dyksplit {
namespace harness {

namespace {

using nlohmann::json;
constexpr double kInf = std::numeric_limits<double>::infinity();

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) known = true;
    }
    if (!known) {
      throw SpecError("spec file: unknown key '" + item.key() + "' in " +
                      where);
    }
  }
}

Vector parse_vector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw SpecError("spec file: " + where + " must be a nonempty array");
  }
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw SpecError("spec file: " + where + " has a non-numeric entry");
    }
    v[i] = j[i].get<double>();
  }
  if (!is_finite(v)) {
    throw SpecError("spec file: " + where + " has a non-finite entry");
  }
  return v;
}

BlockPtr parse_block(const json& j, std::size_t index) {
  const std::string where = "blocks[" + std::to_string(index) + "]";
  if (!j.is_object() || !j.contains("kind")) {
    throw SpecError("spec file: " + where + " needs a kind");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "affine") {
    reject_unknown(j, where, {"kind", "c", "b"});
    return make_affine(parse_vector(j.at("c"), where + ".c"),
                       j.value("b", 0.0));
  }
  if (kind == "quadratic") {
    reject_unknown(j, where, {"kind", "mu", "a"});
    return make_quadratic(j.at("mu").get<double>(),
                          parse_vector(j.at("a"), where + ".a"));
  }
  if (kind == "l1") {
    reject_unknown(j, where, {"kind", "lambda"});
    return make_l1(j.at("lambda").get<double>());
  }
  if (kind == "logbarrier") {
    reject_unknown(j, where, {"kind", "lower"});
    return make_log_barrier(parse_vector(j.at("lower"), where + ".lower"));
  }
  if (kind == "box") {
    reject_unknown(j, where, {"kind", "lower", "upper"});
    return make_box(parse_vector(j.at("lower"), where + ".lower"),
                    parse_vector(j.at("upper"), where + ".upper"));
  }
  if (kind == "ball") {
    reject_unknown(j, where, {"kind", "center", "radius"});
    return make_ball(parse_vector(j.at("center"), where + ".center"),
                     j.at("radius").get<double>());
  }
  if (kind == "halfspace") {
    reject_unknown(j, where, {"kind", "normal", "offset"});
    return make_halfspace_block(parse_vector(j.at("normal"), where + ".normal"),
                                j.at("offset").get<double>());
  }
  if (kind == "affineset") {
    reject_unknown(j, where, {"kind", "rows", "rhs"});
    const json& rows_j = j.at("rows");
    if (!rows_j.is_array() || rows_j.empty()) {
      throw SpecError("spec file: " + where + ".rows must be a nonempty array");
    }
    std::vector<Vector> rows;
    for (std::size_t i = 0; i < rows_j.size(); ++i) {
      rows.push_back(parse_vector(rows_j[i], where + ".rows entry"));
    }
    return make_affine_set(std::move(rows),
                           parse_vector(j.at("rhs"), where + ".rhs"));
  }
  throw SpecError("spec file: " + where + " has unknown kind '" + kind + "'");
}

double parse_m(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInf;
    throw SpecError("spec file: engine.M must be a number or \"inf\"");
  }
  return j.get<double>();
}

}  // namespace

ParsedRun parse_problem_json(const std::string& text,
                             const CliOverrides& overrides) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw SpecError(std::string("spec file: parse failure: ") + e.what());
  }
  try {
    reject_unknown(root, "top level",
                   {"dim", "x0", "blocks", "schedule", "engine", "stop",
                    "outer", "rate", "x_ref", "mode"});
    for (const char* required : {"dim", "x0", "blocks", "mode"}) {
      if (!root.contains(required)) {
        throw SpecError(std::string("spec file: missing key '") + required +
                        "'");
      }
    }

    ParsedRun run;
    const std::size_t dim = root.at("dim").get<std::size_t>();
    Vector x0 = parse_vector(root.at("x0"), "x0");
    if (x0.dim() != dim) throw SpecError("spec file: x0 does not match dim");

    std::vector<BlockPtr> blocks;
    const json& bj = root.at("blocks");
    if (!bj.is_array()) throw SpecError("spec file: blocks must be an array");
    for (std::size_t i = 0; i < bj.size(); ++i) {
      blocks.push_back(parse_block(bj[i], i));
    }
    run.spec = make_spec(dim, std::move(x0), std::move(blocks));

    const std::string mode_str =
        overrides.mode ? *overrides.mode : root.at("mode").get<std::string>();
    if (mode_str == "dykstra") {
      run.mode = Mode::Dykstra;
    } else if (mode_str == "rate") {
      run.mode = Mode::Rate;
    } else if (mode_str == "proxpoint") {
      run.mode = Mode::ProxPoint;
    } else {
      throw SpecError("spec file: mode must be dykstra|rate|proxpoint");
    }

    EngineConfig& ec = run.engine;
    if (root.contains("engine")) {
      const json& e = root.at("engine");
      reject_unknown(e, "engine",
                     {"M", "shqp", "ctilde_policy", "recent_k", "inner_tol",
                      "inner_max_iter", "monotonicity_slack"});
      if (e.contains("M")) ec.bound_m = parse_m(e.at("M"));
      ec.shqp_enabled = e.value("shqp", false);
      if (e.contains("ctilde_policy")) {
        const std::string p = e.at("ctilde_policy").get<std::string>();
        if (p == "previous-h") {
          ec.ctilde_policy = EngineConfig::CtildePolicy::PreviousH;
        } else if (p == "h-plus-recent-k") {
          ec.ctilde_policy = EngineConfig::CtildePolicy::HPlusRecentK;
        } else {
          throw SpecError(
              "spec file: ctilde_policy must be previous-h|h-plus-recent-k");
        }
      }
      ec.recent_k = e.value("recent_k", ec.recent_k);
      ec.inner_tol = e.value("inner_tol", ec.inner_tol);
      ec.inner_max_iter = e.value("inner_max_iter", ec.inner_max_iter);
      ec.monotonicity_slack =
          e.value("monotonicity_slack", ec.monotonicity_slack);
    }

    const int universe = run.spec.r() + (ec.shqp_enabled ? 1 : 0);
    std::optional<std::uint64_t> seed = overrides.seed;
    if (root.contains("schedule")) {
      const json& s = root.at("schedule");
      reject_unknown(s, "schedule", {"kind", "wbar", "seed", "slots", "m1", "m2"});
      const std::string kind = s.value("kind", std::string("cyclic"));
      if (!seed && s.contains("seed")) {
        seed = s.at("seed").get<std::uint64_t>();
      }
      if (kind == "cyclic") {
        ec.schedule = BlockSchedule::cyclic(universe, s.value("wbar", 0));
      } else if (kind == "random-permutation") {
        if (!seed) {
          throw SpecError(
              "spec file: randomized schedule requires a seed (file or "
              "--seed)");
        }
        ec.schedule = BlockSchedule::random_permutation(universe, *seed);
      } else if (kind == "explicit") {
        if (!s.contains("slots")) {
          throw SpecError("spec file: explicit schedule needs slots");
        }
        std::vector<std::vector<int>> slots;
        for (const auto& slot : s.at("slots")) {
          std::vector<int> members = slot.get<std::vector<int>>();
          if (members.empty()) {
            throw SpecError("spec file: schedule slot must be nonempty");
          }
          for (int idx : members) {
            if (idx < 1 || idx > universe) {
              throw SpecError("spec file: schedule index " +
                              std::to_string(idx) + " outside [1, " +
                              std::to_string(universe) + "]");
            }
          }
          slots.push_back(std::move(members));
        }
        ec.schedule = BlockSchedule::explicit_pattern(universe, std::move(slots));
      } else {
        throw SpecError(
            "spec file: schedule kind must be cyclic|random-permutation|"
            "explicit");
      }
      ec.schedule.growth_m1 = s.value("m1", ec.schedule.growth_m1);
      ec.schedule.growth_m2 = s.value("m2", ec.schedule.growth_m2);
    } else {
      ec.schedule = BlockSchedule::cyclic(universe);
    }

    if (root.contains("stop")) {
      const json& st = root.at("stop");
      reject_unknown(st, "stop", {"max_sweeps", "vstep_tol", "gap_tol"});
      run.stop.max_sweeps = st.value("max_sweeps", run.stop.max_sweeps);
      run.stop.vstep_tol = st.value("vstep_tol", run.stop.vstep_tol);
      run.stop.gap_tol = st.value("gap_tol", run.stop.gap_tol);
    }
    if (overrides.max_sweeps) run.stop.max_sweeps = *overrides.max_sweeps;

    if (root.contains("outer")) {
      const json& o = root.at("outer");
      reject_unknown(o, "outer",
                     {"delta0", "gamma", "max_outer", "final_delta",
                      "inner_sweep_cap", "case1_factor"});
      run.outer.delta0 = o.value("delta0", run.outer.delta0);
      run.outer.gamma = o.value("gamma", run.outer.gamma);
      run.outer.max_outer = o.value("max_outer", run.outer.max_outer);
      run.outer.final_delta = o.value("final_delta", run.outer.final_delta);
      run.outer.inner_sweep_cap =
          o.value("inner_sweep_cap", run.outer.inner_sweep_cap);
      run.outer.case1_factor = o.value("case1_factor", run.outer.case1_factor);
    }
    // Inner solves inherit the whole engine block; the schedule itself is
    // rebuilt per subproblem (universe 0 means "default cyclic").
    run.outer.engine = ec;
    run.outer.engine.schedule = BlockSchedule();

    if (root.contains("rate")) {
      const json& rj = root.at("rate");
      reject_unknown(rj, "rate", {"dual_minimizer_exists", "n0", "sweeps"});
      run.rate.dual_minimizer_exists =
          rj.value("dual_minimizer_exists", false);
      run.rate.n0 = rj.value("n0", run.rate.n0);
      run.rate.sweeps = rj.value("sweeps", run.rate.sweeps);
    }
    if (overrides.max_sweeps) run.rate.sweeps = *overrides.max_sweeps;
    if (run.rate.n0 < 1 || run.rate.sweeps < 1) {
      throw SpecError("spec file: rate window must be positive");
    }

    if (root.contains("x_ref")) {
      Vector xr = parse_vector(root.at("x_ref"), "x_ref");
      if (xr.dim() != dim) throw SpecError("spec file: x_ref does not match dim");
      run.x_ref = std::move(xr);
    }
    return run;
  } catch (const json::exception& e) {
    throw SpecError(std::string("spec file: malformed field: ") + e.what());
  }
}

ParsedRun parse_problem_file(const std::string& path,
                             const CliOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw SpecError("spec file: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_json(buf.str(), overrides);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

json halfspace_json(const Halfspace& h) {
  if (h.degenerate) return json{{"degenerate", true}};
  return json{{"degenerate", false},
              {"normal", vec_json(h.normal)},
              {"offset", h.offset}};
}

RunOutputs run_dykstra_mode(const ParsedRun& run, const std::string& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const oracle::OracleResult ref = oracle::solve_regularized_sum(run.spec);

  StopRule stop = run.stop;
  if (!stop.x_ref) {
    stop.x_ref = run.x_ref ? *run.x_ref : ref.x_star;
  }
  RunResult res = run_dykstra(run.spec, run.engine, stop);

  std::ostringstream csv;
  csv << "n,F,vstep_sq,gap,dist_to_oracle\n";
  for (const SweepRecord& rec : res.trace) {
    csv << rec.n << ',' << format_double(rec.dual_value) << ','
        << format_double(rec.vstep_sq) << ',' << format_double(rec.gap_bound)
        << ',' << format_double(dist(rec.x_snapshot, ref.x_star)) << '\n';
  }
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();

  json summary{
      {"mode", "dykstra"},
      {"sweeps", res.sweeps},
      {"final_x", vec_json(res.state.x)},
      {"final_dual", res.state.dual_value(run.spec.blocks)},
      {"dist_to_oracle", dist(res.state.x, ref.x_star)},
      {"oracle",
       json{{"x", vec_json(ref.x_star)},
            {"obj", ref.obj_star},
            {"method", oracle::method_name(ref.method)},
            {"certified_tol", ref.certified_tol}}},
      {"wall_time_ms", ms}};

  write_text(dir + "/trace.csv", csv.str());
  write_text(dir + "/summary.json", summary.dump(2) + "\n");
  return {{dir + "/trace.csv", dir + "/summary.json"}};
}

RunOutputs run_rate_mode(const ParsedRun& run, const std::string& dir) {
  const oracle::OracleResult ref = oracle::solve_regularized_sum(run.spec);
  const double alpha = ref.obj_star;

  StopRule stop;
  stop.max_sweeps = run.rate.sweeps;
  stop.vstep_tol = -1.0;  // run the full horizon
  RunResult res = run_dykstra(run.spec, run.engine, stop);

  std::ostringstream csv;
  csv << "n,dual_gap,n_dual_gap,primal_dist,sqrt_n_primal_dist\n";
  std::vector<double> scaled_gap(res.trace.size() + 1, 0.0);
  std::vector<double> scaled_dist(res.trace.size() + 1, 0.0);
  for (const SweepRecord& rec : res.trace) {
    const double gap = alpha - rec.dual_value;
    const double d = dist(rec.x_snapshot, ref.x_star);
    const double ng = rec.n * std::max(gap, 0.0);
    const double sd = std::sqrt(static_cast<double>(rec.n)) * d;
    scaled_gap[static_cast<std::size_t>(rec.n)] = ng;
    scaled_dist[static_cast<std::size_t>(rec.n)] = sd;
    csv << rec.n << ',' << format_double(gap) << ','
        << format_double(rec.n * gap) << ',' << format_double(d) << ','
        << format_double(sd) << '\n';
  }

  // Protocol v1: calibrate on the first quartile of [n0, N], assert on the
  // whole window against 3x the calibration peak plus an absolute floor.
  const int last_n = res.sweeps;
  const int n0 = run.rate.n0;
  const bool m_finite = std::isfinite(run.engine.bound_m);
  const double floor_gap = 1e-9 * (1.0 + std::abs(alpha));
  const double floor_dist = 1e-9 * (1.0 + norm(ref.x_star));
  const int calib_end = n0 + std::max(1, (last_n - n0) / 4);
  double calib_gap = 0.0, calib_dist = 0.0, sup_gap = 0.0, sup_dist = 0.0;
  for (int n = n0; n <= last_n; ++n) {
    if (n <= calib_end) {
      calib_gap = std::max(calib_gap, scaled_gap[static_cast<std::size_t>(n)]);
      calib_dist =
          std::max(calib_dist, scaled_dist[static_cast<std::size_t>(n)]);
    }
    sup_gap = std::max(sup_gap, scaled_gap[static_cast<std::size_t>(n)]);
    sup_dist = std::max(sup_dist, scaled_dist[static_cast<std::size_t>(n)]);
  }
  const double c_fit_gap = 3.0 * calib_gap + floor_gap;
  const double c_fit_dist = 3.0 * calib_dist + floor_dist;
  const bool pass_gap = sup_gap <= c_fit_gap;
  const bool pass_dist = sup_dist <= c_fit_dist;

  json verdict{{"protocol", "v1"},
               {"m_finite", m_finite},
               {"dual_minimizer_asserted", run.rate.dual_minimizer_exists},
               {"n0", n0},
               {"sweeps", last_n},
               {"alpha", alpha},
               {"oracle_method", oracle::method_name(ref.method)},
               {"oracle_certified_tol", ref.certified_tol},
               {"c_fit_dual", c_fit_gap},
               {"sup_n_dual_gap", sup_gap},
               {"c_fit_primal", c_fit_dist},
               {"sup_sqrt_n_primal_dist", sup_dist}};
  if (m_finite) {
    verdict["pass_dual"] = pass_gap;
    verdict["pass_primal"] = pass_dist;
    verdict["pass"] = pass_gap && pass_dist;
  } else {
    // Bound hypothesis unmet: the study still runs, nothing is asserted.
    verdict["pass_dual"] = nullptr;
    verdict["pass_primal"] = nullptr;
    verdict["pass"] = nullptr;
  }

  write_text(dir + "/rate.csv", csv.str());
  write_text(dir + "/verdict.json", verdict.dump(2) + "\n");
  return {{dir + "/rate.csv", dir + "/verdict.json"}};
}

RunOutputs run_proxpoint_mode(const ParsedRun& run, const std::string& dir) {
  std::optional<oracle::OracleResult> ref;
  try {
    ref = oracle::solve_unregularized(run.spec);
  } catch (const SpecError&) {
    // No exact reference for this block mix; the distance column stays NaN.
  } catch (const InfeasibleError&) {
    // Let the outer loop surface infeasibility as a certificate timeout.
  }

  OuterResult res = outer_run(run.spec, run.outer);

  std::ostringstream csv;
  csv << "j,delta_j,residual,feas_residual,dist_to_oracle\n";
  json certs = json::array();
  for (const KKTCertificate& c : res.certificates) {
    const double d =
        ref ? dist(c.x_j, ref->x_star) : std::numeric_limits<double>::quiet_NaN();
    csv << c.outer_index << ',' << format_double(c.delta) << ','
        << format_double(c.residual) << ',' << format_double(c.feas_residual)
        << ',' << format_double(d) << '\n';

    json zc = json::array();
    for (const Vector& zi : c.z) zc.push_back(vec_json(zi));
    json ec = json::array();
    for (const Vector& ei : c.e) ec.push_back(vec_json(ei));
    json touches = json::array();
    for (const Vector& t : c.c_touch) touches.push_back(vec_json(t));
    json slots = json::array();
    for (const Vector& s : c.slot_x) slots.push_back(vec_json(s));
    certs.push_back(json{{"j", c.outer_index},
                         {"delta", c.delta},
                         {"case", c.case_tag},
                         {"x_j", vec_json(c.x_j)},
                         {"x_prev", vec_json(c.x_prev)},
                         {"z", zc},
                         {"e", ec},
                         {"outer_set", halfspace_json(c.outer_set)},
                         {"residual", c.residual},
                         {"feas_residual", c.feas_residual},
                         {"max_slot_drift", c.max_slot_drift},
                         {"sweeps_used", c.sweeps_used},
                         {"c_touch", touches},
                         {"slot_x", slots}});
  }

  json doc{{"mode", "proxpoint"},
           {"final_x", vec_json(res.x_final)},
           {"certificates", certs}};
  if (ref) {
    doc["oracle"] = json{{"x", vec_json(ref->x_star)},
                         {"obj", ref->obj_star},
                         {"method", oracle::method_name(ref->method)},
                         {"certified_tol", ref->certified_tol}};
    doc["dist_to_oracle"] = dist(res.x_final, ref->x_star);
  } else {
    doc["oracle"] = nullptr;
  }

  write_text(dir + "/trace.csv", csv.str());
  write_text(dir + "/certificates.json", doc.dump(2) + "\n");
  return {{dir + "/trace.csv", dir + "/certificates.json"}};
}

}  // namespace

RunOutputs run_to_files(const ParsedRun& run, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  switch (run.mode) {
    case Mode::Dykstra:
      return run_dykstra_mode(run, out_dir);
    case Mode::Rate:
      return run_rate_mode(run, out_dir);
    case Mode::ProxPoint:
      return run_proxpoint_mode(run, out_dir);
  }
  throw Error("unknown mode");
}

}  // namespace harness
}  // namespace dyksplit
