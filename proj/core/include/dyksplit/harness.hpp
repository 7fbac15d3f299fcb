#ifndef DYKSPLIT_HARNESS_HPP
#define DYKSPLIT_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dyksplit/engine.hpp"
#include "dyksplit/problem.hpp"
#include "dyksplit/prox_point.hpp"

namespace dyksplit {
namespace harness {

enum class Mode { Dykstra, Rate, ProxPoint };

struct RateOptions {
  bool dual_minimizer_exists = false;
  int n0 = 25;
  int sweeps = 400;
};

/// Everything a problem file describes, after schema validation.
struct ParsedRun {
  ProblemSpec spec;
  EngineConfig engine;
  StopRule stop;
  OuterConfig outer;
  Mode mode = Mode::Dykstra;
  RateOptions rate;
  std::optional<Vector> x_ref;
};

/// Command-line overrides applied on top of the file.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> max_sweeps;
  std::optional<std::string> mode;
};

/// Strict parser: unknown keys anywhere are rejected, block kinds must match
/// the catalog, and a randomized schedule demands a seed (file or override).
/// All violations throw SpecError with the offending field in the message.
ParsedRun parse_problem_json(const std::string& text,
                             const CliOverrides& overrides = {});
ParsedRun parse_problem_file(const std::string& path,
                             const CliOverrides& overrides = {});

/// Shortest round-trip decimal form of a double (to_chars), the format used
/// in every CSV cell.
std::string format_double(double v);

struct RunOutputs {
  std::vector<std::string> files;  // paths written, trace first
};

/// Executes the run the file describes and writes the mode's outputs into
/// out_dir (created if missing): trace.csv + summary.json (dykstra),
/// rate.csv + verdict.json (rate), trace.csv + certificates.json (proxpoint).
/// Outputs are deterministic for a fixed (file, seed) except the wall-time
/// field inside summary.json.
RunOutputs run_to_files(const ParsedRun& run, const std::string& out_dir);

}  // namespace harness
}  // namespace dyksplit

#endif  // DYKSPLIT_HARNESS_HPP
