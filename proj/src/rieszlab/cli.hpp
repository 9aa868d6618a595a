// cli: batch front end over the laboratory.  Flat dotted-key configs plus
// command-line overrides resolve into runs of the criteria pipeline
// (`check`), the spectral diagnostics pipeline (`spectral`), or parameter
// sweeps emitting long-format CSV (`sweep`); every run can echo its fully
// resolved configuration into a self-contained output directory so results
// reproduce byte for byte from the echo and the seed.
#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rieszlab/criteria.hpp"
#include "rieszlab/scenarios.hpp"
#include "rieszlab/spectral_analysis.hpp"

namespace rieszlab {

// ---------------------------------------------------------------------------
// Raw configuration: an ordered key -> value map of dotted keys.
// ---------------------------------------------------------------------------

// Key -> value pairs exactly as given; resolution applies types and defaults.
struct RunConfig {
  std::map<std::string, std::string> kv;
};

// Parse `key = value` lines ('#' comments and blank lines skipped).  Throws
// std::invalid_argument on syntax errors or duplicate keys.
RunConfig parse_config_text(const std::string& text);

// Insert or overwrite one key (command-line overrides beat the file).
void set_key(RunConfig& cfg, const std::string& key, const std::string& value);

// ---------------------------------------------------------------------------
// Resolved settings: every knob typed, validated, and defaulted.
// ---------------------------------------------------------------------------

enum class TableSource { saturated, zero, file };

struct SweepSettings {
  std::string quantity = "g";  // g | g_tilde | rho
  std::string param;           // first swept scenario parameter
  std::string param2;          // optional second parameter
  std::vector<double> values;
  std::vector<double> values2;
  std::vector<Index> points;   // n (g), k (g_tilde), or N (rho); empty = auto
  Index n1 = 2;                // outer-sum cut for the g_tilde quantity
};

// Rectangle quadrature around the box: forced on, forced off, or engaged
// only when the node budget resolves the box perimeter.
enum class BoxQuad { automatic, on, off };

struct RunSettings {
  // Source: a named scenario, or a custom spectrum/weights pair.
  std::string scenario;  // empty = custom route
  std::map<std::string, double> scenario_params;
  Spectrum spectrum;        // custom route only
  WeightSequence weights;   // custom route only
  TableSource table_source = TableSource::saturated;
  std::string table_path;   // file source only

  CriteriaOptions criteria;
  bool fast_route = false;  // require g_tilde_bounded in the check verdict

  SpectralOptions spectral;   // size 0 = auto (scenario default / 400)
  Index n0 = 0;               // box cut; 0 = auto-calibrate
  double box_h1 = 0.0;        // box extent left of 0; 0 = auto
  double box_h2 = 0.0;        // box extent off the real axis; 0 = auto
  BoxQuad box_quadrature = BoxQuad::automatic;
  bool save_table = false;    // write perturbation.mat into the output dir

  SweepSettings sweep;

  std::string out_dir;  // empty = no files, log output only
};

// Validate keys and values, fill defaults.  Throws std::invalid_argument on
// unknown keys, keys irrelevant to the declared kinds, or malformed values.
RunSettings resolve_settings(const RunConfig& cfg);

// Canonical echo of resolved settings (sorted `key = value` lines, numbers
// at 17 significant digits, no output-directory line): re-running a command
// from its echo reproduces the run byte for byte.  Scenario parameters are
// echoed as resolved by the generator, so `params` should be the bundle's.
std::string echo_config(const RunSettings& s,
                        const std::map<std::string, double>& resolved_params);

// ---------------------------------------------------------------------------
// Commands.  Log lines go to `log`; files go to settings.out_dir if set.
// Exit codes: 0 verdicts hold / checks pass, 1 a verdict or invariant fails,
// 2 inconclusive, 64 malformed configuration, 70 numerical pipeline failure.
// ---------------------------------------------------------------------------

int run_check(const RunSettings& s, std::ostream& log);
int run_spectral(const RunSettings& s, std::ostream& log);
int run_sweep(const RunSettings& s, std::ostream& log);
int run_scenario_list(std::ostream& log);

// Full dispatcher: parses argv (subcommand plus --config/--out/--seed/
// --scenario/--param K=V/--quad-nodes/--size/--epsilon), maps argument and
// validation errors to exit 64.
int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace rieszlab
