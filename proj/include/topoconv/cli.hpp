#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "topoconv/analysis.hpp"
#include "topoconv/dmrg.hpp"
#include "topoconv/models.hpp"
#include "topoconv/mps.hpp"

namespace topoconv::cli {

// ---------------------------------------------------------------------------
// Run configuration (config.cpp)

struct SweepSpec {
  std::string parameter;  // "g", "lambda", or "D"
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;

  std::vector<double> grid() const;  // start, start+step, .., <= stop + step/2
  void validate() const;             // step > 0, start < stop, >= 3 points
};

struct ObservableFlags {
  bool string_order = false;
  bool correlation_length = false;
  bool edge_profile = false;
  bool degeneracy = false;
  bool central_charge = false;
};

struct RunConfig {
  models::ModelSpec model;  // template; the swept field is overwritten per point
  SweepSpec sweep;
  std::vector<mps::PartitionSpec> partitions;
  analysis::AlphaGrid alpha_grid;
  dmrg::DmrgConfig dmrg;
  ObservableFlags observables;
  std::string output_dir;
  int workers = 1;

  void validate() const;
};

// Flat key=value sections; unknown keys, bad values, and missing required
// fields raise Config errors that cite file and line.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

// Canonical round-trippable rendering: section order, key order, and float
// formatting are fixed, so equal configs render byte-identically. The
// manifest embeds this echo and the cache keys hash it.
std::string render_config(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// Serialization helpers (io.cpp)

// Shortest of %.17g that parses back exactly would not be byte-stable across
// libc versions; results pin exactly 17 significant digits.
std::string format_float(double x);

std::uint64_t fnv1a(const std::string& s);
std::string hash_hex(std::uint64_t h);

// Write via temp file + rename so an interrupted run never leaves a torn
// artifact behind.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
void ensure_directory(const std::string& path);

// ---------------------------------------------------------------------------
// Grid execution (runner.cpp)

struct PointRecord {
  double p = 0.0;
  std::string cache_key;  // hex of the config-point hash
  double energy = 0.0;
  bool converged = false;
  bool entropy_stable = false;
  int sweeps = 0;
  double max_discarded_weight = 0.0;
  bool from_cache = false;  // ground state loaded, not recomputed
  bool warm_started = false;
};

struct RunArtifacts {
  std::vector<double> grid;
  std::vector<PointRecord> points;
  // One sweep (and one diagram) per configured partition, all sharing `grid`.
  std::vector<analysis::SweepResult> sweeps;
  std::vector<analysis::SignDiagram> diagrams;
  bool any_unconverged = false;
};

// Executes the sweep: per-point DMRG (cache-aware, warm-started from the
// nearest completed lower neighbor), partition spectra, sign diagrams,
// requested observables, and all result files under cfg.output_dir.
RunArtifacts run(const RunConfig& cfg);

// Key of one grid point's ground-state cache entry: hash of the canonical
// config render restricted to the sections the state depends on ([model]
// with the swept field pinned at p, and [dmrg]).
std::string point_cache_key(const RunConfig& cfg, double p);

// The model template with the swept parameter overwritten at p.
models::ModelSpec model_at_point(const RunConfig& cfg, double p);

// One cache-aware cold-start ground-state solve at parameter value p. The
// runner and the oracle comparison share this so verify reruns hit the cache.
PointRecord solve_point_cached(const RunConfig& cfg, double p, mps::Mps& state);

// ---------------------------------------------------------------------------
// Figure presets (presets.cpp)

struct FigurePreset {
  std::string name;
  std::string summary;  // one line for the `presets` listing
  std::string config_text;
};

const std::vector<FigurePreset>& figure_presets();
const FigurePreset& preset_by_name(const std::string& name);

// ---------------------------------------------------------------------------
// Oracle comparison (verify.cpp)

struct VerifyReport {
  double max_energy_dev = 0.0;        // relative
  double max_entropy_dev = 0.0;       // absolute, over blocks and orders
  double max_string_dev = 0.0;        // absolute
  double max_sector_dev = 0.0;        // absolute, lambda-D sector energies
  int points_checked = 0;
  std::string text;                   // human-readable table
};

// Runs the model's oracles against DMRG at the configured grid: dense ED
// when the Hilbert space allows it, the covariance oracle for two-level
// chains at any N. Throws OracleMismatch when a deviation exceeds its bound.
VerifyReport verify(const RunConfig& cfg);

}  // namespace topoconv::cli
