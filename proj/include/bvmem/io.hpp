// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bvmem/baseline.hpp"
#include "bvmem/postprocess.hpp"
#include "bvmem/sampler.hpp"
#include "bvmem/vmem.hpp"

namespace bvmem {

// Scale applied to realized volatilities on load when data.annualize is
// set: 100 * sqrt(252) = 1587.45078663875 (annualized percent units).
extern const double kAnnualizationFactor;

// Flat view of an INI-style config file: "section.key" -> raw text.
// Values may be scalars, comma-separated vectors, or matrices with rows
// separated by ';'.
struct ConfigMap {
  std::map<std::string, std::string> values;

  [[nodiscard]] bool has(const std::string& key) const;
  [[nodiscard]] std::string get_string(const std::string& key,
                                       const std::string& fallback) const;
  [[nodiscard]] double get_double(const std::string& key,
                                  double fallback) const;
  [[nodiscard]] long get_long(const std::string& key, long fallback) const;
  [[nodiscard]] std::uint64_t get_uint64(const std::string& key,
                                         std::uint64_t fallback) const;
  [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;
  [[nodiscard]] Vector get_vector(const std::string& key) const;
  [[nodiscard]] Matrix get_matrix(const std::string& key) const;
  [[nodiscard]] std::vector<std::string> get_strings(
      const std::string& key) const;
};

[[nodiscard]] ConfigMap parse_config_text(const std::string& text);
[[nodiscard]] ConfigMap load_config_file(const std::string& path);

enum class RunMode { Simulate, FitDpm, FitLn1, Evaluate, Diagnose };

struct SimulateSpec {
  MeanParams params;
  InnovationSpec innovation;
  long T = 1000;
  Vector mu1;  // empty means: the stationary fixed point
};

// Everything one CLI invocation needs, resolved from a config file plus
// the subcommand and command-line overrides.
struct RunConfig {
  RunMode mode = RunMode::Simulate;
  std::string dataPath;
  std::vector<std::string> columns;  // empty means: every column but the first
  bool annualize = false;
  std::string fitModel = "dpm";
  SamplerConfig sampler;
  LN1Config baseline;
  double nwDegrees = 0.0;        // 0 means: 10 + d once the data dim is known
  double nwPrecisionScale = 1.0;
  SimulateSpec simulate;
  std::string outputDir = ".";
  std::string dpmArchive;  // empty means: outputDir/draws.bin
  std::string ln1Fit;      // empty means: outputDir/ln1.json
  std::string truthPath;   // optional; enables the true-density columns
  long gridPoints = 400;
  double gridLo = 1e-3;
  double gridHi = 8.0;
  long ln1LpmlDraws = 200;
  std::uint64_t seed = 1;
};

// mode is the CLI subcommand: simulate, fit, evaluate, or diagnose. The
// fit model (dpm or ln1) comes from the fit.model config key.
[[nodiscard]] RunConfig load_run_config(const std::string& path,
                                        const std::string& mode);

// CSV with a label or date first column and named numeric columns after
// it. Column selection is by header name; row order is preserved. Every
// selected cell must be strictly positive.
[[nodiscard]] SeriesMatrix load_series(const std::string& path,
                                       const std::vector<std::string>& columns,
                                       bool annualize);

void save_series(const std::string& path, const SeriesMatrix& series);

// Sidecar with the generating process of a simulated series.
struct TruthSidecar {
  MeanParams params;
  InnovationSpec innovation;
  Vector mu1;
  std::uint64_t seed = 0;
};

void save_truth(const std::string& path, const TruthSidecar& truth);
[[nodiscard]] TruthSidecar load_truth(const std::string& path);

void save_ln1(const std::string& path, const LN1Fit& fit,
              std::uint64_t configHash, double lps, double lpml);

struct LoadedLN1 {
  LN1Fit fit;
  std::uint64_t configHash = 0;
  double lps = 0.0;
  double lpml = 0.0;
};

[[nodiscard]] LoadedLN1 load_ln1(const std::string& path);

struct ArchivedDraw {
  IdentifiedDraw draw;
  long iteration = 0;
  int maxComponents = 0;
  int activeComponents = 0;
};

// Binary archive of identified posterior draws. Byte-for-byte identical
// across runs with the same config and seed.
struct DrawArchive {
  std::string model = "dpm";
  Eigen::Index d = 0;
  Eigen::Index T = 0;
  std::uint64_t configHash = 0;
  std::uint64_t seed = 0;
  Vector mu1;
  std::vector<ArchivedDraw> draws;
};

void write_archive(const std::string& path, const DrawArchive& archive);
[[nodiscard]] DrawArchive read_archive(const std::string& path);

// FNV-1a over the identity-relevant fields (data selection plus sampler
// settings plus seed); fit outputs stamp it and evaluate refuses draws
// produced under a different value.
[[nodiscard]] std::uint64_t config_hash(const RunConfig& config);

// %.17g rendering, enough digits to reproduce the double exactly.
[[nodiscard]] std::string format_full(double value);

// Columns of equal length with one '# ' comment block and a header row.
void write_csv(const std::string& path,
               const std::vector<std::string>& comments,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

// Runs one resolved config end to end, writing outputs under
// config.outputDir. On failure an INVALID marker file is left next to
// whatever partial outputs exist. Returns a process exit code.
int run_pipeline(const RunConfig& config, std::ostream& log);

}  // namespace bvmem
