#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "medsr/degrade.hpp"
#include "medsr/metrics.hpp"
#include "medsr/models.hpp"

namespace medsr::bench {

struct DomainSpec {
  std::string name;
  std::string corpus;  // as written; relative to BenchConfig::base_dir
};

struct ModelSpec {
  models::ModelKind kind = models::ModelKind::bicubic;
  std::optional<std::string> weights;        // one file for every scale
  std::map<int, std::string> scale_weights;  // per-scale files, preferred
  std::optional<std::uint64_t> init_seed;    // seeded initialization instead of a file
};

/// JSON schema:
///   {
///     "domains": [{"name": "brain", "corpus": "corpus/brain"}, ...],
///     "scales": [2, 3, 4],
///     "models": [{"kind": "bicubic"},
///                {"kind": "srcnn", "weights": {"2": "w/srcnn_x2.msrw"}},
///                {"kind": "swinlite", "init_seed": 1}],
///     "degradation": {"profile": "classical", "blur_sigma": 0,
///                     "noise_sigma": 0, "compression_quality": null},
///     "seed": 0,
///     "output_dir": "out",
///     "threads": 0
///   }
/// Only "domains", "scales" and "models" are required. Relative paths are
/// resolved against the directory holding the config file.
struct BenchConfig {
  std::vector<DomainSpec> domains;
  std::vector<int> scales;
  std::vector<ModelSpec> models;
  DegradationProfile profile = DegradationProfile::classical;
  double blur_sigma = 0.0;
  double noise_sigma = 0.0;
  std::optional<int> compression_quality;
  std::uint64_t seed = 0;
  std::string output_dir = "bench_out";
  int threads = 0;
  std::filesystem::path base_dir;  // not part of the hash

  void validate() const;
  std::filesystem::path resolve(const std::string& path) const;
  DegradationSpec degradation(int scale) const;
};

BenchConfig parse_bench_config(const std::string& json_text, const std::filesystem::path& base_dir = ".");
BenchConfig load_bench_config(const std::filesystem::path& path);

/// Sorted-key JSON of every config field.
std::string canonical_json(const BenchConfig& cfg);
/// FNV-1a of canonical_json, as 16 hex digits.
std::string config_hash(const BenchConfig& cfg);

struct ImageResult {
  std::string image;
  metrics::MetricReport report;
};

/// One (domain, scale, model) cell. Unsupported cells carry no values.
struct Cell {
  std::string domain;
  int scale = 0;
  std::string model;
  bool supported = true;
  std::vector<ImageResult> images;
  std::vector<metrics::MetricValue> means;  // registry order
};

struct Manifest {
  std::string tool_version;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string started_at;
  std::string finished_at;
  int threads = 1;
};

struct BenchRun {
  std::vector<std::string> domains;
  std::vector<int> scales;
  std::vector<std::string> models;
  std::vector<Cell> cells;  // domain-major, then scale, then model
  Manifest manifest;

  const Cell* find(const std::string& domain, int scale, const std::string& model) const;
};

/// Runs the whole grid. Pairs are written under output_dir/pairs; nothing
/// else is written (see write_outputs).
BenchRun run_bench(const BenchConfig& cfg);

/// Publication-style tables: one per domain, rows grouped by scale then metric,
/// one column per model, 2 decimals, "--" for unsupported cells.
std::string emit_markdown(const BenchRun& run);
/// domain,scale,model,metric,mean; unsupported cells have an empty mean.
std::string emit_csv(const BenchRun& run);
/// Aggregates and per-image values; excludes timestamps so reruns match.
std::string emit_json(const BenchRun& run);
/// Tool version, seeds, config hash and wall-clock timestamps.
std::string emit_manifest(const BenchRun& run, const BenchConfig& cfg);

/// Inverse of emit_json.
BenchRun parse_results_json(const std::string& text);

/// Writes results.csv, results.json, report.md and manifest.json.
void write_outputs(const BenchRun& run, const BenchConfig& cfg);

/// Column heading for a model kind in the Markdown report.
std::string model_label(const std::string& model);

}  // namespace medsr::bench
