#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "finer/activation.hpp"
#include "finer/fit.hpp"
#include "finer/mlp.hpp"

namespace finer {

/// Configuration problem; key_path() names the offending entry (e.g. "init.k").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key_path, const std::string& what)
      : std::runtime_error(key_path.empty() ? what : key_path + ": " + what), key_path_(key_path) {}
  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

enum class Task { kFitImage, kFitSdf, kNtk, kFreqMap, kRenderRay, kEval };

std::string_view to_string(Task task);
Task parse_task(std::string_view name);

struct NtkSettings {
  std::size_t width = 64;
  std::size_t coords = 64;
  std::size_t ensemble = 256;
  std::vector<double> k_sweep{1.0, 5.0, 20.0};
  std::vector<double> thresholds{1e-2, 1e-1, 1e0, 1e1};
};

struct FreqMapSettings {
  std::size_t width = 64;
  std::size_t points = 1024;
  std::size_t dims = 1;  ///< 1: line grid, 2: square grid with `points` per axis
};

struct SdfSettings {
  std::string shape = "sphere";
  SdfFitOptions fit;
  std::size_t chamfer_points = 30000;
};

struct RenderSettings {
  std::size_t width = 64;
  std::size_t height = 64;
  std::size_t samples = 128;
  double density_scale = 100.0;
};

struct IoSettings {
  std::string input;       ///< image (fit-image, eval) or ray JSON (render-ray)
  std::string checkpoint;  ///< eval only
  std::string out = "runs";
  bool force = false;
  bool timing = false;     ///< write per-iteration wall time into log.csv
};

struct ExperimentConfig {
  Task task = Task::kFitImage;
  std::uint64_t seed = 0;
  /// "finer", "sine", "gauss", "pemlp" (ReLU behind positional encoding), "relu" or "identity".
  std::string family = "finer";
  Activation activation;
  InitScheme init;
  TrainConfig train;
  SdfSettings sdf;
  NtkSettings ntk;
  FreqMapSettings freq_map;
  RenderSettings render;
  IoSettings io;

  /// Every key after defaults, file and flags were merged, as pretty JSON.
  std::string resolved_json;

  /// `<out>/<task>-<seed>`
  std::string run_directory() const;
};

/// Flag values layered over the file. Unset members leave the file value.
struct ConfigOverrides {
  std::optional<std::string> task;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> activation;
  std::optional<double> omega0;
  std::optional<double> k;
  std::optional<std::size_t> iterations;
  std::optional<std::string> input;
  std::optional<std::string> checkpoint;
  bool force = false;
};

/// Task defaults, then the JSON text, then the overrides. Unknown keys, wrong
/// types and out-of-range values throw ConfigError naming the key path.
ExperimentConfig parse_config_text(const std::string& json_text, const ConfigOverrides& overrides = {});
/// Same, reading the file at `path` (empty path = no file).
ExperimentConfig parse_config(const std::string& path, const ConfigOverrides& overrides = {});

/// The JSON defaults for a task (as parse_config_text would see them before
/// the file is applied).
std::string default_config_json(Task task);

}  // namespace finer
