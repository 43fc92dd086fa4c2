#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoagg/eval/experiment.hpp"
#include "geoagg/synthetic.hpp"

namespace geoagg {

inline constexpr int kRunConfigVersion = 1;

// Experiment description. The dataset is either a raster/response file pair
// or a generator config with its seed.
struct RunConfig {
  std::optional<std::filesystem::path> raster_path;
  std::optional<std::filesystem::path> response_path;
  std::optional<SyntheticConfig> generator;
  std::uint64_t generator_seed = 1;

  std::vector<MethodSpec> methods;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::filesystem::path output = "results";
  bool record_timing = false;
  bool write_artifacts = true;
  ExperimentSettings settings = desk_settings();

  static ExperimentSettings desk_settings();
};

// Relative paths resolve against `base_dir`. Throws ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

// Throws ConfigError when no method is given or a dataset path is unset, and
// FormatError when a dataset file does not exist.
void validate_run_config(const RunConfig& config);

// Full-size parameters: 113 x 113 generator grid, population 1000 for 1000
// generations, 30 runs and restarts, filter R 1-20 and wrapper R 1-4.
void apply_paper_shape(RunConfig& config);

// FNV-1a over the canonical JSON form.
std::uint64_t config_hash(const RunConfig& config);

}  // namespace geoagg
