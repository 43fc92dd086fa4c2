#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "geoagg/errors.hpp"

namespace geoagg::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kDataError = 3, kPartialFailure = 4 };

struct GenerateOptions {
  std::optional<std::filesystem::path> config;  // generator JSON; defaults when absent
  std::uint64_t seed = 1;
  std::filesystem::path out = "data";
  bool overwrite = false;
  bool paper_shape = false;
};

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  // overrides the config's output
  std::optional<std::uint64_t> seed;         // replaces the seed list with one seed
  std::optional<std::size_t> jobs;
  bool overwrite = false;
  bool paper_shape = false;
};

struct StatsOptions {
  std::filesystem::path results;  // run output directory
  std::string method_a = "GPESA";
  std::string method_b = "SL";
  std::optional<std::filesystem::path> out;
  bool overwrite = false;
};

struct ImportanceOptions {
  std::filesystem::path results;
  std::string method;
  std::optional<std::filesystem::path> out;  // directory; defaults to the results directory
  bool overwrite = false;
};

// Files written by generate.
inline constexpr const char* kRasterFile = "raster.gevr";
inline constexpr const char* kResponseFile = "response.csv";
inline constexpr const char* kTruthFile = "truth.json";

// Each command throws the library's error types; run_command maps them to
// exit codes and prints the message.
int cmd_generate(const GenerateOptions& options, std::ostream& log);
int cmd_run(const RunOptions& options, std::ostream& log);
int cmd_stats(const StatsOptions& options, std::ostream& log);
int cmd_importance(const ImportanceOptions& options, std::ostream& log);

template <typename Fn>
int run_command(Fn&& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const FormatError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const InvalidInput& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace geoagg::cli
