#pragma once

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "geoagg/raster.hpp"
#include "geoagg/synthetic.hpp"

namespace geoagg::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("geoagg_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline RasterSeries random_raster(std::size_t rows, std::size_t cols, std::size_t vars, std::vector<Year> years,
                                  std::uint64_t seed, double lat_step = 0.25, double lon_step = 0.25) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  GeoGrid grid(rows, cols, 30.0, 80.0, lat_step, lon_step);
  std::vector<double> v(years.size() * rows * cols * vars);
  for (double& x : v) x = static_cast<float>(g(rng));
  return RasterSeries(grid, vars, std::move(years), std::move(v));
}

inline std::vector<Year> even_years(std::size_t days, std::vector<Year> labels) {
  return split_years(days, labels);
}

inline SyntheticConfig small_config(std::size_t rows = 12, std::size_t cols = 12, std::size_t days = 120) {
  SyntheticConfig c;
  c.rows = rows;
  c.cols = cols;
  c.n_days = days;
  c.years = {2003, 2004, 2005, 2006};
  return c;
}

}  // namespace geoagg::test
