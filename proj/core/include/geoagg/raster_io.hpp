#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <vector>

#include "geoagg/raster.hpp"

namespace geoagg {

// Binary raster layout (all little-endian):
//   "GEVR"  u8 version
//   u32 days, rows, cols, vars
//   f64 lat0, lon0, lat_step, lon_step
//   i32 year label per day
//   f32 payload, ordered (day, row, col, var)
inline constexpr std::uint8_t kRasterFormatVersion = 1;

struct RasterHeader {
  std::uint32_t days = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t vars = 0;
  double lat0 = 0.0;
  double lon0 = 0.0;
  double lat_step = 0.0;
  double lon_step = 0.0;

  std::uint64_t payload_entries() const noexcept {
    return std::uint64_t{days} * rows * cols * vars;
  }
};

// Reads magic, version, counts and grid geometry; leaves the stream at the
// year labels. Throws FormatError on a malformed header.
RasterHeader read_raster_header(std::istream& in);

RasterSeries read_raster(std::istream& in);
void write_raster(const RasterSeries& series, std::ostream& out);

RasterSeries load_raster(const std::filesystem::path& path);
// Values are narrowed to float32; series built from float32 data round-trip exactly.
void save_raster(const RasterSeries& series, const std::filesystem::path& path);

// CSV with header `day,year,value`.
ResponseSeries load_response(const std::filesystem::path& path);
void save_response(const ResponseSeries& response, const std::filesystem::path& path);

}  // namespace geoagg
