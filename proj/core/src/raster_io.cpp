#include "geoagg/raster_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "geoagg/errors.hpp"

namespace geoagg {
namespace {

constexpr std::array<char, 4> kMagic{'G', 'E', 'V', 'R'};

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(U)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size()))
    throw FormatError(std::string("raster: truncated while reading ") + what);
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(static_cast<U>(bytes[i]) << (8 * i));
  return value;
}

double get_f64(std::istream& in, const char* what) { return std::bit_cast<double>(get_le<std::uint64_t>(in, what)); }

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace

RasterHeader read_raster_header(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size())) throw FormatError("raster: truncated magic");
  if (magic != kMagic) throw FormatError("raster: bad magic (expected GEVR)");
  const auto version = get_le<std::uint8_t>(in, "version");
  if (version != kRasterFormatVersion)
    throw FormatError("raster: unsupported version " + std::to_string(version));

  RasterHeader h;
  h.days = get_le<std::uint32_t>(in, "day count");
  h.rows = get_le<std::uint32_t>(in, "row count");
  h.cols = get_le<std::uint32_t>(in, "col count");
  h.vars = get_le<std::uint32_t>(in, "var count");
  h.lat0 = get_f64(in, "lat0");
  h.lon0 = get_f64(in, "lon0");
  h.lat_step = get_f64(in, "lat_step");
  h.lon_step = get_f64(in, "lon_step");
  if (h.days == 0 || h.rows == 0 || h.cols == 0 || h.vars == 0)
    throw FormatError("raster: zero dimension in header");
  try {
    GeoGrid check(h.rows, h.cols, h.lat0, h.lon0, h.lat_step, h.lon_step);
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("raster: invalid grid geometry: ") + e.what());
  }
  return h;
}

RasterSeries read_raster(std::istream& in) {
  const RasterHeader h = read_raster_header(in);

  std::vector<Year> years(h.days);
  for (auto& y : years) y = static_cast<Year>(get_le<std::uint32_t>(in, "year labels"));
  for (std::size_t d = 1; d < years.size(); ++d)
    if (years[d] < years[d - 1]) throw FormatError("raster: year labels must be non-decreasing");

  const std::uint64_t n = h.payload_entries();
  if (n > std::numeric_limits<std::size_t>::max() / sizeof(double))
    throw FormatError("raster: payload too large");
  std::vector<char> raw(static_cast<std::size_t>(n) * 4);
  if (!in.read(raw.data(), static_cast<std::streamsize>(raw.size())))
    throw FormatError("raster: payload truncated (expected " + std::to_string(n) + " float32 entries)");
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("raster: trailing bytes after payload");

  std::vector<double> values(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (std::size_t b = 0; b < 4; ++b)
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[4 * i + b])) << (8 * b);
    const float f = std::bit_cast<float>(bits);
    if (!std::isfinite(f)) throw FormatError("raster: non-finite payload entry at index " + std::to_string(i));
    values[i] = f;
  }
  return RasterSeries(GeoGrid(h.rows, h.cols, h.lat0, h.lon0, h.lat_step, h.lon_step), h.vars, std::move(years),
                      std::move(values));
}

void write_raster(const RasterSeries& series, std::ostream& out) {
  const GeoGrid& g = series.grid();
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint8_t>(out, kRasterFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(series.n_days()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.rows()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.cols()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(series.n_vars()));
  for (double v : {g.lat0(), g.lon0(), g.lat_step(), g.lon_step()}) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  for (Year y : series.day_year()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(y));

  const auto values = series.values();
  std::vector<char> raw(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
    for (std::size_t b = 0; b < 4; ++b) raw[4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
}

RasterSeries load_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("raster: cannot open " + path.string());
  return read_raster(in);
}

void save_raster(const RasterSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("raster: cannot write " + path.string());
  write_raster(series, out);
  if (!out) throw std::runtime_error("raster: write failed for " + path.string());
}

ResponseSeries load_response(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("response: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "day,year,value")
    throw FormatError("response: expected header `day,year,value`");
  ResponseSeries r;
  std::size_t expected_day = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos) throw FormatError("response: malformed row: " + line);
    std::size_t day = 0;
    Year year = 0;
    double value = 0.0;
    const char* b = line.data();
    const char* e = line.data() + line.size();
    auto r1 = std::from_chars(b, b + c1, day);
    auto r2 = std::from_chars(b + c1 + 1, b + c2, year);
    auto r3 = std::from_chars(b + c2 + 1, e, value);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || r3.ec != std::errc{} || r3.ptr != e)
      throw FormatError("response: malformed row: " + line);
    if (day != expected_day) throw FormatError("response: day indices must be 0..n-1 in order");
    if (!std::isfinite(value)) throw FormatError("response: non-finite value on day " + std::to_string(day));
    ++expected_day;
    r.values.push_back(value);
    r.day_year.push_back(year);
  }
  return r;
}

void save_response(const ResponseSeries& response, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("response: cannot write " + path.string());
  out << "day,year,value\n";
  for (std::size_t d = 0; d < response.size(); ++d)
    out << d << ',' << response.day_year[d] << ',' << format_double(response.values[d]) << '\n';
}

}  // namespace geoagg
