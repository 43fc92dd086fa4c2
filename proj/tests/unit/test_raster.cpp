#include <cmath>
#include <cstring>
#include <limits>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "geoagg/errors.hpp"
#include "geoagg/raster.hpp"
#include "geoagg/raster_io.hpp"
#include "geoagg/synthetic.hpp"
#include "helpers.hpp"

using namespace geoagg;

TEST_SUITE("raster") {

TEST_CASE("grid rejects invalid geometry") {
  CHECK_THROWS_AS(GeoGrid(0, 4, 0, 0, 1, 1), InvalidInput);
  CHECK_THROWS_AS(GeoGrid(4, 4, 0, 0, -1, 1), InvalidInput);
  CHECK_THROWS_AS(GeoGrid(4, 4, 89.5, 0, 1, 1), InvalidInput);
  CHECK_THROWS_AS(GeoGrid(4, 4, 0, 179.5, 1, 1), InvalidInput);
  GeoGrid g(3, 4, 10.0, 20.0, 0.5, 0.25);
  CHECK(g.cells() == 12);
  CHECK(g.lat_of(2) == doctest::Approx(11.0));
  CHECK(g.lon_of(3) == doctest::Approx(20.75));
  CHECK(g.center(7).lat == doctest::Approx(10.5));
  CHECK(g.center(7).lon == doctest::Approx(20.75));
}

TEST_CASE("raster series validates values and years") {
  GeoGrid g(2, 2, 0, 0, 1, 1);
  CHECK_THROWS_AS(RasterSeries(g, 1, {2003, 2003}, std::vector<double>(7, 0.0)), InvalidInput);
  CHECK_THROWS_AS(RasterSeries(g, 1, {2004, 2003}, std::vector<double>(8, 0.0)), InvalidInput);
  std::vector<double> v(8, 0.0);
  v[3] = std::nan("");
  CHECK_THROWS_AS(RasterSeries(g, 1, {2003, 2003}, v), InvalidInput);
  CHECK_THROWS_AS(RasterSeries(g, 0, {2003, 2003}, {}), InvalidInput);
}

TEST_CASE("folds over nine years leave one year out") {
  const auto years = split_years(1935, std::vector<Year>{2003, 2004, 2005, 2006, 2007, 2008, 2009, 2010, 2011});
  const auto folds = make_folds(years);
  REQUIRE(folds.size() == 9);
  CHECK(folds[0].test_year == 2003);
  std::set<Year> train_years;
  for (auto d : folds[0].train_days) train_years.insert(years[d]);
  CHECK(train_years.size() == 8);
  CHECK(train_years.count(2003) == 0);
  CHECK(folds[0].train_days.size() == 1720);
  for (const auto& f : folds) {
    std::vector<int> seen(years.size(), 0);
    for (auto d : f.train_days) ++seen[d];
    for (auto d : f.test_days) {
      ++seen[d];
      CHECK(years[d] == f.test_year);
    }
    for (int s : seen) CHECK(s == 1);
  }
}

TEST_CASE("two-year folds") {
  const std::vector<Year> years{7, 7, 9};
  const auto folds = make_folds(years);
  REQUIRE(folds.size() == 2);
  CHECK(folds[1].test_year == 9);
  CHECK(folds[1].train_days == std::vector<DayIndex>{0, 1});
  CHECK(folds[1].test_days == std::vector<DayIndex>{2});
  CHECK_THROWS_AS(make_folds(std::vector<Year>{5, 5, 5}), InvalidInput);
}

TEST_CASE("standardize_fit examples") {
  const std::vector<DayIndex> all{0, 1};
  auto p = standardize_fit(std::vector<double>{1.0, 3.0}, all);
  CHECK(p.mean == 2.0);
  CHECK(p.std == 1.0);
  p = standardize_fit(std::vector<double>{5, 5, 5}, std::vector<DayIndex>{0, 1, 2});
  CHECK(p.mean == 5.0);
  CHECK(p.std == 0.0);
  CHECK(standardize_apply(123.0, p) == 0.0);

  // Single-pass (Welford) oracle for the two-pass implementation.
  const std::vector<double> x{1, 2, 3, 4};
  double mean = 0, m2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double delta = x[i] - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x[i] - mean);
  }
  p = standardize_fit(x, std::vector<DayIndex>{0, 1, 2, 3});
  CHECK(p.mean == doctest::Approx(mean).epsilon(1e-15));
  CHECK(p.std == doctest::Approx(std::sqrt(m2 / 4.0)).epsilon(1e-15));
  CHECK_THROWS_AS(standardize_fit(x, std::vector<DayIndex>{}), InvalidInput);
}

TEST_CASE("standardize_apply examples") {
  StandardizationParams p{2.0, 1.0, 0};
  CHECK(standardize_apply(2.0, p) == 0.0);
  CHECK(standardize_apply(3.0, p) == 1.0);
}

TEST_CASE("training-day standardization has zero mean and unit variance") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(40);
    for (double& v : x) v = u(rng) * (trial + 1);
    std::vector<DayIndex> train;
    for (DayIndex d = 0; d < 40; d += 1 + trial % 3) train.push_back(d);
    const auto p = standardize_fit(x, train);
    double m = 0, s = 0;
    for (auto d : train) m += standardize_apply(x[d], p);
    m /= static_cast<double>(train.size());
    for (auto d : train) s += std::pow(standardize_apply(x[d], p) - m, 2);
    CHECK(std::abs(m) < 1e-9);
    CHECK(std::abs(s / static_cast<double>(train.size()) - 1.0) < 1e-9);
  }
}

TEST_CASE("fold tags identify day sets regardless of order") {
  const std::vector<DayIndex> a{1, 5, 9}, b{9, 1, 5}, c{1, 5, 10};
  CHECK(fold_tag(a) == fold_tag(b));
  CHECK(fold_tag(a) != fold_tag(c));
  const auto p = standardize_fit(std::vector<double>(11, 1.0), a);
  CHECK(p.provenance == fold_tag(a));
}

}  // TEST_SUITE raster

TEST_SUITE("raster_io") {

TEST_CASE("raster round trip is bit exact") {
  test::TempDir dir("io");
  const auto r = test::random_raster(5, 7, 3, test::even_years(20, {2003, 2004}), 42);
  save_raster(r, dir.path() / "r.gevr");
  const auto back = load_raster(dir.path() / "r.gevr");
  CHECK(back == r);
  CHECK(std::filesystem::file_size(dir.path() / "r.gevr") == 4 + 1 + 16 + 32 + 4 * 20 + 4 * 20 * 5 * 7 * 3);
}

TEST_CASE("random rasters round trip") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = test::random_raster(1 + seed % 4, 2 + seed % 3, 1 + seed % 3, test::even_years(6 + seed, {1, 2, 3}), seed);
    std::stringstream buf;
    write_raster(r, buf);
    CHECK(read_raster(buf) == r);
  }
}

TEST_CASE("malformed files raise format errors") {
  const auto r = test::random_raster(3, 3, 2, test::even_years(4, {2003, 2004}), 1);
  std::stringstream buf;
  write_raster(r, buf);
  const std::string bytes = buf.str();
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, std::size_t{40}, bytes.size() - 1}) {
    std::stringstream t(bytes.substr(0, cut));
    CHECK_THROWS_AS(read_raster(t), FormatError);
  }
  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream t1(bad);
  CHECK_THROWS_AS(read_raster(t1), FormatError);
  std::stringstream t2(bytes + "junk");
  CHECK_THROWS_AS(read_raster(t2), FormatError);
  // NaN in the payload.
  std::string nan = bytes;
  const float q = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan.data() + nan.size() - 4, &q, 4);
  std::stringstream t3(nan);
  CHECK_THROWS_AS(read_raster(t3), FormatError);
}

TEST_CASE("header for a full-size raster declares the expected payload") {
  std::stringstream buf;
  auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.put(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  auto put64 = [&](double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    for (int i = 0; i < 8; ++i) buf.put(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  buf.write("GEVR", 4);
  buf.put(static_cast<char>(kRasterFormatVersion));
  put32(1935);
  put32(113);
  put32(113);
  put32(3);
  put64(40.0);
  put64(-110.0);
  put64(0.1);
  put64(0.1);
  const auto h = read_raster_header(buf);
  CHECK(h.days == 1935);
  CHECK(h.payload_entries() == 113ull * 113 * 3 * 1935);
  // The payload itself is absent, so a full read must fail cleanly.
  std::stringstream again(buf.str());
  CHECK_THROWS_AS(read_raster(again), FormatError);
}

TEST_CASE("response csv round trip") {
  test::TempDir dir("resp");
  ResponseSeries r{{1.5, -2.25, 1e-17, 3.0 / 7.0}, {2003, 2003, 2004, 2004}};
  save_response(r, dir.path() / "y.csv");
  CHECK(load_response(dir.path() / "y.csv") == r);
  std::ofstream(dir.path() / "bad.csv") << "day,year,value\n0,2003,abc\n";
  CHECK_THROWS_AS(load_response(dir.path() / "bad.csv"), FormatError);
}

}  // TEST_SUITE raster_io

TEST_SUITE("synthetic") {

TEST_CASE("generation is deterministic in config and seed") {
  const auto c = test::small_config();
  const auto a = generate_synthetic(c, 9);
  const auto b = generate_synthetic(c, 9);
  CHECK(a.raster == b.raster);
  CHECK(a.response == b.response);
  CHECK(a.truth.circles == b.truth.circles);
  const auto d = generate_synthetic(c, 10);
  CHECK_FALSE(d.raster == a.raster);
}

TEST_CASE("noiseless identity response equals the raw circle mean") {
  auto c = test::small_config();
  c.formula = "identity";
  c.noise_std = 0.0;
  const auto ds = generate_synthetic(c, 3);
  const auto& f = ds.truth.circles.at(0);
  std::vector<std::size_t> cells;
  for (std::size_t cell = 0; cell < ds.raster.grid().cells(); ++cell)
    if (haversine_km(ds.raster.grid().center(cell), f.circle.center()) <= f.circle.radius_km) cells.push_back(cell);
  REQUIRE(!cells.empty());
  for (DayIndex d = 0; d < ds.raster.n_days(); ++d) {
    double s = 0;
    for (auto cell : cells) s += ds.raster.at(d, cell, f.var);
    CHECK(ds.response.values[d] == s / static_cast<double>(cells.size()));
  }
}

TEST_CASE("noiseless product formula recomputed by brute-force aggregation") {
  SyntheticConfig c;  // 32 x 32, 400 days
  c.noise_std = 0.0;
  const auto ds = generate_synthetic(c, 17);
  REQUIRE(ds.truth.circles.size() == 3);
  const GeoGrid& g = ds.raster.grid();
  double worst = 0;
  for (DayIndex d = 0; d < ds.raster.n_days(); ++d) {
    double A[3];
    for (int k = 0; k < 3; ++k) {
      const auto& f = ds.truth.circles[k];
      double s = 0;
      int n = 0;
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t col = 0; col < g.cols(); ++col)
          if (haversine_km({g.lat_of(r), g.lon_of(col)}, f.circle.center()) <= f.circle.radius_km) {
            s += ds.raster.at(d, r, col, f.var);
            ++n;
          }
      REQUIRE(n > 0);
      A[k] = s / n;
    }
    worst = std::max(worst, std::abs(ds.response.values[d] - (3 * A[0] * A[1] + 0.5 * A[2])));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("relative noise scales with the signal") {
  auto c = test::small_config();
  c.noise_std = 0.1;
  const auto noisy = generate_synthetic(c, 4);
  c.noise_std = 0.0;
  const auto clean = generate_synthetic(c, 4);
  double m = 0, ss = 0;
  for (double v : clean.response.values) m += v;
  m /= static_cast<double>(clean.response.size());
  for (double v : clean.response.values) ss += (v - m) * (v - m);
  CHECK(noisy.truth.noise_std == doctest::Approx(0.1 * std::sqrt(ss / static_cast<double>(clean.response.size()))));
}

TEST_CASE("invalid generator configs") {
  auto c = test::small_config();
  c.planted = {{{10.0, 10.0, 50.0}, 0}};
  c.formula = "identity";
  CHECK_THROWS_AS(generate_synthetic(c, 1), ConfigError);
  c = test::small_config();
  c.formula = "cubic";
  CHECK_THROWS(generate_synthetic(c, 1));
  c = test::small_config();
  c.years = {2004, 2003};
  CHECK_THROWS_AS(generate_synthetic(c, 1), ConfigError);
}

TEST_CASE("generator config json round trip") {
  auto c = test::small_config();
  c.planted = default_planted(c);
  nlohmann::json j = c;
  const auto back = j.get<SyntheticConfig>();
  CHECK(back.rows == c.rows);
  CHECK(back.years == c.years);
  CHECK(back.planted == c.planted);
  CHECK(back.formula == c.formula);
  CHECK_THROWS_AS(nlohmann::json::parse(R"({"rows":"x"})").get<SyntheticConfig>(), ConfigError);
}

TEST_CASE("full-size layout") {
  const auto c = paper_shape_config();
  CHECK(c.rows == 113);
  CHECK(c.cols == 113);
  CHECK(c.n_vars == 3);
  CHECK(c.n_days == 1935);
  CHECK(c.years.size() == 9);
}

}  // TEST_SUITE synthetic
