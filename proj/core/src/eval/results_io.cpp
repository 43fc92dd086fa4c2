#include "geoagg/eval/results_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "geoagg/errors.hpp"
#include "geoagg/eval/stats.hpp"
#include "geoagg/spatial.hpp"

namespace geoagg {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw InvalidInput("write failed: " + path.string());
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <typename T>
T parse_num(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  T v{};
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw FormatError(path.string() + ":" + std::to_string(line) + ": bad number `" + s + "`");
  return v;
}

// Reads a CSV with the exact header; yields split rows with line numbers.
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_table(const std::filesystem::path& path,
                                                                         const std::string& header) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw FormatError(path.string() + ": expected header `" + header + "`");
  const std::size_t width = split(header).size();
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::size_t no = 1;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    auto f = split(line);
    if (f.size() != width) throw FormatError(path.string() + ":" + std::to_string(no) + ": wrong field count");
    rows.emplace_back(no, std::move(f));
  }
  return rows;
}

std::string r_field(const CellResult& c) { return family_needs_R(c.family) ? std::to_string(c.R) : "NA"; }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_results_csv(std::span<const CellResult> cells, const std::filesystem::path& path, bool record_timing) {
  auto out = open_out(path);
  out << "method,R,fold_year,seed,train_err,test_mae,seconds\n";
  for (const auto& c : cells) {
    if (!c.ok) continue;
    out << c.method << ',' << r_field(c) << ',' << c.fold_year << ',' << c.seed << ',' << format_double(c.train_err)
        << ',' << format_double(c.test_mae) << ',' << (record_timing ? format_double(c.seconds) : "NA") << '\n';
  }
  close_out(out, path);
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  std::vector<ResultRow> rows;
  for (const auto& [no, f] : read_table(path, "method,R,fold_year,seed,train_err,test_mae,seconds")) {
    ResultRow r;
    r.method = f[0];
    if (f[1] != "NA") r.R = parse_num<std::size_t>(f[1], path, no);
    r.fold_year = parse_num<Year>(f[2], path, no);
    r.seed = parse_num<std::uint64_t>(f[3], path, no);
    r.train_err = parse_num<double>(f[4], path, no);
    r.test_mae = parse_num<double>(f[5], path, no);
    if (f[6] != "NA") r.seconds = parse_num<double>(f[6], path, no);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_predictions_csv(std::span<const CellResult> cells, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "method,R,fold_year,seed,day,actual,predicted\n";
  for (const auto& c : cells) {
    if (!c.ok) continue;
    const std::string prefix = c.method + ',' + r_field(c) + ',' + std::to_string(c.fold_year) + ',' +
                               std::to_string(c.seed) + ',';
    for (std::size_t i = 0; i < c.test_days.size(); ++i)
      out << prefix << c.test_days[i] << ',' << format_double(c.actual[i]) << ',' << format_double(c.predicted[i])
          << '\n';
  }
  close_out(out, path);
}

std::vector<PredictionRow> read_predictions_csv(const std::filesystem::path& path) {
  std::vector<PredictionRow> rows;
  for (const auto& [no, f] : read_table(path, "method,R,fold_year,seed,day,actual,predicted")) {
    PredictionRow r;
    r.method = f[0];
    r.fold_year = parse_num<Year>(f[2], path, no);
    r.seed = parse_num<std::uint64_t>(f[3], path, no);
    r.day = parse_num<DayIndex>(f[4], path, no);
    r.actual = parse_num<double>(f[5], path, no);
    r.predicted = parse_num<double>(f[6], path, no);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_timings_csv(std::span<const CellResult> cells, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "method,R,fold_year,seed,seconds,gp_evaluations,gp_evaluation_seconds\n";
  for (const auto& c : cells)
    out << c.method << ',' << r_field(c) << ',' << c.fold_year << ',' << c.seed << ',' << format_double(c.seconds)
        << ',' << c.gp_evaluations << ',' << format_double(c.gp_evaluation_seconds) << '\n';
  close_out(out, path);
}

std::string artifact_stem(const std::string& method, Year year, std::uint64_t seed) {
  return method + "_" + std::to_string(year) + "_" + std::to_string(seed);
}

void write_cell_artifacts(const CellResult& cell, const std::filesystem::path& dir, std::uint64_t config_hash) {
  if (!cell.ok) return;
  const std::string stem = artifact_stem(cell.method, cell.fold_year, cell.seed);
  if (!cell.circles.empty()) save_circles(cell.circles, dir / (stem + ".circles.csv"));
  if (cell.linear) save_linear_model(*cell.linear, dir / (stem + ".model.csv"));
  if (cell.gp_model) {
    {
      auto out = open_out(dir / (stem + ".expr"));
      out << gp::to_sexpr(cell.gp_model->tree) << '\n';
      close_out(out, dir / (stem + ".expr"));
    }
    nlohmann::json side;
    side["a"] = cell.gp_model->a;
    side["b"] = cell.gp_model->b;
    side["seed"] = cell.seed;
    side["fold_year"] = cell.fold_year;
    side["train_error"] = cell.train_err;
    side["config_hash"] = config_hash;
    auto out = open_out(dir / (stem + ".expr.json"));
    out << side.dump(2) << '\n';
    close_out(out, dir / (stem + ".expr.json"));
  }
  if (!cell.front.empty()) save_front_csv(cell.front, dir / (stem + ".front.csv"));
}

void save_front_csv(std::span<const gp::GpIndividual> front, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "error,age,size,expr\n";
  for (const auto& ind : front)
    out << format_double(ind.error) << ',' << ind.age << ',' << ind.size() << ",\"" << gp::to_sexpr(ind.tree)
        << "\"\n";
  close_out(out, path);
}

std::vector<gp::GpIndividual> load_front_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "error,age,size,expr")
    throw FormatError(path.string() + ": expected front header");
  std::vector<gp::GpIndividual> out;
  std::size_t no = 1;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    const auto q = line.find(",\"");
    if (q == std::string::npos || line.back() != '"') throw FormatError(path.string() + ":" + std::to_string(no) + ": bad row");
    const auto f = split(line.substr(0, q));
    if (f.size() != 3) throw FormatError(path.string() + ":" + std::to_string(no) + ": bad row");
    gp::GpIndividual ind;
    ind.error = parse_num<double>(f[0], path, no);
    ind.age = parse_num<std::uint32_t>(f[1], path, no);
    ind.tree = gp::parse_sexpr(line.substr(q + 2, line.size() - q - 3));
    if (ind.size() != parse_num<std::size_t>(f[2], path, no))
      throw FormatError(path.string() + ":" + std::to_string(no) + ": size column disagrees with expression");
    out.push_back(std::move(ind));
  }
  return out;
}

std::vector<YearComparison> compare_methods(std::span<const PredictionRow> predictions, const std::string& a,
                                            const std::string& b, double alpha) {
  // method -> year -> day -> (actual, per-seed |error|)
  std::map<std::string, std::map<Year, std::map<DayIndex, std::vector<double>>>> errs;
  std::set<Year> years;
  for (const auto& r : predictions) {
    years.insert(r.fold_year);
    if (r.method == a || r.method == b) errs[r.method][r.fold_year][r.day].push_back(std::abs(r.predicted - r.actual));
  }
  std::vector<std::string> missing;
  for (Year y : years)
    for (const auto& m : {a, b})
      if (!errs[m].count(y)) missing.push_back("(" + m + ", " + std::to_string(y) + ")");
  if (years.empty()) missing.push_back("(" + a + ", any year)");
  if (!missing.empty()) {
    std::string msg = "missing result cells:";
    for (const auto& s : missing) msg += " " + s;
    throw InvalidInput(msg);
  }

  std::vector<YearComparison> out;
  std::vector<double> raw;
  for (Year y : years) {
    const auto& da = errs[a][y];
    const auto& db = errs[b][y];
    std::vector<double> ea, eb;
    for (const auto& [day, v] : da) {
      auto it = db.find(day);
      if (it == db.end())
        throw InvalidInput("day " + std::to_string(day) + " of " + std::to_string(y) + " missing for " + b);
      ea.push_back(median(v));
      eb.push_back(median(it->second));
    }
    if (db.size() != da.size()) throw InvalidInput("test days of " + std::to_string(y) + " differ between methods");
    YearComparison row;
    row.year = y;
    row.n_days = ea.size();
    try {
      row.p_raw = wilcoxon_signed_rank(ea, eb).p_value;
    } catch (const InvalidInput&) {
      row.p_raw = 1.0;  // identical errors carry no evidence either way
    }
    raw.push_back(row.p_raw);
    row.winner = median(ea) < median(eb) ? a : b;
    out.push_back(std::move(row));
  }
  const auto adj = bonferroni(raw, raw.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].p_bonferroni = adj[i];
    if (!(adj[i] < alpha)) out[i].winner = "none";
  }
  return out;
}

void write_stats_csv(std::span<const YearComparison> rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "year,p_raw,p_bonferroni,winner\n";
  for (const auto& r : rows)
    out << r.year << ',' << format_double(r.p_raw) << ',' << format_double(r.p_bonferroni) << ',' << r.winner << '\n';
  close_out(out, path);
}

std::vector<SummaryRow> summarize_results(std::span<const ResultRow> rows) {
  std::map<std::pair<std::string, Year>, std::vector<double>> groups;
  for (const auto& r : rows) groups[{r.method, r.fold_year}].push_back(r.test_mae);
  std::vector<SummaryRow> out;
  for (const auto& [key, v] : groups) out.push_back({key.first, key.second, median(v), v.size()});
  return out;
}

std::vector<BestRow> best_by_year(std::span<const ResultRow> rows) {
  std::map<std::pair<std::string, Year>, BestRow> best;
  for (const auto& s : summarize_results(rows)) {
    const MethodSpec spec = parse_method_label(s.method);
    if (!family_needs_R(spec.family)) continue;
    const std::string fam = family_name(spec.family);
    auto it = best.find({fam, s.fold_year});
    if (it == best.end() || s.median_test_mae < it->second.median_test_mae)
      best[{fam, s.fold_year}] = {fam, s.fold_year, s.method, s.median_test_mae};
  }
  std::vector<BestRow> out;
  for (auto& [key, row] : best) out.push_back(std::move(row));
  return out;
}

void write_summary_csv(std::span<const SummaryRow> rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "method,fold_year,median_test_mae,seeds\n";
  for (const auto& r : rows) out << r.method << ',' << r.fold_year << ',' << format_double(r.median_test_mae) << ',' << r.seeds << '\n';
  close_out(out, path);
}

void write_best_by_year_csv(std::span<const BestRow> rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "family,fold_year,best_method,median_test_mae,selection\n";
  for (const auto& r : rows)
    out << r.family << ',' << r.fold_year << ',' << r.method << ',' << format_double(r.median_test_mae)
        << ",optimistic_test_min\n";
  close_out(out, path);
}

}  // namespace geoagg
