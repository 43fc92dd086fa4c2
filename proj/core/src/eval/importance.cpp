#include "geoagg/eval/importance.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <tuple>

#include "geoagg/errors.hpp"

namespace geoagg {
namespace {

struct Accumulator {
  std::vector<ImportanceMap> maps;
  std::vector<std::vector<std::size_t>> counts;

  Accumulator(const GeoGrid& grid, std::size_t n_vars) : maps(n_vars), counts(n_vars) {
    for (std::size_t v = 0; v < n_vars; ++v) {
      maps[v].rows = grid.rows();
      maps[v].cols = grid.cols();
      maps[v].var = v;
      maps[v].value.assign(grid.cells(), 0.0);
      maps[v].used.assign(grid.cells(), 0);
      counts[v].assign(grid.cells(), 0);
    }
  }
  void add(std::size_t var, const MembershipMask& mask, double score) {
    if (var >= maps.size()) throw InvalidInput("importance: variable index out of range");
    for (auto c : mask.cells) {
      maps[var].value[c] += score;
      ++counts[var][c];
    }
  }
  std::vector<ImportanceMap> finish() {
    for (std::size_t v = 0; v < maps.size(); ++v)
      for (std::size_t c = 0; c < counts[v].size(); ++c)
        if (counts[v][c] > 0) {
          maps[v].value[c] /= static_cast<double>(counts[v][c]);
          maps[v].used[c] = 1;
        }
    return std::move(maps);
  }
};

// Circles repeat across models and folds; memoize their masks.
class MaskCache {
 public:
  explicit MaskCache(const GeoGrid& grid) : grid_(grid) {}
  const MembershipMask& get(const Circle& c) {
    const std::tuple<double, double, double> key{c.lat, c.lon, c.radius_km};
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, circle_members(c, grid_)).first;
    return it->second;
  }

 private:
  const GeoGrid& grid_;
  std::map<std::tuple<double, double, double>, MembershipMask> cache_;
};

}  // namespace

std::vector<ImportanceMap> importance_linear(std::span<const LinearModel> models,
                                             std::span<const std::vector<CircleFeature>> features,
                                             const GeoGrid& grid, std::size_t n_vars) {
  if (models.size() != features.size()) throw InvalidInput("importance_linear: models and feature lists differ in count");
  Accumulator acc(grid, n_vars);
  MaskCache masks(grid);
  for (std::size_t m = 0; m < models.size(); ++m) {
    if (static_cast<std::size_t>(models[m].coefficients.size()) != features[m].size())
      throw InvalidInput("importance_linear: coefficient count differs from feature count");
    for (std::size_t j = 0; j < features[m].size(); ++j)
      acc.add(features[m][j].var, masks.get(features[m][j].circle),
              std::abs(models[m].coefficients(static_cast<Eigen::Index>(j))));
  }
  return acc.finish();
}

std::vector<ImportanceMap> importance_gp(std::span<const gp::GpIndividual> front,
                                         std::span<const CircleFeature> feature_defs, const GeoGrid& grid,
                                         std::size_t n_vars) {
  Accumulator acc(grid, n_vars);
  MaskCache masks(grid);
  for (const auto& ind : front) {
    std::vector<std::vector<std::uint8_t>> covered(n_vars, std::vector<std::uint8_t>(grid.cells(), 0));
    for (const auto& node : ind.tree) {
      const CircleFeature* def = nullptr;
      if (node.op == gp::Op::Aggregate) {
        def = &node.agg->def;
      } else if (node.op == gp::Op::Feature) {
        if (node.feature >= feature_defs.size()) throw InvalidInput("importance_gp: feature index out of range");
        def = &feature_defs[node.feature];
      }
      if (!def) continue;
      if (def->var >= n_vars) throw InvalidInput("importance_gp: variable index out of range");
      for (auto c : masks.get(def->circle).cells) covered[def->var][c] = 1;
    }
    for (std::size_t v = 0; v < n_vars; ++v) {
      MembershipMask union_mask;
      for (std::size_t c = 0; c < grid.cells(); ++c)
        if (covered[v][c]) union_mask.cells.push_back(static_cast<std::uint32_t>(c));
      acc.add(v, union_mask, 1.0 - ind.error);
    }
  }
  return acc.finish();
}

void save_heatmap_csv(const ImportanceMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  char buf[64];
  for (std::size_t r = 0; r < map.rows; ++r) {
    for (std::size_t c = 0; c < map.cols; ++c) {
      if (c) out << ',';
      const std::size_t cell = r * map.cols + c;
      if (!map.is_used(cell)) {
        out << "NA";
      } else {
        auto res = std::to_chars(buf, buf + sizeof buf, map.value[cell]);
        out.write(buf, res.ptr - buf);
      }
    }
    out << '\n';
  }
  if (!out) throw InvalidInput("write failed: " + path.string());
}

}  // namespace geoagg
