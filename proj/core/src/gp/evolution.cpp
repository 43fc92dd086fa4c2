#include "geoagg/gp/evolution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "geoagg/errors.hpp"

namespace geoagg::gp {
namespace {

using Clock = std::chrono::steady_clock;

std::vector<double> gather(std::span<const double> series, std::span<const DayIndex> days) {
  std::vector<double> out(days.size());
  for (std::size_t i = 0; i < days.size(); ++i) out[i] = series[days[i]];
  return out;
}

// Series rescaled to unit max-magnitude, then centered. Returns false when
// the series carries no variation at double precision.
bool center_scaled(std::span<const double> x, std::vector<double>& dev, double& scale, double& mean) {
  scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (!(scale > 0.0) || !std::isfinite(scale)) return false;
  mean = 0.0;
  for (double v : x) mean += v / scale;
  mean /= static_cast<double>(x.size());
  dev.resize(x.size());
  double spread = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dev[i] = x[i] / scale - mean;
    spread = std::max(spread, std::abs(dev[i]));
  }
  return spread > 1e-12;
}

// Cheap index stream for bootstrap rows, seeded from the run's generator.
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::size_t below(std::size_t n) {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<std::size_t>(z % n);
  }

 private:
  std::uint64_t state_;
};

struct Timer {
  explicit Timer(EvolutionLog* log) : log_(log), start_(Clock::now()) {}
  ~Timer() {
    if (log_) log_->evaluation_seconds += std::chrono::duration<double>(Clock::now() - start_).count();
  }
  EvolutionLog* log_;
  Clock::time_point start_;
};

}  // namespace

double f_cor(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw InvalidInput("f_cor: length mismatch");
  if (predicted.size() < 2) throw InvalidInput("f_cor: need at least two observations");
  std::vector<double> dp, da;
  double sp = 0.0, sa = 0.0, mp = 0.0, ma = 0.0;
  if (!center_scaled(predicted, dp, sp, mp) || !center_scaled(actual, da, sa, ma)) return 1.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < dp.size(); ++i) {
    sxy += dp[i] * da[i];
    sxx += dp[i] * dp[i];
    syy += da[i] * da[i];
  }
  const double r = sxy / std::sqrt(sxx * syy);
  if (!std::isfinite(r)) return 1.0;
  return 1.0 - std::min(1.0, std::abs(r));
}

bool dominates(const GpIndividual& a, const GpIndividual& b) noexcept {
  const std::size_t sa = a.size(), sb = b.size();
  if (a.age > b.age || a.error > b.error || sa > sb) return false;
  return a.age < b.age || a.error < b.error || sa < sb;
}

std::vector<std::vector<std::size_t>> pareto_layers(std::span<const GpIndividual> pop) {
  const std::size_t n = pop.size();
  std::vector<std::vector<std::size_t>> dominated_by_me(n);
  std::vector<std::size_t> dominator_count(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dominates(pop[i], pop[j])) {
        dominated_by_me[i].push_back(j);
        ++dominator_count[j];
      } else if (dominates(pop[j], pop[i])) {
        dominated_by_me[j].push_back(i);
        ++dominator_count[i];
      }
    }
  std::vector<std::vector<std::size_t>> layers;
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i)
    if (dominator_count[i] == 0) current.push_back(i);
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t i : current)
      for (std::size_t j : dominated_by_me[i])
        if (--dominator_count[j] == 0) next.push_back(j);
    std::sort(next.begin(), next.end());
    layers.push_back(std::move(current));
    current = std::move(next);
  }
  return layers;
}

std::vector<std::size_t> pareto_front(std::span<const GpIndividual> pop) {
  if (pop.empty()) return {};
  return pareto_layers(pop).front();
}

const char* gp_mode_name(GpMode mode) noexcept {
  switch (mode) {
    case GpMode::Standard: return "standard";
    case GpMode::Filtered: return "filtered";
    case GpMode::Gpesa: return "gpesa";
  }
  return "standard";
}

GpConfig paper_gp_config() { return GpConfig{}; }

PrimitiveFactory GpProblem::factory() const {
  if (mode == GpMode::Gpesa) {
    if (!engine) throw InvalidInput("GpProblem: GPESA mode needs an aggregation engine");
    return PrimitiveFactory::aggregates(*engine);
  }
  if (!features) throw InvalidInput("GpProblem: feature mode needs a feature matrix");
  return PrimitiveFactory::features(features->n_features);
}

double training_error(const Tree& tree, const GpProblem& problem) {
  const auto out = eval_tree(tree, problem.context(), problem.train_days);
  const auto actual = gather(problem.response, problem.train_days);
  return f_cor(out, actual);
}

std::vector<GpIndividual> init_population(std::size_t size, const GpProblem& problem, const GpConfig& config,
                                          Rng& rng) {
  const PrimitiveFactory factory = problem.factory();
  auto trees = ramped_half_and_half(size, config.init_min_height, config.init_max_height, factory, rng);
  std::vector<GpIndividual> pop;
  pop.reserve(size);
  for (auto& t : trees) {
    GpIndividual ind;
    ind.tree = std::move(t);
    ind.age = 1;
    ind.error = training_error(ind.tree, problem);
    pop.push_back(std::move(ind));
  }
  return pop;
}

TuneOutcome gpesa_greedy_tune(GpIndividual& individual, const GpProblem& problem, const GpConfig& config, Rng& rng) {
  TuneOutcome outcome;
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < individual.tree.size(); ++i)
    if (individual.tree[i].op == Op::Aggregate) positions.push_back(i);
  if (positions.empty() || config.tune_iterations == 0) return outcome;
  if (!problem.engine) throw InvalidInput("gpesa_greedy_tune: aggregation engine required");

  const PrimitiveFactory factory = PrimitiveFactory::aggregates(*problem.engine);
  const EvalContext ctx = problem.context();
  const auto actual = gather(problem.response, problem.train_days);
  const std::size_t n = problem.train_days.size();
  const std::size_t m = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(config.bootstrap_fraction * static_cast<double>(n))));
  const std::size_t B = std::max<std::size_t>(1, config.bootstrap_resamples);

  std::uniform_int_distribution<std::size_t> pick_pos(0, positions.size() - 1);
  std::vector<std::vector<std::size_t>> samples(B, std::vector<std::size_t>(m));
  std::vector<double> pred_b(m), act_b(m);

  // The tree is evaluated pointwise per day, so a bootstrap evaluation is a
  // gather of the full training output.
  auto bootstrap_error = [&](const std::vector<double>& output) {
    double total = 0.0;
    for (const auto& s : samples) {
      for (std::size_t k = 0; k < m; ++k) {
        pred_b[k] = output[s[k]];
        act_b[k] = actual[s[k]];
      }
      total += f_cor(pred_b, act_b);
    }
    return total / static_cast<double>(B);
  };

  std::vector<double> current_out = eval_tree(individual.tree, ctx, problem.train_days);
  std::vector<double> proposed_out(n);
  for (std::size_t it = 0; it < config.tune_iterations; ++it) {
    SplitMix rows(rng());
    for (auto& s : samples)
      for (auto& k : s) k = rows.below(n);
    const double current = bootstrap_error(current_out);

    const std::size_t pos = positions[pick_pos(rng)];
    std::shared_ptr<const AggTerminal> previous = individual.tree[pos].agg;
    CircleFeature def = previous->def;
    def.circle = mutate_circle(def.circle, rng, problem.engine->grid());
    individual.tree[pos].agg = factory.make_aggregate(def);

    eval_tree(individual.tree, ctx, problem.train_days, proposed_out);
    const double proposed = bootstrap_error(proposed_out);
    if (proposed < current) {
      ++outcome.accepted;
      outcome.accepted_deltas.push_back(proposed - current);
      std::swap(current_out, proposed_out);
    } else {
      individual.tree[pos].agg = std::move(previous);
    }
  }
  if (outcome.accepted > 0) individual.error = f_cor(current_out, actual);
  return outcome;
}

void afpo_step(std::vector<GpIndividual>& pop, const GpProblem& problem, const GpConfig& config, Rng& rng,
               GenerationRecord* record, EvolutionLog* log) {
  const std::size_t N = config.population;
  if (pop.size() != N) throw InvalidInput("afpo_step: population size differs from configuration");
  const PrimitiveFactory factory = problem.factory();

  for (auto& ind : pop) ++ind.age;

  std::uniform_int_distribution<std::size_t> uniform(0, N - 1);
  auto pick = [&](Rng& g) {
    std::size_t best = uniform(g);
    for (std::size_t k = 1; k < config.parent_tournament; ++k) {
      const std::size_t c = uniform(g);
      if (pop[c].error < pop[best].error) best = c;
    }
    return best;
  };
  std::bernoulli_distribution do_cross(config.p_crossover);
  std::bernoulli_distribution do_mutate(config.p_mutation);

  std::vector<GpIndividual> offspring;
  offspring.reserve(N + 1);
  {
    Timer timer(log);
    for (std::size_t k = 0; k < N; ++k) {
      const GpIndividual& a = pop[pick(rng)];
      GpIndividual child;
      if (do_cross(rng)) {
        const GpIndividual& b = pop[pick(rng)];
        child.tree = crossover(a.tree, b.tree, rng, config.limits);
        child.age = std::max(a.age, b.age);
      } else {
        child.tree = a.tree;
        child.age = a.age;
      }
      if (do_mutate(rng)) child.tree = subtree_mutate(child.tree, factory, rng, config.limits, config.mutation_max_height);
      child.error = training_error(child.tree, problem);
      offspring.push_back(std::move(child));
    }
    if (log) log->evaluations += N;
  }

  std::vector<double> deltas;
  if (problem.mode == GpMode::Gpesa && config.tune_probability > 0.0) {
    std::bernoulli_distribution trigger(config.tune_probability);
    // Each tuning iteration scores one proposal, so it counts as an evaluation.
    auto tune = [&](GpIndividual& ind) {
      Timer timer(log);
      auto out = gpesa_greedy_tune(ind, problem, config, rng);
      if (log) log->evaluations += config.tune_iterations;
      deltas.insert(deltas.end(), out.accepted_deltas.begin(), out.accepted_deltas.end());
    };
    if (config.tune_scope == TuneScope::PerPopulation) {
      if (trigger(rng)) {
        std::vector<std::size_t> eligible;
        for (std::size_t k = 0; k < offspring.size(); ++k)
          if (has_aggregates(offspring[k].tree)) eligible.push_back(k);
        if (!eligible.empty())
          tune(offspring[eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)]]);
      }
    } else {
      for (auto& child : offspring)
        if (has_aggregates(child.tree) && trigger(rng)) tune(child);
    }
  }

  {
    Timer timer(log);
    std::uniform_int_distribution<std::size_t> height(config.init_min_height, config.init_max_height);
    GpIndividual rookie;
    const std::size_t h = height(rng);
    rookie.tree = std::bernoulli_distribution(0.5)(rng) ? factory.full(h, rng) : factory.grow(h, rng);
    rookie.age = 1;
    rookie.error = training_error(rookie.tree, problem);
    offspring.push_back(std::move(rookie));
    if (log) log->evaluations += 1;
  }

  std::vector<GpIndividual> combined;
  combined.reserve(pop.size() + offspring.size());
  std::move(pop.begin(), pop.end(), std::back_inserter(combined));
  std::move(offspring.begin(), offspring.end(), std::back_inserter(combined));

  const auto layers = pareto_layers(combined);
  std::vector<std::size_t> chosen;
  chosen.reserve(N);
  for (std::size_t li = 0; li < layers.size() && chosen.size() < N; ++li) {
    const auto& layer = layers[li];
    if (chosen.size() + layer.size() <= N) {
      chosen.insert(chosen.end(), layer.begin(), layer.end());
      continue;
    }
    std::vector<std::size_t> rest = layer;
    if (config.elitist && li == 0) {
      // Keep both ends of the front: the lowest error, then the youngest
      // (the newcomer, since every other member is at least age 2).
      auto best = std::min_element(rest.begin(), rest.end(),
                                   [&](std::size_t x, std::size_t y) { return combined[x].error < combined[y].error; });
      chosen.push_back(*best);
      rest.erase(best);
      if (chosen.size() < N && !rest.empty()) {
        auto young = std::min_element(rest.begin(), rest.end(),
                                      [&](std::size_t x, std::size_t y) { return combined[x].age < combined[y].age; });
        chosen.push_back(*young);
        rest.erase(young);
      }
    }
    std::shuffle(rest.begin(), rest.end(), rng);
    rest.resize(N - chosen.size());
    chosen.insert(chosen.end(), rest.begin(), rest.end());
  }

  pop.clear();
  for (std::size_t idx : chosen) pop.push_back(std::move(combined[idx]));

  if (record) {
    record->population = pop.size();
    record->max_height = 0;
    record->max_size = 0;
    record->non_finite_errors = 0;
    record->best_error = std::numeric_limits<double>::infinity();
    for (const auto& ind : pop) {
      record->max_height = std::max(record->max_height, tree_height(ind.tree));
      record->max_size = std::max(record->max_size, ind.size());
      if (!std::isfinite(ind.error)) ++record->non_finite_errors;
      record->best_error = std::min(record->best_error, ind.error);
    }
    record->accepted_tune_deltas = std::move(deltas);
  }
}

std::vector<double> ScaledModel::predict(const EvalContext& ctx, std::span<const DayIndex> days) const {
  auto out = eval_tree(tree, ctx, days);
  for (double& v : out) v = a + b * v;
  return out;
}

ScaledModel ols_rescale(const Tree& tree, const GpProblem& problem) {
  ScaledModel m;
  m.tree = tree;
  const auto out = eval_tree(tree, problem.context(), problem.train_days);
  const auto actual = gather(problem.response, problem.train_days);
  double mean_y = 0.0;
  for (double v : actual) mean_y += v;
  mean_y /= static_cast<double>(actual.size());

  std::vector<double> dev;
  double scale = 0.0, mean_scaled = 0.0;
  if (!center_scaled(out, dev, scale, mean_scaled)) {
    m.a = mean_y;
    m.b = 0.0;
    return m;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < dev.size(); ++i) {
    sxy += dev[i] * (actual[i] - mean_y);
    sxx += dev[i] * dev[i];
  }
  const double slope_scaled = sxy / sxx;
  m.b = slope_scaled / scale;
  m.a = mean_y - slope_scaled * mean_scaled;
  if (!std::isfinite(m.a) || !std::isfinite(m.b)) {
    m.a = mean_y;
    m.b = 0.0;
  }
  return m;
}

Rng run_rng(std::uint64_t seed, std::uint64_t run) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(run), static_cast<std::uint32_t>(run >> 32), 0x6770u};
  return Rng(seq);
}

EvolutionResult run_evolution(const GpProblem& problem, const GpConfig& config, std::uint64_t seed,
                              bool keep_generation_log) {
  if (config.runs == 0 || config.population == 0) throw InvalidInput("run_evolution: runs and population must be >= 1");
  if (problem.train_days.size() < 2) throw InvalidInput("run_evolution: need at least two training days");

  EvolutionResult result;
  std::vector<GpIndividual> best_pop;
  bool have_best = false;
  for (std::size_t r = 0; r < config.runs; ++r) {
    Rng rng = run_rng(seed, r);
    std::vector<GpIndividual> pop;
    {
      Timer timer(&result.log);
      pop = init_population(config.population, problem, config, rng);
      result.log.evaluations += pop.size();
    }
    for (std::size_t g = 0; g < config.generations; ++g) {
      GenerationRecord rec;
      rec.run = r;
      rec.generation = g;
      afpo_step(pop, problem, config, rng, keep_generation_log ? &rec : nullptr, &result.log);
      if (keep_generation_log) result.log.generations.push_back(std::move(rec));
    }
    const auto it = std::min_element(pop.begin(), pop.end(),
                                     [](const GpIndividual& x, const GpIndividual& y) { return x.error < y.error; });
    if (!have_best || it->error < result.best.error) {
      result.best = *it;
      result.best_run = r;
      best_pop = pop;
      have_best = true;
    }
  }
  for (std::size_t idx : pareto_front(best_pop)) result.front.push_back(best_pop[idx]);
  result.model = ols_rescale(result.best.tree, problem);
  return result;
}

}  // namespace geoagg::gp
