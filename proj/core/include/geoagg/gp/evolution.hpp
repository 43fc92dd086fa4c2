#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geoagg/aggregation.hpp"
#include "geoagg/gp/operators.hpp"
#include "geoagg/gp/tree.hpp"

namespace geoagg::gp {

// 1 - |pearson(pred, actual)|; 1 when either series is constant.
double f_cor(std::span<const double> predicted, std::span<const double> actual);

struct GpIndividual {
  Tree tree;
  std::uint32_t age = 1;
  double error = 1.0;  // training f_COR

  std::size_t size() const noexcept { return tree.size(); }
};

// True when `a` is no worse than `b` on (age, error, size) and strictly
// better on at least one.
bool dominates(const GpIndividual& a, const GpIndividual& b) noexcept;

// Non-dominated layers (indices into `pop`), layer 0 first.
std::vector<std::vector<std::size_t>> pareto_layers(std::span<const GpIndividual> pop);
std::vector<std::size_t> pareto_front(std::span<const GpIndividual> pop);

enum class GpMode { Standard, Filtered, Gpesa };
const char* gp_mode_name(GpMode mode) noexcept;

enum class TuneScope { PerPopulation, PerIndividual };

struct GpConfig {
  std::size_t population = 1000;
  std::size_t generations = 1000;
  std::size_t runs = 30;
  double p_crossover = 0.75;
  double p_mutation = 0.01;
  std::size_t init_min_height = 2;
  std::size_t init_max_height = 6;
  std::size_t mutation_max_height = 4;
  TreeLimits limits{};
  bool elitist = true;  // the lowest-error individual always survives truncation
  std::size_t parent_tournament = 1;  // 1: uniform parent choice; k: lowest error of k uniform draws

  // Embedded aggregation tuning.
  double tune_probability = 0.2;
  TuneScope tune_scope = TuneScope::PerPopulation;
  std::size_t tune_iterations = 25;
  std::size_t bootstrap_resamples = 5;
  double bootstrap_fraction = 1.0;  // resample size as a fraction of training days
};

GpConfig paper_gp_config();

// Read-only view of one fold for evolution: feature terminals read
// `features` (standard/filtered modes), aggregate terminals are created by
// `engine` (GPESA mode). `response` is indexed by day.
struct GpProblem {
  GpMode mode = GpMode::Standard;
  const FeatureMatrix* features = nullptr;
  const AggregationEngine* engine = nullptr;
  std::span<const DayIndex> train_days;
  std::span<const double> response;

  EvalContext context() const noexcept { return {features}; }
  PrimitiveFactory factory() const;
};

double training_error(const Tree& tree, const GpProblem& problem);

struct GenerationRecord {
  std::size_t run = 0;
  std::size_t generation = 0;
  std::size_t population = 0;
  std::size_t max_height = 0;
  std::size_t max_size = 0;
  std::size_t non_finite_errors = 0;
  double best_error = 1.0;
  std::vector<double> accepted_tune_deltas;
};

struct EvolutionLog {
  std::vector<GenerationRecord> generations;
  std::size_t evaluations = 0;
  double evaluation_seconds = 0.0;
};

std::vector<GpIndividual> init_population(std::size_t size, const GpProblem& problem, const GpConfig& config,
                                          Rng& rng);

struct TuneOutcome {
  std::size_t accepted = 0;
  std::vector<double> accepted_deltas;  // proposed minus current bootstrap f_COR
};

// Greedy circle tuning: each iteration mutates one uniformly chosen
// aggregate terminal and keeps the change only if mean f_COR over fresh
// bootstrap resamples strictly drops. The tree structure is untouched.
// A tree without aggregate terminals is returned unchanged.
TuneOutcome gpesa_greedy_tune(GpIndividual& individual, const GpProblem& problem, const GpConfig& config, Rng& rng);

// One generation: ages advance, the population breeds one offspring per
// member (crossover then mutation), aggregate offspring may be tuned, one
// age-1 newcomer joins, and non-dominated layers are peeled back to size.
void afpo_step(std::vector<GpIndividual>& pop, const GpProblem& problem, const GpConfig& config, Rng& rng,
               GenerationRecord* record = nullptr, EvolutionLog* log = nullptr);

struct ScaledModel {
  Tree tree;
  double a = 0.0;  // intercept
  double b = 0.0;  // slope

  std::vector<double> predict(const EvalContext& ctx, std::span<const DayIndex> days) const;
};

// OLS of the response on the tree output over training days.
ScaledModel ols_rescale(const Tree& tree, const GpProblem& problem);

struct EvolutionResult {
  ScaledModel model;
  GpIndividual best;
  std::size_t best_run = 0;
  std::vector<GpIndividual> front;  // non-dominated set of the best run's final population
  EvolutionLog log;
};

// `runs` independent evolutions; the lowest training f_COR individual across
// all final populations is rescaled and returned. Deterministic in seed.
EvolutionResult run_evolution(const GpProblem& problem, const GpConfig& config, std::uint64_t seed,
                              bool keep_generation_log = false);

// Stream for run `run` of an evolution seeded with `seed`.
Rng run_rng(std::uint64_t seed, std::uint64_t run);

}  // namespace geoagg::gp
