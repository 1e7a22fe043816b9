#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oed/repair.hpp"

namespace oed {

enum class Variant { DeRand1, DeRand2, DeBest1, DeBest2, Jade, Code, Shade, Lshade };

const char* to_string(Variant v);
/// Case-insensitive; accepts "de-rand1", "rand1", "jade", "lshade", ...
/// Throws ErrorKind::NotFound for unknown names.
Variant parse_variant(std::string_view name);
std::vector<Variant> all_variants();

using Rng = std::mt19937_64;

struct VariantParams {
  double p_best_frac = 0.05;  // JADE 0.05, SHADE 0.1, LSHADE 0.11
  double c = 0.1;             // JADE learning rate
  int history_size = 50;      // SHADE: NP, LSHADE: 6
  int np_min = 4;             // LSHADE final population size
  double archive_rate = 1.0;  // archive capacity = round(rate * NP)
  bool code_third_bin = false;
};

struct EngineConfig {
  Variant variant = Variant::Lshade;
  int np_init = 50;
  long long max_fes = 10000;
  double f = 0.5;   // classic variants only
  double cr = 0.9;  // classic variants only
  std::uint64_t seed = 1;
  VariantParams params;

  /// Variant-specific defaults for `params`.
  static EngineConfig defaults(Variant v, long long max_fes, std::uint64_t seed);
  /// Throws ErrorKind::Config on invalid settings.
  void validate() const;
};

/// Adaptive state carried across generations.
struct ParamMemory {
  double mu_f = 0.5;
  double mu_cr = 0.5;
  std::vector<double> m_f;
  std::vector<std::optional<double>> m_cr;  // nullopt = terminal marker
  std::size_t k = 0;                        // next slot, 0-based
  std::vector<std::vector<double>> archive;
};

struct RunRecord {
  std::vector<double> best_vector;
  double best_value = 0.0;
  std::vector<std::pair<long long, double>> history;  // (fes, best so far)
  std::uint64_t seed = 0;
  double elapsed = 0.0;  // seconds
  long long fes = 0;
};

/// What an engine optimizes. `repair` (optional) is applied to every vector
/// before it is evaluated, and the repaired vector is what the population
/// keeps. `evaluate` must be total: singular designs map to penalties.
struct OptimizationTask {
  SearchBounds bounds;
  std::function<void(std::span<double>)> repair;
  std::function<double(std::span<const double>)> evaluate;
};

/// Hooks for tests and tracing; all optional.
struct RunObserver {
  std::function<void(std::span<const double>)> on_evaluate;
  std::function<void(long long fes, const ParamMemory&, std::size_t np)> on_generation;
};

// ---- building blocks -------------------------------------------------------

std::vector<std::vector<double>> initialize_population(const SearchBounds& bounds, int np,
                                                       Rng& rng);

enum class Strategy { Rand1, Rand2, Best1, Best2, CurrentToPBest1, CurrentToRand1 };

/// Number of distinct population members the strategy draws besides the
/// target.
int strategy_arity(Strategy s);
/// Throws ErrorKind::Config if a population of `np` is too small for `s`.
void require_population(Strategy s, std::size_t np);

/// Operands for mutate(). `r` holds the randomly drawn vectors in order
/// (r1, r2, ...); for CurrentToPBest1 r[1] may come from the archive.
struct MutationOperands {
  std::span<const double> target;
  std::span<const double> best;  // x_best or x_pbest
  std::vector<std::span<const double>> r;
};

/// Donor vector for strategy `s`. `k` is the combination coefficient used by
/// CurrentToRand1 only.
std::vector<double> mutate(Strategy s, const MutationOperands& ops, double f, double k = 0.0);

/// Binomial crossover; the donor gene at j_rand is always taken.
std::vector<double> crossover_binomial(std::span<const double> target,
                                       std::span<const double> donor, double cr, Rng& rng);

/// Greedy one-to-one selection; ties go to the trial.
inline bool select(double target_value, double trial_value) {
  return trial_value <= target_value;
}

/// sum w v^2 / sum w v. Throws ErrorKind::Config on empty input or
/// mismatched lengths.
double lehmer_mean(std::span<const double> values, std::span<const double> weights);

/// Linear population size schedule, clamped to [np_min, np_init].
int lshade_population_size(long long fes, const EngineConfig& cfg);

/// Runs the configured variant until the evaluation budget is spent.
RunRecord run(const OptimizationTask& task, const EngineConfig& cfg,
              const RunObserver* observer = nullptr);

}  // namespace oed
