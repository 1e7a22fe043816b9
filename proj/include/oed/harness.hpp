#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oed/criteria.hpp"
#include "oed/engines.hpp"
#include "oed/models.hpp"
#include "oed/repair.hpp"

namespace oed {

/// Objective over encoded designs: repair, decode, information matrix,
/// criterion (penalized when singular).
OptimizationTask make_design_task(const ProblemSpec& problem, Criterion criterion,
                                  const RepairConfig& repair);

/// Objective value of an already-feasible encoded design.
double evaluate_encoded(const ProblemSpec& problem, Criterion criterion,
                        std::span<const double> encoded);

/// Drops zero-weight rows.
Design support_of(const Design& design);

struct SolveOutcome {
  Design design;  // positive-weight rows of the best repaired vector
  double criterion_value = 0.0;
  RunRecord record;
};

SolveOutcome solve(const ProblemSpec& problem, Criterion criterion, const EngineConfig& engine,
                   const RepairConfig& repair);

// ---- multi-run experiments ------------------------------------------------

/// 10000 for problems 1-7, 500000 for 8-12.
long long default_max_fes(int problem_id);

struct ExperimentPlan {
  std::vector<int> problem_ids;
  Criterion criterion = Criterion::D;
  std::vector<Variant> variants;
  int runs = 25;
  std::map<int, long long> max_fes;  // per-problem overrides
  std::optional<long long> fes_all;  // applies to every problem without an override
  std::uint64_t base_seed = 1;
  std::optional<double> merge_eps;
  std::optional<double> min_weight;
  int threads = 0;  // 0: OED_THREADS or hardware concurrency

  long long fes_for(int problem_id) const;
  /// Throws ErrorKind::Config / NotFound.
  void validate() const;
};

struct SummaryRow {
  double best = 0.0;
  double median = 0.0;
  double worst = 0.0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
  double mean_time = 0.0;
  int runs = 0;
};

/// Summary of per-run final values; throws ErrorKind::Config if empty.
SummaryRow summarize(std::span<const double> finals, std::span<const double> times);

struct CellResult {
  SummaryRow summary;
  std::vector<RunRecord> runs;
  bool partial = false;
  std::string error;

  std::vector<double> finals() const;
};

using CellKey = std::pair<int, Variant>;
using ExperimentResults = std::map<CellKey, CellResult>;

/// Seed of one run; independent of which other cells are in the plan.
std::uint64_t run_seed(std::uint64_t base_seed, int problem_id, Variant variant, int run_index);

/// Worker count: `requested` if positive, else OED_THREADS, else hardware.
int resolve_thread_count(int requested);

/// Runs every (problem, variant) cell `plan.runs` times over a worker pool.
/// Runs skipped because `cancel` was raised, or that threw, leave their
/// cell marked partial.
ExperimentResults run_experiment(const ExperimentPlan& plan,
                                 const std::atomic<bool>* cancel = nullptr);

// ---- statistics -------------------------------------------------------------

enum class RankOutcome { Minus, Plus, Equal };

const char* to_symbol(RankOutcome r);

/// Two-sided rank-sum p-value: midranks, tie-corrected variance, normal
/// approximation with continuity correction. 1 when all values tie.
double rank_sum_p_value(std::span<const double> a, std::span<const double> b);

/// Minus: b significantly lower than a (b better when minimizing); Plus:
/// significantly higher; Equal otherwise.
RankOutcome wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                              double alpha = 0.05);

struct ComparisonCell {
  int losses = 0;  // other significantly worse than target
  int wins = 0;    // other significantly better than target
  int ties = 0;
};

/// Aggregates per-problem rank tests of `other` against `target`. Throws
/// ErrorKind::Structural if a cell is missing.
ComparisonCell aggregate_comparison(const ExperimentResults& results, Variant target,
                                    Variant other, double alpha = 0.05);

}  // namespace oed
