#include "oed/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <string>
#include <thread>

#include "oed/error.hpp"

namespace oed {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double median_of_sorted(const std::vector<double>& s) {
  const std::size_t n = s.size();
  return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

}  // namespace

double evaluate_encoded(const ProblemSpec& problem, Criterion criterion,
                        std::span<const double> encoded) {
  thread_local InfoMatrix m;
  if (m.rows() != problem.p) m.resize(problem.p, problem.p);
  m.setZero();
  const std::size_t nf = problem.n_factors();
  const std::size_t b = nf + 1;
  for (std::size_t i = 0; i + b <= encoded.size(); i += b)
    accumulate_information(problem, encoded.subspan(i, nf), encoded[i + nf], m);
  return criterion_value(criterion, m);
}

OptimizationTask make_design_task(const ProblemSpec& problem, Criterion criterion,
                                  const RepairConfig& repair) {
  repair.validate();
  const Encoding enc = Encoding::for_problem(problem);
  OptimizationTask task;
  task.bounds = search_bounds(enc, problem.space);
  task.repair = [enc, space = problem.space, repair](std::span<double> x) {
    repair_in_place(x, enc, space, repair);
  };
  task.evaluate = [&problem, criterion](std::span<const double> x) {
    return evaluate_encoded(problem, criterion, x);
  };
  return task;
}

Design support_of(const Design& design) {
  Design out;
  for (std::size_t i = 0; i < design.size(); ++i) {
    if (design.weights[i] > 0.0) {
      out.points.push_back(design.points[i]);
      out.weights.push_back(design.weights[i]);
    }
  }
  return out;
}

SolveOutcome solve(const ProblemSpec& problem, Criterion criterion, const EngineConfig& engine,
                   const RepairConfig& repair) {
  const OptimizationTask task = make_design_task(problem, criterion, repair);
  SolveOutcome out;
  out.record = run(task, engine);
  out.criterion_value = out.record.best_value;
  out.design = support_of(decode(out.record.best_vector, Encoding::for_problem(problem)));
  return out;
}

long long default_max_fes(int problem_id) { return problem_id <= 7 ? 10000 : 500000; }

long long ExperimentPlan::fes_for(int problem_id) const {
  if (auto it = max_fes.find(problem_id); it != max_fes.end()) return it->second;
  if (fes_all) return *fes_all;
  return default_max_fes(problem_id);
}

void ExperimentPlan::validate() const {
  if (runs < 1) fail(ErrorKind::Config, "plan must request at least one run per cell");
  if (problem_ids.empty()) fail(ErrorKind::Config, "plan lists no problems");
  if (variants.empty()) fail(ErrorKind::Config, "plan lists no variants");
  for (int id : problem_ids) {
    const ProblemSpec& p = get_problem(id);
    for (Variant v : variants) {
      EngineConfig cfg = EngineConfig::defaults(v, fes_for(id), base_seed);
      cfg.validate();
    }
    RepairConfig r = RepairConfig::defaults_for(p.space);
    if (merge_eps) r.merge_eps = *merge_eps;
    if (min_weight) r.min_weight = *min_weight;
    r.validate();
  }
}

SummaryRow summarize(std::span<const double> finals, std::span<const double> times) {
  if (finals.empty()) fail(ErrorKind::Config, "cannot summarize zero runs");
  std::vector<double> s(finals.begin(), finals.end());
  std::sort(s.begin(), s.end());
  SummaryRow row;
  row.runs = static_cast<int>(s.size());
  row.best = s.front();
  row.worst = s.back();
  row.median = median_of_sorted(s);
  double sum = 0.0;
  for (double v : finals) sum += v;
  row.mean = sum / static_cast<double>(finals.size());
  if (finals.size() > 1) {
    double ss = 0.0;
    for (double v : finals) ss += (v - row.mean) * (v - row.mean);
    row.std = std::sqrt(ss / static_cast<double>(finals.size() - 1));
  }
  if (!times.empty()) {
    double t = 0.0;
    for (double v : times) t += v;
    row.mean_time = t / static_cast<double>(times.size());
  }
  return row;
}

std::vector<double> CellResult::finals() const {
  std::vector<double> f;
  f.reserve(runs.size());
  for (const auto& r : runs) f.push_back(r.best_value);
  return f;
}

std::uint64_t run_seed(std::uint64_t base_seed, int problem_id, Variant variant, int run_index) {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(problem_id));
  h = splitmix64(h ^ static_cast<std::uint64_t>(variant) * 0x100000001B3ULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(run_index));
  return base_seed ^ h;
}

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("OED_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentResults run_experiment(const ExperimentPlan& plan, const std::atomic<bool>* cancel) {
  plan.validate();

  struct Job {
    int problem;
    Variant variant;
    int run;
  };
  std::vector<Job> jobs;
  for (int id : plan.problem_ids)
    for (Variant v : plan.variants)
      for (int r = 0; r < plan.runs; ++r) jobs.push_back({id, v, r});

  std::vector<std::optional<RunRecord>> records(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      if (cancel && cancel->load()) continue;
      const Job& job = jobs[j];
      try {
        const ProblemSpec& problem = get_problem(job.problem);
        RepairConfig repair = RepairConfig::defaults_for(problem.space);
        if (plan.merge_eps) repair.merge_eps = *plan.merge_eps;
        if (plan.min_weight) repair.min_weight = *plan.min_weight;
        const EngineConfig cfg =
            EngineConfig::defaults(job.variant, plan.fes_for(job.problem),
                                   run_seed(plan.base_seed, job.problem, job.variant, job.run));
        const OptimizationTask task = make_design_task(problem, plan.criterion, repair);
        records[j] = run(task, cfg);
      } catch (const std::exception& e) {
        errors[j] = e.what();
      }
    }
  };

  const int n_threads =
      std::min<int>(resolve_thread_count(plan.threads), static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ExperimentResults results;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    CellResult& cell = results[{jobs[j].problem, jobs[j].variant}];
    if (records[j]) {
      cell.runs.push_back(std::move(*records[j]));
    } else {
      cell.partial = true;
      if (cell.error.empty())
        cell.error = errors[j].empty() ? "run cancelled before completion" : errors[j];
    }
  }
  for (auto& [key, cell] : results) {
    if (cell.runs.empty()) continue;
    std::vector<double> times;
    for (const auto& r : cell.runs) times.push_back(r.elapsed);
    const auto finals = cell.finals();
    cell.summary = summarize(finals, times);
  }
  return results;
}

const char* to_symbol(RankOutcome r) {
  switch (r) {
    case RankOutcome::Minus: return "-";
    case RankOutcome::Plus: return "+";
    case RankOutcome::Equal: return "=";
  }
  return "?";
}

namespace {

struct RankSum {
  double w_b = 0.0;       // rank sum of sample b
  double expected = 0.0;  // E[w_b] under H0
  double variance = 0.0;
};

RankSum rank_sum(std::span<const double> a, std::span<const double> b) {
  const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(n);
  for (double v : a) pooled.emplace_back(v, 0);
  for (double v : b) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });

  RankSum r;
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k)
      if (pooled[k].second == 1) r.w_b += midrank;
    i = j;
  }
  const double dn = static_cast<double>(n);
  r.expected = static_cast<double>(n2) * (dn + 1.0) / 2.0;
  r.variance = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
               ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  return r;
}

}  // namespace

double rank_sum_p_value(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) fail(ErrorKind::Config, "rank-sum test needs two nonempty samples");
  const RankSum r = rank_sum(a, b);
  if (!(r.variance > 0.0)) return 1.0;
  const double z = std::max(0.0, std::abs(r.w_b - r.expected) - 0.5) / std::sqrt(r.variance);
  return std::erfc(z / std::sqrt(2.0));
}

RankOutcome wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b, double alpha) {
  const double p = rank_sum_p_value(a, b);
  if (!(p < alpha)) return RankOutcome::Equal;
  const RankSum r = rank_sum(a, b);
  return r.w_b < r.expected ? RankOutcome::Minus : RankOutcome::Plus;
}

ComparisonCell aggregate_comparison(const ExperimentResults& results, Variant target,
                                    Variant other, double alpha) {
  std::set<int> problems;
  for (const auto& [key, cell] : results) problems.insert(key.first);
  ComparisonCell out;
  for (int id : problems) {
    const auto t = results.find({id, target});
    const auto o = results.find({id, other});
    if (t == results.end() || o == results.end())
      fail(ErrorKind::Structural, "comparison cell missing for problem " + std::to_string(id));
    const auto tf = t->second.finals();
    const auto of = o->second.finals();
    if (tf.empty() || of.empty())
      fail(ErrorKind::Structural, "comparison cell has no runs for problem " + std::to_string(id));
    switch (wilcoxon_rank_sum(of, tf, alpha)) {
      case RankOutcome::Minus: ++out.losses; break;
      case RankOutcome::Plus: ++out.wins; break;
      case RankOutcome::Equal: ++out.ties; break;
    }
  }
  return out;
}

}  // namespace oed
