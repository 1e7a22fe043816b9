#include "oed/engines.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "oed/error.hpp"

namespace oed {
namespace {

using Population = std::vector<std::vector<double>>;

std::size_t uniform_index(std::size_t n, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Index in [0, n) not contained in `taken`.
std::size_t draw_excluding(std::size_t n, std::initializer_list<std::size_t> taken, Rng& rng) {
  for (;;) {
    const std::size_t r = uniform_index(n, rng);
    if (std::find(taken.begin(), taken.end(), r) == taken.end()) return r;
  }
}

// `count` mutually distinct indices in [0, n), all different from `target`.
std::vector<std::size_t> draw_distinct(std::size_t n, std::size_t target, int count, Rng& rng) {
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    const std::size_t r = uniform_index(n, rng);
    if (r == target || std::find(out.begin(), out.end(), r) != out.end()) continue;
    out.push_back(r);
  }
  return out;
}

// F ~ Cauchy(location, 0.1), redrawn while <= 0, truncated to 1.
double sample_f(double location, Rng& rng) {
  std::cauchy_distribution<double> dist(location, 0.1);
  double f;
  do {
    f = dist(rng);
  } while (!(f > 0.0));
  return std::min(f, 1.0);
}

// CR ~ N(mean, 0.1) clipped to [0, 1].
double sample_cr(double mean, Rng& rng) {
  std::normal_distribution<double> dist(mean, 0.1);
  return std::clamp(dist(rng), 0.0, 1.0);
}

void trim_archive(Population& archive, std::size_t capacity, Rng& rng) {
  while (archive.size() > capacity) {
    const std::size_t victim = uniform_index(archive.size(), rng);
    archive[victim] = std::move(archive.back());
    archive.pop_back();
  }
}

std::size_t archive_capacity(const EngineConfig& cfg, std::size_t np) {
  return static_cast<std::size_t>(std::lround(cfg.params.archive_rate * static_cast<double>(np)));
}

std::string normalized_name(std::string_view name) {
  std::string s;
  for (char ch : name) {
    if (ch == '-' || ch == '_' || ch == '/' || ch == ' ') continue;
    s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return s;
}

class Engine {
 public:
  Engine(const OptimizationTask& task, const EngineConfig& cfg, const RunObserver* observer)
      : task_(task), cfg_(cfg), rng_(cfg.seed), observer_(observer) {
    record_.seed = cfg.seed;
    record_.best_value = std::numeric_limits<double>::infinity();
  }

  RunRecord run() {
    const auto start = std::chrono::steady_clock::now();
    pop_ = initialize_population(task_.bounds, cfg_.np_init, rng_);
    fit_.resize(pop_.size());
    for (std::size_t i = 0; i < pop_.size(); ++i) fit_[i] = evaluate(pop_[i]);
    checkpoint();

    switch (cfg_.variant) {
      case Variant::DeRand1: classic(Strategy::Rand1); break;
      case Variant::DeRand2: classic(Strategy::Rand2); break;
      case Variant::DeBest1: classic(Strategy::Best1); break;
      case Variant::DeBest2: classic(Strategy::Best2); break;
      case Variant::Code: composite(); break;
      case Variant::Jade:
      case Variant::Shade:
      case Variant::Lshade: success_history(); break;
    }
    record_.elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return std::move(record_);
  }

 private:
  bool budget_left() const { return record_.fes < cfg_.max_fes; }

  double evaluate(std::vector<double>& x) {
    if (task_.repair) task_.repair(x);
    if (observer_ && observer_->on_evaluate) observer_->on_evaluate(x);
    double v = task_.evaluate(x);
    if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
    ++record_.fes;
    if (v < record_.best_value || record_.best_vector.empty()) {
      record_.best_value = v;
      record_.best_vector = x;
    }
    return v;
  }

  void checkpoint() { record_.history.emplace_back(record_.fes, record_.best_value); }

  void notify_generation() {
    if (observer_ && observer_->on_generation)
      observer_->on_generation(record_.fes, memory_, pop_.size());
  }

  std::size_t best_index() const {
    return static_cast<std::size_t>(std::min_element(fit_.begin(), fit_.end()) - fit_.begin());
  }

  void classic(Strategy s) {
    const std::size_t np = pop_.size();
    const int arity = strategy_arity(s);
    while (budget_left()) {
      const std::size_t best = best_index();
      Population next = pop_;
      std::vector<double> next_fit = fit_;
      for (std::size_t i = 0; i < np && budget_left(); ++i) {
        const auto idx = draw_distinct(np, i, arity, rng_);
        MutationOperands ops{pop_[i], pop_[best], {}};
        for (std::size_t r : idx) ops.r.emplace_back(pop_[r]);
        const auto donor = mutate(s, ops, cfg_.f);
        auto trial = crossover_binomial(pop_[i], donor, cfg_.cr, rng_);
        const double v = evaluate(trial);
        if (select(fit_[i], v)) {
          next[i] = std::move(trial);
          next_fit[i] = v;
        }
      }
      pop_ = std::move(next);
      fit_ = std::move(next_fit);
      checkpoint();
      notify_generation();
    }
  }

  // Three trial vectors per target, best of three competes with the target.
  void composite() {
    static constexpr std::pair<double, double> kPool[3] = {{1.0, 0.1}, {1.0, 0.9}, {0.8, 0.2}};
    const std::size_t np = pop_.size();
    while (budget_left()) {
      Population next = pop_;
      std::vector<double> next_fit = fit_;
      for (std::size_t i = 0; i < np && budget_left(); ++i) {
        std::vector<double> trials[3];
        double values[3];

        {
          const auto [f, cr] = kPool[uniform_index(3, rng_)];
          const auto idx = draw_distinct(np, i, 3, rng_);
          const auto donor =
              mutate(Strategy::Rand1, {pop_[i], {}, {pop_[idx[0]], pop_[idx[1]], pop_[idx[2]]}}, f);
          trials[0] = crossover_binomial(pop_[i], donor, cr, rng_);
        }
        {
          const auto [f, cr] = kPool[uniform_index(3, rng_)];
          const auto idx = draw_distinct(np, i, 5, rng_);
          MutationOperands ops{pop_[i], {}, {}};
          for (std::size_t r : idx) ops.r.emplace_back(pop_[r]);
          const auto donor = mutate(Strategy::Rand2, ops, f);
          trials[1] = crossover_binomial(pop_[i], donor, cr, rng_);
        }
        {
          const auto [f, cr] = kPool[uniform_index(3, rng_)];
          const auto idx = draw_distinct(np, i, 3, rng_);
          const double k = uniform01(rng_);
          auto donor = mutate(Strategy::CurrentToRand1,
                              {pop_[i], {}, {pop_[idx[0]], pop_[idx[1]], pop_[idx[2]]}}, f, k);
          trials[2] = cfg_.params.code_third_bin ? crossover_binomial(pop_[i], donor, cr, rng_)
                                                 : std::move(donor);
        }
        for (int t = 0; t < 3; ++t) values[t] = evaluate(trials[t]);

        const int pick = static_cast<int>(std::min_element(values, values + 3) - values);
        if (select(fit_[i], values[pick])) {
          next[i] = std::move(trials[pick]);
          next_fit[i] = values[pick];
        }
      }
      pop_ = std::move(next);
      fit_ = std::move(next_fit);
      checkpoint();
      notify_generation();
    }
  }

  // JADE, SHADE and LSHADE: current-to-pbest/1 with archive plus adaptive
  // F / CR.
  void success_history() {
    const bool jade = cfg_.variant == Variant::Jade;
    const bool lshade = cfg_.variant == Variant::Lshade;
    const auto h = static_cast<std::size_t>(cfg_.params.history_size);
    memory_.m_f.assign(h, 0.5);
    memory_.m_cr.assign(h, 0.5);
    memory_.k = 0;

    while (budget_left()) {
      const std::size_t np = pop_.size();
      std::vector<std::size_t> order(np);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return fit_[a] < fit_[b]; });
      const auto p_count = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::ceil(cfg_.params.p_best_frac * static_cast<double>(np))),
          2, np);

      std::vector<double> s_f, s_cr, delta;
      Population next = pop_;
      std::vector<double> next_fit = fit_;
      for (std::size_t i = 0; i < np && budget_left(); ++i) {
        double f, cr;
        if (jade) {
          f = sample_f(memory_.mu_f, rng_);
          cr = sample_cr(memory_.mu_cr, rng_);
        } else {
          const std::size_t r = uniform_index(h, rng_);
          f = sample_f(memory_.m_f[r], rng_);
          cr = memory_.m_cr[r] ? sample_cr(*memory_.m_cr[r], rng_) : 0.0;
        }
        const std::size_t pbest = order[uniform_index(p_count, rng_)];
        const std::size_t r1 = draw_excluding(np, {i}, rng_);
        const std::size_t r2 = draw_excluding(np + memory_.archive.size(), {i, r1}, rng_);
        const std::vector<double>& x_r2 = r2 < np ? pop_[r2] : memory_.archive[r2 - np];

        const auto donor =
            mutate(Strategy::CurrentToPBest1, {pop_[i], pop_[pbest], {pop_[r1], x_r2}}, f);
        auto trial = crossover_binomial(pop_[i], donor, cr, rng_);
        const double v = evaluate(trial);
        if (select(fit_[i], v)) {
          memory_.archive.push_back(pop_[i]);
          s_f.push_back(f);
          s_cr.push_back(cr);
          delta.push_back(fit_[i] - v);
          next[i] = std::move(trial);
          next_fit[i] = v;
        }
      }
      pop_ = std::move(next);
      fit_ = std::move(next_fit);
      trim_archive(memory_.archive, archive_capacity(cfg_, pop_.size()), rng_);

      if (!s_f.empty()) {
        if (jade)
          update_jade(s_f, s_cr);
        else
          update_history(s_f, s_cr, delta, lshade);
      }

      if (lshade) shrink_population();
      checkpoint();
      notify_generation();
    }
  }

  void update_jade(const std::vector<double>& s_f, const std::vector<double>& s_cr) {
    const std::vector<double> ones(s_f.size(), 1.0);
    const double c = cfg_.params.c;
    memory_.mu_f = (1.0 - c) * memory_.mu_f + c * lehmer_mean(s_f, ones);
    const double mean_cr =
        std::accumulate(s_cr.begin(), s_cr.end(), 0.0) / static_cast<double>(s_cr.size());
    memory_.mu_cr = (1.0 - c) * memory_.mu_cr + c * mean_cr;
  }

  void update_history(const std::vector<double>& s_f, const std::vector<double>& s_cr,
                      std::vector<double> delta, bool terminal_marker) {
    double total = std::accumulate(delta.begin(), delta.end(), 0.0);
    if (!(total > 0.0)) {
      // Only ties: weight the successes uniformly.
      std::fill(delta.begin(), delta.end(), 1.0);
      total = static_cast<double>(delta.size());
    }
    const std::size_t k = memory_.k;
    memory_.m_f[k] = lehmer_mean(s_f, delta);

    auto& slot = memory_.m_cr[k];
    const double max_cr = *std::max_element(s_cr.begin(), s_cr.end());
    if (terminal_marker && (!slot || max_cr == 0.0)) {
      slot.reset();
    } else {
      double mean = 0.0;
      for (std::size_t j = 0; j < s_cr.size(); ++j) mean += delta[j] / total * s_cr[j];
      slot = mean;
    }
    memory_.k = (k + 1) % memory_.m_f.size();
  }

  void shrink_population() {
    const int target = lshade_population_size(record_.fes, cfg_);
    if (static_cast<std::size_t>(target) >= pop_.size()) return;
    std::vector<std::size_t> order(pop_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fit_[a] < fit_[b]; });
    Population kept;
    std::vector<double> kept_fit;
    for (int j = 0; j < target; ++j) {
      kept.push_back(std::move(pop_[order[static_cast<std::size_t>(j)]]));
      kept_fit.push_back(fit_[order[static_cast<std::size_t>(j)]]);
    }
    pop_ = std::move(kept);
    fit_ = std::move(kept_fit);
    trim_archive(memory_.archive, archive_capacity(cfg_, pop_.size()), rng_);
  }

  const OptimizationTask& task_;
  EngineConfig cfg_;
  Rng rng_;
  const RunObserver* observer_;
  RunRecord record_;
  ParamMemory memory_;
  Population pop_;
  std::vector<double> fit_;
};

}  // namespace

const char* to_string(Variant v) {
  switch (v) {
    case Variant::DeRand1: return "de-rand1";
    case Variant::DeRand2: return "de-rand2";
    case Variant::DeBest1: return "de-best1";
    case Variant::DeBest2: return "de-best2";
    case Variant::Jade: return "jade";
    case Variant::Code: return "code";
    case Variant::Shade: return "shade";
    case Variant::Lshade: return "lshade";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  const std::string n = normalized_name(name);
  for (Variant v : all_variants()) {
    const std::string canonical = normalized_name(to_string(v));
    if (n == canonical) return v;
    // "rand1" for "de-rand1"
    if (canonical.rfind("de", 0) == 0 && canonical.size() > 2 && n == canonical.substr(2) &&
        v != Variant::Code)
      return v;
  }
  fail(ErrorKind::NotFound, "unknown variant '" + std::string(name) + "'");
}

std::vector<Variant> all_variants() {
  return {Variant::DeRand1, Variant::DeRand2, Variant::DeBest1, Variant::DeBest2,
          Variant::Jade,    Variant::Code,    Variant::Shade,   Variant::Lshade};
}

EngineConfig EngineConfig::defaults(Variant v, long long max_fes, std::uint64_t seed) {
  EngineConfig cfg;
  cfg.variant = v;
  cfg.max_fes = max_fes;
  cfg.seed = seed;
  switch (v) {
    case Variant::Jade:
      cfg.params.p_best_frac = 0.05;
      cfg.params.c = 0.1;
      break;
    case Variant::Shade:
      cfg.params.p_best_frac = 0.1;
      cfg.params.history_size = cfg.np_init;
      break;
    case Variant::Lshade:
      cfg.params.p_best_frac = 0.11;
      cfg.params.history_size = 6;
      cfg.params.np_min = 4;
      break;
    default: break;
  }
  return cfg;
}

void EngineConfig::validate() const {
  if (np_init < 4) fail(ErrorKind::Config, "np_init must be at least 4");
  if (max_fes < np_init) fail(ErrorKind::Config, "max_fes must be at least np_init");
  switch (variant) {
    case Variant::DeRand1:
    case Variant::DeRand2:
    case Variant::DeBest1:
    case Variant::DeBest2:
      if (!(f > 0.0 && f <= 2.0)) fail(ErrorKind::Config, "F must lie in (0, 2]");
      if (!(cr >= 0.0 && cr <= 1.0)) fail(ErrorKind::Config, "CR must lie in [0, 1]");
      break;
    default: break;
  }
  const auto np = static_cast<std::size_t>(np_init);
  switch (variant) {
    case Variant::DeRand1: require_population(Strategy::Rand1, np); break;
    case Variant::DeRand2: require_population(Strategy::Rand2, np); break;
    case Variant::DeBest1: require_population(Strategy::Best1, np); break;
    case Variant::DeBest2: require_population(Strategy::Best2, np); break;
    case Variant::Code: require_population(Strategy::Rand2, np); break;
    case Variant::Jade:
    case Variant::Shade:
    case Variant::Lshade:
      require_population(Strategy::CurrentToPBest1, np);
      if (!(params.p_best_frac > 0.0 && params.p_best_frac <= 1.0))
        fail(ErrorKind::Config, "p_best_frac must lie in (0, 1]");
      if (!(params.c > 0.0 && params.c <= 1.0)) fail(ErrorKind::Config, "c must lie in (0, 1]");
      if (params.history_size < 1) fail(ErrorKind::Config, "history size must be positive");
      if (!(params.archive_rate >= 0.0)) fail(ErrorKind::Config, "archive rate must be >= 0");
      break;
  }
  if (variant == Variant::Lshade) {
    if (params.np_min > np_init) fail(ErrorKind::Config, "np_min exceeds np_init");
    require_population(Strategy::CurrentToPBest1, static_cast<std::size_t>(params.np_min));
  }
}

std::vector<std::vector<double>> initialize_population(const SearchBounds& bounds, int np,
                                                       Rng& rng) {
  if (np < 1) fail(ErrorKind::Config, "population size must be positive");
  std::vector<std::vector<double>> pop(static_cast<std::size_t>(np),
                                       std::vector<double>(bounds.dim()));
  for (auto& x : pop)
    for (std::size_t j = 0; j < x.size(); ++j)
      x[j] = bounds.lower[j] + uniform01(rng) * (bounds.upper[j] - bounds.lower[j]);
  return pop;
}

int strategy_arity(Strategy s) {
  switch (s) {
    case Strategy::Rand1: return 3;
    case Strategy::Rand2: return 5;
    case Strategy::Best1: return 2;
    case Strategy::Best2: return 4;
    case Strategy::CurrentToPBest1: return 2;
    case Strategy::CurrentToRand1: return 3;
  }
  return 0;
}

void require_population(Strategy s, std::size_t np) {
  // target plus `arity` distinct others
  if (np < static_cast<std::size_t>(strategy_arity(s)) + 1)
    fail(ErrorKind::Config, "population of " + std::to_string(np) +
                                " is too small for a mutation strategy drawing " +
                                std::to_string(strategy_arity(s)) + " vectors");
}

std::vector<double> mutate(Strategy s, const MutationOperands& ops, double f, double k) {
  if (ops.r.size() < static_cast<std::size_t>(strategy_arity(s)))
    fail(ErrorKind::Config, "mutation strategy received too few operand vectors");
  const std::size_t d = ops.target.empty() ? ops.r[0].size() : ops.target.size();
  std::vector<double> v(d);
  const auto& r = ops.r;
  for (std::size_t j = 0; j < d; ++j) {
    switch (s) {
      case Strategy::Rand1: v[j] = r[0][j] + f * (r[1][j] - r[2][j]); break;
      case Strategy::Rand2:
        v[j] = r[0][j] + f * (r[1][j] - r[2][j]) + f * (r[3][j] - r[4][j]);
        break;
      case Strategy::Best1: v[j] = ops.best[j] + f * (r[0][j] - r[1][j]); break;
      case Strategy::Best2:
        v[j] = ops.best[j] + f * (r[0][j] - r[1][j]) + f * (r[2][j] - r[3][j]);
        break;
      case Strategy::CurrentToPBest1:
        v[j] = ops.target[j] + f * (ops.best[j] - ops.target[j]) + f * (r[0][j] - r[1][j]);
        break;
      case Strategy::CurrentToRand1:
        v[j] = ops.target[j] + k * (r[0][j] - ops.target[j]) + f * (r[1][j] - r[2][j]);
        break;
    }
  }
  return v;
}

std::vector<double> crossover_binomial(std::span<const double> target,
                                       std::span<const double> donor, double cr, Rng& rng) {
  if (target.size() != donor.size())
    fail(ErrorKind::Structural, "crossover operands differ in length");
  std::vector<double> trial(target.begin(), target.end());
  if (trial.empty()) return trial;
  const std::size_t j_rand = uniform_index(trial.size(), rng);
  for (std::size_t j = 0; j < trial.size(); ++j)
    if (uniform01(rng) <= cr || j == j_rand) trial[j] = donor[j];
  return trial;
}

double lehmer_mean(std::span<const double> values, std::span<const double> weights) {
  if (values.empty()) fail(ErrorKind::Config, "Lehmer mean of an empty set");
  if (values.size() != weights.size())
    fail(ErrorKind::Config, "Lehmer mean values and weights differ in length");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    num += weights[i] * values[i] * values[i];
    den += weights[i] * values[i];
  }
  if (!(den > 0.0)) fail(ErrorKind::Config, "Lehmer mean denominator is not positive");
  return num / den;
}

int lshade_population_size(long long fes, const EngineConfig& cfg) {
  const double slope = static_cast<double>(cfg.params.np_min - cfg.np_init) /
                       static_cast<double>(cfg.max_fes);
  const auto np = static_cast<int>(std::lround(slope * static_cast<double>(fes) + cfg.np_init));
  return std::clamp(np, cfg.params.np_min, cfg.np_init);
}

RunRecord run(const OptimizationTask& task, const EngineConfig& cfg, const RunObserver* observer) {
  cfg.validate();
  if (!task.evaluate) fail(ErrorKind::Config, "optimization task has no objective");
  if (task.bounds.lower.size() != task.bounds.upper.size() || task.bounds.lower.empty())
    fail(ErrorKind::Structural, "search bounds are empty or inconsistent");
  return Engine(task, cfg, observer).run();
}

}  // namespace oed
