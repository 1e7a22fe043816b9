#include "oed/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "oed/error.hpp"
#include "oed/models.hpp"

namespace oed {
namespace {

// Reciprocal condition number of the unit-diagonal (correlation) form
// below which the matrix is treated as rank deficient.
constexpr double kMinRcond = 1e-12;
// det(M) <= 1e-300.
const double kMinLogDet = std::log(1e-300);

}  // namespace

// M = S^-1 C S^-1 with unit-diagonal C = L L'.
ScaledCholesky factor_information(const InfoMatrix& m) {
  ScaledCholesky f;
  const Eigen::Index p = m.rows();
  if (p == 0 || m.cols() != p || !m.allFinite()) return f;
  f.scale.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!(m(i, i) > 0.0)) return f;
    f.scale[i] = 1.0 / std::sqrt(m(i, i));
  }
  f.llt.compute(f.scale.asDiagonal() * m * f.scale.asDiagonal());
  if (f.llt.info() != Eigen::Success) return f;
  if (f.llt.rcond() < kMinRcond) return f;
  const auto& l = f.llt.matrixLLT();
  double log_det_c = 0.0, log_scale = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    log_det_c += 2.0 * std::log(l(i, i));
    log_scale += std::log(f.scale[i]);
  }
  f.log_det = log_det_c - 2.0 * log_scale;
  f.ok = f.log_det > kMinLogDet;
  return f;
}

namespace {


class Polisher {
 public:
  Polisher(const SensitivityFunction& s, const DesignSpace& space)
      : s_(s), lo_(space.lower()), hi_(space.upper()) {}

  // Coordinate-wise pattern search (maximization), initial step per factor.
  double polish(Point& x, double value, std::vector<double> step) const {
    const std::size_t d = x.size();
    int guard = 0;
    for (;;) {
      bool improved = false;
      for (std::size_t j = 0; j < d; ++j) {
        for (double dir : {1.0, -1.0}) {
          Point y = x;
          y[j] = std::clamp(x[j] + dir * step[j], lo_[j], hi_[j]);
          if (y[j] == x[j]) continue;
          const double v = s_(y);
          if (v > value) {
            x = std::move(y);
            value = v;
            improved = true;
            break;
          }
        }
      }
      if (!improved) {
        bool all_small = true;
        for (std::size_t j = 0; j < d; ++j) {
          step[j] *= 0.5;
          if (step[j] > 1e-10 * (hi_[j] - lo_[j])) all_small = false;
        }
        if (all_small) break;
      }
      if (++guard > 20000) break;
    }
    return value;
  }

 private:
  const SensitivityFunction& s_;
  const std::vector<double>& lo_;
  const std::vector<double>& hi_;
};

}  // namespace

const char* to_string(Criterion c) { return c == Criterion::D ? "D" : "A"; }

Criterion parse_criterion(std::string_view text) {
  if (text == "d" || text == "D") return Criterion::D;
  if (text == "a" || text == "A") return Criterion::A;
  fail(ErrorKind::NotFound, "unknown criterion '" + std::string(text) + "' (expected d or a)");
}

InverseResult invert_information(const InfoMatrix& m) {
  InverseResult r;
  const ScaledCholesky f = factor_information(m);
  if (!f.ok) return r;
  const Eigen::Index p = m.rows();
  const InfoMatrix ci = f.llt.solve(InfoMatrix::Identity(p, p));
  r.inverse = f.scale.asDiagonal() * ci * f.scale.asDiagonal();
  r.log_det = f.log_det;
  r.singular = false;
  return r;
}

double d_criterion(const InfoMatrix& m) {
  const InverseResult r = invert_information(m);
  return r.singular ? kSingularPenalty : -r.log_det;
}

double a_criterion(const InfoMatrix& m) {
  const InverseResult r = invert_information(m);
  return r.singular ? kSingularPenalty : r.inverse.trace();
}

double criterion_value(Criterion c, const InfoMatrix& m) {
  return c == Criterion::D ? d_criterion(m) : a_criterion(m);
}

SensitivityFunction::SensitivityFunction(Criterion c, const Design& design,
                                         const ProblemSpec& problem)
    : criterion_(c), problem_(&problem) {
  const InfoMatrix m = information_matrix(design, problem);
  if (!factor_information(m).ok)
    fail(ErrorKind::Singular, "information matrix of the design is singular; "
                              "certification requires a nonsingular design");
  // Ill-conditioned models lose about eps * cond(M) in double, so the
  // sensitivity path accumulates and factors M in extended precision.
  const Eigen::Index p = m.rows();
  WideMatrix wide = WideMatrix::Zero(p, p);
  InfoMatrix u(p, p);
  for (std::size_t i = 0; i < design.size(); ++i) {
    if (design.weights[i] == 0.0) continue;
    u.setZero();
    add_unit_information(problem, design.points[i], 1.0, u);
    wide += static_cast<long double>(design.weights[i]) * u.cast<long double>();
  }
  scale_vec_.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) scale_vec_[i] = 1.0L / std::sqrt(wide(i, i));
  const Eigen::LLT<WideMatrix> llt(scale_vec_.asDiagonal() * wide * scale_vec_.asDiagonal());
  lower_ = llt.matrixL();
  if (c == Criterion::D) {
    offset_ = static_cast<long double>(p);
  } else {
    // G = L^-1 S^2 L^-T, so trace(M^-1) = trace(G).
    WideMatrix b = scale_vec_.asDiagonal();
    lower_.triangularView<Eigen::Lower>().solveInPlace(b);
    gram_ = b * b.transpose();
    offset_ = gram_.trace();
  }
  scale_ = static_cast<double>(offset_);
}

// With T = L^-1 S U(x) S L^-T: trace(M^-1 U) = trace(T) and
// trace(M^-2 U) = trace(T G).
double SensitivityFunction::operator()(std::span<const double> x) const {
  thread_local InfoMatrix u;
  thread_local WideMatrix t;
  const Eigen::Index p = lower_.rows();
  u.setZero(p, p);
  add_unit_information(*problem_, x, 1.0, u);
  t = scale_vec_.asDiagonal() * u.cast<long double>() * scale_vec_.asDiagonal();
  const auto l = lower_.triangularView<Eigen::Lower>();
  l.solveInPlace(t);
  t.transposeInPlace();
  l.solveInPlace(t);
  const long double v = criterion_ == Criterion::D ? t.trace() : t.cwiseProduct(gram_).sum();
  return static_cast<double>(v - offset_);
}

double d_sensitivity(std::span<const double> x, const Design& design, const ProblemSpec& problem) {
  return SensitivityFunction(Criterion::D, design, problem)(x);
}

double a_sensitivity(std::span<const double> x, const Design& design, const ProblemSpec& problem) {
  return SensitivityFunction(Criterion::A, design, problem)(x);
}

int GridSpec::resolution_for(std::size_t n_factors) const {
  int r = n_factors <= 2 ? points_per_factor_low_dim : points_per_factor_high_dim;
  r = std::max(r, 2);
  while (r > 2 && std::pow(static_cast<double>(r), static_cast<double>(n_factors)) >
                      static_cast<double>(max_samples))
    --r;
  return r;
}

CertificationReport efficiency_bound(Criterion c, const Design& design,
                                     const ProblemSpec& problem, const GridSpec& grid) {
  const SensitivityFunction s(c, design, problem);
  const DesignSpace& space = problem.space;
  const std::size_t d = space.n_factors();
  const auto& lo = space.lower();
  const auto& hi = space.upper();

  CertificationReport report;
  report.max_sensitivity = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Point& x, double v) {
    if (v > report.max_sensitivity) {
      report.max_sensitivity = v;
      report.arg_max = x;
    }
  };

  for (std::size_t i = 0; i < design.size(); ++i) {
    const double v = s(design.points[i]);
    report.support_sensitivities.push_back({design.points[i], design.weights[i], v});
    if (design.weights[i] > 0.0) consider(design.points[i], v);
  }

  const int res = grid.resolution_for(d);
  std::vector<double> cell(d);
  for (std::size_t j = 0; j < d; ++j) cell[j] = (hi[j] - lo[j]) / (res - 1);

  std::vector<int> idx(d, 0);
  Point x(d);
  Point best_grid;
  double best_grid_value = -std::numeric_limits<double>::infinity();
  for (bool done = false; !done;) {
    for (std::size_t j = 0; j < d; ++j)
      x[j] = idx[j] == res - 1 ? hi[j] : lo[j] + idx[j] * cell[j];
    const double v = s(x);
    if (v > best_grid_value) {
      best_grid_value = v;
      best_grid = x;
    }
    // odometer increment, last factor fastest
    for (std::size_t j = d;;) {
      if (j == 0) {
        done = true;
        break;
      }
      --j;
      if (++idx[j] < res) break;
      idx[j] = 0;
    }
  }
  consider(best_grid, best_grid_value);

  const Polisher polisher(s, space);
  {
    Point y = best_grid;
    const double v = polisher.polish(y, best_grid_value, cell);
    consider(y, v);
  }
  if (d >= 3) {
    std::mt19937_64 rng(grid.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int k = 0; k < grid.random_restarts; ++k) {
      Point y(d);
      for (std::size_t j = 0; j < d; ++j) y[j] = lo[j] + u01(rng) * (hi[j] - lo[j]);
      const double v = polisher.polish(y, s(y), cell);
      consider(y, v);
    }
  }

  const double bound = c == Criterion::D ? std::exp(-report.max_sensitivity / s.scale())
                                         : 1.0 - report.max_sensitivity / s.scale();
  report.efficiency_lower_bound = std::min(bound, 1.0);
  return report;
}

}  // namespace oed
