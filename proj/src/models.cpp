#include "oed/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oed/error.hpp"

namespace oed {
namespace {

using Eigen::VectorXd;

// h(x) = [1, x']'
VectorXd intercept_basis(std::span<const double> x) {
  VectorXd h(static_cast<Eigen::Index>(x.size() + 1));
  h[0] = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) h[static_cast<Eigen::Index>(j + 1)] = x[j];
  return h;
}

double linear_form(std::span<const double> x, std::span<const double> theta) {
  double s = theta[0];
  for (std::size_t j = 0; j < x.size(); ++j) s += theta[j + 1] * x[j];
  return s;
}

ProblemSpec make(int id, std::string name, ModelKind kind, std::vector<double> lower,
                 std::vector<double> upper, int p, int n_supp, std::vector<double> theta,
                 ScalarFn predictor, GradientFn gradient) {
  ProblemSpec s;
  s.id = id;
  s.name = std::move(name);
  s.kind = kind;
  s.space = DesignSpace(std::move(lower), std::move(upper));
  s.p = p;
  s.n_supp = n_supp;
  s.theta = std::move(theta);
  s.predictor = std::move(predictor);
  s.predictor_gradient = std::move(gradient);
  return s;
}

std::vector<ProblemSpec> build_registry() {
  std::vector<ProblemSpec> r;
  r.reserve(12);

  // 1: sum of two decaying exponentials
  r.push_back(make(
      1, "double exponential decay", ModelKind::NonlinearRegression, {0.0}, {3.0}, 4, 6,
      {1, 1, 1, 2},
      [](auto x, auto t) { return t[0] * std::exp(-t[1] * x[0]) + t[2] * std::exp(-t[3] * x[0]); },
      [](auto x, auto t) {
        const double e1 = std::exp(-t[1] * x[0]), e2 = std::exp(-t[3] * x[0]);
        VectorXd f(4);
        f << e1, -t[0] * x[0] * e1, e2, -t[2] * x[0] * e2;
        return f;
      }));

  // 2: quadratic in x1 with x2 main effect and interaction; theta enters linearly
  r.push_back(make(
      2, "quadratic with interaction", ModelKind::LinearRegression, {-1.0, 0.0}, {1.0, 1.0}, 5,
      10, {0, 0, 0, 0, 0},
      [](auto x, auto t) {
        return t[0] + t[1] * x[0] + t[2] * x[0] * x[0] + t[3] * x[1] + t[4] * x[0] * x[1];
      },
      [](auto x, auto) {
        VectorXd f(5);
        f << 1.0, x[0], x[0] * x[0], x[1], x[0] * x[1];
        return f;
      }));

  // 3: multinomial logit, three factors
  r.push_back(make(3, "multinomial logit (3 factors)", ModelKind::MultinomialLogit,
                   {0.0, 0.0, 0.0}, {6.0, 6.0, 6.0}, 8, 15, {1, 1, -1, 2, -1, 2, 1, -1},
                   linear_form, [](auto x, auto) { return intercept_basis(x); }));

  // 4: sum of two growing exponentials
  r.push_back(make(
      4, "double exponential growth", ModelKind::NonlinearRegression, {0.0}, {1.0}, 4, 8,
      {1, 0.5, 1, 1},
      [](auto x, auto t) { return t[0] * std::exp(t[1] * x[0]) + t[2] * std::exp(t[3] * x[0]); },
      [](auto x, auto t) {
        const double e1 = std::exp(t[1] * x[0]), e2 = std::exp(t[3] * x[0]);
        VectorXd f(4);
        f << e1, t[0] * x[0] * e1, e2, t[2] * x[0] * e2;
        return f;
      }));

  // 5: catalytic dehydrogenation kinetics
  r.push_back(make(
      5, "dehydrogenation kinetics", ModelKind::NonlinearRegression, {0.0, 0.0}, {3.0, 3.0}, 3,
      10, {2.9, 12.2, 0.69},
      [](auto x, auto t) { return t[0] * t[2] * x[0] / (1.0 + t[0] * x[0] + t[1] * x[1]); },
      [](auto x, auto t) {
        const double d = 1.0 + t[0] * x[0] + t[1] * x[1];
        const double num = t[0] * t[2] * x[0];
        VectorXd f(3);
        f << t[2] * x[0] / d - num * x[0] / (d * d), -num * x[1] / (d * d), t[0] * x[0] / d;
        return f;
      }));

  // 6: Michaelis-Menten
  r.push_back(make(
      6, "Michaelis-Menten", ModelKind::NonlinearRegression, {0.0}, {5.0}, 2, 5, {1, 1},
      [](auto x, auto t) { return t[0] * x[0] / (t[1] + x[0]); },
      [](auto x, auto t) {
        const double d = t[1] + x[0];
        VectorXd f(2);
        f << x[0] / d, -t[0] * x[0] / (d * d);
        return f;
      }));

  // 7: mixed-type inhibition
  r.push_back(make(
      7, "mixed-type inhibition", ModelKind::NonlinearRegression, {0.0, 0.0}, {30.0, 60.0}, 4, 5,
      {1, 4, 2, 4},
      [](auto x, auto t) {
        return t[0] * x[0] / ((1.0 + x[1] / t[2]) * t[1] + (1.0 + x[1] / t[3]) * x[0]);
      },
      [](auto x, auto t) {
        const double a = 1.0 + x[1] / t[2];
        const double d = a * t[1] + (1.0 + x[1] / t[3]) * x[0];
        const double q = t[0] * x[0] / (d * d);
        VectorXd f(4);
        f << x[0] / d, -q * a, q * t[1] * x[1] / (t[2] * t[2]), q * x[0] * x[1] / (t[3] * t[3]);
        return f;
      }));

  // 8: linear terms, pairwise interactions and reciprocals
  r.push_back(make(
      8, "interactions with reciprocal terms", ModelKind::LinearRegression, {0.5, 0.5, 0.5},
      {2.0, 2.0, 2.0}, 9, 20, std::vector<double>(9, 0.0),
      [](auto x, auto t) {
        return t[0] * x[0] + t[1] * x[1] + t[2] * x[2] + t[3] * x[0] * x[1] +
               t[4] * x[0] * x[2] + t[5] * x[1] * x[2] + t[6] / x[0] + t[7] / x[1] + t[8] / x[2];
      },
      [](auto x, auto) {
        VectorXd f(9);
        f << x[0], x[1], x[2], x[0] * x[1], x[0] * x[2], x[1] * x[2], 1.0 / x[0], 1.0 / x[1],
            1.0 / x[2];
        return f;
      }));

  const std::vector<double> glm_theta{0.5, 0.7, 0.18, -0.20, -0.58, 0.51};
  const std::vector<double> lo5(5, -2.0), hi5(5, 2.0);

  r.push_back(make(9, "probit regression", ModelKind::Probit, lo5, hi5, 6, 25, glm_theta,
                   linear_form, [](auto x, auto) { return intercept_basis(x); }));
  r.push_back(make(10, "logistic regression", ModelKind::Logistic, lo5, hi5, 6, 25, glm_theta,
                   linear_form, [](auto x, auto) { return intercept_basis(x); }));

  // 11: gamma regression, mean = g^2 with g = t1 x1 + sum_{i=2..5} t_i x_{i-1} x_i
  r.push_back(make(
      11, "gamma regression", ModelKind::Gamma, std::vector<double>(5, 0.0),
      std::vector<double>(5, 10.0), 5, 25, {0.25, 0.5, 0.20, 0.58, 0.51},
      [](auto x, auto t) {
        return t[0] * x[0] + t[1] * x[0] * x[1] + t[2] * x[1] * x[2] + t[3] * x[2] * x[3] +
               t[4] * x[3] * x[4];
      },
      [](auto x, auto) {
        VectorXd f(5);
        f << x[0], x[0] * x[1], x[1] * x[2], x[2] * x[3], x[3] * x[4];
        return f;
      }));

  r.push_back(make(12, "multinomial logit (10 factors)", ModelKind::MultinomialLogit,
                   std::vector<double>(10, 0.0), std::vector<double>(10, 3.0), 22, 17,
                   {1, 1, -1, 2, -2, 1, 0.5, -0.25, 0.5, -0.75, 2,
                    -1, 2, 1, -1, -1, -1, -0.5, 1, 0.75, 0.25, -2},
                   linear_form, [](auto x, auto) { return intercept_basis(x); }));
  return r;
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

}  // namespace

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::NonlinearRegression: return "nonlinear-regression";
    case ModelKind::LinearRegression: return "linear-regression";
    case ModelKind::Probit: return "probit";
    case ModelKind::Logistic: return "logistic";
    case ModelKind::Gamma: return "gamma";
    case ModelKind::MultinomialLogit: return "multinomial-logit";
  }
  return "unknown";
}

bool is_regression(ModelKind kind) {
  return kind == ModelKind::NonlinearRegression || kind == ModelKind::LinearRegression;
}

const std::vector<ProblemSpec>& all_problems() {
  static const std::vector<ProblemSpec> registry = build_registry();
  return registry;
}

const ProblemSpec& get_problem(int id) {
  const auto& r = all_problems();
  if (id < 1 || id > static_cast<int>(r.size()))
    fail(ErrorKind::NotFound, "unknown problem id " + std::to_string(id) + " (expected 1-12)");
  return r[static_cast<std::size_t>(id - 1)];
}

ProblemSpec with_overrides(const ProblemSpec& base,
                           const std::optional<std::vector<double>>& theta,
                           const std::optional<std::vector<double>>& lower,
                           const std::optional<std::vector<double>>& upper) {
  ProblemSpec s = base;
  if (theta) {
    if (theta->size() != base.theta.size())
      fail(ErrorKind::Structural, "theta override has " + std::to_string(theta->size()) +
                                      " entries, problem " + std::to_string(base.id) +
                                      " expects " + std::to_string(base.theta.size()));
    s.theta = *theta;
  }
  if (lower || upper) {
    std::vector<double> lo = lower.value_or(base.space.lower());
    std::vector<double> hi = upper.value_or(base.space.upper());
    if (lo.size() != base.n_factors() || hi.size() != base.n_factors())
      fail(ErrorKind::Structural, "bound override has wrong factor count");
    s.space = DesignSpace(std::move(lo), std::move(hi));
  }
  return s;
}

Eigen::VectorXd mean_gradient(const ProblemSpec& problem, std::span<const double> x) {
  if (!is_regression(problem.kind))
    fail(ErrorKind::Unsupported, std::string("mean_gradient is undefined for ") +
                                     to_string(problem.kind) + " problem " +
                                     std::to_string(problem.id));
  if (x.size() != problem.n_factors())
    fail(ErrorKind::Structural, "point dimension does not match problem factors");
  return problem.predictor_gradient(x, problem.theta);
}

void add_unit_information(const ProblemSpec& problem, std::span<const double> x, double weight,
                          InfoMatrix& m, UnitInfoDiagnostics* diagnostics) {
  const std::span<const double> theta(problem.theta);
  switch (problem.kind) {
    case ModelKind::NonlinearRegression:
    case ModelKind::LinearRegression: {
      const VectorXd f = problem.predictor_gradient(x, theta);
      m.noalias() += weight * f * f.transpose();
      return;
    }
    case ModelKind::Probit: {
      const double eta = problem.predictor(x, theta);
      const double cdf = 0.5 * std::erfc(-eta / std::sqrt(2.0));
      const double ccdf = 0.5 * std::erfc(eta / std::sqrt(2.0));
      if (cdf < 1e-300 || ccdf < 1e-300) {
        if (diagnostics) diagnostics->probit_underflow = true;
        return;
      }
      const double phi = normal_pdf(eta);
      const double w = phi * phi / (cdf * ccdf);
      const VectorXd h = problem.predictor_gradient(x, theta);
      m.noalias() += (weight * w) * h * h.transpose();
      return;
    }
    case ModelKind::Logistic: {
      const double eta = problem.predictor(x, theta);
      const double mu = 1.0 / (1.0 + std::exp(-eta));
      const VectorXd h = problem.predictor_gradient(x, theta);
      m.noalias() += (weight * mu * (1.0 - mu)) * h * h.transpose();
      return;
    }
    case ModelKind::Gamma: {
      // Shape 1, mean g^2: information (2 g f)(2 g f)' / mu^2 = 4 f f' / g^2.
      const double g = problem.predictor(x, theta);
      if (g * g < 1e-300) {
        if (diagnostics) diagnostics->degenerate_mean = true;
        return;
      }
      const VectorXd f = problem.predictor_gradient(x, theta);
      m.noalias() += (weight * 4.0 / (g * g)) * f * f.transpose();
      return;
    }
    case ModelKind::MultinomialLogit: {
      const std::size_t block = theta.size() / 2;
      const double eta1 = problem.predictor(x, theta.subspan(0, block));
      const double eta2 = problem.predictor(x, theta.subspan(block, block));
      const double shift = std::max({0.0, eta1, eta2});
      const double e0 = std::exp(-shift), e1 = std::exp(eta1 - shift), e2 = std::exp(eta2 - shift);
      const double denom = e0 + e1 + e2;
      const double pi1 = e1 / denom, pi2 = e2 / denom;
      const VectorXd h = problem.predictor_gradient(x, theta.subspan(0, block));
      const Eigen::MatrixXd hh = h * h.transpose();
      const auto b = static_cast<Eigen::Index>(block);
      m.block(0, 0, b, b) += (weight * pi1 * (1.0 - pi1)) * hh;
      m.block(b, b, b, b) += (weight * pi2 * (1.0 - pi2)) * hh;
      m.block(0, b, b, b) -= (weight * pi1 * pi2) * hh;
      m.block(b, 0, b, b) -= (weight * pi1 * pi2) * hh;
      return;
    }
  }
}

InfoMatrix unit_information(const ProblemSpec& problem, std::span<const double> x,
                            UnitInfoDiagnostics* diagnostics) {
  if (x.size() != problem.n_factors())
    fail(ErrorKind::Structural, "point dimension does not match problem factors");
  InfoMatrix m = InfoMatrix::Zero(problem.p, problem.p);
  add_unit_information(problem, x, 1.0, m, diagnostics);
  return m;
}

}  // namespace oed
