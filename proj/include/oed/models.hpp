#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oed/design.hpp"

namespace oed {

enum class ModelKind {
  NonlinearRegression,
  LinearRegression,
  Probit,
  Logistic,
  Gamma,
  MultinomialLogit
};

const char* to_string(ModelKind kind);
bool is_regression(ModelKind kind);

using ScalarFn = std::function<double(std::span<const double> x, std::span<const double> theta)>;
using GradientFn =
    std::function<Eigen::VectorXd(std::span<const double> x, std::span<const double> theta)>;

// Every registered model is driven by one scalar "predictor" and its
// gradient in theta:
//   regression kinds     predictor = mean response eta(x, theta)
//   probit / logistic    predictor = h(x)' theta, gradient = h(x)
//   gamma                predictor = inner form g(x, theta), mean = g^2
//   multinomial logit    predictor = h(x)' theta_i for one category block;
//                        theta is stored stacked (theta_1; theta_2)
struct ProblemSpec {
  int id = 0;
  std::string name;
  ModelKind kind = ModelKind::NonlinearRegression;
  DesignSpace space;
  int p = 0;       // parameter count
  int n_supp = 0;  // assumed support-point count
  std::vector<double> theta;
  ScalarFn predictor;
  GradientFn predictor_gradient;

  std::size_t n_factors() const { return space.n_factors(); }
  /// Flat optimization vector length n_supp * (n_factors + 1).
  std::size_t encoded_dim() const { return static_cast<std::size_t>(n_supp) * (n_factors() + 1); }
  /// Multinomial problems: number of non-reference categories.
  int categories() const { return kind == ModelKind::MultinomialLogit ? 2 : 1; }
};

/// Registry entry for ids 1..12; throws ErrorKind::NotFound otherwise.
const ProblemSpec& get_problem(int id);
const std::vector<ProblemSpec>& all_problems();

/// Copy of `base` with nominal parameters and/or bounds replaced.
ProblemSpec with_overrides(const ProblemSpec& base,
                           const std::optional<std::vector<double>>& theta,
                           const std::optional<std::vector<double>>& lower,
                           const std::optional<std::vector<double>>& upper);

/// d eta / d theta at the nominal theta. Regression kinds only; throws
/// ErrorKind::Unsupported for GLM kinds.
Eigen::VectorXd mean_gradient(const ProblemSpec& problem, std::span<const double> x);

struct UnitInfoDiagnostics {
  bool probit_underflow = false;
  bool degenerate_mean = false;  // gamma with g(x, theta) == 0
};

/// Per-observation Fisher information M(x, theta) at the nominal theta.
InfoMatrix unit_information(const ProblemSpec& problem, std::span<const double> x,
                            UnitInfoDiagnostics* diagnostics = nullptr);

/// Adds weight * M(x, theta) into `m` without materializing M(x, theta).
void add_unit_information(const ProblemSpec& problem, std::span<const double> x, double weight,
                          InfoMatrix& m, UnitInfoDiagnostics* diagnostics = nullptr);

}  // namespace oed
