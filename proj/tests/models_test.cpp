#include <cmath>
#include <random>

#include "doctest.h"
#include "oed/error.hpp"
#include "oed/models.hpp"
#include "oracles.hpp"

using namespace oed;

namespace {

Point random_point(const DesignSpace& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Point x(s.n_factors());
  for (std::size_t j = 0; j < x.size(); ++j)
    x[j] = s.lower()[j] + u(rng) * (s.upper()[j] - s.lower()[j]);
  return x;
}

// Linear models store theta = 0; differentiate around a generic point so
// the oracle also exercises the parameter coupling.
std::vector<double> probe_theta(const ProblemSpec& p) {
  if (p.kind != ModelKind::LinearRegression) return p.theta;
  std::vector<double> t(p.theta.size());
  for (std::size_t j = 0; j < t.size(); ++j) t[j] = 0.3 + 0.1 * static_cast<double>(j);
  return t;
}

double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

}  // namespace

TEST_CASE("registry entries match the model table") {
  struct Row {
    int id;
    std::size_t factors;
    int p, n_supp;
    std::size_t variables;
  };
  const Row rows[] = {{1, 1, 4, 6, 12},   {2, 2, 5, 10, 30},  {3, 3, 8, 15, 60},
                      {4, 1, 4, 8, 16},   {5, 2, 3, 10, 30},  {6, 1, 2, 5, 10},
                      {7, 2, 4, 5, 15},   {8, 3, 9, 20, 80},  {9, 5, 6, 25, 150},
                      {10, 5, 6, 25, 150}, {11, 5, 5, 25, 150}, {12, 10, 22, 17, 187}};
  for (const Row& r : rows) {
    CAPTURE(r.id);
    const ProblemSpec& p = get_problem(r.id);
    CHECK(p.id == r.id);
    CHECK(p.n_factors() == r.factors);
    CHECK(p.p == r.p);
    CHECK(p.n_supp == r.n_supp);
    CHECK(p.encoded_dim() == r.variables);
    CHECK(static_cast<int>(p.theta.size()) == p.p);
  }
  CHECK(all_problems().size() == 12);
}

TEST_CASE("get_problem examples") {
  const ProblemSpec& p6 = get_problem(6);
  CHECK(p6.space.lower() == std::vector<double>{0.0});
  CHECK(p6.space.upper() == std::vector<double>{5.0});
  CHECK(p6.p == 2);
  CHECK(p6.n_supp == 5);
  CHECK(p6.theta == std::vector<double>{1.0, 1.0});

  const ProblemSpec& p1 = get_problem(1);
  CHECK(p1.space.upper() == std::vector<double>{3.0});
  CHECK(p1.p == 4);
  CHECK(p1.n_supp == 6);
  CHECK(p1.theta == std::vector<double>{1.0, 1.0, 1.0, 2.0});

  for (int bad : {0, 13, -1}) {
    try {
      get_problem(bad);
      FAIL("expected not-found");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NotFound);
    }
  }
}

TEST_CASE("mean_gradient examples") {
  const auto g6 = mean_gradient(get_problem(6), std::vector<double>{1.0});
  CHECK(g6(0) == doctest::Approx(0.5));
  CHECK(g6(1) == doctest::Approx(-0.25));

  const auto g2 = mean_gradient(get_problem(2), std::vector<double>{0.0, 0.0});
  CHECK(g2.size() == 5);
  CHECK(g2(0) == 1.0);
  for (int j = 1; j < 5; ++j) CHECK(g2(j) == 0.0);

  const auto g1 = mean_gradient(get_problem(1), std::vector<double>{0.0});
  CHECK(g1(0) == doctest::Approx(1.0));
  CHECK(g1(1) == doctest::Approx(0.0));
  CHECK(g1(2) == doctest::Approx(1.0));
  CHECK(g1(3) == doctest::Approx(0.0));

  for (int id : {3, 9, 10, 11, 12}) {
    CAPTURE(id);
    const auto& p = get_problem(id);
    try {
      mean_gradient(p, p.space.lower());
      FAIL("expected unsupported");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Unsupported);
    }
  }
}

TEST_CASE("regression means agree with the closed forms") {
  std::mt19937_64 rng(11);
  for (const ProblemSpec& p : all_problems()) {
    if (!is_regression(p.kind)) continue;
    CAPTURE(p.id);
    const auto theta = probe_theta(p);
    for (int k = 0; k < 20; ++k) {
      const Point x = random_point(p.space, rng);
      double expected = 0.0;
      REQUIRE(oracle::regression_mean(p.id, x, theta, expected));
      CHECK(p.predictor(x, theta) == doctest::Approx(expected).epsilon(1e-13));
    }
  }
}

TEST_CASE("regression gradients match central differences") {
  std::mt19937_64 rng(12);
  for (const ProblemSpec& p : all_problems()) {
    if (!is_regression(p.kind)) continue;
    CAPTURE(p.id);
    const auto theta = probe_theta(p);
    for (int k = 0; k < 100; ++k) {
      const Point x = random_point(p.space, rng);
      const auto eta = [&](std::span<const double> t) {
        double v = 0.0;
        oracle::regression_mean(p.id, x, t, v);
        return v;
      };
      const Eigen::VectorXd fd = oracle::fd_gradient(eta, theta);
      const Eigen::VectorXd g = p.predictor_gradient(x, theta);
      if (fd.norm() < 1e-12) {
        CHECK(g.norm() < 1e-9);
        continue;
      }
      CHECK(rel_err(g, fd) < 1e-6);
    }
  }
}

TEST_CASE("regression unit information is the outer product of the gradient") {
  std::mt19937_64 rng(13);
  for (const ProblemSpec& p : all_problems()) {
    if (!is_regression(p.kind)) continue;
    const Point x = random_point(p.space, rng);
    const Eigen::VectorXd f = mean_gradient(p, x);
    CHECK((unit_information(p, x) - f * f.transpose()).norm() <= 1e-14 * (1.0 + f.squaredNorm()));
  }
}

TEST_CASE("GLM unit information matches the log-likelihood Hessian") {
  std::mt19937_64 rng(14);
  for (int id : {3, 9, 10, 11, 12}) {
    const ProblemSpec& p = get_problem(id);
    CAPTURE(id);
    for (int k = 0; k < 20; ++k) {
      const Point x = random_point(p.space, rng);
      const auto ll = [&](std::span<const double> t) {
        return oracle::glm_expected_loglik(id, x, t, p.theta);
      };
      const Eigen::MatrixXd fisher = -oracle::fd_hessian(ll, p.theta);
      const InfoMatrix m = unit_information(p, x);
      CHECK((m - fisher).norm() / fisher.norm() < 1e-5);
    }
  }
}

TEST_CASE("GLM unit information is positive semidefinite") {
  std::mt19937_64 rng(15);
  for (int id : {3, 9, 10, 11, 12}) {
    const ProblemSpec& p = get_problem(id);
    for (int k = 0; k < 100; ++k) {
      const InfoMatrix m = unit_information(p, random_point(p.space, rng));
      const Eigen::SelfAdjointEigenSolver<InfoMatrix> eig(m, Eigen::EigenvaluesOnly);
      CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * std::max(1e-300, m.norm()));
    }
  }
}

TEST_CASE("logistic weight at the origin") {
  const ProblemSpec& p = get_problem(10);
  const InfoMatrix m = unit_information(p, std::vector<double>(5, 0.0));
  const double mu = 1.0 / (1.0 + std::exp(-0.5));
  CHECK(mu == doctest::Approx(0.6225).epsilon(1e-4));
  CHECK(m(0, 0) == doctest::Approx(mu * (1.0 - mu)).epsilon(1e-14));
  CHECK(m.norm() == doctest::Approx(mu * (1.0 - mu)).epsilon(1e-14));
}

TEST_CASE("multinomial probabilities at the origin of problem 3") {
  const ProblemSpec& p = get_problem(3);
  const double z = 1.0 + std::exp(1.0) + std::exp(-1.0);
  const double p1 = std::exp(1.0) / z, p2 = std::exp(-1.0) / z;
  const InfoMatrix m = unit_information(p, std::vector<double>(3, 0.0));
  // h = e_1, so only the intercept entries of each block are nonzero.
  CHECK(m(0, 0) == doctest::Approx(p1 * (1 - p1)).epsilon(1e-14));
  CHECK(m(4, 4) == doctest::Approx(p2 * (1 - p2)).epsilon(1e-14));
  CHECK(m(0, 4) == doctest::Approx(-p1 * p2).epsilon(1e-14));
  CHECK(std::abs(m(1, 1)) == 0.0);
}

TEST_CASE("probit underflow and degenerate gamma mean are flagged") {
  const ProblemSpec base = get_problem(9);
  const ProblemSpec p = with_overrides(base, std::vector<double>{-60, 0, 0, 0, 0, 0}, {}, {});
  UnitInfoDiagnostics diag;
  const InfoMatrix m = unit_information(p, std::vector<double>(5, 0.0), &diag);
  CHECK(diag.probit_underflow);
  CHECK(m.norm() == 0.0);

  UnitInfoDiagnostics g;
  const InfoMatrix mg = unit_information(get_problem(11), std::vector<double>(5, 0.0), &g);
  CHECK(g.degenerate_mean);
  CHECK(mg.norm() == 0.0);
}

TEST_CASE("overrides replace theta and bounds") {
  const ProblemSpec p = with_overrides(get_problem(6), std::vector<double>{2.0, 0.5},
                                       std::vector<double>{0.1}, std::vector<double>{4.0});
  CHECK(p.theta == std::vector<double>{2.0, 0.5});
  CHECK(p.space.lower() == std::vector<double>{0.1});
  const auto g = mean_gradient(p, std::vector<double>{1.0});
  CHECK(g(0) == doctest::Approx(1.0 / 1.5));
  CHECK_THROWS_AS(with_overrides(get_problem(6), std::vector<double>{1.0}, {}, {}), Error);
}
