#include "oracles.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace oracle {
namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double linear_predictor(std::span<const double> x, std::span<const double> t) {
  double eta = t[0];
  for (std::size_t j = 0; j < x.size(); ++j) eta += t[j + 1] * x[j];
  return eta;
}

double gamma_inner(std::span<const double> x, std::span<const double> t) {
  return t[0] * x[0] + t[1] * x[0] * x[1] + t[2] * x[1] * x[2] + t[3] * x[2] * x[3] +
         t[4] * x[3] * x[4];
}

double step_for(double t) { return 1e-6 * (1.0 + std::abs(t)); }

}  // namespace

bool regression_mean(int problem, std::span<const double> x, std::span<const double> t,
                     double& out) {
  switch (problem) {
    case 1:
      out = t[0] * std::exp(-t[1] * x[0]) + t[2] * std::exp(-t[3] * x[0]);
      return true;
    case 2:
      out = t[0] + t[1] * x[0] + t[2] * x[0] * x[0] + t[3] * x[1] + t[4] * x[0] * x[1];
      return true;
    case 4:
      out = t[0] * std::exp(t[1] * x[0]) + t[2] * std::exp(t[3] * x[0]);
      return true;
    case 5:
      out = t[0] * t[2] * x[0] / (1.0 + t[0] * x[0] + t[1] * x[1]);
      return true;
    case 6:
      out = t[0] * x[0] / (t[1] + x[0]);
      return true;
    case 7:
      out = t[0] * x[0] / (t[1] * (1.0 + x[1] / t[2]) + x[0] * (1.0 + x[1] / t[3]));
      return true;
    case 8:
      out = t[0] * x[0] + t[1] * x[1] + t[2] * x[2] + t[3] * x[0] * x[1] + t[4] * x[0] * x[2] +
            t[5] * x[1] * x[2] + t[6] / x[0] + t[7] / x[1] + t[8] / x[2];
      return true;
    default:
      return false;
  }
}

double glm_expected_loglik(int problem, std::span<const double> x, std::span<const double> t,
                           std::span<const double> t0) {
  switch (problem) {
    case 9: {
      const double y = normal_cdf(linear_predictor(x, t0));
      const double eta = linear_predictor(x, t);
      return y * std::log(normal_cdf(eta)) + (1.0 - y) * std::log(normal_cdf(-eta));
    }
    case 10: {
      const double y = logistic(linear_predictor(x, t0));
      const double eta = linear_predictor(x, t);
      return y * std::log(logistic(eta)) + (1.0 - y) * std::log(logistic(-eta));
    }
    case 11: {
      const double g0 = gamma_inner(x, t0);
      const double mu = std::pow(gamma_inner(x, t), 2);
      return -std::log(mu) - g0 * g0 / mu;
    }
    case 3:
    case 12: {
      // Only -logsumexp(0, e1, e2) is kept: the y terms are linear in theta.
      // Subtracting the predictor that dominates at t0 (also linear) leaves
      // a small log1p argument, so roundoff stays below the curvature.
      const std::size_t q = x.size() + 1;
      const double e1 = linear_predictor(x, t.subspan(0, q));
      const double e2 = linear_predictor(x, t.subspan(q, q));
      const double r1 = linear_predictor(x, t0.subspan(0, q));
      const double r2 = linear_predictor(x, t0.subspan(q, q));
      const int k = r1 >= std::max(0.0, r2) ? 1 : (r2 > 0.0 ? 2 : 0);
      const double ek = k == 1 ? e1 : (k == 2 ? e2 : 0.0);
      double rest = 0.0;
      if (k != 0) rest += std::exp(-ek);
      if (k != 1) rest += std::exp(e1 - ek);
      if (k != 2) rest += std::exp(e2 - ek);
      return -std::log1p(rest);
    }
    default:
      throw std::invalid_argument("not a GLM problem");
  }
}

Eigen::VectorXd fd_gradient(const std::function<double(std::span<const double>)>& f,
                            std::span<const double> at) {
  Vec t(at.begin(), at.end());
  Eigen::VectorXd g(static_cast<Eigen::Index>(t.size()));
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double h = step_for(at[j]);
    t[j] = at[j] + h;
    const double up = f(t);
    t[j] = at[j] - h;
    const double down = f(t);
    t[j] = at[j];
    g(static_cast<Eigen::Index>(j)) = (up - down) / (2.0 * h);
  }
  return g;
}

namespace {

Eigen::MatrixXd central_hessian(const std::function<double(std::span<const double>)>& f,
                                std::span<const double> at, double rel_step) {
  const std::size_t n = at.size();
  Vec t(at.begin(), at.end());
  Eigen::MatrixXd hess(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  auto eval = [&](std::size_t i, double di, std::size_t j, double dj) {
    t[i] += di;
    t[j] += dj;
    const double v = f(t);
    t[i] = at[i];
    t[j] = at[j];
    return v;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double hi = rel_step * (1.0 + std::abs(at[i]));
    for (std::size_t j = i; j < n; ++j) {
      const double hj = rel_step * (1.0 + std::abs(at[j]));
      double v;
      if (i == j) {
        v = (eval(i, hi, i, 0.0) - 2.0 * f(t) + eval(i, -hi, i, 0.0)) / (hi * hi);
      } else {
        v = (eval(i, hi, j, hj) - eval(i, hi, j, -hj) - eval(i, -hi, j, hj) +
             eval(i, -hi, j, -hj)) /
            (4.0 * hi * hj);
      }
      hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      hess(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return hess;
}

}  // namespace

Eigen::MatrixXd fd_hessian(const std::function<double(std::span<const double>)>& f,
                           std::span<const double> at, double rel_step) {
  // Richardson extrapolation cancels the h^2 term of the central scheme.
  const Eigen::MatrixXd coarse = central_hessian(f, at, rel_step);
  const Eigen::MatrixXd fine = central_hessian(f, at, rel_step / 2.0);
  return (4.0 * fine - coarse) / 3.0;
}

double exact_rank_sum_p(std::span<const double> a, std::span<const double> b) {
  const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
  if (n > 24) throw std::invalid_argument("exact enumeration limited to 24 values");
  Vec pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  Vec rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double less = 0.0, equal = 0.0;
    for (double v : pooled) {
      if (v < pooled[i]) less += 1.0;
      if (v == pooled[i]) equal += 1.0;
    }
    rank[i] = less + (equal + 1.0) / 2.0;
  }
  double observed = 0.0;
  for (std::size_t i = n1; i < n; ++i) observed += rank[i];
  const double mean = static_cast<double>(n2) * static_cast<double>(n + 1) / 2.0;
  const double dev = std::abs(observed - mean);

  std::uint64_t total = 0, extreme = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != n2) continue;
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) w += rank[i];
    ++total;
    if (std::abs(w - mean) >= dev - 1e-9) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

oed::Design table8_design(int problem, oed::Criterion c) {
  const bool d = c == oed::Criterion::D;
  oed::Design out;
  auto add = [&](oed::Point x, double w) {
    out.points.push_back(std::move(x));
    out.weights.push_back(w);
  };
  const double third = 1.0 / 3.0;
  switch (problem) {
    case 1:
      if (d) {
        for (double x : {0.0, 0.3141, 1.1307, 2.7523}) add({x}, 0.25);
      } else {
        add({0.0}, 0.0857), add({0.2723}, 0.1957), add({1.1827}, 0.2861), add({3.0}, 0.4325);
      }
      break;
    case 2:
      if (d) {
        add({-1, 0}, 0.1875), add({-1, 1}, 0.1875), add({0, 1}, 0.125), add({0, 0}, 0.125);
        add({1, 1}, 0.1875), add({1, 0}, 0.1875);
      } else {
        add({-1, 0}, 0.1859), add({-1, 1}, 0.1399), add({0, 0}, 0.2287), add({0, 1}, 0.1197);
        add({1, 1}, 0.1399), add({1, 0}, 0.1859);
      }
      break;
    case 4:
      if (d) {
        for (double x : {0.0, 0.3305, 0.7692, 1.0}) add({x}, 0.25);
      } else {
        add({0.0}, 0.1888), add({0.3011}, 0.3509), add({0.7926}, 0.3119), add({1.0}, 0.1484);
      }
      break;
    case 5:
      if (d) {
        add({0.2804, 0}, third), add({3, 0}, third), add({3, 0.7951}, third);
      } else {
        add({0.2603, 0}, 0.4785), add({3, 0}, 0.0595), add({3, 0.826}, 0.462);
      }
      break;
    case 6:
      if (d) {
        add({0.7143}, 0.5), add({5.0}, 0.5);
      } else {
        add({0.5373}, 0.6696), add({5.0}, 0.3304);
      }
      break;
    case 7:
      if (d) {
        add({3.1579, 0}, 0.25), add({4.0793, 2.6754}, 0.25), add({30, 0}, 0.25);
        add({30, 3.5789}, 0.25);
      } else {
        add({2.4402, 0}, 0.2651), add({3.3919, 3.2516}, 0.3234), add({30, 0}, 0.1398);
        add({30, 4.7409}, 0.2717);
      }
      break;
    default:
      throw std::invalid_argument("no published design for this problem");
  }
  return out;
}

TwoPointOptimum problem6_two_point_grid(double step) {
  // f(x) = (x / (1 + x), -x / (1 + x)^2) at theta = (1, 1).
  const int n = static_cast<int>(std::lround(5.0 / step));
  const int nw = static_cast<int>(std::lround(1.0 / step));
  Vec f1(n + 1), f2(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double x = i * step;
    f1[i] = x / (1.0 + x);
    f2[i] = -x / ((1.0 + x) * (1.0 + x));
  }
  // Joint search over both points and the first point's weight.
  double best_det = -1.0, best_w = 0.0;
  int ba = 0, bb = 0;
  for (int a = 0; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b) {
      const double cross = f1[a] * f2[b] - f2[a] * f1[b];
      const double c2 = cross * cross;
      for (int k = 1; k < nw; ++k) {
        const double w = k * step;
        const double det = w * (1.0 - w) * c2;
        if (det > best_det) best_det = det, best_w = w, ba = a, bb = b;
      }
    }
  TwoPointOptimum out;
  out.x1 = ba * step;
  out.x2 = bb * step;
  out.w1 = best_w;
  out.value = -std::log(best_det);
  return out;
}

TwoPointOptimum problem6_a_optimum() {
  auto f = [](double x) { return std::pair{x / (1.0 + x), -x / ((1.0 + x) * (1.0 + x))}; };
  auto trace_inv = [&](double a, double b) {
    const auto [a1, a2] = f(a);
    const auto [b1, b2] = f(b);
    const double cross = a1 * b2 - a2 * b1;
    if (cross == 0.0) return std::numeric_limits<double>::infinity();
    const double s = std::hypot(a1, a2) + std::hypot(b1, b2);
    return s * s / (cross * cross);
  };
  double best = std::numeric_limits<double>::infinity(), ba = 0.0, bb = 0.0;
  for (int i = 0; i <= 5000; ++i)
    for (int j = i + 1; j <= 5000; ++j) {
      const double v = trace_inv(i * 1e-3, j * 1e-3);
      if (v < best) best = v, ba = i * 1e-3, bb = j * 1e-3;
    }
  // Golden-section refinement of each coordinate in turn.
  auto refine = [&](double& x, double lo, double hi, auto&& obj) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::max(lo, x - 2e-3), b = std::min(hi, x + 2e-3);
    while (b - a > 1e-13) {
      const double c = b - g * (b - a), d = a + g * (b - a);
      if (obj(c) < obj(d)) b = d; else a = c;
    }
    x = 0.5 * (a + b);
  };
  for (int sweep = 0; sweep < 4; ++sweep) {
    refine(ba, 0.0, 5.0, [&](double x) { return trace_inv(x, bb); });
    refine(bb, 0.0, 5.0, [&](double x) { return trace_inv(ba, x); });
  }
  const auto [a1, a2] = f(ba);
  const auto [b1, b2] = f(bb);
  const double na = std::hypot(a1, a2), nb = std::hypot(b1, b2);
  TwoPointOptimum out;
  out.x1 = ba;
  out.x2 = bb;
  out.w1 = nb / (na + nb);
  out.value = trace_inv(ba, bb);
  return out;
}

}  // namespace oracle
