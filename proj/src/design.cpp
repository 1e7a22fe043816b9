#include "oed/design.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oed/error.hpp"
#include "oed/models.hpp"

namespace oed {

DesignSpace::DesignSpace(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.empty() || lower_.size() != upper_.size())
    fail(ErrorKind::Structural, "design space bounds must be nonempty and of equal length");
  for (std::size_t j = 0; j < lower_.size(); ++j) {
    if (!(lower_[j] < upper_[j]))
      fail(ErrorKind::Structural,
           "design space factor " + std::to_string(j + 1) + " has lower >= upper");
  }
}

double DesignSpace::diameter() const {
  double s = 0.0;
  for (std::size_t j = 0; j < lower_.size(); ++j) {
    const double w = upper_[j] - lower_[j];
    s += w * w;
  }
  return std::sqrt(s);
}

bool DesignSpace::contains(std::span<const double> x, double tol) const {
  if (x.size() != lower_.size()) return false;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x[j] < lower_[j] - tol || x[j] > upper_[j] + tol) return false;
  return true;
}

double Design::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

std::size_t Design::support_size(double tol) const {
  return static_cast<std::size_t>(
      std::count_if(weights.begin(), weights.end(), [tol](double w) { return w > tol; }));
}

Point clamp_to_space(std::span<const double> x, const DesignSpace& space) {
  Point out(x.begin(), x.end());
  const auto& lo = space.lower();
  const auto& hi = space.upper();
  for (std::size_t j = 0; j < out.size() && j < lo.size(); ++j)
    out[j] = std::min(std::max(out[j], lo[j]), hi[j]);
  return out;
}

void accumulate_information(const ProblemSpec& problem, std::span<const double> x,
                            double weight, InfoMatrix& m) {
  if (weight == 0.0) return;
  add_unit_information(problem, x, weight, m);
}

InfoMatrix information_matrix(const Design& design, const ProblemSpec& problem) {
  if (design.points.size() != design.weights.size())
    fail(ErrorKind::Structural, "design has mismatched point and weight counts");
  InfoMatrix m = InfoMatrix::Zero(problem.p, problem.p);
  for (std::size_t i = 0; i < design.points.size(); ++i) {
    if (design.points[i].size() != problem.n_factors())
      fail(ErrorKind::Structural, "support point " + std::to_string(i + 1) + " has " +
                                      std::to_string(design.points[i].size()) +
                                      " coordinates, problem expects " +
                                      std::to_string(problem.n_factors()));
    accumulate_information(problem, design.points[i], design.weights[i], m);
  }
  return m;
}

}  // namespace oed
