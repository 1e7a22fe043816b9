#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace oed {

using Point = std::vector<double>;
using InfoMatrix = Eigen::MatrixXd;

struct ProblemSpec;

/// Axis-aligned box of admissible factor settings.
class DesignSpace {
 public:
  DesignSpace() = default;
  /// Throws ErrorKind::Structural unless both vectors have the same nonzero
  /// length and lower[j] < upper[j].
  DesignSpace(std::vector<double> lower, std::vector<double> upper);

  std::size_t n_factors() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

  /// Euclidean length of the box diagonal.
  double diameter() const;
  bool contains(std::span<const double> x, double tol = 0.0) const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Approximate design: support points carrying probability mass.
struct Design {
  std::vector<Point> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  double total_weight() const;
  /// Number of points with weight strictly above `tol`.
  std::size_t support_size(double tol = 0.0) const;
};

Point clamp_to_space(std::span<const double> x, const DesignSpace& space);

/// Normalized information matrix sum_i w_i M(x_i, theta). Zero-weight
/// points are skipped. Throws ErrorKind::Structural on a factor-count
/// mismatch with the problem.
InfoMatrix information_matrix(const Design& design, const ProblemSpec& problem);

/// Same as information_matrix but over a flat point buffer; used on the
/// optimizer hot path to avoid building a Design.
void accumulate_information(const ProblemSpec& problem, std::span<const double> x,
                            double weight, InfoMatrix& m);

}  // namespace oed
