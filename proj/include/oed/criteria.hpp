#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "oed/design.hpp"

namespace oed {

enum class Criterion { D, A };

const char* to_string(Criterion c);
/// Accepts "d"/"D"/"a"/"A"; throws ErrorKind::NotFound otherwise.
Criterion parse_criterion(std::string_view text);

/// Objective value assigned to designs with a singular information matrix.
inline constexpr double kSingularPenalty = 1e10;

/// -log det M via a scaled Cholesky factorization; kSingularPenalty when M
/// is numerically singular.
double d_criterion(const InfoMatrix& m);
/// trace(M^-1); kSingularPenalty when M is numerically singular.
double a_criterion(const InfoMatrix& m);
double criterion_value(Criterion c, const InfoMatrix& m);

/// Inverse of an information matrix with a singularity verdict. Diagonal
/// scaling is applied before factorizing so badly scaled but full-rank
/// matrices (large design spaces) are not misreported as singular.
struct InverseResult {
  bool singular = true;
  double log_det = 0.0;
  InfoMatrix inverse;
};
InverseResult invert_information(const InfoMatrix& m);

/// Equilibrated Cholesky factorization: M = S^-1 L L' S^-1 with S diagonal.
/// `ok` is false when M is treated as singular.
struct ScaledCholesky {
  bool ok = false;
  double log_det = 0.0;
  Eigen::VectorXd scale;
  Eigen::LLT<InfoMatrix> llt;
};
ScaledCholesky factor_information(const InfoMatrix& m);

/// Sensitivity function S(x, design) with the inverse cached; construct
/// once and evaluate at many x. Throws ErrorKind::Singular when the
/// design's information matrix is singular.
class SensitivityFunction {
 public:
  SensitivityFunction(Criterion c, const Design& design, const ProblemSpec& problem);

  double operator()(std::span<const double> x) const;

  Criterion criterion() const { return criterion_; }
  /// trace(M^-1) for A, p for D: the normalizer in the efficiency bound.
  double scale() const { return scale_; }

 private:
  Criterion criterion_;
  const ProblemSpec* problem_;
  using WideMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using WideVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

  WideMatrix lower_;      // Cholesky factor of the equilibrated M
  WideVector scale_vec_;  // equilibration, M = S^-1 L L' S^-1
  WideMatrix gram_;       // L^-1 S^2 L^-T, A only
  long double offset_ = 0.0;
  double scale_ = 0.0;
};

double d_sensitivity(std::span<const double> x, const Design& design, const ProblemSpec& problem);
double a_sensitivity(std::span<const double> x, const Design& design, const ProblemSpec& problem);

/// Resolution of the search for max S(x) over the design space.
struct GridSpec {
  int points_per_factor_low_dim = 512;  // used when n_factors <= 2
  int points_per_factor_high_dim = 64;  // reduced until the grid fits max_samples
  std::size_t max_samples = std::size_t{1} << 20;
  int random_restarts = 50;             // n_factors >= 3 only
  std::uint64_t seed = 0x5EED;

  /// Per-factor resolution actually used for an n-factor space.
  int resolution_for(std::size_t n_factors) const;
};

struct SupportSensitivity {
  Point point;
  double weight = 0.0;
  double sensitivity = 0.0;
};

struct CertificationReport {
  double max_sensitivity = 0.0;
  Point arg_max;
  double efficiency_lower_bound = 0.0;
  std::vector<SupportSensitivity> support_sensitivities;
};

/// Maximizes S over the grid, polishes the best cells, and converts the
/// maximum into the criterion's efficiency lower bound (capped at 1).
/// Throws ErrorKind::Singular for singular designs.
CertificationReport efficiency_bound(Criterion c, const Design& design,
                                     const ProblemSpec& problem, const GridSpec& grid = {});

}  // namespace oed
