#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "oed/design.hpp"

namespace oed {

/// Flat layout [x_1, w_1, x_2, w_2, ..., x_n, w_n] with each x_i of length
/// n_factors.
struct Encoding {
  std::size_t n_supp = 0;
  std::size_t n_factors = 0;

  std::size_t block() const { return n_factors + 1; }
  std::size_t dim() const { return n_supp * block(); }

  static Encoding for_problem(const ProblemSpec& problem);
};

/// Per-gene box: factor bounds for coordinates, [0, 1] for weights.
struct SearchBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const { return lower.size(); }
};

SearchBounds search_bounds(const Encoding& enc, const DesignSpace& space);

struct RepairConfig {
  double merge_eps = 0.0;    // Euclidean merge threshold, > 0
  double min_weight = 0.01;  // rows lighter than this are dropped

  /// merge_eps = 0.025 * diameter(space), min_weight = 0.01.
  static RepairConfig defaults_for(const DesignSpace& space);
  void validate() const;
};

/// Weights are taken as stored; feasibility is repair's job.
Design decode(std::span<const double> vector, const Encoding& enc);
std::vector<double> encode(const Design& design, const Encoding& enc);

/// Repairs one individual in place: clamp, normalize weights, merge
/// near-duplicate support points, drop light rows, pad with zero-weight
/// rows at the lower corner, renormalize.
void repair_in_place(std::span<double> vector, const Encoding& enc, const DesignSpace& space,
                     const RepairConfig& cfg);

std::vector<std::vector<double>> repair(const std::vector<std::vector<double>>& population,
                                        const Encoding& enc, const DesignSpace& space,
                                        const RepairConfig& cfg);

}  // namespace oed
