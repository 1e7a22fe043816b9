#include "oed/repair.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oed/error.hpp"
#include "oed/models.hpp"

namespace oed {
namespace {

struct Row {
  Point x;
  double w = 0.0;
};

double distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return std::sqrt(s);
}

void check_length(std::size_t got, const Encoding& enc) {
  if (got != enc.dim())
    fail(ErrorKind::Structural, "encoded vector has length " + std::to_string(got) +
                                    ", expected " + std::to_string(enc.dim()));
}

void normalize_weights(std::span<double> v, const Encoding& enc) {
  const std::size_t b = enc.block();
  double sum = 0.0;
  for (std::size_t i = 0; i < enc.n_supp; ++i) sum += v[i * b + enc.n_factors];
  for (std::size_t i = 0; i < enc.n_supp; ++i) {
    double& w = v[i * b + enc.n_factors];
    w = sum > 0.0 ? w / sum : 1.0 / static_cast<double>(enc.n_supp);
  }
}

// Sweep in sorted-row order, merging each pair closer than eps into its
// midpoint with the summed weight. Sweeps repeat until a full pass makes no
// merge, so the surviving rows are pairwise at least eps apart. Zero-weight
// rows carry no mass and are left out; merging them would only drag real
// support points toward padding rows.
void merge_close_rows(std::vector<Row>& rows, double eps) {
  for (bool merged = true; merged;) {
    merged = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].w <= 0.0) continue;
      std::size_t j = i + 1;
      while (j < rows.size()) {
        if (rows[j].w > 0.0 && distance(rows[i].x, rows[j].x) < eps) {
          for (std::size_t k = 0; k < rows[i].x.size(); ++k)
            rows[i].x[k] = 0.5 * (rows[i].x[k] + rows[j].x[k]);
          rows[i].w += rows[j].w;
          rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(j));
          merged = true;
        } else {
          ++j;
        }
      }
    }
  }
}

}  // namespace

Encoding Encoding::for_problem(const ProblemSpec& problem) {
  return Encoding{static_cast<std::size_t>(problem.n_supp), problem.n_factors()};
}

SearchBounds search_bounds(const Encoding& enc, const DesignSpace& space) {
  if (space.n_factors() != enc.n_factors)
    fail(ErrorKind::Structural, "encoding and design space disagree on factor count");
  SearchBounds b;
  b.lower.reserve(enc.dim());
  b.upper.reserve(enc.dim());
  for (std::size_t i = 0; i < enc.n_supp; ++i) {
    b.lower.insert(b.lower.end(), space.lower().begin(), space.lower().end());
    b.upper.insert(b.upper.end(), space.upper().begin(), space.upper().end());
    b.lower.push_back(0.0);
    b.upper.push_back(1.0);
  }
  return b;
}

RepairConfig RepairConfig::defaults_for(const DesignSpace& space) {
  RepairConfig cfg;
  cfg.merge_eps = 0.025 * space.diameter();
  cfg.min_weight = 0.01;
  return cfg;
}

void RepairConfig::validate() const {
  if (!(merge_eps > 0.0)) fail(ErrorKind::Config, "merge_eps must be positive");
  if (!(min_weight >= 0.0 && min_weight < 1.0))
    fail(ErrorKind::Config, "min_weight must lie in [0, 1)");
}

Design decode(std::span<const double> vector, const Encoding& enc) {
  check_length(vector.size(), enc);
  Design d;
  d.points.reserve(enc.n_supp);
  d.weights.reserve(enc.n_supp);
  for (std::size_t i = 0; i < enc.n_supp; ++i) {
    const auto row = vector.subspan(i * enc.block(), enc.block());
    d.points.emplace_back(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(enc.n_factors));
    d.weights.push_back(row[enc.n_factors]);
  }
  return d;
}

std::vector<double> encode(const Design& design, const Encoding& enc) {
  if (design.size() != enc.n_supp || design.weights.size() != enc.n_supp)
    fail(ErrorKind::Structural, "design has " + std::to_string(design.size()) +
                                    " rows, encoding expects " + std::to_string(enc.n_supp));
  std::vector<double> v;
  v.reserve(enc.dim());
  for (std::size_t i = 0; i < enc.n_supp; ++i) {
    if (design.points[i].size() != enc.n_factors)
      fail(ErrorKind::Structural, "support point has wrong factor count");
    v.insert(v.end(), design.points[i].begin(), design.points[i].end());
    v.push_back(design.weights[i]);
  }
  return v;
}

void repair_in_place(std::span<double> v, const Encoding& enc, const DesignSpace& space,
                     const RepairConfig& cfg) {
  check_length(v.size(), enc);
  const std::size_t b = enc.block();
  const std::size_t nf = enc.n_factors;
  const auto& lo = space.lower();
  const auto& hi = space.upper();

  for (std::size_t i = 0; i < enc.n_supp; ++i) {
    for (std::size_t j = 0; j < nf; ++j) v[i * b + j] = std::clamp(v[i * b + j], lo[j], hi[j]);
    v[i * b + nf] = std::clamp(v[i * b + nf], 0.0, 1.0);
  }
  normalize_weights(v, enc);

  std::vector<Row> rows(enc.n_supp);
  for (std::size_t i = 0; i < enc.n_supp; ++i) {
    rows[i].x.assign(v.begin() + static_cast<std::ptrdiff_t>(i * b),
                     v.begin() + static_cast<std::ptrdiff_t>(i * b + nf));
    rows[i].w = v[i * b + nf];
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& c) { return a.x < c.x; });

  merge_close_rows(rows, cfg.merge_eps);

  const auto heaviest = std::max_element(
      rows.begin(), rows.end(), [](const Row& a, const Row& c) { return a.w < c.w; });
  std::vector<Row> kept;
  kept.reserve(enc.n_supp);
  for (const Row& r : rows)
    if (!(r.w < cfg.min_weight)) kept.push_back(r);
  if (kept.empty()) kept.push_back(*heaviest);

  double sum = 0.0;
  for (const Row& r : kept) sum += r.w;
  for (std::size_t i = 0; i < enc.n_supp; ++i) {
    if (i < kept.size()) {
      std::copy(kept[i].x.begin(), kept[i].x.end(), v.begin() + static_cast<std::ptrdiff_t>(i * b));
      v[i * b + nf] = sum > 0.0 ? kept[i].w / sum : 1.0 / static_cast<double>(kept.size());
    } else {
      std::copy(lo.begin(), lo.end(), v.begin() + static_cast<std::ptrdiff_t>(i * b));
      v[i * b + nf] = 0.0;
    }
  }
}

std::vector<std::vector<double>> repair(const std::vector<std::vector<double>>& population,
                                        const Encoding& enc, const DesignSpace& space,
                                        const RepairConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<double>> out = population;
  for (auto& individual : out) repair_in_place(individual, enc, space, cfg);
  return out;
}

}  // namespace oed
