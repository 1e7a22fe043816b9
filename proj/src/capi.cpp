#include "oed/oed.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>

#include "oed/criteria.hpp"
#include "oed/error.hpp"
#include "oed/harness.hpp"
#include "oed/io.hpp"
#include "oed/models.hpp"

struct oed_problem {
  oed::ProblemSpec spec;
};

struct oed_design {
  oed::Design design;
};

struct oed_result {
  oed::OutputRecord record;
  oed_design design;
  long long fes = 0;
};

namespace {

thread_local std::string g_last_error;

oed_status status_for(oed::ErrorKind kind) {
  switch (kind) {
    case oed::ErrorKind::NotFound: return OED_ERR_NOT_FOUND;
    case oed::ErrorKind::Singular: return OED_ERR_SINGULAR;
    case oed::ErrorKind::Io: return OED_ERR_IO;
    case oed::ErrorKind::Structural:
    case oed::ErrorKind::Unsupported:
    case oed::ErrorKind::Config:
    case oed::ErrorKind::Parse: return OED_ERR_INVALID_ARGUMENT;
  }
  return OED_ERR_INTERNAL;
}

template <class F>
oed_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return OED_OK;
  } catch (const oed::Error& e) {
    g_last_error = e.what();
    return status_for(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return OED_ERR_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) oed::fail(oed::ErrorKind::Structural, what);
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

oed::Criterion criterion_arg(const char* text) {
  require(text != nullptr, "criterion is null");
  return oed::parse_criterion(text);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) oed::fail(oed::ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) oed::fail(oed::ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace

extern "C" {

const char* oed_last_error(void) { return g_last_error.c_str(); }

void oed_string_free(char* s) { delete[] s; }

const char* oed_version(void) { return "1.0.0"; }

oed_status oed_problem_get(int id, oed_problem** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new oed_problem{oed::get_problem(id)};
  });
}

oed_status oed_problem_load(const char* path, oed_problem** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new oed_problem{oed::load_problem_file(path)};
  });
}

void oed_problem_free(oed_problem* problem) { delete problem; }

oed_status oed_problem_info(const oed_problem* problem, int* id, size_t* n_factors,
                            size_t* n_params, size_t* n_supp) {
  return guarded([&] {
    require(problem != nullptr, "problem is null");
    if (id) *id = problem->spec.id;
    if (n_factors) *n_factors = problem->spec.n_factors();
    if (n_params) *n_params = static_cast<size_t>(problem->spec.p);
    if (n_supp) *n_supp = static_cast<size_t>(problem->spec.n_supp);
  });
}

oed_status oed_problem_bounds(const oed_problem* problem, double* lower, double* upper) {
  return guarded([&] {
    require(problem != nullptr && lower != nullptr && upper != nullptr, "null argument");
    const auto& s = problem->spec.space;
    std::copy(s.lower().begin(), s.lower().end(), lower);
    std::copy(s.upper().begin(), s.upper().end(), upper);
  });
}

oed_status oed_design_create(size_t n_points, size_t n_factors, const double* points,
                             const double* weights, oed_design** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    require(n_points > 0 && n_factors > 0, "design needs at least one point and one factor");
    require(points != nullptr && weights != nullptr, "null argument");
    auto d = std::make_unique<oed_design>();
    for (size_t i = 0; i < n_points; ++i) {
      d->design.points.emplace_back(points + i * n_factors, points + (i + 1) * n_factors);
      d->design.weights.push_back(weights[i]);
    }
    *out = d.release();
  });
}

oed_status oed_design_load(const char* path, oed_design** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new oed_design{oed::load_design_file(path)};
  });
}

oed_status oed_design_from_json(const char* text, oed_design** out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "null argument");
    *out = new oed_design{oed::design_from_json(text)};
  });
}

oed_status oed_design_to_json(const oed_design* design, char** out) {
  return guarded([&] {
    require(design != nullptr && out != nullptr, "null argument");
    *out = dup_string(oed::design_to_json(design->design));
  });
}

size_t oed_design_size(const oed_design* design) { return design ? design->design.size() : 0; }

size_t oed_design_factors(const oed_design* design) {
  return design && design->design.size() ? design->design.points.front().size() : 0;
}

oed_status oed_design_get(const oed_design* design, size_t index, double* point, double* weight) {
  return guarded([&] {
    require(design != nullptr, "design is null");
    require(index < design->design.size(), "design index out of range");
    const auto& p = design->design.points[index];
    if (point) std::copy(p.begin(), p.end(), point);
    if (weight) *weight = design->design.weights[index];
  });
}

void oed_design_free(oed_design* design) { delete design; }

oed_status oed_criterion_value(const oed_problem* problem, const oed_design* design,
                               const char* criterion, double* out) {
  return guarded([&] {
    require(problem != nullptr && design != nullptr && out != nullptr, "null argument");
    const oed::Criterion c = criterion_arg(criterion);
    *out = oed::criterion_value(c, oed::information_matrix(design->design, problem->spec));
  });
}

void oed_solve_options_init(oed_solve_options* o) {
  if (!o) return;
  o->variant = "lshade";
  o->max_fes = 0;
  o->seed = 1;
  o->merge_eps = 0.0;
  o->min_weight = -1.0;
  o->np_init = 0;
  o->code_third_bin = 0;
}

oed_status oed_solve(const oed_problem* problem, const char* criterion,
                     const oed_solve_options* options, oed_result** out) {
  return guarded([&] {
    require(problem != nullptr && out != nullptr, "null argument");
    oed_solve_options o;
    oed_solve_options_init(&o);
    if (options) o = *options;
    require(o.variant != nullptr, "variant is null");
    const oed::Criterion c = criterion_arg(criterion);
    const oed::ProblemSpec& spec = problem->spec;

    const oed::Variant v = oed::parse_variant(o.variant);
    const long long fes = o.max_fes > 0 ? o.max_fes : oed::default_max_fes(spec.id);
    oed::EngineConfig cfg = oed::EngineConfig::defaults(v, fes, o.seed);
    if (o.np_init > 0) {
      cfg.np_init = o.np_init;
      if (v == oed::Variant::Shade) cfg.params.history_size = o.np_init;
    }
    cfg.params.code_third_bin = o.code_third_bin != 0;
    cfg.validate();

    oed::RepairConfig repair = oed::RepairConfig::defaults_for(spec.space);
    if (o.merge_eps > 0.0) repair.merge_eps = o.merge_eps;
    if (o.min_weight >= 0.0) repair.min_weight = o.min_weight;

    const oed::SolveOutcome outcome = oed::solve(spec, c, cfg, repair);
    auto r = std::make_unique<oed_result>();
    r->record.problem = spec.id;
    r->record.criterion = c;
    r->record.variant = oed::to_string(v);
    r->record.design = outcome.design;
    r->record.criterion_value = outcome.criterion_value;
    r->record.seed = o.seed;
    r->fes = outcome.record.fes;
    try {
      r->record.efficiency_bound =
          oed::efficiency_bound(c, outcome.design, spec).efficiency_lower_bound;
    } catch (const oed::Error& e) {
      if (e.kind() != oed::ErrorKind::Singular) throw;
      r->record.efficiency_bound = 0.0;  // budget too small to reach a regular design
    }
    r->design.design = outcome.design;
    *out = r.release();
  });
}

double oed_result_value(const oed_result* r) {
  return r ? r->record.criterion_value : std::numeric_limits<double>::quiet_NaN();
}

double oed_result_bound(const oed_result* r) {
  return r ? r->record.efficiency_bound : std::numeric_limits<double>::quiet_NaN();
}

long long oed_result_fes(const oed_result* r) { return r ? r->fes : 0; }

const oed_design* oed_result_design(const oed_result* r) { return r ? &r->design : nullptr; }

oed_status oed_result_format(const oed_result* r, oed_format format, char** out) {
  return guarded([&] {
    require(r != nullptr && out != nullptr, "null argument");
    switch (format) {
      case OED_FORMAT_JSON: *out = dup_string(oed::output_record_to_json(r->record)); return;
      case OED_FORMAT_CSV: *out = dup_string(oed::output_record_to_csv(r->record)); return;
    }
    oed::fail(oed::ErrorKind::Config, "unknown output format");
  });
}

void oed_result_free(oed_result* r) { delete r; }

oed_status oed_verify(const oed_problem* problem, const char* criterion, const oed_design* design,
                      char** report_json, double* bound) {
  return guarded([&] {
    require(problem != nullptr && design != nullptr, "null argument");
    const oed::Criterion c = criterion_arg(criterion);
    const oed::CertificationReport rep = oed::efficiency_bound(c, design->design, problem->spec);
    if (bound) *bound = rep.efficiency_lower_bound;
    if (report_json) *report_json = dup_string(oed::certification_to_json(rep, c));
  });
}

oed_status oed_sensitivity_grid(const oed_problem* problem, const char* criterion,
                                const oed_design* design, int resolution, const double* slice,
                                size_t slice_len, char** csv) {
  return guarded([&] {
    require(problem != nullptr && design != nullptr && csv != nullptr, "null argument");
    const oed::Criterion c = criterion_arg(criterion);
    if (resolution < 2) oed::fail(oed::ErrorKind::Config, "resolution must be at least 2");
    const auto& space = problem->spec.space;
    const std::size_t nf = space.n_factors();
    const std::size_t free = std::min<std::size_t>(nf, 2);
    if (slice_len != nf - free)
      oed::fail(oed::ErrorKind::Config,
                nf > 2 ? "a slice must fix factors 3.." + std::to_string(nf) +
                             " (" + std::to_string(nf - 2) + " values)"
                       : std::string("this problem takes no slice"));
    require(slice_len == 0 || slice != nullptr, "slice is null");

    const oed::SensitivityFunction s(c, design->design, problem->spec);
    oed::Point x(nf);
    for (std::size_t j = free; j < nf; ++j) {
      x[j] = slice[j - free];
      if (x[j] < space.lower()[j] || x[j] > space.upper()[j])
        oed::fail(oed::ErrorKind::Config, "slice value outside the design space");
    }
    auto coord = [&](std::size_t j, int k) {
      const double lo = space.lower()[j], hi = space.upper()[j];
      return k == resolution - 1 ? hi : lo + (hi - lo) * k / (resolution - 1);
    };

    std::ostringstream out;
    for (std::size_t j = 0; j < nf; ++j) out << 'x' << (j + 1) << ',';
    out << "S\n";
    const int rows2 = free == 2 ? resolution : 1;
    for (int a = 0; a < resolution; ++a) {
      x[0] = coord(0, a);
      for (int b = 0; b < rows2; ++b) {
        if (free == 2) x[1] = coord(1, b);
        for (double v : x) out << oed::format_sci(v) << ',';
        out << oed::format_sci(s(x)) << '\n';
      }
    }
    *csv = dup_string(out.str());
  });
}

oed_status oed_benchmark(const char* plan_text, const char* out_dir, int compare, char** summary) {
  return guarded([&] {
    require(plan_text != nullptr && out_dir != nullptr, "null argument");
    const oed::ExperimentPlan plan = oed::parse_plan(plan_text);
    plan.validate();

    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir / "traces", ec);
    if (ec) oed::fail(oed::ErrorKind::Io, "cannot create " + (dir / "traces").string() + ": " +
                                              ec.message());
    // Fail on an unwritable directory before spending the compute budget.
    write_text(dir / "summary.csv", "");

    const oed::ExperimentResults results = oed::run_experiment(plan);
    for (const auto& [key, cell] : results)
      if (cell.partial) oed::fail(oed::ErrorKind::Config, cell.error);

    std::ostringstream csv;
    oed::write_summary_csv(csv, results, plan.criterion);
    if (compare) {
      csv << '\n';
      oed::write_comparison_csv(csv, results, plan.variants);
    }
    write_text(dir / "summary.csv", csv.str());

    for (const auto& [key, cell] : results) {
      std::ostringstream trace;
      for (std::size_t r = 0; r < cell.runs.size(); ++r)
        oed::write_trace_jsonl(trace, key.first, key.second, static_cast<int>(r), cell.runs[r]);
      write_text(dir / "traces" /
                     ("p" + std::to_string(key.first) + "_" + oed::to_string(key.second) + ".jsonl"),
                 trace.str());
    }
    if (summary) *summary = dup_string(csv.str());
  });
}

}  // extern "C"
