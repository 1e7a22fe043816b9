/* C interface to the optimal-design library. Every function returns an
 * oed_status; on failure oed_last_error() describes what went wrong.
 * Strings returned through char** are owned by the caller and released
 * with oed_string_free(). */
#ifndef OED_OED_H
#define OED_OED_H

#include <stddef.h>
#include <stdint.h>

#if defined(OED_BUILDING_LIBRARY)
#define OED_API __attribute__((visibility("default")))
#else
#define OED_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum oed_status {
  OED_OK = 0,
  OED_ERR_INTERNAL = 1,
  OED_ERR_INVALID_ARGUMENT = 2,
  OED_ERR_IO = 3,
  OED_ERR_SINGULAR = 4,
  OED_ERR_NOT_FOUND = 5
} oed_status;

typedef enum oed_format { OED_FORMAT_JSON = 0, OED_FORMAT_CSV = 1 } oed_format;

typedef struct oed_problem oed_problem;
typedef struct oed_design oed_design;
typedef struct oed_result oed_result;

/* Message for the last failed call on this thread; never NULL. */
OED_API const char* oed_last_error(void);
OED_API void oed_string_free(char* s);
OED_API const char* oed_version(void);

/* ---- problems ---- */

OED_API oed_status oed_problem_get(int id, oed_problem** out);
/* JSON override file: {"schema_version":"1","problem":N,"theta":[...],
 * "lower":[...],"upper":[...]}; theta/lower/upper optional. */
OED_API oed_status oed_problem_load(const char* path, oed_problem** out);
OED_API void oed_problem_free(oed_problem* problem);
OED_API oed_status oed_problem_info(const oed_problem* problem, int* id, size_t* n_factors,
                                    size_t* n_params, size_t* n_supp);
/* lower and upper must each hold n_factors doubles. */
OED_API oed_status oed_problem_bounds(const oed_problem* problem, double* lower, double* upper);

/* ---- designs ---- */

/* points is row-major n_points x n_factors. */
OED_API oed_status oed_design_create(size_t n_points, size_t n_factors, const double* points,
                                     const double* weights, oed_design** out);
OED_API oed_status oed_design_load(const char* path, oed_design** out);
OED_API oed_status oed_design_from_json(const char* text, oed_design** out);
OED_API oed_status oed_design_to_json(const oed_design* design, char** out);
OED_API size_t oed_design_size(const oed_design* design);
OED_API size_t oed_design_factors(const oed_design* design);
/* point must hold oed_design_factors() doubles. */
OED_API oed_status oed_design_get(const oed_design* design, size_t index, double* point,
                                  double* weight);
OED_API void oed_design_free(oed_design* design);

/* criterion: "d" or "a" (case-insensitive). Singular designs yield the
 * 1e10 penalty, not an error. */
OED_API oed_status oed_criterion_value(const oed_problem* problem, const oed_design* design,
                                       const char* criterion, double* out);

/* ---- solving ---- */

typedef struct oed_solve_options {
  const char* variant; /* e.g. "lshade", "jade", "de-rand1" */
  long long max_fes;   /* <= 0: problem default */
  uint64_t seed;
  double merge_eps;    /* <= 0: 0.025 * diameter of the design space */
  double min_weight;   /* < 0: 0.01 */
  int np_init;         /* <= 0: 50 */
  int code_third_bin;  /* CoDE: binomial crossover on the third strategy */
} oed_solve_options;

OED_API void oed_solve_options_init(oed_solve_options* options);
OED_API oed_status oed_solve(const oed_problem* problem, const char* criterion,
                             const oed_solve_options* options, oed_result** out);
OED_API double oed_result_value(const oed_result* result);
OED_API double oed_result_bound(const oed_result* result);
OED_API long long oed_result_fes(const oed_result* result);
/* Borrowed; valid until oed_result_free. */
OED_API const oed_design* oed_result_design(const oed_result* result);
OED_API oed_status oed_result_format(const oed_result* result, oed_format format, char** out);
OED_API void oed_result_free(oed_result* result);

/* ---- certification ---- */

/* JSON certification report; bound (optional) receives the efficiency
 * lower bound. OED_ERR_SINGULAR for singular designs. */
OED_API oed_status oed_verify(const oed_problem* problem, const char* criterion,
                              const oed_design* design, char** report_json, double* bound);

/* CSV of (x..., S) over a resolution^k grid, k = min(n_factors, 2). For more
 * than two factors slice must fix factors 3..n (slice_len = n_factors - 2). */
OED_API oed_status oed_sensitivity_grid(const oed_problem* problem, const char* criterion,
                                        const oed_design* design, int resolution,
                                        const double* slice, size_t slice_len, char** csv);

/* ---- benchmarks ---- */

/* Runs a key = value plan. Writes summary.csv (plus the comparison matrix
 * when compare != 0) and traces/p<id>_<variant>.jsonl under out_dir, and
 * returns the summary CSV text through summary (optional). */
OED_API oed_status oed_benchmark(const char* plan_text, const char* out_dir, int compare,
                                 char** summary);

#ifdef __cplusplus
}
#endif

#endif
