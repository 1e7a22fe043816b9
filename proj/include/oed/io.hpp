#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "oed/criteria.hpp"
#include "oed/harness.hpp"
#include "oed/models.hpp"

namespace oed {

inline constexpr const char* kSchemaVersion = "1";

// ---- design files: {"schema_version":"1","points":[[...]],"weights":[...]} --

std::string design_to_json(const Design& design);
/// Also accepts a solve record ({"design":[{"point","weight"}...]}).
/// Throws ErrorKind::Parse on malformed documents.
Design design_from_json(const std::string& text);
/// Throws ErrorKind::Io if the file cannot be read.
Design load_design_file(const std::string& path);

// ---- solve output -----------------------------------------------------------

struct OutputRecord {
  std::string schema_version = kSchemaVersion;
  int problem = 0;
  Criterion criterion = Criterion::D;
  std::string variant;
  Design design;
  double criterion_value = 0.0;
  double efficiency_bound = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const OutputRecord&) const;
};

std::string output_record_to_json(const OutputRecord& record);
OutputRecord output_record_from_json(const std::string& text);
/// Header line plus one row per support point.
std::string output_record_to_csv(const OutputRecord& record);

std::string certification_to_json(const CertificationReport& report, Criterion criterion);

// ---- CSV numbers --------------------------------------------------------------

/// Scientific notation with six significant digits, "." decimal point.
std::string format_sci(double value);

// ---- plan files -------------------------------------------------------------
//
// Flat "key = value" lines; '#' starts a comment. Keys: problems (e.g.
// "1-7" or "1,3,6"), criterion, variants, runs, seed, fes, fes.<id>,
// merge_eps, min_weight, threads.

ExperimentPlan parse_plan(const std::string& text);
ExperimentPlan load_plan_file(const std::string& path);

/// "1-7", "1,3,6", "1-3,9"; throws ErrorKind::Parse.
std::vector<int> parse_id_list(const std::string& text);
/// Comma-separated variant names; throws ErrorKind::NotFound / Parse.
std::vector<Variant> parse_variant_list(const std::string& text);

// ---- problem override files ---------------------------------------------------
//
// {"schema_version":"1","problem":6,"theta":[...],"lower":[...],"upper":[...]}
// with theta/lower/upper optional.

ProblemSpec problem_from_override_json(const std::string& text);
ProblemSpec load_problem_file(const std::string& path);

// ---- benchmark output -----------------------------------------------------------

void write_summary_csv(std::ostream& out, const ExperimentResults& results, Criterion criterion);
/// Matrix of "[losses/wins/ties]" cells, rows = target, columns = other.
void write_comparison_csv(std::ostream& out, const ExperimentResults& results,
                          const std::vector<Variant>& variants, double alpha = 0.05);
/// One JSON object per history checkpoint.
void write_trace_jsonl(std::ostream& out, int problem, Variant variant, int run_index,
                       const RunRecord& record);

std::string read_file(const std::string& path);

}  // namespace oed
