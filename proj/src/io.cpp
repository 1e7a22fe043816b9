#include "oed/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "oed/error.hpp"

namespace oed {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("malformed ") + what + ": " + e.what());
  }
}

void check_schema(const json& j, const char* what) {
  if (!j.is_object()) fail(ErrorKind::Parse, std::string(what) + " must be a JSON object");
  if (j.contains("schema_version") &&
      (!j["schema_version"].is_string() || j["schema_version"].get<std::string>() != kSchemaVersion))
    fail(ErrorKind::Parse, std::string(what) + ": unsupported schema_version");
}

std::vector<double> number_array(const json& j, const char* field) {
  if (!j.is_array()) fail(ErrorKind::Parse, std::string(field) + " must be an array");
  std::vector<double> v;
  for (const auto& x : j) {
    if (!x.is_number()) fail(ErrorKind::Parse, std::string(field) + " must hold numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

long long parse_integer(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::Parse, "plan key '" + key + "' expects an integer, got '" + text + "'");
}

double parse_real(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::Parse, "plan key '" + key + "' expects a number, got '" + text + "'");
}

json design_json(const Design& d) {
  json points = json::array();
  for (const auto& p : d.points) points.push_back(p);
  return json{{"schema_version", kSchemaVersion}, {"points", points}, {"weights", d.weights}};
}

Design design_from(const json& j) {
  check_schema(j, "design");
  Design d;
  // A solve record is accepted as well, so its output can be verified.
  if (j.contains("design") && !j.contains("points")) {
    const json& rows = j["design"];
    if (!rows.is_array()) fail(ErrorKind::Parse, "design must be an array");
    for (const auto& row : rows) {
      if (!row.is_object() || !row.contains("point") || !row.contains("weight") ||
          !row["weight"].is_number())
        fail(ErrorKind::Parse, "design rows need 'point' and a numeric 'weight'");
      d.points.push_back(number_array(row["point"], "point"));
      d.weights.push_back(row["weight"].get<double>());
    }
    if (d.points.empty()) fail(ErrorKind::Parse, "design has no points");
    return d;
  }
  if (!j.contains("points") || !j.contains("weights"))
    fail(ErrorKind::Parse, "design needs 'points' and 'weights'");
  const json& pts = j["points"];
  if (!pts.is_array()) fail(ErrorKind::Parse, "points must be an array");
  for (const auto& p : pts) d.points.push_back(number_array(p, "points[i]"));
  d.weights = number_array(j["weights"], "weights");
  if (d.points.size() != d.weights.size())
    fail(ErrorKind::Parse, "points and weights differ in length");
  if (d.points.empty()) fail(ErrorKind::Parse, "design has no points");
  return d;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string design_to_json(const Design& design) { return design_json(design).dump(); }

Design design_from_json(const std::string& text) {
  return design_from(parse_json(text, "design file"));
}

Design load_design_file(const std::string& path) { return design_from_json(read_file(path)); }

bool OutputRecord::operator==(const OutputRecord& o) const {
  return schema_version == o.schema_version && problem == o.problem &&
         criterion == o.criterion && variant == o.variant &&
         design.points == o.design.points && design.weights == o.design.weights &&
         criterion_value == o.criterion_value && efficiency_bound == o.efficiency_bound &&
         seed == o.seed;
}

std::string output_record_to_json(const OutputRecord& r) {
  json design = json::array();
  for (std::size_t i = 0; i < r.design.size(); ++i)
    design.push_back({{"point", r.design.points[i]}, {"weight", r.design.weights[i]}});
  const json j{{"schema_version", r.schema_version},
               {"problem", r.problem},
               {"criterion", to_string(r.criterion)},
               {"variant", r.variant},
               {"design", design},
               {"criterion_value", r.criterion_value},
               {"efficiency_bound", r.efficiency_bound},
               {"seed", r.seed}};
  return j.dump(2);
}

OutputRecord output_record_from_json(const std::string& text) {
  const json j = parse_json(text, "output record");
  check_schema(j, "output record");
  OutputRecord r;
  try {
    r.schema_version = j.at("schema_version").get<std::string>();
    r.problem = j.at("problem").get<int>();
    r.criterion = parse_criterion(j.at("criterion").get<std::string>());
    r.variant = j.at("variant").get<std::string>();
    for (const auto& row : j.at("design")) {
      r.design.points.push_back(number_array(row.at("point"), "point"));
      r.design.weights.push_back(row.at("weight").get<double>());
    }
    r.criterion_value = j.at("criterion_value").get<double>();
    r.efficiency_bound = j.at("efficiency_bound").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("output record: ") + e.what());
  }
  return r;
}

std::string format_sci(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5E", value);
  return buf;
}

std::string output_record_to_csv(const OutputRecord& r) {
  std::ostringstream out;
  const std::size_t nf = r.design.size() ? r.design.points.front().size() : 0;
  out << "problem,criterion,variant,seed";
  for (std::size_t j = 0; j < nf; ++j) out << ",x" << (j + 1);
  out << ",weight,criterion_value,efficiency_bound\n";
  for (std::size_t i = 0; i < r.design.size(); ++i) {
    out << r.problem << ',' << to_string(r.criterion) << ',' << r.variant << ',' << r.seed;
    for (double x : r.design.points[i]) out << ',' << format_sci(x);
    out << ',' << format_sci(r.design.weights[i]) << ',' << format_sci(r.criterion_value) << ','
        << format_sci(r.efficiency_bound) << '\n';
  }
  return out.str();
}

std::string certification_to_json(const CertificationReport& rep, Criterion criterion) {
  json support = json::array();
  for (const auto& s : rep.support_sensitivities)
    support.push_back({{"point", s.point}, {"weight", s.weight}, {"sensitivity", s.sensitivity}});
  const json j{{"schema_version", kSchemaVersion},
               {"criterion", to_string(criterion)},
               {"max_sensitivity", rep.max_sensitivity},
               {"arg_max", rep.arg_max},
               {"efficiency_bound", rep.efficiency_lower_bound},
               {"support", support}};
  return j.dump(2);
}

std::vector<int> parse_id_list(const std::string& text) {
  std::vector<int> ids;
  for (const std::string& part : split(text, ',')) {
    if (part.empty()) fail(ErrorKind::Parse, "empty entry in problem list '" + text + "'");
    const auto dash = part.find('-', 1);
    if (dash == std::string::npos) {
      ids.push_back(static_cast<int>(parse_integer(part, "problems")));
      continue;
    }
    const long long a = parse_integer(trim(part.substr(0, dash)), "problems");
    const long long b = parse_integer(trim(part.substr(dash + 1)), "problems");
    if (b < a) fail(ErrorKind::Parse, "descending range '" + part + "'");
    for (long long i = a; i <= b; ++i) ids.push_back(static_cast<int>(i));
  }
  return ids;
}

std::vector<Variant> parse_variant_list(const std::string& text) {
  std::vector<Variant> out;
  for (const std::string& name : split(text, ',')) {
    if (name.empty()) fail(ErrorKind::Parse, "empty entry in variant list '" + text + "'");
    out.push_back(parse_variant(name));
  }
  return out;
}

ExperimentPlan parse_plan(const std::string& text) {
  ExperimentPlan plan;
  plan.variants = {Variant::Lshade};
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::Parse, "plan line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "problems") {
      plan.problem_ids = parse_id_list(value);
    } else if (key == "criterion") {
      plan.criterion = parse_criterion(value);
    } else if (key == "variants") {
      plan.variants = parse_variant_list(value);
    } else if (key == "runs") {
      plan.runs = static_cast<int>(parse_integer(value, key));
    } else if (key == "seed") {
      plan.base_seed = static_cast<std::uint64_t>(parse_integer(value, key));
    } else if (key == "fes") {
      plan.fes_all = parse_integer(value, key);
    } else if (key.rfind("fes.", 0) == 0) {
      const int id = static_cast<int>(parse_integer(key.substr(4), key));
      plan.max_fes[id] = parse_integer(value, key);
    } else if (key == "merge_eps") {
      plan.merge_eps = parse_real(value, key);
    } else if (key == "min_weight") {
      plan.min_weight = parse_real(value, key);
    } else if (key == "threads") {
      plan.threads = static_cast<int>(parse_integer(value, key));
    } else {
      fail(ErrorKind::Parse, "plan line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return plan;
}

ExperimentPlan load_plan_file(const std::string& path) { return parse_plan(read_file(path)); }

ProblemSpec problem_from_override_json(const std::string& text) {
  const json j = parse_json(text, "problem file");
  check_schema(j, "problem file");
  if (!j.contains("problem") || !j["problem"].is_number_integer())
    fail(ErrorKind::Parse, "problem file needs an integer 'problem'");
  const ProblemSpec& base = get_problem(j["problem"].get<int>());
  auto opt = [&](const char* field) -> std::optional<std::vector<double>> {
    if (!j.contains(field)) return std::nullopt;
    return number_array(j[field], field);
  };
  const auto theta = opt("theta");
  if (theta && theta->size() != base.theta.size())
    fail(ErrorKind::Structural, "theta has " + std::to_string(theta->size()) + " entries, problem " +
                                    std::to_string(base.id) + " expects " +
                                    std::to_string(base.theta.size()));
  return with_overrides(base, theta, opt("lower"), opt("upper"));
}

ProblemSpec load_problem_file(const std::string& path) {
  return problem_from_override_json(read_file(path));
}

void write_summary_csv(std::ostream& out, const ExperimentResults& results, Criterion criterion) {
  out << "problem,criterion,variant,runs,best,median,worst,mean,std,time\n";
  for (const auto& [key, cell] : results) {
    const SummaryRow& s = cell.summary;
    out << key.first << ',' << to_string(criterion) << ',' << to_string(key.second) << ','
        << s.runs << ',' << format_sci(s.best) << ',' << format_sci(s.median) << ','
        << format_sci(s.worst) << ',' << format_sci(s.mean) << ',' << format_sci(s.std) << ','
        << format_sci(s.mean_time) << '\n';
  }
}

void write_comparison_csv(std::ostream& out, const ExperimentResults& results,
                          const std::vector<Variant>& variants, double alpha) {
  out << "target";
  for (Variant v : variants) out << ',' << to_string(v);
  out << '\n';
  for (Variant target : variants) {
    out << to_string(target);
    for (Variant other : variants) {
      const ComparisonCell c = aggregate_comparison(results, target, other, alpha);
      out << ",[" << c.losses << '/' << c.wins << '/' << c.ties << ']';
    }
    out << '\n';
  }
}

void write_trace_jsonl(std::ostream& out, int problem, Variant variant, int run_index,
                       const RunRecord& record) {
  for (const auto& [fes, best] : record.history) {
    const json j{{"problem", problem}, {"variant", to_string(variant)}, {"run", run_index},
                 {"seed", record.seed},   {"fes", fes},                  {"best", best}};
    out << j.dump() << '\n';
  }
}

}  // namespace oed
