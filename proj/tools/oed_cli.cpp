// Command-line front end; talks to the library only through oed.h.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oed/oed.h"

namespace {

// 0 success, 2 usage / unknown input, 3 I/O, 4 numerical refusal.
int exit_code(oed_status s) {
  switch (s) {
    case OED_OK: return 0;
    case OED_ERR_INVALID_ARGUMENT:
    case OED_ERR_NOT_FOUND: return 2;
    case OED_ERR_IO: return 3;
    case OED_ERR_SINGULAR: return 4;
    case OED_ERR_INTERNAL: break;
  }
  return 1;
}

struct Failure {
  int code;
};

void check(oed_status s) {
  if (s == OED_OK) return;
  std::cerr << "oed: " << oed_last_error() << '\n';
  throw Failure{exit_code(s)};
}

void print_and_free(char* text) {
  std::cout << text;
  if (text[0] && text[std::char_traits<char>::length(text) - 1] != '\n') std::cout << '\n';
  oed_string_free(text);
}

struct Problem {
  oed_problem* p = nullptr;
  ~Problem() { oed_problem_free(p); }
};

struct DesignHandle {
  oed_design* d = nullptr;
  ~DesignHandle() { oed_design_free(d); }
};

void load_problem(Problem& out, int id, const std::string& problem_file) {
  if (!problem_file.empty()) {
    check(oed_problem_load(problem_file.c_str(), &out.p));
    int loaded = 0;
    check(oed_problem_info(out.p, &loaded, nullptr, nullptr, nullptr));
    if (id != 0 && id != loaded) {
      std::cerr << "oed: --problem " << id << " disagrees with problem file (" << loaded << ")\n";
      throw Failure{2};
    }
    return;
  }
  check(oed_problem_get(id, &out.p));
}

struct SolveArgs {
  int problem = 0;
  std::string criterion;
  std::string variant = "lshade";
  long long fes = 0;
  std::uint64_t seed = 1;
  double merge_eps = 0.0;
  double min_weight = -1.0;
  std::string out = "json";
  std::string problem_file;
  bool code_third_bin = false;
};

int cmd_solve(const SolveArgs& a) {
  Problem problem;
  load_problem(problem, a.problem, a.problem_file);
  oed_solve_options o;
  oed_solve_options_init(&o);
  o.variant = a.variant.c_str();
  o.max_fes = a.fes;
  o.seed = a.seed;
  o.merge_eps = a.merge_eps;
  o.min_weight = a.min_weight;
  o.code_third_bin = a.code_third_bin ? 1 : 0;
  oed_result* result = nullptr;
  check(oed_solve(problem.p, a.criterion.c_str(), &o, &result));
  char* text = nullptr;
  const oed_status s =
      oed_result_format(result, a.out == "csv" ? OED_FORMAT_CSV : OED_FORMAT_JSON, &text);
  oed_result_free(result);
  check(s);
  print_and_free(text);
  return 0;
}

struct BenchmarkArgs {
  std::string plan;
  std::string problems;
  std::string criterion = "d";
  std::string variants = "lshade";
  int runs = 25;
  long long fes = 0;
  std::uint64_t seed = 1;
  std::string out_dir = "results";
  bool compare = false;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "oed: cannot read " << path << '\n';
    throw Failure{3};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_benchmark(const BenchmarkArgs& a) {
  std::string plan;
  if (!a.plan.empty()) {
    plan = read_text(a.plan);
  } else {
    if (a.problems.empty()) {
      std::cerr << "oed: benchmark needs --plan or --problems\n";
      return 2;
    }
    std::ostringstream p;
    p << "problems = " << a.problems << "\ncriterion = " << a.criterion
      << "\nvariants = " << a.variants << "\nruns = " << a.runs << "\nseed = " << a.seed << '\n';
    if (a.fes > 0) p << "fes = " << a.fes << '\n';
    plan = p.str();
  }
  char* summary = nullptr;
  check(oed_benchmark(plan.c_str(), a.out_dir.c_str(), a.compare ? 1 : 0, &summary));
  print_and_free(summary);
  return 0;
}

struct VerifyArgs {
  int problem = 0;
  std::string criterion;
  std::string design;
  std::string problem_file;
};

int cmd_verify(const VerifyArgs& a) {
  Problem problem;
  load_problem(problem, a.problem, a.problem_file);
  DesignHandle design;
  check(oed_design_load(a.design.c_str(), &design.d));
  char* report = nullptr;
  check(oed_verify(problem.p, a.criterion.c_str(), design.d, &report, nullptr));
  print_and_free(report);
  return 0;
}

struct GridArgs {
  int problem = 0;
  std::string criterion;
  std::string design;
  int resolution = 0;
  std::vector<double> slice;
  std::string problem_file;
};

int cmd_sensitivity_grid(const GridArgs& a) {
  Problem problem;
  load_problem(problem, a.problem, a.problem_file);
  DesignHandle design;
  check(oed_design_load(a.design.c_str(), &design.d));
  char* csv = nullptr;
  check(oed_sensitivity_grid(problem.p, a.criterion.c_str(), design.d, a.resolution,
                             a.slice.data(), a.slice.size(), &csv));
  print_and_free(csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal experimental designs by differential evolution"};
  app.require_subcommand(1);
  const auto criteria = CLI::IsMember({"d", "a", "D", "A"});

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Search for an optimal design");
  s->add_option("--problem", solve.problem, "Problem id (1-12)")->required();
  s->add_option("--criterion", solve.criterion, "d or a")->required()->check(criteria);
  s->add_option("--variant", solve.variant, "DE variant (de-rand1 ... lshade)");
  s->add_option("--fes", solve.fes, "Evaluation budget")->check(CLI::PositiveNumber);
  s->add_option("--seed", solve.seed, "Random seed");
  s->add_option("--merge-eps", solve.merge_eps, "Repair merge distance")
      ->check(CLI::PositiveNumber);
  s->add_option("--min-weight", solve.min_weight, "Repair weight threshold")
      ->check(CLI::Range(0.0, 1.0));
  s->add_option("--out", solve.out, "Output format")->check(CLI::IsMember({"json", "csv"}));
  s->add_option("--problem-file", solve.problem_file, "JSON override of theta and bounds");
  s->add_flag("--code-third-bin", solve.code_third_bin,
              "CoDE: binomial crossover on the current-to-rand strategy");

  BenchmarkArgs bench;
  auto* b = app.add_subcommand("benchmark", "Run a multi-run experiment plan");
  auto* plan_opt = b->add_option("--plan", bench.plan, "key = value plan file");
  b->add_option("--problems", bench.problems, "e.g. 1-7 or 1,3,6")->excludes(plan_opt);
  b->add_option("--criterion", bench.criterion, "d or a")->check(criteria)->excludes(plan_opt);
  b->add_option("--variants", bench.variants, "Comma-separated variants")->excludes(plan_opt);
  b->add_option("--runs", bench.runs, "Runs per cell")->excludes(plan_opt);
  b->add_option("--fes", bench.fes, "Evaluation budget for every problem")
      ->check(CLI::PositiveNumber)
      ->excludes(plan_opt);
  b->add_option("--seed", bench.seed, "Base seed")->excludes(plan_opt);
  b->add_option("--out-dir", bench.out_dir, "Directory for summary.csv and traces/");
  b->add_flag("--compare", bench.compare, "Append the rank-sum comparison matrix");

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Certify a design with its efficiency lower bound");
  v->add_option("--problem", verify.problem, "Problem id")->required();
  v->add_option("--criterion", verify.criterion, "d or a")->required()->check(criteria);
  v->add_option("--design", verify.design, "Design JSON file")->required();
  v->add_option("--problem-file", verify.problem_file, "JSON override of theta and bounds");

  GridArgs grid;
  auto* g = app.add_subcommand("sensitivity-grid", "Tabulate the sensitivity function");
  g->add_option("--problem", grid.problem, "Problem id")->required();
  g->add_option("--criterion", grid.criterion, "d or a")->required()->check(criteria);
  g->add_option("--design", grid.design, "Design JSON file")->required();
  g->add_option("--resolution", grid.resolution, "Grid points per factor")->required();
  g->add_option("--slice", grid.slice, "Values fixing factors 3..n")->delimiter(',');
  g->add_option("--problem-file", grid.problem_file, "JSON override of theta and bounds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*s) return cmd_solve(solve);
    if (*b) return cmd_benchmark(bench);
    if (*v) return cmd_verify(verify);
    if (*g) return cmd_sensitivity_grid(grid);
  } catch (const Failure& f) {
    return f.code;
  }
  return 2;
}
