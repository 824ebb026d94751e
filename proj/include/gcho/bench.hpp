#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gcho/certify.hpp"

namespace gcho {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

/// "mgh01" + "minmax" -> "mgh01:minmax"; names that already carry a suffix
/// or belong to synthetic problems pass through.
std::string resolve_problem_name(const std::string& problem, const std::string& form);

/// "ls", "minmax" or "penalty" from the outer function of a spec.
std::string formulation_of(const ProblemSpec& spec);

void write_trace_csv(std::ostream& os, const IterateTrace& trace);
void write_certificates_csv(std::ostream& os, const std::vector<CertificateRecord>& records);
void write_summary_csv(std::ostream& os, const ProblemSpec& spec, const IterateTrace& trace);

double total_wall_ms(const IterateTrace& trace);

/// Final iterate within 1e-2 (1 + ||x*||_inf) of a known solution, infinity norm.
bool near_known_solution(const ProblemSpec& spec, const Vec& x);

struct Table1Entry {
  std::string base;
  IterateTrace minmax;
  IterateTrace ls;
  int ref_minmax_iters = 0;
  int ref_ls_iters = 0;
  bool minmax_near = false;
  bool ls_near = false;
};

/// Gated MGH rows, both formulations, p = 2; rows run concurrently.
std::vector<Table1Entry> run_table1(std::uint64_t seed);

/// Number of rows where the least-squares run needs at least as many iterations.
int table1_ratio_count(const std::vector<Table1Entry>& rows);

/// Subcommand handlers; return the process exit code.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_table1(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace gcho
