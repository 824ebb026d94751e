#include "gcho/bench.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "gcho/log.hpp"

namespace gcho {
namespace {

struct RefRow {
  const char* base;
  int minmax;
  int ls;
};

// Iteration counts reported for the reference implementation.
constexpr RefRow kRefIters[] = {
    {"mgh01", 16, 29}, {"mgh02", 12, 33}, {"mgh05", 56, 441},
    {"mgh07", 35, 446}, {"mgh13", 26, 43}, {"mgh14", 17, 74},
};

std::string join_vec(const Vec& x, char sep) {
  std::string s;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) s += sep;
    s += format_double(x(i));
  }
  return s;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  return os;
}

SolverConfig table1_config(std::uint64_t seed) {
  SolverConfig c;
  c.p = 2;
  c.seed = seed;
  return c;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string resolve_problem_name(const std::string& problem, const std::string& form) {
  if (problem.rfind("mgh", 0) != 0 || problem.find(':') != std::string::npos) return problem;
  if (form.empty()) throw Error(ErrorCode::InvalidArgument, "--form is required for " + problem);
  return problem + ":" + form;
}

std::string formulation_of(const ProblemSpec& spec) {
  switch (spec.outer.kind()) {
    case OuterFunction::Kind::Identity: return "ls";
    case OuterFunction::Kind::CoordMax: return "minmax";
    case OuterFunction::Kind::FirstPlusMaxPenalty: return "penalty";
  }
  return "?";
}

void write_trace_csv(std::ostream& os, const IterateTrace& trace) {
  os << "k,f,step_norm,M_max,ls_trials,inner_iters,stat_res,wall_ms\n";
  for (const auto& r : trace.records) {
    os << r.k << ',' << format_double(r.f) << ',' << format_double(r.step_norm) << ','
       << format_double(r.M.maxCoeff()) << ',' << r.ls_trials << ',' << r.inner_iters << ','
       << format_double(r.stat_res) << ',' << format_double(r.wall_ms) << '\n';
  }
  os << trace.iterations() << ',' << format_double(trace.f_final) << ",0,0,0,0,0,0\n";
}

void write_certificates_csv(std::ostream& os, const std::vector<CertificateRecord>& records) {
  os << "cert_k,y_dist,Sf_y,ratio1,ratio2,theta_hat\n";
  for (const auto& r : records) {
    os << r.k << ',' << format_double(r.y_dist) << ',' << format_double(r.Sf_y) << ',' << format_double(r.ratio1)
       << ',' << format_double(r.ratio2) << ',' << format_double(r.theta_hat) << '\n';
  }
}

double total_wall_ms(const IterateTrace& trace) {
  double t = 0.0;
  for (const auto& r : trace.records) t += r.wall_ms;
  return t;
}

void write_summary_csv(std::ostream& os, const ProblemSpec& spec, const IterateTrace& trace) {
  os << "name,formulation,iters,wall_ms,final_f,final_x,status\n";
  os << spec.name << ',' << formulation_of(spec) << ',' << trace.iterations() << ','
     << format_double(total_wall_ms(trace)) << ',' << format_double(trace.f_final) << ','
     << join_vec(trace.x_final, ';') << ',' << to_string(trace.status) << '\n';
}

bool near_known_solution(const ProblemSpec& spec, const Vec& x) {
  for (const Vec& s : spec.known_solutions) {
    if ((x - s).cwiseAbs().maxCoeff() <= 1e-2 * (1.0 + s.cwiseAbs().maxCoeff())) return true;
  }
  return false;
}

std::vector<Table1Entry> run_table1(std::uint64_t seed) {
  const auto bases = gated_mgh_problems();
  std::vector<std::future<IterateTrace>> jobs;
  std::uint64_t run_seed = seed;
  for (const auto& base : bases) {
    for (const char* form : {"minmax", "ls"}) {
      const SolverConfig cfg = table1_config(run_seed++);
      jobs.push_back(std::async(std::launch::async, [name = base + ":" + form, cfg] {
        return run(registry_lookup(name), cfg);
      }));
    }
  }
  std::vector<Table1Entry> rows;
  for (std::size_t i = 0; i < bases.size(); ++i) {
    Table1Entry e;
    e.base = bases[i];
    e.minmax = jobs[2 * i].get();
    e.ls = jobs[2 * i + 1].get();
    for (const auto& pr : kRefIters) {
      if (e.base == pr.base) {
        e.ref_minmax_iters = pr.minmax;
        e.ref_ls_iters = pr.ls;
      }
    }
    e.minmax_near = near_known_solution(registry_lookup(e.base + ":minmax"), e.minmax.x_final);
    e.ls_near = near_known_solution(registry_lookup(e.base + ":ls"), e.ls.x_final);
    rows.push_back(std::move(e));
  }
  return rows;
}

int table1_ratio_count(const std::vector<Table1Entry>& rows) {
  int count = 0;
  for (const auto& r : rows) count += r.ls.iterations() >= r.minmax.iterations();
  return count;
}

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Run one problem and write trace, certificate and summary CSVs", "run"};
  std::string problem, form, out_dir = ".";
  int p = 2, max_iter = 500, certify_every = 0;
  double m0 = 1.0, tol = 1e-4, theta = 0.5, mu_factor = 1.5;
  bool rate_check = false;
  std::uint64_t seed = 0;
  app.add_option("--problem", problem, "registry name")->required();
  app.add_option("--form", form, "ls or minmax (MGH problems)")->check(CLI::IsMember({"ls", "minmax"}));
  app.add_option("--p", p, "model order")->check(CLI::IsMember({1, 2}));
  app.add_option("--m0", m0, "initial regularization weight")->check(CLI::PositiveNumber);
  app.add_option("--tol", tol, "step-norm stopping tolerance")->check(CLI::NonNegativeNumber);
  app.add_option("--max-iter", max_iter, "iteration cap")->check(CLI::PositiveNumber);
  app.add_option("--theta", theta, "subproblem stationarity factor")->check(CLI::NonNegativeNumber);
  app.add_option("--certify", certify_every, "certificate every n steps (0 = off)")->check(CLI::NonNegativeNumber);
  app.add_option("--mu-factor", mu_factor, "certificate weight factor (> 1)");
  app.add_flag("--rate-check", rate_check, "fix M and write rate.csv");
  app.add_option("--seed", seed, "seed");
  app.add_option("--out", out_dir, "output directory");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  ProblemSpec spec;
  SolverConfig cfg;
  try {
    spec = registry_lookup(resolve_problem_name(problem, form));
    cfg.p = p;
    cfg.m0 = m0;
    cfg.tol_step = tol;
    cfg.max_iter = max_iter;
    cfg.theta = theta;
    cfg.subsolver.theta = theta;
    cfg.certificate_every = certify_every;
    cfg.mu_factor = mu_factor;
    cfg.seed = seed;
    if (rate_check) cfg.M_shrink = 1.0;
    cfg.validate(spec.m);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    const IterateTrace trace = run(spec, cfg);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    {
      auto os = open_out(dir / "trace.csv");
      write_trace_csv(os, trace);
    }
    const auto certs = certify_trace(spec, trace, cfg);
    {
      auto os = open_out(dir / "certificates.csv");
      write_certificates_csv(os, certs);
    }
    {
      auto os = open_out(dir / "summary.csv");
      write_summary_csv(os, spec, trace);
    }
    out << spec.name << ": " << to_string(trace.status) << " after " << trace.iterations()
        << " iterations, f = " << format_double(trace.f_final) << ", x = (" << join_vec(trace.x_final, ',')
        << ")\n";
    if (!certs.empty()) {
      const auto a2 = check_assumption2(certs, trace);
      out << "certificates: " << certs.size() << ", last S_f(y) = " << format_double(certs.back().Sf_y)
          << ", L1_hat = " << format_double(a2.L1_hat) << ", L2_hat = " << format_double(a2.L2_hat)
          << (a2.bound_checked ? (a2.pass ? " (within mu/p!)" : " (exceeds mu/p!)") : " (report only)") << '\n';
    }
    if (rate_check) {
      const double f_best = std::min(trace.f_final, spec.known_fstar.value_or(trace.f_final));
      auto os = open_out(dir / "rate.csv");
      os << "k,f_gap,envelope\n";
      std::optional<ConvexEnvelope> env;
      if (spec.convex && spec.known_fstar && !spec.known_solutions.empty()) {
        const double L = spec.inner.front().lipschitz.at(cfg.p).value_or(0.0);
        env = convex_rate_check(spec, trace, spec.known_solutions.front(), *spec.known_fstar, L);
      }
      for (int k = 1; k <= trace.iterations(); ++k) {
        const double fk = k < trace.iterations() ? trace.records[static_cast<std::size_t>(k)].f : trace.f_final;
        os << k << ',' << format_double(fk - f_best) << ',';
        if (env) os << format_double(env->bound[static_cast<std::size_t>(k - 1)]);
        os << '\n';
      }
      out << "rate regime: " << classify_kl_regime(trace, f_best);
      if (env) out << ", convex envelope " << (env->pass ? "holds" : "VIOLATED") << " (R0 = " << format_double(env->R0) << ")";
      out << '\n';
    }
    return trace.status == RunStatus::SubsolverFailure ? 3 : 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::SubsolverFailure ? 3 : 1;
  }
}

int cli_table1(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Run the gated MGH rows in both formulations", "table1"};
  std::string out_dir;
  std::uint64_t seed = 0;
  app.add_option("--out", out_dir, "write table1.csv here");
  app.add_option("--seed", seed, "seed");
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const auto rows = run_table1(seed);
  out << std::left << std::setw(8) << "problem" << std::right << std::setw(8) << "mm it" << std::setw(10) << "mm ms"
      << "  " << std::left << std::setw(26) << "mm x*" << std::right << std::setw(8) << "ls it" << std::setw(10)
      << "ls ms" << "  " << std::left << std::setw(26) << "ls x*" << std::right << std::setw(12) << "ref mm/ls"
      << '\n';
  bool all_converged = true;
  auto brief = [](const Vec& x) {
    std::ostringstream s;
    s << std::setprecision(4) << '(';
    for (Eigen::Index i = 0; i < x.size(); ++i) s << (i ? ";" : "") << x(i);
    s << ')';
    return s.str();
  };
  for (const auto& r : rows) {
    out << std::left << std::setw(8) << r.base << std::right << std::setw(8) << r.minmax.iterations() << std::setw(10)
        << std::fixed << std::setprecision(2) << total_wall_ms(r.minmax) << "  " << std::left << std::setw(26)
        << brief(r.minmax.x_final) << std::right << std::setw(8) << r.ls.iterations() << std::setw(10)
        << total_wall_ms(r.ls) << "  " << std::left << std::setw(26) << brief(r.ls.x_final) << std::right
        << std::setw(12) << (std::to_string(r.ref_minmax_iters) + "/" + std::to_string(r.ref_ls_iters)) << '\n';
    out.unsetf(std::ios::fixed);
    for (const auto* t : {&r.minmax, &r.ls}) {
      if (t->status != RunStatus::StepTol) {
        all_converged = false;
        err << r.base << (t == &r.minmax ? ":minmax" : ":ls") << " ended with " << to_string(t->status) << '\n';
      }
    }
    if (!r.minmax_near) out << "  note: " << r.base << ":minmax stopped away from the listed solutions\n";
    if (!r.ls_near) out << "  note: " << r.base << ":ls stopped away from the listed solutions\n";
  }
  const int wins = table1_ratio_count(rows);
  const bool gate = wins >= 4;
  out << "ls iters >= minmax iters on " << wins << " of " << rows.size() << " rows: " << (gate ? "PASS" : "FAIL")
      << '\n';

  if (!out_dir.empty()) {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    auto os = open_out(dir / "table1.csv");
    os << "problem,formulation,iters,wall_ms,final_f,final_x,status,reference_iters\n";
    for (const auto& r : rows) {
      os << r.base << ",minmax," << r.minmax.iterations() << ',' << format_double(total_wall_ms(r.minmax)) << ','
         << format_double(r.minmax.f_final) << ',' << join_vec(r.minmax.x_final, ';') << ','
         << to_string(r.minmax.status) << ',' << r.ref_minmax_iters << '\n';
      os << r.base << ",ls," << r.ls.iterations() << ',' << format_double(total_wall_ms(r.ls)) << ','
         << format_double(r.ls.f_final) << ',' << join_vec(r.ls.x_final, ';') << ',' << to_string(r.ls.status)
         << ',' << r.ref_ls_iters << '\n';
    }
  }
  if (!all_converged) return 4;
  return gate ? 0 : 5;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    std::cout << "usage: gcho_bench run --problem <name> [--form ls|minmax] [--p 1|2] [--m0 x] [--tol x]\n"
                 "                      [--max-iter n] [--theta x] [--certify n] [--mu-factor x]\n"
                 "                      [--rate-check] [--seed n] [--out dir]\n"
                 "       gcho_bench table1 [--out dir] [--seed n]\n";
    return args.empty() ? 2 : 0;
  }
  const std::string cmd = args[0];
  const std::vector<std::string> rest(args.begin() + 1, args.end());
  if (cmd == "run") return cli_run(rest, std::cout, std::cerr);
  if (cmd == "table1") return cli_table1(rest, std::cout, std::cerr);
  std::cerr << "unknown command '" << cmd << "'\n";
  return 2;
}

}  // namespace gcho
