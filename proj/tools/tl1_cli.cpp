// Command-line front end: problem generation, single solves, experiment
// sweeps, RIP estimation, and local-minimizer checks.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tl1/analysis.hpp"
#include "tl1/harness.hpp"
#include "tl1/problem_io.hpp"
#include "tl1/rng.hpp"

namespace {

using namespace tl1;

struct SolveFlags {
  std::string model = "unconstrained";
  double a = 1.0;
  double lambda = 1e-5;
  double c = 1e-6;
  std::optional<double> delta;
  double eps_outer = 1e-6;
  double eps_inner = 1e-7;
  int max_outer = 50;
  int max_inner = 5000;
  bool baseline = false;
};

void add_solve_flags(CLI::App* cmd, SolveFlags& f) {
  cmd->add_option("--model", f.model, "unconstrained | constrained")
      ->check(CLI::IsMember({"unconstrained", "constrained"}));
  cmd->add_option("--a", f.a, "TL1 shape parameter");
  cmd->add_option("--lambda", f.lambda, "regularization weight");
  cmd->add_option("--c", f.c, "strong-convexity augmentation");
  cmd->add_option("--delta", f.delta,
                  "ADMM penalty (default 0.05 unconstrained, 1 constrained)");
  cmd->add_option("--eps-outer", f.eps_outer, "outer stopping tolerance");
  cmd->add_option("--eps-inner", f.eps_inner, "inner stopping tolerance");
  cmd->add_option("--max-outer", f.max_outer, "outer iteration cap");
  cmd->add_option("--max-inner", f.max_inner, "inner iteration cap");
}

SolveOptions to_options(const SolveFlags& f) {
  SolveOptions opts;
  opts.model =
      f.model == "constrained" ? Model::constrained : Model::unconstrained;
  opts.penalty = PenaltyParams(f.a);
  opts.lambda = f.lambda;
  opts.c = f.c;
  opts.delta = f.delta;
  opts.eps_outer = f.eps_outer;
  opts.eps_inner = f.eps_inner;
  opts.max_outer = f.max_outer;
  opts.max_inner = f.max_inner;
  opts.validate();
  return opts;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

int cmd_gen(const std::string& kind, int m, int n, double r, double factor,
            int k, int separation, const std::string& law, std::uint64_t seed,
            double noise, const std::string& out) {
  EnsembleSpec es;
  es.kind = kind == "dct" ? EnsembleKind::oversampled_dct
                          : EnsembleKind::correlated_gaussian;
  es.m = m;
  es.n = n;
  es.r = r;
  es.factor = factor;
  es.seed = rng::fold(seed, 1);
  SignalSpec ss;
  ss.n = n;
  ss.k = k;
  ss.separation = separation;
  ss.law = law == "signs" ? ValueLaw::unit_signs : ValueLaw::standard_normal;
  ss.seed = rng::fold(seed, 2);
  const Problem prob = make_problem(es, ss, noise);
  save_problem(prob, out);
  std::printf("wrote %s: %s %dx%d, k=%d, separation=%d, seed=%llu\n",
              out.c_str(), kind.c_str(), m, n, k, separation,
              static_cast<unsigned long long>(seed));
  return 0;
}

int cmd_solve(const std::string& problem_path, const SolveFlags& flags,
              const std::string& solution_out, const std::string& trace_out) {
  const Problem prob = load_problem(problem_path);
  const SolveOptions opts = to_options(flags);
  const SolveResult res = flags.baseline ? solve_l1_baseline(prob, opts)
                                         : solve(prob, opts);
  std::printf("status: %s\n", to_string(res.status));
  std::printf("outer iterations: %d\n", res.outer_iters);
  long long inner = 0;
  for (int it : res.inner_iters) inner += it;
  std::printf("inner iterations: %lld\n", inner);
  std::printf("objective: %.17g\n", res.objective_trace.back());
  std::printf("stationarity residual: %.17g\n", res.stationarity_residual);
  std::printf("feasibility gap: %.17g\n", res.feasibility_gap);
  std::printf("reported iterate: %s\n", res.iterate_kind.c_str());
  int nnz = 0;
  for (Eigen::Index i = 0; i < res.x.size(); ++i)
    if (res.x[i] != 0.0) ++nnz;
  std::printf("nonzeros: %d\n", nnz);
  if (prob.truth) {
    const double tn = prob.truth->x.norm();
    const double rel =
        tn > 0.0 ? (res.x - prob.truth->x).norm() / tn : res.x.norm();
    std::printf("relative error: %.17g\n", rel);
  }
  if (!solution_out.empty()) save_vector(res.x, solution_out);
  if (!trace_out.empty()) {
    auto os = open_out(trace_out);
    os << "# tl1-trace v1\n# columns: outer,objective,inner_iters\n";
    for (std::size_t i = 0; i < res.objective_trace.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", res.objective_trace[i]);
      os << i << "," << buf << ","
         << (i == 0 ? 0 : res.inner_iters[i - 1]) << "\n";
    }
  }
  return res.status == SolveStatus::diverged ? 1 : 0;
}

int cmd_experiment(const std::string& config_path,
                   const std::vector<std::string>& overrides,
                   const std::string& out, const std::string& timings_out,
                   std::optional<int> trials, std::optional<std::uint64_t> seed,
                   std::optional<int> workers) {
  std::ifstream is(config_path);
  if (!is) throw ConfigError("cannot open config " + config_path);
  auto entries = parse_config(is);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    entries.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  ExperimentSpec spec = build_experiment_spec(entries);
  if (trials) spec.trials = *trials;
  if (seed) spec.seed = *seed;
  if (workers) spec.workers = *workers;
  spec.validate();
  const ExperimentResult result = run_experiment(spec);
  if (out.empty()) {
    write_records_csv(std::cout, spec, result);
  } else {
    auto os = open_out(out);
    write_records_csv(os, spec, result);
  }
  if (!timings_out.empty()) {
    auto os = open_out(timings_out);
    write_timings_csv(os, result);
  }
  for (const CellSummary& cell : result.cells)
    std::fprintf(stderr, "axis=%g k=%d sep=%d: %d/%d (%.1f%%)\n", cell.axis,
                 cell.k, cell.separation, cell.successes, cell.trials,
                 100.0 * cell.success_rate);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transformed-l1 sparse recovery toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a problem file");
  std::string gen_kind = "gaussian", gen_law = "normal", gen_out;
  int gen_m = 64, gen_n = 256, gen_k = 8, gen_sep = 0;
  double gen_r = 0.0, gen_f = 10.0, gen_noise = 0.0;
  std::uint64_t gen_seed = 0;
  gen->add_option("--kind", gen_kind)->check(CLI::IsMember({"gaussian", "dct"}));
  gen->add_option("--M", gen_m);
  gen->add_option("--N", gen_n);
  gen->add_option("--r", gen_r, "gaussian row correlation");
  gen->add_option("--F", gen_f, "dct oversampling factor");
  gen->add_option("--k", gen_k, "sparsity");
  gen->add_option("--separation", gen_sep, "min support index gap");
  gen->add_option("--law", gen_law)->check(CLI::IsMember({"normal", "signs"}));
  gen->add_option("--seed", gen_seed);
  gen->add_option("--noise", gen_noise, "observation noise std");
  gen->add_option("out", gen_out, "output problem file")->required();

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "solve one problem file");
  SolveFlags flags;
  std::string solve_problem, solve_out, solve_trace;
  add_solve_flags(solve_cmd, flags);
  solve_cmd->add_flag("--baseline", flags.baseline, "plain l1 penalty");
  solve_cmd->add_option("problem", solve_problem)->required();
  solve_cmd->add_option("--out", solve_out, "write solution vector");
  solve_cmd->add_option("--trace", solve_trace, "write objective trace CSV");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run a sweep from a config");
  std::string exp_config, exp_out, exp_timings;
  std::vector<std::string> exp_sets;
  std::optional<int> exp_trials, exp_workers;
  std::optional<std::uint64_t> exp_seed;
  exp->add_option("config", exp_config)->required();
  exp->add_option("--out", exp_out, "results CSV (default stdout)");
  exp->add_option("--timings", exp_timings, "per-trial wall-time CSV");
  exp->add_option("--set", exp_sets, "override config KEY=VALUE")
      ->take_all();
  exp->add_option("--trials", exp_trials);
  exp->add_option("--seed", exp_seed);
  exp->add_option("--workers", exp_workers);

  // a-sweep
  auto* asw = app.add_subcommand("a-sweep", "success rate vs penalty shape a");
  ASweepSpec asweep;
  std::string asw_out;
  asw->add_option("--a-list", asweep.a_values, "a values")->take_all();
  asw->add_option("--M", asweep.m);
  asw->add_option("--N", asweep.n);
  asw->add_option("--k", asweep.sparsity, "sparsity grid")->take_all();
  asw->add_option("--trials", asweep.trials);
  asw->add_option("--seed", asweep.seed);
  asw->add_option("--workers", asweep.workers);
  asw->add_option("--lambda", asweep.options.lambda);
  asw->add_option("--out", asw_out, "CSV output (default stdout)");

  // table1
  auto* tbl = app.add_subcommand(
      "table1", "success-rate table over sparsity x RL separation");
  Table1Spec table;
  std::string tbl_out, tbl_solver = "unconstrained";
  bool tbl_fast = false;
  tbl->add_option("--F", table.factor, "DCT oversampling factor (required)")
      ->required();
  tbl->add_option("--trials", table.trials);
  tbl->add_option("--seed", table.seed);
  tbl->add_option("--workers", table.workers);
  tbl->add_option("--solver", tbl_solver)
      ->check(CLI::IsMember({"unconstrained", "constrained", "l1-baseline"}));
  tbl->add_flag("--fast", tbl_fast,
                "library solver defaults instead of the replication budget");
  tbl->add_option("--out", tbl_out, "CSV output (default stdout)");

  // rip
  auto* rip = app.add_subcommand("rip", "estimate a RIP constant lower bound");
  std::string rip_problem, rip_out;
  int rip_s = 2;
  std::int64_t rip_samples = 1000;
  std::uint64_t rip_seed = 0;
  rip->add_option("problem", rip_problem)->required();
  rip->add_option("--s", rip_s, "support size")->required();
  rip->add_option("--samples", rip_samples, "sampled supports if not exhaustive");
  rip->add_option("--seed", rip_seed);
  rip->add_option("--out", rip_out, "append CSV row to file");

  // check
  auto* chk = app.add_subcommand(
      "check", "local-minimizer sufficient conditions at a solution");
  SolveFlags chk_flags;
  std::string chk_problem, chk_solution, chk_out;
  double chk_support_threshold = 1e-6, chk_tol = 1e-4;
  add_solve_flags(chk, chk_flags);
  chk->add_option("problem", chk_problem)->required();
  chk->add_option("solution", chk_solution)->required();
  chk->add_option("--support-threshold", chk_support_threshold);
  chk->add_option("--stationarity-tol", chk_tol);
  chk->add_option("--out", chk_out, "append CSV row to file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed())
      return cmd_gen(gen_kind, gen_m, gen_n, gen_r, gen_f, gen_k, gen_sep,
                     gen_law, gen_seed, gen_noise, gen_out);
    if (solve_cmd->parsed())
      return cmd_solve(solve_problem, flags, solve_out, solve_trace);
    if (exp->parsed())
      return cmd_experiment(exp_config, exp_sets, exp_out, exp_timings,
                            exp_trials, exp_seed, exp_workers);
    if (asw->parsed()) {
      const ASweepResult result = a_sweep(asweep);
      if (asw_out.empty()) {
        write_asweep_csv(std::cout, asweep, result);
      } else {
        auto os = open_out(asw_out);
        write_asweep_csv(os, asweep, result);
      }
      for (std::size_t ai = 0; ai < result.a_values.size(); ++ai)
        std::fprintf(stderr, "a=%g: mean success %.3f\n", result.a_values[ai],
                     result.mean_rate[ai]);
      return 0;
    }
    if (tbl->parsed()) {
      table.solver = tbl_solver == "constrained"    ? SolverKind::constrained
                     : tbl_solver == "l1-baseline" ? SolverKind::l1_baseline
                                                   : SolverKind::unconstrained;
      if (tbl_fast) table.options = SolveOptions{};
      const Table1Result result = table1_replication(table);
      if (tbl_out.empty()) {
        write_table1_csv(std::cout, table, result);
      } else {
        auto os = open_out(tbl_out);
        write_table1_csv(os, table, result);
      }
      for (Eigen::Index ri = 0; ri < result.rates.rows(); ++ri) {
        std::fprintf(stderr, "%dRL:", result.rl_multiples[ri]);
        for (Eigen::Index ki = 0; ki < result.rates.cols(); ++ki)
          std::fprintf(stderr, " %5.1f", 100.0 * result.rates(ri, ki));
        std::fprintf(stderr, "\n");
      }
      return 0;
    }
    if (rip->parsed()) {
      const Problem prob = load_problem(rip_problem);
      const RipEstimate est = estimate_rip(prob.a, rip_s, rip_samples, rip_seed);
      std::printf("%s", to_text(est).c_str());
      if (!rip_out.empty()) {
        std::ofstream os(rip_out, std::ios::app);
        os << csv_row(est) << "\n";
      }
      return 0;
    }
    if (chk->parsed()) {
      const Problem prob = load_problem(chk_problem);
      const Vector x = load_vector(chk_solution);
      const Condition2Report rep = check_condition2(
          x, prob, to_options(chk_flags), chk_support_threshold, chk_tol);
      std::printf("%s", rep.to_text().c_str());
      if (!chk_out.empty()) {
        std::ofstream os(chk_out, std::ios::app);
        os << rep.csv_row() << "\n";
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
