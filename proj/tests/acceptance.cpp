// Acceptance suite: one checked criterion per test case, one summary line
// each, heavier replication runs writing their CSVs under ./acceptance_csv
// for the byte-identity re-run check.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tl1/analysis.hpp"
#include "tl1/harness.hpp"
#include "tl1/penalty.hpp"
#include "tl1/rng.hpp"
#include "tl1/sensing.hpp"
#include "tl1/solver.hpp"

using namespace tl1;

namespace {

constexpr std::uint64_t kMasterSeed = 1;
constexpr double kTableFactor = 15.0;  // DCT factor for the table protocol

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
  }
};

void report(int id, const char* name, bool pass, double seconds,
            const std::string& detail = "") {
  std::printf("ACCEPTANCE %02d [%s] %-34s %7.1fs  %s\n", id,
              pass ? "PASS" : "FAIL", name, seconds, detail.c_str());
  std::fflush(stdout);
}

void parallel_for(int total, const std::function<void(int)>& fn) {
  const int workers = std::min(default_worker_count(), total);
  if (workers <= 1) {
    for (int i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < total; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

Problem gaussian_instance(int m, int n, int k, std::uint64_t seed,
                          double r = 0.0) {
  EnsembleSpec es;
  es.kind = EnsembleKind::correlated_gaussian;
  es.m = m;
  es.n = n;
  es.r = r;
  es.seed = rng::fold(seed, 1);
  SignalSpec sig;
  sig.n = n;
  sig.k = k;
  sig.seed = rng::fold(seed, 2);
  return make_problem(es, sig, 0.0);
}

std::filesystem::path out_dir() {
  const std::filesystem::path dir = "acceptance_csv";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string run_fig3_csv(std::uint64_t seed) {
  ExperimentSpec spec;
  spec.kind = EnsembleKind::correlated_gaussian;
  spec.axis = {0.0, 0.2, 0.6, 0.8};
  spec.m = 64;
  spec.n = 1024;
  spec.sparsity = {5, 25};
  spec.trials = 50;
  spec.solver = SolverKind::unconstrained;
  spec.seed = seed;
  const ExperimentResult result = run_experiment(spec);
  std::ostringstream os;
  write_records_csv(os, spec, result);
  return os.str();
}

std::string run_table_cells_csv(std::uint64_t seed) {
  ExperimentSpec spec;
  spec.kind = EnsembleKind::oversampled_dct;
  spec.axis = {kTableFactor};
  spec.m = 100;
  spec.n = 1500;
  spec.sparsity = {5, 14, 20};
  spec.separation = SeparationRule::two_rl;
  spec.trials = 50;
  spec.solver = SolverKind::unconstrained;
  spec.options = table1_replication_options();
  spec.seed = seed;
  const ExperimentResult result = run_experiment(spec);
  std::ostringstream os;
  write_records_csv(os, spec, result);
  return os.str();
}

std::string run_asweep_csv(std::uint64_t seed) {
  ASweepSpec spec;
  spec.trials = 25;
  spec.seed = seed;
  const ASweepResult result = a_sweep(spec);
  std::ostringstream os;
  write_asweep_csv(os, spec, result);
  return os.str();
}

// success rates per cell parsed back from the aggregate footer
struct CellRate {
  double axis;
  int k;
  double rate;
};

std::vector<CellRate> aggregate_rates(const std::string& csv) {
  std::vector<CellRate> out;
  std::istringstream is(csv);
  std::string line;
  bool in_footer = false;
  while (std::getline(is, line)) {
    if (line.rfind("# aggregate:", 0) == 0) {
      in_footer = true;
      continue;
    }
    if (!in_footer || line.empty() || line[0] == '#') continue;
    // kind,axis,M,N,k,separation,trials,successes,success_rate
    std::istringstream row(line);
    std::string field;
    CellRate cell{};
    for (int col = 0; std::getline(row, field, ','); ++col) {
      if (col == 1) cell.axis = std::stod(field);
      if (col == 4) cell.k = std::stoi(field);
      if (col == 8) cell.rate = std::stod(field);
    }
    out.push_back(cell);
  }
  return out;
}

double rate_of(const std::vector<CellRate>& cells, double axis, int k) {
  for (const CellRate& c : cells)
    if (std::abs(c.axis - axis) < 1e-12 && c.k == k) return c.rate;
  REQUIRE(false);
  return -1.0;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream os(p, std::ios::binary);
  os << content;
}

// Cached CSV payloads shared between the replication criteria and the
// determinism re-run.
std::string g_fig3_csv, g_table_csv, g_asweep_csv;

}  // namespace

TEST_CASE("criterion 01: penalty inequality suite") {
  Stopwatch sw;
  int violations = 0;
  for (double a : {0.1, 1.0, 10.0}) {
    const PenaltyParams p(a);
    rng::SplitMix64 g(rng::fold(kMasterSeed, 101));
    auto chain = [&](double xi, double xj) {
      const double lhs = rho(std::abs(xi + xj), p);
      const double mid = rho(std::abs(xi) + std::abs(xj), p);
      const double sum = rho(xi, p) + rho(xj, p);
      const double rhs = 2.0 * rho((std::abs(xi) + std::abs(xj)) / 2.0, p);
      const double tol = 1e-12;
      if (!(lhs <= mid + tol && mid <= sum + tol && sum <= rhs + tol))
        ++violations;
      // scaling inequality on the same draws
      const double c = (xj == 0.0) ? 2.0 : xj;
      const double scaled = rho(std::abs(c * xi), p);
      const double ref = std::abs(c) * rho(std::abs(xi), p);
      const double stol = 1e-12 * std::max(1.0, ref);
      if (std::abs(c) > 1.0 ? scaled > ref + stol : scaled < ref - stol)
        ++violations;
    };
    for (int i = 0; i < 10000; ++i)
      chain((g.uniform() - 0.5) * 20.0, (g.uniform() - 0.5) * 20.0);
    chain(0.0, 3.7);
    chain(0.0, -0.2);
  }
  const bool pass = violations == 0;
  report(1, "penalty inequality suite", pass, sw.seconds(),
         "violations=" + std::to_string(violations));
  CHECK(pass);
}

TEST_CASE("criterion 02: derivative finite-difference checks") {
  Stopwatch sw;
  rng::SplitMix64 g(rng::fold(kMasterSeed, 102));
  const double h = 1e-6;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double a = std::exp((g.uniform() - 0.5) * 4.0);
    const PenaltyParams p(a);
    const double t = g.uniform() * 10.0 + 1e-3;
    worst = std::max(worst, std::abs(rho_prime(t, p) -
                                     (rho(t + h, p) - rho(t - h, p)) /
                                         (2.0 * h)));
    Vector x(1);
    x << (g.uniform() - 0.5) * 10.0;
    Vector xp = x, xm = x;
    xp[0] += h;
    xm[0] -= h;
    worst = std::max(worst, std::abs(phi_grad(x, p)[0] -
                                     (phi(xp, p) - phi(xm, p)) / (2.0 * h)));
  }
  const bool pass = worst < 1e-6;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max|grad-fd|=%.2e", worst);
  report(2, "derivative finite-difference checks", pass, sw.seconds(), buf);
  CHECK(pass);
}

TEST_CASE("criterion 03: outer descent on 100 instances") {
  Stopwatch sw;
  std::atomic<int> violations{0};
  std::atomic<int> done{0};
  double min_step = 1e300;
  std::mutex mu;
  parallel_for(100, [&](int i) {
    const Problem prob =
        gaussian_instance(64, 256, 8, rng::fold(kMasterSeed, 300 + i));
    const SolveResult res = solve_unconstrained(prob, SolveOptions{});
    double local_min = 1e300;
    for (std::size_t n = 1; n < res.objective_trace.size(); ++n) {
      const double drop =
          res.objective_trace[n - 1] - res.objective_trace[n];
      local_min = std::min(local_min, drop);
      if (drop < -1e-8) ++violations;
    }
    ++done;
    std::lock_guard<std::mutex> lock(mu);
    min_step = std::min(min_step, local_min);
  });
  const bool pass = violations == 0 && done == 100;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "min step drop=%.2e", min_step);
  report(3, "outer descent on 100 instances", pass, sw.seconds(), buf);
  CHECK(pass);
}

TEST_CASE("criterion 04: iterate bound under large lambda") {
  Stopwatch sw;
  int failures = 0;
  for (int i = 0; i < 20; ++i) {
    const Problem prob =
        gaussian_instance(16, 48, 3, rng::fold(kMasterSeed, 400 + i));
    SolveOptions opts;
    const double y2 = prob.y.squaredNorm();
    opts.lambda = y2;  // > ||y||^2 / (2(a+1)) at a = 1
    const double bound =
        opts.penalty.a * y2 / (2.0 * opts.lambda * (opts.penalty.a + 1.0) - y2);
    for (int cap = 1; cap <= 6; ++cap) {
      SolveOptions truncated = opts;
      truncated.max_outer = cap;
      const SolveResult res = solve_unconstrained(prob, truncated);
      if (res.x.lpNorm<Eigen::Infinity>() > bound + 1e-12) ++failures;
      if (res.status == SolveStatus::converged) break;
    }
  }
  const bool pass = failures == 0;
  report(4, "iterate bound under large lambda", pass, sw.seconds(),
         "violations=" + std::to_string(failures));
  CHECK(pass);
}

TEST_CASE("criterion 05: stationarity residual of converged runs") {
  Stopwatch sw;
  std::atomic<int> bad{0};
  std::atomic<int> not_converged{0};
  std::mutex mu;
  double worst = 0.0;
  parallel_for(50, [&](int i) {
    const Problem prob =
        gaussian_instance(64, 256, 8, rng::fold(kMasterSeed, 500 + i));
    const SolveResult res = solve_unconstrained(prob, SolveOptions{});
    if (res.status != SolveStatus::converged) {
      ++not_converged;
      return;
    }
    const double r = stationarity_residual(res.x, prob, SolveOptions{});
    if (r > 1e-4) ++bad;
    std::lock_guard<std::mutex> lock(mu);
    worst = std::max(worst, r);
  });
  const bool pass = bad == 0 && not_converged == 0;
  char buf[80];
  std::snprintf(buf, sizeof(buf), "max residual=%.2e unconverged=%d", worst,
                not_converged.load());
  report(5, "stationarity residual <= 1e-4 (50 runs)", pass, sw.seconds(),
         buf);
  CHECK(pass);
}

TEST_CASE("criterion 06: constrained solver matches the l0 oracle") {
  Stopwatch sw;
  std::atomic<int> matches{0};
  std::vector<std::string> logs;
  std::mutex mu;
  parallel_for(50, [&](int i) {
    const Problem prob =
        gaussian_instance(8, 16, 2, rng::fold(kMasterSeed, 600 + i));
    SolveOptions opts;
    opts.model = Model::constrained;
    opts.delta = 1.0;
    const SolveResult res = solve_constrained(prob, opts);
    Vector oracle;
    try {
      oracle = brute_force_l0(prob, 2);
    } catch (const std::exception&) {
      std::lock_guard<std::mutex> lock(mu);
      logs.push_back("trial " + std::to_string(i) + ": no l0 solution");
      return;
    }
    const double gap = (res.x - oracle).norm() / oracle.norm();
    if (gap <= 1e-3) {
      ++matches;
    } else {
      std::lock_guard<std::mutex> lock(mu);
      logs.push_back("trial " + std::to_string(i) +
                     ": local minimum, gap=" + std::to_string(gap));
    }
  });
  const bool pass = matches >= 45;
  report(6, "constrained vs l0 oracle (>=90%)", pass, sw.seconds(),
         std::to_string(matches.load()) + "/50 matched");
  for (const std::string& line : logs) std::printf("    note: %s\n", line.c_str());
  CHECK(pass);
}

TEST_CASE("criterion 07: gaussian phase-transition shape") {
  Stopwatch sw;
  g_fig3_csv = run_fig3_csv(kMasterSeed);
  write_file(out_dir() / "fig3.csv", g_fig3_csv);
  const auto rates = aggregate_rates(g_fig3_csv);
  bool pass = true;
  std::string detail;
  for (double r : {0.0, 0.2, 0.6, 0.8}) {
    const double easy = rate_of(rates, r, 5);
    const double hard = rate_of(rates, r, 25);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "r=%.1f:%2.0f/%2.0f%% ", r, 100 * easy,
                  100 * hard);
    detail += buf;
    if (easy < 0.95 || !(hard < easy)) pass = false;
  }
  report(7, "gaussian phase-transition shape", pass, sw.seconds(), detail);
  CHECK(pass);
}

TEST_CASE("criterion 08: dct success-rate table cells") {
  Stopwatch sw;
  g_table_csv = run_table_cells_csv(kMasterSeed);
  write_file(out_dir() / "table_cells.csv", g_table_csv);
  const auto rates = aggregate_rates(g_table_csv);
  const double r5 = rate_of(rates, kTableFactor, 5);
  const double r14 = rate_of(rates, kTableFactor, 14);
  const double r20 = rate_of(rates, kTableFactor, 20);
  const bool pass = r5 >= 0.90 && r14 >= 0.59 && r14 <= 0.89 && r20 <= 0.20;
  char buf[96];
  std::snprintf(buf, sizeof(buf),
                "k5=%.0f%% (>=90) k14=%.0f%% (59..89) k20=%.0f%% (<=20)",
                100 * r5, 100 * r14, 100 * r20);
  report(8, "dct success-rate table cells", pass, sw.seconds(), buf);
  CHECK(pass);
}

TEST_CASE("criterion 09: shape parameter sweep peaks at a=1") {
  Stopwatch sw;
  g_asweep_csv = run_asweep_csv(kMasterSeed);
  write_file(out_dir() / "asweep.csv", g_asweep_csv);
  // aggregate footer: a,mean_success_rate
  std::istringstream is(g_asweep_csv);
  std::string line;
  bool in_footer = false;
  double best_a = -1.0, best_rate = -1.0, rate_at_1 = -1.0;
  std::string detail;
  while (std::getline(is, line)) {
    if (line.rfind("# aggregate:", 0) == 0) {
      in_footer = true;
      continue;
    }
    if (!in_footer || line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    const double a = std::stod(line.substr(0, comma));
    const double rate = std::stod(line.substr(comma + 1));
    if (rate > best_rate) {
      best_rate = rate;
      best_a = a;
    }
    if (a == 1.0) rate_at_1 = rate;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "a=%g:%.3f ", a, rate);
    detail += buf;
  }
  const bool pass = best_a == 1.0 && rate_at_1 >= 0.0;
  report(9, "shape parameter sweep peaks at a=1", pass, sw.seconds(), detail);
  CHECK(pass);
}

TEST_CASE("criterion 10: replication runs are byte-deterministic") {
  Stopwatch sw;
  REQUIRE(!g_fig3_csv.empty());
  REQUIRE(!g_table_csv.empty());
  REQUIRE(!g_asweep_csv.empty());
  const bool fig3_same = run_fig3_csv(kMasterSeed) == g_fig3_csv;
  const bool table_same = run_table_cells_csv(kMasterSeed) == g_table_csv;
  const bool asweep_same = run_asweep_csv(kMasterSeed) == g_asweep_csv;
  const bool pass = fig3_same && table_same && asweep_same;
  std::string detail = std::string("fig3=") + (fig3_same ? "ok" : "DIFF") +
                       " table=" + (table_same ? "ok" : "DIFF") +
                       " asweep=" + (asweep_same ? "ok" : "DIFF");
  report(10, "replication CSVs byte-identical", pass, sw.seconds(), detail);
  CHECK(pass);
}

TEST_CASE("criterion 11: tl1 never below the l1 baseline at r=0.8") {
  Stopwatch sw;
  ExperimentSpec spec;
  spec.kind = EnsembleKind::correlated_gaussian;
  spec.axis = {0.8};
  spec.m = 64;
  spec.n = 1024;
  spec.sparsity = {5, 10, 15};
  spec.trials = 25;
  spec.seed = kMasterSeed;
  spec.solver = SolverKind::unconstrained;
  const ExperimentResult tl1_run = run_experiment(spec);
  spec.solver = SolverKind::l1_baseline;
  const ExperimentResult l1_run = run_experiment(spec);
  double tl1_mean = 0.0, l1_mean = 0.0;
  for (const CellSummary& c : tl1_run.cells) tl1_mean += c.success_rate;
  for (const CellSummary& c : l1_run.cells) l1_mean += c.success_rate;
  tl1_mean /= static_cast<double>(tl1_run.cells.size());
  l1_mean /= static_cast<double>(l1_run.cells.size());
  const bool pass = tl1_mean >= l1_mean;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "tl1=%.3f l1=%.3f", tl1_mean, l1_mean);
  report(11, "tl1 >= l1 baseline mean rate (r=0.8)", pass, sw.seconds(), buf);
  CHECK(pass);
}
