#include "tl1/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <thread>

#include "tl1/rng.hpp"

namespace tl1 {

const char* to_string(SolverKind s) {
  switch (s) {
    case SolverKind::unconstrained:
      return "unconstrained";
    case SolverKind::constrained:
      return "constrained";
    case SolverKind::l1_baseline:
      return "l1-baseline";
  }
  return "unknown";
}

const char* to_string(EnsembleKind k) {
  return k == EnsembleKind::correlated_gaussian ? "gaussian" : "dct";
}

void ExperimentSpec::validate() const {
  if (axis.empty() || sparsity.empty())
    throw ConfigError("experiment: empty sweep grid");
  if (trials < 1) throw ConfigError("experiment: trials >= 1");
  if (m < 1 || n <= m) throw ConfigError("experiment: need 1 <= M < N");
  if (separation == SeparationRule::two_rl &&
      kind != EnsembleKind::oversampled_dct)
    throw ConfigError("experiment: 2RL separation requires the dct ensemble");
  if (kind == EnsembleKind::correlated_gaussian)
    for (double r : axis)
      if (!(r >= 0.0 && r < 1.0)) throw ConfigError("experiment: r in [0,1)");
  if (kind == EnsembleKind::oversampled_dct)
    for (double f : axis)
      if (!(f >= 1.0)) throw ConfigError("experiment: F >= 1");
  options.validate();
}

std::uint64_t derive_trial_seed(std::uint64_t master, EnsembleKind kind,
                                int m, int n, double axis, int separation,
                                int k, int trial) {
  std::uint64_t h = master;
  h = rng::fold(h, kind == EnsembleKind::correlated_gaussian ? 0u : 1u);
  h = rng::fold(h, static_cast<std::uint64_t>(m));
  h = rng::fold(h, static_cast<std::uint64_t>(n));
  h = rng::fold(h, std::bit_cast<std::uint64_t>(axis));
  h = rng::fold(h, static_cast<std::uint64_t>(separation));
  h = rng::fold(h, static_cast<std::uint64_t>(k));
  h = rng::fold(h, static_cast<std::uint64_t>(trial));
  return h;
}

namespace {

struct GridCell {
  double axis = 0.0;
  int k = 0;
  int separation = 0;
};

Problem cell_problem(const ExperimentSpec& spec, const GridCell& cell,
                     int trial) {
  const std::uint64_t child =
      derive_trial_seed(spec.seed, spec.kind, spec.m, spec.n, cell.axis,
                        cell.separation, cell.k, trial);
  EnsembleSpec es;
  es.kind = spec.kind;
  es.m = spec.m;
  es.n = spec.n;
  if (spec.kind == EnsembleKind::correlated_gaussian)
    es.r = cell.axis;
  else
    es.factor = cell.axis;
  es.seed = rng::fold(child, 1);
  SignalSpec ss;
  ss.n = spec.n;
  ss.k = cell.k;
  ss.separation = cell.separation;
  ss.law = spec.law;
  ss.seed = rng::fold(child, 2);
  return make_problem(es, ss, 0.0);
}

TrialRecord run_single(const ExperimentSpec& spec, const GridCell& cell,
                       int trial) {
  TrialRecord rec;
  rec.axis = cell.axis;
  rec.k = cell.k;
  rec.separation = cell.separation;
  rec.trial = trial;
  rec.seed = derive_trial_seed(spec.seed, spec.kind, spec.m, spec.n,
                               cell.axis, cell.separation, cell.k, trial);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Problem prob = cell_problem(spec, cell, trial);
    SolveOptions opts = spec.options;
    switch (spec.solver) {
      case SolverKind::unconstrained:
        opts.model = Model::unconstrained;
        break;
      case SolverKind::constrained:
        opts.model = Model::constrained;
        break;
      case SolverKind::l1_baseline:
        break;  // honors opts.model (unconstrained by default)
    }
    const SolveResult res = spec.solver == SolverKind::l1_baseline
                                ? solve_l1_baseline(prob, opts)
                                : solve(prob, opts);
    const double truth_norm = prob.truth->x.norm();
    rec.rel_error = truth_norm > 0.0
                        ? (res.x - prob.truth->x).norm() / truth_norm
                        : res.x.norm();
    rec.success = rec.rel_error <= spec.success_threshold;
    rec.outer_iters = res.outer_iters;
    rec.inner_total = 0;
    for (int it : res.inner_iters) rec.inner_total += it;
    rec.status = res.status;
  } catch (const std::exception&) {
    rec.rel_error = std::numeric_limits<double>::infinity();
    rec.success = false;
    rec.status = SolveStatus::diverged;
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rec;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  return default_worker_count();
}

std::vector<TrialRecord> run_grid(const ExperimentSpec& spec,
                                  const std::vector<GridCell>& cells) {
  const int trials = spec.trials;
  const std::size_t total = cells.size() * static_cast<std::size_t>(trials);
  std::vector<TrialRecord> records(total);
  const int workers = resolve_workers(spec.workers);
  auto job = [&](std::size_t flat) {
    const std::size_t ci = flat / static_cast<std::size_t>(trials);
    const int trial = static_cast<int>(flat % static_cast<std::size_t>(trials));
    records[flat] = run_single(spec, cells[ci], trial);
  };
  if (workers <= 1 || total <= 1) {
    for (std::size_t i = 0; i < total; ++i) job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int count = std::min<std::size_t>(workers, total) > 0
                          ? static_cast<int>(std::min<std::size_t>(
                                static_cast<std::size_t>(workers), total))
                          : 1;
    pool.reserve(static_cast<std::size_t>(count));
    for (int w = 0; w < count; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < total;
             i = next.fetch_add(1))
          job(i);
      });
    for (auto& t : pool) t.join();
  }
  return records;
}

std::vector<CellSummary> summarize(const std::vector<TrialRecord>& records,
                                   const std::vector<GridCell>& cells,
                                   int trials) {
  std::vector<CellSummary> out(cells.size());
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    CellSummary& s = out[ci];
    s.axis = cells[ci].axis;
    s.k = cells[ci].k;
    s.separation = cells[ci].separation;
    s.trials = trials;
    for (int t = 0; t < trials; ++t)
      if (records[ci * static_cast<std::size_t>(trials) +
                  static_cast<std::size_t>(t)]
              .success)
        ++s.successes;
    s.success_rate = static_cast<double>(s.successes) / trials;
  }
  return out;
}

int resolve_separation(const ExperimentSpec& spec, double axis) {
  if (spec.separation == SeparationRule::none) return 0;
  return static_cast<int>(std::llround(2.0 * axis));  // 2RL, RL = F
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Problem trial_problem(const ExperimentSpec& spec, double axis, int k,
                      int separation, int trial) {
  return cell_problem(spec, GridCell{axis, k, separation}, trial);
}

TrialRecord run_trial(const ExperimentSpec& spec, double axis, int k,
                      int separation, int trial) {
  return run_single(spec, GridCell{axis, k, separation}, trial);
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<GridCell> cells;
  cells.reserve(spec.axis.size() * spec.sparsity.size());
  for (double axis : spec.axis)
    for (int k : spec.sparsity)
      cells.push_back(GridCell{axis, k, resolve_separation(spec, axis)});
  ExperimentResult result;
  result.records = run_grid(spec, cells);
  result.cells = summarize(result.records, cells, spec.trials);
  return result;
}

void write_records_csv(std::ostream& os, const ExperimentSpec& spec,
                       const ExperimentResult& result) {
  os << "# tl1-results v1\n";
  os << "# config: kind = " << to_string(spec.kind) << "\n";
  os << "# config: M = " << spec.m << "\n# config: N = " << spec.n << "\n";
  os << "# config: axis =";
  for (double a : spec.axis) os << " " << fmt(a);
  os << "\n# config: k =";
  for (int k : spec.sparsity) os << " " << k;
  os << "\n# config: separation = "
     << (spec.separation == SeparationRule::none ? "none" : "2RL") << "\n";
  os << "# config: trials = " << spec.trials << "\n";
  os << "# config: solver = " << to_string(spec.solver) << "\n";
  os << "# config: law = "
     << (spec.law == ValueLaw::standard_normal ? "normal" : "signs") << "\n";
  os << "# config: seed = " << spec.seed << "\n";
  os << "# config: a = " << fmt(spec.options.penalty.a) << "\n";
  os << "# config: lambda = " << fmt(spec.options.lambda) << "\n";
  os << "# config: c = " << fmt(spec.options.c) << "\n";
  os << "# config: delta = "
     << (spec.options.delta ? fmt(*spec.options.delta) : "auto") << "\n";
  os << "# config: eps_outer = " << fmt(spec.options.eps_outer) << "\n";
  os << "# config: eps_inner = " << fmt(spec.options.eps_inner) << "\n";
  os << "# config: max_outer = " << spec.options.max_outer << "\n";
  os << "# config: max_inner = " << spec.options.max_inner << "\n";
  os << "# config: success_threshold = " << fmt(spec.success_threshold)
     << "\n";
  os << "# columns: kind,axis,M,N,k,separation,trial,seed,rel_error,success,"
        "outer_iters,inner_total,status\n";
  for (const TrialRecord& r : result.records) {
    os << to_string(spec.kind) << "," << fmt(r.axis) << "," << spec.m << ","
       << spec.n << "," << r.k << "," << r.separation << "," << r.trial << ","
       << r.seed << "," << fmt(r.rel_error) << "," << (r.success ? 1 : 0)
       << "," << r.outer_iters << "," << r.inner_total << ","
       << to_string(r.status) << "\n";
  }
  os << "# aggregate: kind,axis,M,N,k,separation,trials,successes,"
        "success_rate\n";
  for (const CellSummary& c : result.cells) {
    os << to_string(spec.kind) << "," << fmt(c.axis) << "," << spec.m << ","
       << spec.n << "," << c.k << "," << c.separation << "," << c.trials
       << "," << c.successes << "," << fmt(c.success_rate) << "\n";
  }
}

void write_timings_csv(std::ostream& os, const ExperimentResult& result) {
  os << "# tl1-timings v1\n";
  os << "# columns: axis,k,separation,trial,wall_seconds,slow\n";
  // Median per cell; a trial above 10x the median is flagged slow.
  std::size_t i = 0;
  for (const CellSummary& cell : result.cells) {
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(cell.trials));
    for (int t = 0; t < cell.trials; ++t)
      times.push_back(result.records[i + static_cast<std::size_t>(t)]
                          .wall_seconds);
    std::vector<double> sorted = times;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    for (int t = 0; t < cell.trials; ++t) {
      const TrialRecord& r = result.records[i + static_cast<std::size_t>(t)];
      os << fmt(r.axis) << "," << r.k << "," << r.separation << "," << r.trial
         << "," << fmt(r.wall_seconds) << ","
         << (median > 0.0 && r.wall_seconds > 10.0 * median ? 1 : 0) << "\n";
    }
    i += static_cast<std::size_t>(cell.trials);
  }
}

std::vector<int> ASweepSpec::sparsity_grid() const {
  if (!sparsity.empty()) return sparsity;
  std::vector<int> grid;
  for (int k = 8; k <= 32; k += 2) grid.push_back(k);
  return grid;
}

ASweepResult a_sweep(const ASweepSpec& spec) {
  if (spec.a_values.empty()) throw ConfigError("a-sweep: empty a list");
  ASweepResult result;
  result.a_values = spec.a_values;
  result.sparsity = spec.sparsity_grid();
  result.rates.resize(static_cast<Eigen::Index>(spec.a_values.size()),
                      static_cast<Eigen::Index>(result.sparsity.size()));
  ExperimentSpec base;
  base.kind = EnsembleKind::correlated_gaussian;
  base.axis = {0.0};
  base.m = spec.m;
  base.n = spec.n;
  base.sparsity = result.sparsity;
  base.trials = spec.trials;
  base.solver = SolverKind::unconstrained;
  base.options = spec.options;
  base.seed = spec.seed;
  base.workers = spec.workers;
  base.success_threshold = spec.success_threshold;
  for (std::size_t ai = 0; ai < spec.a_values.size(); ++ai) {
    base.options.penalty = PenaltyParams(spec.a_values[ai]);
    const ExperimentResult sweep = run_experiment(base);
    for (std::size_t ki = 0; ki < sweep.cells.size(); ++ki)
      result.rates(static_cast<Eigen::Index>(ai),
                   static_cast<Eigen::Index>(ki)) =
          sweep.cells[ki].success_rate;
  }
  result.mean_rate.resize(spec.a_values.size());
  for (std::size_t ai = 0; ai < spec.a_values.size(); ++ai)
    result.mean_rate[ai] =
        result.rates.row(static_cast<Eigen::Index>(ai)).mean();
  return result;
}

void write_asweep_csv(std::ostream& os, const ASweepSpec& spec,
                      const ASweepResult& result) {
  os << "# tl1-asweep v1\n";
  os << "# config: M = " << spec.m << "\n# config: N = " << spec.n << "\n";
  os << "# config: trials = " << spec.trials << "\n";
  os << "# config: seed = " << spec.seed << "\n";
  os << "# config: lambda = " << fmt(spec.options.lambda) << "\n";
  os << "# columns: a,k,success_rate\n";
  for (std::size_t ai = 0; ai < result.a_values.size(); ++ai)
    for (std::size_t ki = 0; ki < result.sparsity.size(); ++ki)
      os << fmt(result.a_values[ai]) << "," << result.sparsity[ki] << ","
         << fmt(result.rates(static_cast<Eigen::Index>(ai),
                             static_cast<Eigen::Index>(ki)))
         << "\n";
  os << "# aggregate: a,mean_success_rate\n";
  for (std::size_t ai = 0; ai < result.a_values.size(); ++ai)
    os << fmt(result.a_values[ai]) << "," << fmt(result.mean_rate[ai])
       << "\n";
}

SolveOptions table1_replication_options() {
  SolveOptions opts;
  opts.max_inner = 270;
  opts.max_outer = 85;
  return opts;
}

void Table1Spec::validate() const {
  if (!(factor >= 1.0))
    throw ConfigError("table1: the DCT factor F (>= 1) is required");
  if (sparsity.empty() || rl_multiples.empty())
    throw ConfigError("table1: empty grid");
  for (int mult : rl_multiples) {
    const int sep = static_cast<int>(std::llround(mult * factor));
    for (int k : sparsity)
      if (k > 1 && static_cast<long long>(k - 1) * sep >= n)
        throw ConfigError("table1: infeasible (k, separation) for this F");
  }
}

Table1Result table1_replication(const Table1Spec& spec) {
  spec.validate();
  Table1Result result;
  result.sparsity = spec.sparsity;
  result.rl_multiples = spec.rl_multiples;
  result.rates.resize(static_cast<Eigen::Index>(spec.rl_multiples.size()),
                      static_cast<Eigen::Index>(spec.sparsity.size()));
  ExperimentSpec base;
  base.kind = EnsembleKind::oversampled_dct;
  base.axis = {spec.factor};
  base.m = spec.m;
  base.n = spec.n;
  base.sparsity = spec.sparsity;
  base.trials = spec.trials;
  base.solver = spec.solver;
  base.options = spec.options;
  base.seed = spec.seed;
  base.workers = spec.workers;
  base.success_threshold = spec.success_threshold;

  std::vector<GridCell> cells;
  for (int mult : spec.rl_multiples) {
    const int sep = static_cast<int>(std::llround(mult * spec.factor));
    result.separations.push_back(sep);
    for (int k : spec.sparsity)
      cells.push_back(GridCell{spec.factor, k, sep});
  }
  const std::vector<TrialRecord> records = run_grid(base, cells);
  const std::vector<CellSummary> cellsum =
      summarize(records, cells, spec.trials);
  for (std::size_t ri = 0; ri < spec.rl_multiples.size(); ++ri)
    for (std::size_t ki = 0; ki < spec.sparsity.size(); ++ki)
      result.rates(static_cast<Eigen::Index>(ri),
                   static_cast<Eigen::Index>(ki)) =
          cellsum[ri * spec.sparsity.size() + ki].success_rate;
  return result;
}

void write_table1_csv(std::ostream& os, const Table1Spec& spec,
                      const Table1Result& result) {
  os << "# tl1-table1 v1\n";
  os << "# config: F = " << fmt(spec.factor) << "\n";
  os << "# config: M = " << spec.m << "\n# config: N = " << spec.n << "\n";
  os << "# config: trials = " << spec.trials << "\n";
  os << "# config: solver = " << to_string(spec.solver) << "\n";
  os << "# config: seed = " << spec.seed << "\n";
  os << "# config: a = " << fmt(spec.options.penalty.a) << "\n";
  os << "# config: lambda = " << fmt(spec.options.lambda) << "\n";
  os << "# rows: separation in multiples of RL = F; columns: sparsity\n";
  os << "rl,separation";
  for (int k : result.sparsity) os << ",k" << k;
  os << "\n";
  for (std::size_t ri = 0; ri < result.rl_multiples.size(); ++ri) {
    os << result.rl_multiples[ri] << "," << result.separations[ri];
    for (std::size_t ki = 0; ki < result.sparsity.size(); ++ki)
      os << "," << fmt(result.rates(static_cast<Eigen::Index>(ri),
                                    static_cast<Eigen::Index>(ki)));
    os << "\n";
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config: bad number for key '" + key + "': " + v);
  return x;
}

long long parse_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config: bad integer for key '" + key + "': " + v);
  return x;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : v) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config(
    std::istream& is) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[' && t.back() == ']') continue;  // section marker
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key or value");
    entries.emplace_back(key, value);
  }
  return entries;
}

ExperimentSpec build_experiment_spec(
    const std::vector<std::pair<std::string, std::string>>& entries) {
  ExperimentSpec spec;
  for (const auto& [key, value] : entries) {
    if (key == "kind") {
      if (value == "gaussian")
        spec.kind = EnsembleKind::correlated_gaussian;
      else if (value == "dct")
        spec.kind = EnsembleKind::oversampled_dct;
      else
        throw ConfigError("config: kind must be gaussian or dct");
    } else if (key == "M") {
      spec.m = static_cast<int>(parse_int(key, value));
    } else if (key == "N") {
      spec.n = static_cast<int>(parse_int(key, value));
    } else if (key == "axis" || key == "r" || key == "F") {
      spec.axis.clear();
      for (const std::string& p : split_list(value))
        spec.axis.push_back(parse_double(key, p));
    } else if (key == "k" || key == "sparsity") {
      spec.sparsity.clear();
      for (const std::string& p : split_list(value))
        spec.sparsity.push_back(static_cast<int>(parse_int(key, p)));
    } else if (key == "separation") {
      if (value == "none")
        spec.separation = SeparationRule::none;
      else if (value == "2RL" || value == "2rl")
        spec.separation = SeparationRule::two_rl;
      else
        throw ConfigError("config: separation must be none or 2RL");
    } else if (key == "trials") {
      spec.trials = static_cast<int>(parse_int(key, value));
    } else if (key == "solver") {
      if (value == "unconstrained")
        spec.solver = SolverKind::unconstrained;
      else if (value == "constrained")
        spec.solver = SolverKind::constrained;
      else if (value == "l1-baseline")
        spec.solver = SolverKind::l1_baseline;
      else
        throw ConfigError("config: unknown solver '" + value + "'");
    } else if (key == "model") {
      if (value == "unconstrained")
        spec.options.model = Model::unconstrained;
      else if (value == "constrained")
        spec.options.model = Model::constrained;
      else
        throw ConfigError("config: unknown model '" + value + "'");
    } else if (key == "law") {
      if (value == "normal")
        spec.law = ValueLaw::standard_normal;
      else if (value == "signs")
        spec.law = ValueLaw::unit_signs;
      else
        throw ConfigError("config: law must be normal or signs");
    } else if (key == "seed") {
      spec.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "workers") {
      spec.workers = static_cast<int>(parse_int(key, value));
    } else if (key == "a") {
      spec.options.penalty = PenaltyParams(parse_double(key, value));
    } else if (key == "lambda") {
      spec.options.lambda = parse_double(key, value);
    } else if (key == "c") {
      spec.options.c = parse_double(key, value);
    } else if (key == "delta") {
      spec.options.delta = parse_double(key, value);
    } else if (key == "eps_outer") {
      spec.options.eps_outer = parse_double(key, value);
    } else if (key == "eps_inner") {
      spec.options.eps_inner = parse_double(key, value);
    } else if (key == "max_outer") {
      spec.options.max_outer = static_cast<int>(parse_int(key, value));
    } else if (key == "max_inner") {
      spec.options.max_inner = static_cast<int>(parse_int(key, value));
    } else if (key == "success_threshold") {
      spec.success_threshold = parse_double(key, value);
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

int default_worker_count() {
  if (const char* env = std::getenv("TL1_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace tl1
