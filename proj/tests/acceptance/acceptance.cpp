// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

using namespace cfi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void require(Outcome& o, bool ok, const std::string& what) {
  if (!ok) {
    o.pass = false;
    if (o.detail.size() < 400) o.detail += (o.detail.empty() ? "" : "; ") + what;
  }
}

std::string num(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Analytic check of one naive four-item case.
Outcome analytic_case(double p0, const std::vector<double>& h0, const std::vector<double>& h1, double agg0,
                      double agg1) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = testing_support::four_item(MergeStrategy::NaiveEqualTie, p0);
  const auto k = compute_kernels_exact(s);
  const auto g0 = convolve_attention(k, s.attention, Arm::Control);
  const auto g1 = convolve_attention(k, s.attention, Arm::Treatment);
  for (std::size_t j = 0; j < 4; ++j) {
    require(o, std::abs(g0[j] - h0[j]) <= 1e-9, "h0(" + std::to_string(j + 1) + ")=" + num(g0[j]));
    require(o, std::abs(g1[j] - h1[j]) <= 1e-9, "h1(" + std::to_string(j + 1) + ")=" + num(g1[j]));
  }
  const double a0 = expected_readout_via_kernels(s, k, Arm::Control);
  const double a1 = expected_readout_via_kernels(s, k, Arm::Treatment);
  require(o, std::abs(a0 - agg0) <= 1e-9, "agg0=" + num(a0));
  require(o, std::abs(a1 - agg1) <= 1e-9, "agg1=" + num(a1));
  const double secs = seconds_since(t0);
  require(o, secs < 1.0, "runtime " + num(secs) + "s");
  if (o.pass) o.detail = "agg=(" + num(a0) + ", " + num(a1) + "), " + num(secs) + "s";
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::string summary;
  for (int c = 1; c <= 4; ++c) {
    const auto cfg = load_scenario_config(testing_support::fixture("case" + std::to_string(c) + ".config"));
    const Scenario& s = cfg.scenario;
    const auto k = compute_kernels_exact(s);
    const auto r = simulate(s, 100000, cfg.seed.value_or(0));
    for (Arm arm : kExperimentArms) {
      const double want = expected_readout_via_kernels(s, k, arm);
      const auto& st = r.arm(arm);
      require(o, std::abs(st.mean - want) <= 4 * st.sd,
              "case" + std::to_string(c) + " arm " + std::to_string(arm_index(arm)) + " mean " + num(st.mean) +
                  " vs " + num(want) + " (sd " + num(st.sd) + ")");
    }
    const bool consistent = s.design.strategy == MergeStrategy::Consistent;
    const double m0 = r.control.mean;
    const double m1 = r.treatment.mean;
    if (consistent) require(o, m1 > m0, "case" + std::to_string(c) + " treatment not ahead");
    else require(o, m0 > m1, "case" + std::to_string(c) + " naive ordering not inverted");
    if (c == 3) {
      const double combined = std::sqrt(r.control.sd * r.control.sd + r.treatment.sd * r.treatment.sd);
      require(o, m1 - m0 > 5 * combined, "case3 margin " + num(m1 - m0) + " <= 5*" + num(combined));
    }
    summary += " case" + std::to_string(c) + "=(" + num(m0) + ", " + num(m1) + ")";
  }
  const double secs = seconds_since(t0);
  require(o, secs < 60.0, "runtime " + num(secs) + "s");
  if (o.pass) o.detail = "N=1e5" + summary + ", " + num(secs) + "s";
  return o;
}

// The 200 randomized designs shared by criteria 4 and 5.
std::vector<ExperimentDesign> random_designs() {
  std::mt19937_64 g(20240601);
  std::vector<ExperimentDesign> out;
  for (int i = 0; i < 200; ++i) {
    ExperimentDesign d;
    const std::size_t n = 4 + static_cast<std::size_t>(g() % 7);
    d.r0 = testing_support::random_ranker(n, g);
    d.r1 = testing_support::random_ranker(n, g);
    const double p0 = 0.1 * static_cast<double>(1 + g() % 9);
    d.probabilities = {p0, 1.0 - p0, 0.0};
    d.strategy = MergeStrategy::Consistent;
    out.push_back(d);
  }
  return out;
}

void criteria4and5(Outcome& c4, Outcome& c5) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::size_t pairs = 0;
  std::size_t violations = 0;
  for (const auto& d : random_designs()) {
    const auto k = compute_kernels_exact(d);
    const auto c = check_consistency(k, 1e-9);
    worst = std::max(worst, c.max_deviation);
    const auto m = check_monotonicity(k);
    pairs += m.pairs_checked;
    violations += m.violations.size();
  }
  require(c4, worst <= 1e-9, "max deviation " + num(worst));
  const auto naive = compute_kernels_exact(testing_support::four_item(MergeStrategy::NaiveEqualTie, 0.9));
  const double naive_dev = check_consistency(naive, 1e-9).max_deviation;
  require(c4, naive_dev > 0.01, "naive deviation only " + num(naive_dev));
  const double secs = seconds_since(t0);
  require(c4, secs < 120.0, "runtime " + num(secs) + "s");
  if (c4.pass) {
    c4.detail = "200 scenarios, max deviation " + num(worst) + "; naive deviation " + num(naive_dev) + ", " +
                num(secs) + "s";
  }
  require(c5, violations == 0, std::to_string(violations) + " violations");
  if (c5.pass) c5.detail = std::to_string(pairs) + " kernel pairs, 0 violations";
}

Outcome criterion6() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 g(77);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 7);
    const auto u = testing_support::random_utility(n, g);
    const auto h = testing_support::random_attention(n, g);
    const Ranker r = ranker_from_utility(ItemUniverse::numbered(n), u);
    double got = 0.0;
    for (ItemIndex d = 0; d < n; ++d) got += u[d] * h[r.position(d) - 1];
    const double best = oracle::best_total_over_permutations(u, h);
    worst = std::max(worst, best - got);
  }
  require(o, worst <= 1e-12, "shortfall " + num(worst));
  const double secs = seconds_since(t0);
  require(o, secs < 60.0, "runtime " + num(secs) + "s");
  if (o.pass) o.detail = "100 pairs, n<=7, max shortfall " + num(worst) + ", " + num(secs) + "s";
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::mt19937_64 g(31337);
  double worst_z = 0.0;
  int runs = 0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = 4 + static_cast<std::size_t>(g() % 5);
    const double p0 = 0.1 * static_cast<double>(1 + g() % 9);
    const auto base = testing_support::random_scenario(n, p0, MergeStrategy::Consistent, g);
    for (auto strategy : {MergeStrategy::Consistent, MergeStrategy::NaiveEqualTie}) {
      Scenario s = base;
      s.design.strategy = strategy;
      const auto k = compute_kernels_exact(s);
      const auto r = simulate(s, 100000, 1000 + static_cast<std::uint64_t>(i));
      ++runs;
      for (Arm arm : kExperimentArms) {
        const auto& st = r.arm(arm);
        const double gap = std::abs(st.mean - expected_readout_via_kernels(s, k, arm));
        if (st.sd > 0) worst_z = std::max(worst_z, gap / st.sd);
        require(o, gap <= 4 * st.sd + 1e-9,
                "scenario " + std::to_string(i) + " " + std::string(strategy_name(strategy)) + " arm " +
                    std::to_string(arm_index(arm)) + " gap " + num(gap) + " sd " + num(st.sd));
      }
    }
  }
  if (o.pass) o.detail = std::to_string(runs) + " runs at N=1e5, worst |gap|/sd " + num(worst_z);
  return o;
}

Outcome criterion8() {
  Outcome o;
  const auto aa = load_scenario_config(testing_support::fixture("aa.config"));
  int seeds = 0;
  for (auto strategy : {MergeStrategy::Consistent, MergeStrategy::NaiveEqualTie}) {
    ExperimentDesign d = aa.scenario.design;
    d.strategy = strategy;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      ++seeds;
      require(o, draw_replication(d, seed, 0).merged == d.r0,
              std::string(strategy_name(strategy)) + " AA differs at seed " + std::to_string(seed));
    }
  }
  // Conflict-free draws must return the pre-ranking itself.
  std::mt19937_64 g(8);
  int conflict_free = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    ExperimentDesign d;
    const std::size_t n = 2 + static_cast<std::size_t>(g() % 9);
    d.r0 = testing_support::random_ranker(n, g);
    d.r1 = testing_support::random_ranker(n, g);
    d.probabilities = {0.5, 0.5, 0.0};
    d.strategy = trial % 2 ? MergeStrategy::Consistent : MergeStrategy::NaiveEqualTie;
    const auto draw = draw_replication(d, 4, static_cast<std::uint64_t>(trial));
    const auto pre = sutva_merge(d.r0, d.r1, draw.assignment, d.governance);
    if (pre.has_conflicts()) continue;
    ++conflict_free;
    require(o, draw.merged == pre.as_ranker(), "conflict-free draw " + std::to_string(trial) + " moved items");
  }
  require(o, conflict_free > 100, "too few conflict-free draws");
  ExperimentDesign spot = aa.scenario.design;
  spot.strategy = MergeStrategy::RandomSpotLabeling;
  int broken_seed = -1;
  for (std::uint64_t seed = 0; seed < 1000 && broken_seed < 0; ++seed) {
    if (!(draw_replication(spot, seed, 0).merged == spot.r0)) broken_seed = static_cast<int>(seed);
  }
  require(o, broken_seed >= 0, "spot labeling never broke the AA identity");
  if (o.pass) {
    o.detail = std::to_string(seeds) + " AA seeds identical to r0; " + std::to_string(conflict_free) +
               " conflict-free draws equal R*; spot labeling breaks AA at seed " + std::to_string(broken_seed);
  }
  return o;
}

Outcome criterion9() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = load_scenario_config(testing_support::fixture("fig11.config"));
  const std::size_t n = cfg.scenario.size();
  std::vector<std::vector<double>> tv;
  for (double p0 : cfg.plot.p0_sweep) {
    ExperimentDesign d = cfg.scenario.design;
    d.probabilities = {p0, 1.0 - p0, 0.0};
    const auto k = compute_kernels_exact(d);
    std::vector<double> row;
    for (std::size_t j = 1; j <= n; ++j) {
      const auto pj = static_cast<Position>(j);
      row.push_back(tv_distance(k.at(Arm::Control, pj), PositionDistribution::point_mass(n, pj)));
    }
    tv.push_back(row);
  }
  for (std::size_t i = 1; i < tv.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      require(o, tv[i][j] < tv[i - 1][j],
              "TV at spot " + std::to_string(j + 1) + " did not drop from p0=" + num(cfg.plot.p0_sweep[i - 1]));
    }
  }
  const auto fig10 = load_scenario_config(testing_support::fixture("fig10.config"));
  const auto k = compute_kernels_exact(fig10.scenario);
  std::size_t curves = 0;
  for (Arm arm : kExperimentArms) {
    for (std::size_t c = 1; c <= n; ++c) {
      const auto hk = convolve_attention(k, AttentionFunction::step(n, c), arm);
      ++curves;
      for (std::size_t j = 1; j < n; ++j) {
        require(o, hk[j - 1] >= hk[j] - 1e-12, "step " + std::to_string(c) + " rises at " + std::to_string(j + 1));
      }
    }
  }
  const double secs = seconds_since(t0);
  require(o, secs < 30.0, "runtime " + num(secs) + "s");
  if (o.pass) {
    const std::size_t f = static_cast<std::size_t>(cfg.plot.focus_position - 1);
    o.detail = "TV to point mass at spot " + std::to_string(f + 1) + ": " + num(tv.front()[f]) + " -> " +
               num(tv.back()[f]) + "; " + std::to_string(curves) + " step curves non-increasing, " + num(secs) + "s";
  }
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the command-line tool; returns exit status followed by all output.
std::string run_cli(const std::string& args, const fs::path& scratch) {
  const fs::path log = scratch / "run.log";
  const std::string cmd = std::string("\"") + CFI_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  std::string result = "status=" + std::to_string(status) + "\n" + slurp(log);
  fs::remove(log);
  return result;
}

std::string dir_contents(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += f.filename().string() + "\n" + slurp(f);
  return all;
}

Outcome criterion10() {
  Outcome o;
  const fs::path scratch = fs::temp_directory_path() / "cfi_acceptance";
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  std::vector<std::string> fixtures;
  for (const auto& e : fs::directory_iterator(CFI_FIXTURES_DIR)) {
    if (e.path().extension() == ".config") fixtures.push_back(e.path().string());
  }
  std::sort(fixtures.begin(), fixtures.end());
  std::size_t comparisons = 0;
  for (const auto& f : fixtures) {
    const std::string name = fs::path(f).stem().string();
    const std::string cfg = " --config \"" + f + "\"";
    std::vector<std::string> commands{"merge" + cfg, "check" + cfg, "check" + cfg + " --mode mc --samples 20000",
                                      "simulate --format json --replications 50000" + cfg, "kernels" + cfg};
    for (const auto& c : commands) {
      std::string first;
      for (const char* threads : {" --threads 1", " --threads 1", " --threads 4"}) {
        const std::string got = run_cli(c + threads, scratch);
        if (first.empty()) first = got;
        else {
          ++comparisons;
          require(o, got == first, name + ": '" + c.substr(0, c.find(' ')) + "' output changed");
        }
      }
    }
    // Directory output.
    std::string first;
    for (const char* threads : {" --threads 1", " --threads 4"}) {
      const fs::path out = scratch / "kernels";
      fs::remove_all(out);
      const std::string status = run_cli("kernels" + cfg + " --out \"" + out.string() + "\"" + threads, scratch);
      const std::string got = status + (fs::exists(out) ? dir_contents(out) : "");
      if (first.empty()) first = got;
      else {
        ++comparisons;
        require(o, got == first, name + ": kernel files changed");
      }
    }
  }
  fs::remove_all(scratch);
  if (o.pass) {
    o.detail = std::to_string(fixtures.size()) + " fixtures, " + std::to_string(comparisons) +
               " repeat runs byte-identical across 1 and 4 threads";
  }
  return o;
}

void report(int id, const char* title, const Outcome& o, int& failures) {
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << title << "): " << o.detail << std::endl;
  failures += !o.pass;
}

template <typename F>
Outcome guarded(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return Outcome{false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main() {
  int failures = 0;
  report(1, "analytic naive case, p0=0.9",
         guarded([] { return analytic_case(0.9, {1, 0.955, 0.095, 0}, {1, 0.505, 0.045, 0}, 1.95, 1.5455); }),
         failures);
  report(2, "analytic naive case, p0=0.5",
         guarded([] { return analytic_case(0.5, {1, 0.875, 0.375, 0}, {1, 0.625, 0.125, 0}, 2.15, 1.7375); }),
         failures);
  report(3, "Monte Carlo cases 1-4", guarded(criterion3), failures);
  Outcome c4;
  Outcome c5;
  try {
    criteria4and5(c4, c5);
  } catch (const std::exception& e) {
    c4 = c5 = Outcome{false, std::string("exception: ") + e.what()};
  }
  report(4, "consistency on randomized scenarios", c4, failures);
  report(5, "monotonicity on randomized scenarios", c5, failures);
  report(6, "utility ranker is optimal", guarded(criterion6), failures);
  report(7, "simulated means match kernel expectation", guarded(criterion7), failures);
  report(8, "AA identity and conflict-free merges", guarded(criterion8), failures);
  report(9, "kernel shape trends", guarded(criterion9), failures);
  report(10, "determinism across runs and threads", guarded(criterion10), failures);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
