#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cfi/config.hpp"
#include "cfi/core_ranking.hpp"
#include "cfi/errors.hpp"
#include "cfi/kernels.hpp"
#include "cfi/mergers.hpp"
#include "cfi/readout.hpp"
#include "cfi/replication.hpp"
#include "cfi/report.hpp"

namespace cfi::cli {

// Exit-code contract.
inline constexpr int kOk = 0;
inline constexpr int kChecksFailed = 1;
inline constexpr int kUsageError = 2;

inline constexpr std::uint64_t kDefaultSeed = 0;
inline constexpr std::uint64_t kDefaultReplications = 100000;
inline constexpr std::uint64_t kDefaultSamples = 100000;

struct CommonOptions {
  std::string config;
  std::optional<std::string> strategy;  // overrides the config's strategy
  unsigned threads = 0;
};

struct MergeOptions {
  CommonOptions common;
  std::optional<std::uint64_t> seed;
  std::string out;  // empty: stdout
};

struct KernelsOptions {
  CommonOptions common;
  std::string mode = "exact";
  std::uint64_t samples = kDefaultSamples;
  std::optional<std::uint64_t> seed;
  std::string out;  // output directory; empty: kernel CSV on stdout
};

struct CheckOptions {
  CommonOptions common;
  std::string mode = "exact";
  std::uint64_t samples = kDefaultSamples;
  std::optional<std::uint64_t> seed;
  double tolerance = 1e-9;
};

struct SimulateOptions {
  CommonOptions common;
  std::optional<std::uint64_t> replications;
  std::optional<std::uint64_t> seed;
  std::string out;  // empty: stdout
  std::string format = "csv";
};

namespace detail {

inline ScenarioConfig load(const CommonOptions& o) {
  auto cfg = load_scenario_config(o.config);
  if (o.strategy) {
    const auto s = parse_strategy(*o.strategy);
    if (!s) throw ConfigError("unknown strategy '" + *o.strategy + "' (consistent | naive | spot-labeling)", "--strategy");
    cfg.scenario.design.strategy = *s;
    cfg.scenario.validate();
  }
  return cfg;
}

// Writes to `path`, or to `fallback` when path is empty.
inline void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& writer) {
  if (path.empty()) {
    writer(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'", "--out");
  writer(f);
}

inline KernelTable kernels_for(const Scenario& s, const std::string& mode, std::uint64_t samples, std::uint64_t seed,
                               unsigned threads) {
  if (mode == "exact") {
    ExactKernelOptions eo;
    eo.threads = threads;
    return compute_kernels_exact(s, eo);
  }
  if (mode == "mc") {
    if (samples < 1) throw ConfigError("Monte Carlo mode needs --samples >= 1", "--samples");
    return compute_kernels_mc(s, samples, seed, threads);
  }
  throw ConfigError("unknown mode '" + mode + "' (exact | mc)", "--mode");
}

// Runs a command body and maps library errors onto the exit-code contract.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
}

}  // namespace detail

/// Draws one assignment from (seed, replication 0), merges, and writes the
/// ranking with its SUTVA bookkeeping.
inline int cmd_merge(const MergeOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto cfg = detail::load(o.common);
    const Scenario& s = cfg.scenario;
    const std::uint64_t seed = o.seed.value_or(cfg.seed.value_or(kDefaultSeed));
    const auto draw = draw_replication(s.design, seed, 0);
    const auto pre = sutva_merge(s.design.r0, s.design.r1, draw.assignment, s.design.governance);
    detail::emit(o.out, out, [&](std::ostream& os) { write_merge_csv(os, s, draw.assignment, pre, draw.merged); });
    return kOk;
  });
}

/// Writes kernels.csv, attention.csv and the plot-data CSVs into `out`.
/// Without `out`, prints the kernel CSV followed by the attention CSV.
inline int cmd_kernels(const KernelsOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto cfg = detail::load(o.common);
    const Scenario& s = cfg.scenario;
    const std::uint64_t seed = o.seed.value_or(cfg.seed.value_or(kDefaultSeed));
    KernelTable kernels;
    try {
      kernels = detail::kernels_for(s, o.mode, o.samples, seed, o.common.threads);
    } catch (const SizeError& e) {
      err << "error: " << e.what() << " (try --mode mc)\n";
      return kUsageError;
    }
    if (o.out.empty()) {
      write_kernels_csv(out, kernels);
      out << '\n';
      write_attention_csv(out, s, kernels);
      return kOk;
    }
    namespace fs = std::filesystem;
    const fs::path dir(o.out);
    fs::create_directories(dir);
    auto file = [&](const char* name) { return (dir / name).string(); };
    detail::emit(file("kernels.csv"), out, [&](std::ostream& os) { write_kernels_csv(os, kernels); });
    detail::emit(file("attention.csv"), out, [&](std::ostream& os) { write_attention_csv(os, s, kernels); });
    detail::emit(file("plot_kernels.csv"), out, [&](std::ostream& os) { write_kernel_plot_csv(os, kernels); });
    detail::emit(file("plot_step_attention.csv"), out,
                 [&](std::ostream& os) { write_step_attention_plot_csv(os, kernels); });
    if (!cfg.plot.p0_sweep.empty()) {
      ExactKernelOptions eo;
      eo.threads = o.common.threads;
      detail::emit(file("plot_p0_sweep.csv"), out,
                   [&](std::ostream& os) { write_p0_sweep_plot_csv(os, s, cfg.plot, eo); });
    }
    write_attention_csv(out, s, kernels);
    return kOk;
  });
}

/// Consistency and monotonicity verdicts; exit 1 when either fails.
inline int cmd_check(const CheckOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto cfg = detail::load(o.common);
    const std::uint64_t seed = o.seed.value_or(cfg.seed.value_or(kDefaultSeed));
    KernelTable kernels;
    try {
      kernels = detail::kernels_for(cfg.scenario, o.mode, o.samples, seed, o.common.threads);
    } catch (const SizeError& e) {
      err << "error: " << e.what() << " (try --mode mc)\n";
      return kUsageError;
    }
    const auto consistency = check_consistency(kernels, o.tolerance);
    const auto monotonicity = check_monotonicity(kernels);
    out << "consistency max_deviation=" << format_number(consistency.max_deviation)
        << " source=" << consistency.worst_source << " position=" << consistency.worst_position
        << " tolerance=" << format_number(o.tolerance) << ' ' << (consistency.passed ? "pass" : "fail") << '\n';
    out << "monotonicity pairs=" << monotonicity.pairs_checked << " violations=" << monotonicity.violations.size()
        << ' ' << (monotonicity.passed ? "pass" : "fail") << '\n';
    for (const auto& v : monotonicity.violations) {
      out << "  violation arm=" << arm_name(v.arm) << " source=" << v.source << " next=" << v.source + 1
          << " witness=" << v.witness << " gap=" << format_number(v.gap) << '\n';
    }
    out << "verdict consistency=" << (consistency.passed ? "pass" : "fail")
        << " monotonicity=" << (monotonicity.passed ? "pass" : "fail") << '\n';
    return consistency.passed && monotonicity.passed ? kOk : kChecksFailed;
  });
}

/// Replicated experiment readouts, with the exact-kernel expectation shown
/// alongside when the scenario is small enough to enumerate.
inline int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (o.format != "csv" && o.format != "json") {
      throw ConfigError("unknown format '" + o.format + "' (csv | json)", "--format");
    }
    const auto cfg = detail::load(o.common);
    const Scenario& s = cfg.scenario;
    const std::uint64_t n = o.replications.value_or(cfg.replications.value_or(kDefaultReplications));
    const std::uint64_t seed = o.seed.value_or(cfg.seed.value_or(kDefaultSeed));
    if (n < 2) throw ConfigError("at least 2 replications are needed for a variance", "--replications");

    SimulationOptions so;
    so.threads = o.common.threads;
    const auto result = simulate(s, n, seed, so);

    std::optional<std::array<double, 2>> analytic;
    if (s.size() <= default_enumeration_bound()) {
      ExactKernelOptions eo;
      eo.threads = o.common.threads;
      const auto kernels = compute_kernels_exact(s, eo);
      analytic = std::array<double, 2>{expected_readout_via_kernels(s, kernels, Arm::Control),
                                       expected_readout_via_kernels(s, kernels, Arm::Treatment)};
    }

    std::ostream& summary = o.out.empty() ? err : out;
    for (Arm k : kExperimentArms) {
      const auto& st = result.arm(k);
      summary << arm_name(k) << " mean=" << format_number(st.mean) << " sd=" << format_number(st.sd) << " analytic="
              << (analytic ? format_number((*analytic)[static_cast<std::size_t>(arm_index(k))]) : std::string("n/a"))
              << '\n';
    }
    detail::emit(o.out, out, [&](std::ostream& os) {
      if (o.format == "json") os << simulation_to_json(s, result, analytic).dump(2) << '\n';
      else write_stats_csv(os, result);
    });
    return kOk;
  });
}

}  // namespace cfi::cli
