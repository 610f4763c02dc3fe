#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfi/assignment.hpp"
#include "cfi/config.hpp"
#include "cfi/core_ranking.hpp"
#include "cfi/kernels.hpp"
#include "cfi/readout.hpp"
#include "cfi/scenario.hpp"

namespace cfi {

// All numbers leave the program through here: 12 significant digits, no
// negative zero, so golden files compare byte for byte.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (x == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  std::string s(buf);
  if (s == "-0") return "0";
  return s;
}

// A double that nlohmann serializes with the same 12 significant digits.
inline double rounded(double x) { return x == 0.0 ? 0.0 : std::strtod(format_number(x).c_str(), nullptr); }

inline void write_merge_csv(std::ostream& os, const Scenario& s, const ArmAssignment& assignment,
                            const SutvaPreRanking& pre, const Ranker& merged) {
  os << "position,item,arm,r0_position,r1_position,sutva_value,conflicted\n";
  for (ItemIndex d : merged.order()) {
    os << merged.position(d) << ',' << s.items.id(d).str() << ',' << arm_name(assignment.arm(d)) << ','
       << s.design.r0.position(d) << ',' << s.design.r1.position(d) << ',' << pre.value(d) << ','
       << (pre.is_conflicted(d) ? 1 : 0) << '\n';
  }
}

/// Long format, one row per (arm, source, realized) triple. Empty cells get a
/// single row with a blank realized position and probability "missing".
inline void write_kernels_csv(std::ostream& os, const KernelTable& kernels) {
  os << "arm,source_position,realized_position,probability\n";
  for (Arm k : kExperimentArms) {
    for (std::size_t j = 1; j <= kernels.size(); ++j) {
      const auto& cell = kernels.cell(k, static_cast<Position>(j));
      if (!cell) {
        os << arm_index(k) << ',' << j << ",,missing\n";
        continue;
      }
      for (std::size_t q = 1; q <= kernels.size(); ++q) {
        os << arm_index(k) << ',' << j << ',' << q << ',' << format_number((*cell)(static_cast<Position>(q))) << '\n';
      }
    }
  }
}

inline void write_attention_csv(std::ostream& os, const Scenario& s, const KernelTable& kernels) {
  const auto h0 = convolve_attention(kernels, s.attention, Arm::Control);
  const auto h1 = convolve_attention(kernels, s.attention, Arm::Treatment);
  os << "position,h,h0,h1\n";
  for (std::size_t j = 1; j <= s.size(); ++j) {
    os << j << ',' << format_number(s.attention(static_cast<Position>(j))) << ',' << format_number(h0[j - 1]) << ','
       << format_number(h1[j - 1]) << '\n';
  }
}

/// Plot data: every control kernel as one series over realized positions.
inline void write_kernel_plot_csv(std::ostream& os, const KernelTable& kernels, Arm k = Arm::Control) {
  os << "series,position,value\n";
  for (std::size_t j = 1; j <= kernels.size(); ++j) {
    const auto& cell = kernels.cell(k, static_cast<Position>(j));
    if (!cell) continue;
    for (std::size_t q = 1; q <= kernels.size(); ++q) {
      os << "pi" << arm_index(k) << "_j" << j << ',' << q << ',' << format_number((*cell)(static_cast<Position>(q)))
         << '\n';
    }
  }
}

/// Plot data: the step attention functions 1{j' <= c} convolved with the
/// arm's kernels, one series per cutoff c.
inline void write_step_attention_plot_csv(std::ostream& os, const KernelTable& kernels, Arm k = Arm::Control) {
  os << "series,position,value\n";
  const std::size_t n = kernels.size();
  for (std::size_t c = 1; c <= n; ++c) {
    const auto hk = convolve_attention(kernels, AttentionFunction::step(n, c), k);
    for (std::size_t j = 1; j <= n; ++j) {
      os << "h" << arm_index(k) << "_step" << c << ',' << j << ',' << format_number(hk[j - 1]) << '\n';
    }
  }
}

/// Plot data: one control kernel cell across several control shares.
inline void write_p0_sweep_plot_csv(std::ostream& os, const Scenario& s, const PlotOptions& plot,
                                    const ExactKernelOptions& options) {
  os << "series,position,value\n";
  const Position focus = plot.focus_position > 0 ? plot.focus_position : 1;
  for (double p0 : plot.p0_sweep) {
    ExperimentDesign d = s.design;
    d.probabilities.control = p0;
    d.probabilities.treatment = 1.0 - p0 - d.probabilities.holdout;
    const auto kernels = compute_kernels_exact(d, options);
    const auto& cell = kernels.at(Arm::Control, focus);
    for (std::size_t q = 1; q <= kernels.size(); ++q) {
      os << "p0=" << format_number(p0) << ',' << q << ',' << format_number(cell(static_cast<Position>(q))) << '\n';
    }
  }
}

inline void write_stats_csv(std::ostream& os, const SimulationResult& r) {
  os << "arm,N,mean,variance,sd\n";
  for (Arm k : kExperimentArms) {
    const auto& st = r.arm(k);
    os << arm_index(k) << ',' << st.replications << ',' << format_number(st.mean) << ','
       << format_number(st.variance) << ',' << format_number(st.sd) << '\n';
  }
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  auto names = [&](const Ranker& r) {
    std::vector<std::string> out;
    for (ItemIndex d : r.order()) out.push_back(s.items.id(d).str());
    return out;
  };
  std::vector<std::string> items;
  for (const auto& id : s.items.ids()) items.push_back(id.str());
  j["items"] = items;
  j["r0"] = names(s.design.r0);
  j["r1"] = names(s.design.r1);
  nlohmann::json u = nlohmann::json::object();
  for (ItemIndex d = 0; d < s.size(); ++d) u[s.items.id(d).str()] = rounded(s.utility[d]);
  j["u"] = u;
  std::vector<double> h;
  for (double v : s.attention.values()) h.push_back(rounded(v));
  j["h"] = h;
  j["p0"] = rounded(s.design.probabilities.control);
  j["p1"] = rounded(s.design.probabilities.treatment);
  j["ph"] = rounded(s.design.probabilities.holdout);
  j["strategy"] = std::string(strategy_name(s.design.strategy));
  j["holdout_ranker"] = s.design.governance.holdout_source == Source::R0 ? "r0" : "r1";
  j["assignment"] = s.design.scheme == AssignmentScheme::Bernoulli ? "bernoulli" : "fixed";
  return j;
}

inline nlohmann::json simulation_to_json(const Scenario& s, const SimulationResult& r,
                                         const std::optional<std::array<double, 2>>& analytic) {
  nlohmann::json j;
  j["scenario"] = scenario_to_json(s);
  j["seed"] = r.seed;
  j["replications"] = r.control.replications;
  nlohmann::json arms = nlohmann::json::array();
  for (Arm k : kExperimentArms) {
    const auto& st = r.arm(k);
    nlohmann::json a;
    a["arm"] = arm_index(k);
    a["name"] = std::string(arm_name(k));
    a["mean"] = rounded(st.mean);
    a["variance"] = rounded(st.variance);
    a["sd"] = rounded(st.sd);
    if (analytic) a["analytic"] = rounded((*analytic)[static_cast<std::size_t>(arm_index(k))]);
    arms.push_back(a);
  }
  j["arms"] = arms;
  return j;
}

}  // namespace cfi
