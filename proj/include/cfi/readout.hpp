#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cfi/assignment.hpp"
#include "cfi/errors.hpp"
#include "cfi/kernels.hpp"
#include "cfi/parallel.hpp"
#include "cfi/ranker.hpp"
#include "cfi/replication.hpp"
#include "cfi/scenario.hpp"

namespace cfi {

/// Aggregate metric if R_k ranked every item: sum over j of u(J_k(j)) * h(j).
inline double counterfactual_readout(const Scenario& s, Arm k) {
  if (k == Arm::Holdout) throw PreconditionError("counterfactual readouts exist for control and treatment only");
  const Ranker& rk = s.design.ranker(k);
  double total = 0.0;
  for (std::size_t j = 1; j <= s.size(); ++j) {
    const auto pos = static_cast<Position>(j);
    total += s.utility[rk.item_at(pos)] * s.attention(pos);
  }
  return total;
}

/// Readout of arm k in one replication: (1/p_k) * sum over d in D_k of
/// u(d) * h(merged(d)). An empty arm yields 0. Holdout items never count.
inline double experiment_readout(const Scenario& s, const Ranker& merged, const ArmAssignment& assignment, Arm k) {
  if (k == Arm::Holdout) throw PreconditionError("holdout items are excluded from readouts");
  const double pk = assignment.probabilities().of(k);
  if (!(pk > 0.0)) throw DegenerateSplitError("arm " + std::string(arm_name(k)) + " has zero traffic");
  if (merged.size() != s.size() || assignment.size() != s.size()) throw SizeError("ranking size mismatch");
  double total = 0.0;
  for (ItemIndex d = 0; d < s.size(); ++d) {
    if (assignment.arm(d) == k) total += s.utility[d] * s.attention(merged.position(d));
  }
  return total / pk;
}

/// Expected experiment readout from the kernels: sum over j of
/// u(J_k(j)) * h^k(j).
inline double expected_readout_via_kernels(const Scenario& s, const KernelTable& kernels, Arm k) {
  if (kernels.size() != s.size()) throw SizeError("kernel table does not match scenario size");
  const auto hk = convolve_attention(kernels, s.attention, k);
  const Ranker& rk = s.design.ranker(k);
  double total = 0.0;
  for (std::size_t j = 1; j <= s.size(); ++j) total += s.utility[rk.item_at(static_cast<Position>(j))] * hk[j - 1];
  return total;
}

struct ReadoutStats {
  std::uint64_t replications = 0;
  double mean = 0.0;      // average readout over replications
  double variance = 0.0;  // per-replication variance, N - 1 divisor
  double sd = 0.0;        // standard deviation of the mean, sqrt(variance / N)
};

/// Mean, unbiased variance and standard error, summed in index order.
inline ReadoutStats summarize(const std::vector<double>& values) {
  ReadoutStats st;
  st.replications = values.size();
  if (values.empty()) return st;
  double sum = 0.0;
  for (double v : values) sum += v;
  const auto n = static_cast<double>(values.size());
  st.mean = sum / n;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - st.mean) * (v - st.mean);
    st.variance = ss / (n - 1.0);
    st.sd = std::sqrt(st.variance / n);
  }
  return st;
}

struct SimulationResult {
  std::uint64_t seed = 0;
  ReadoutStats control;
  ReadoutStats treatment;

  const ReadoutStats& arm(Arm k) const { return k == Arm::Treatment ? treatment : control; }
};

struct SimulationOptions {
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Runs `replications` independent replications. Replication s draws from
/// its own stream derived from (master_seed, s) and per-replication readouts
/// are reduced in index order, so the result is bit-identical for any thread
/// count.
inline SimulationResult simulate(const Scenario& s, std::uint64_t replications, std::uint64_t master_seed,
                                 const SimulationOptions& options = {}) {
  s.validate();
  s.design.require_split();
  if (replications < 2) throw PreconditionError("simulation needs at least 2 replications for a variance");

  std::vector<double> control(replications);
  std::vector<double> treatment(replications);
  constexpr std::uint64_t kBlock = 4096;
  const std::size_t blocks = static_cast<std::size_t>((replications + kBlock - 1) / kBlock);
  parallel_for_blocks(blocks, options.threads, [&](std::size_t b) {
    const std::uint64_t end = std::min<std::uint64_t>(replications, (b + 1) * kBlock);
    for (std::uint64_t rep = b * kBlock; rep < end; ++rep) {
      const auto draw = draw_replication(s.design, master_seed, rep);
      control[rep] = experiment_readout(s, draw.merged, draw.assignment, Arm::Control);
      treatment[rep] = experiment_readout(s, draw.merged, draw.assignment, Arm::Treatment);
    }
  });

  SimulationResult r;
  r.seed = master_seed;
  r.control = summarize(control);
  r.treatment = summarize(treatment);
  return r;
}

}  // namespace cfi
