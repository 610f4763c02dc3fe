#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfi/assignment.hpp"
#include "cfi/attention.hpp"
#include "cfi/core_ranking.hpp"
#include "cfi/errors.hpp"
#include "cfi/mergers.hpp"
#include "cfi/parallel.hpp"
#include "cfi/random.hpp"
#include "cfi/ranker.hpp"
#include "cfi/replication.hpp"
#include "cfi/scenario.hpp"

namespace cfi {

/// Probability mass over positions 1..n.
class PositionDistribution {
 public:
  PositionDistribution() = default;
  explicit PositionDistribution(std::vector<double> mass) : mass_(std::move(mass)) {}

  static PositionDistribution point_mass(std::size_t n, Position j) {
    std::vector<double> m(n, 0.0);
    m.at(static_cast<std::size_t>(j - 1)) = 1.0;
    return PositionDistribution(std::move(m));
  }

  std::size_t size() const noexcept { return mass_.size(); }
  double operator()(Position p) const { return mass_.at(static_cast<std::size_t>(p - 1)); }
  std::span<const double> mass() const noexcept { return mass_; }

  double total() const {
    double s = 0.0;
    for (double m : mass_) s += m;
    return s;
  }

  /// P(X <= p).
  double cdf(Position p) const {
    double s = 0.0;
    for (Position q = 1; q <= p && static_cast<std::size_t>(q) <= mass_.size(); ++q) s += mass_[q - 1];
    return s;
  }

  /// Expectation of h under this distribution.
  double expect(std::span<const double> h) const {
    if (h.size() != mass_.size()) throw SizeError("distribution and function lengths differ");
    double s = 0.0;
    for (std::size_t i = 0; i < mass_.size(); ++i) s += mass_[i] * h[i];
    return s;
  }

 private:
  std::vector<double> mass_;
};

inline double tv_distance(const PositionDistribution& a, const PositionDistribution& b) {
  if (a.size() != b.size()) throw SizeError("distributions have different support lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.mass()[i] - b.mass()[i]);
  return 0.5 * s;
}

/// Outcome of comparing two distributions under the CDF partial order.
struct Dominance {
  bool holds = true;
  Position witness = 0;  // position of the largest CDF violation, 0 if none
  double gap = 0.0;      // max over x of F_b(x) - F_a(x)

  explicit operator bool() const noexcept { return holds; }
};

/// a ≺ b, i.e. b stochastically dominates a: F_a(x) >= F_b(x) for every x.
/// `tolerance` absorbs floating-point error in the cumulative sums.
inline Dominance is_dominated_by(const PositionDistribution& a, const PositionDistribution& b,
                                 double tolerance = 1e-12) {
  if (a.size() != b.size()) throw PreconditionError("distributions have different support lengths");
  Dominance out;
  double fa = 0.0;
  double fb = 0.0;
  double worst = -1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    fa += a.mass()[i];
    fb += b.mass()[i];
    if (fb - fa > worst) {
      worst = fb - fa;
      out.witness = static_cast<Position>(i + 1);
    }
  }
  out.gap = std::max(worst, 0.0);
  out.holds = worst <= tolerance;
  if (out.holds) out.witness = 0;
  return out;
}

enum class KernelMode : std::uint8_t { Exact, MonteCarlo };

/// Convolution kernels: for arm k and source position j, the distribution of
/// the final position of the item R_k puts at j, given that item is in arm k.
class KernelTable {
 public:
  KernelTable() = default;
  KernelTable(std::size_t n, KernelMode mode, std::uint64_t samples)
      : n_(n), mode_(mode), samples_(samples), cells_(2 * n), conditioning_(2 * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  KernelMode mode() const noexcept { return mode_; }
  std::uint64_t samples() const noexcept { return samples_; }

  /// Empty when no sample (MC) or no probability mass (exact) conditions on
  /// this cell.
  const std::optional<PositionDistribution>& cell(Arm k, Position j) const { return cells_.at(slot(k, j)); }

  const PositionDistribution& at(Arm k, Position j) const {
    const auto& c = cell(k, j);
    if (!c) {
      throw DomainError("kernel cell (" + std::string(arm_name(k)) + ", " + std::to_string(j) + ") is empty");
    }
    return *c;
  }

  /// Conditioning mass: P(J_k(j) in D_k) in exact mode, a sample count in MC mode.
  double conditioning(Arm k, Position j) const { return conditioning_.at(slot(k, j)); }

  void set(Arm k, Position j, std::optional<PositionDistribution> d, double conditioning) {
    cells_.at(slot(k, j)) = std::move(d);
    conditioning_.at(slot(k, j)) = conditioning;
  }

 private:
  std::size_t slot(Arm k, Position j) const {
    if (k == Arm::Holdout) throw PreconditionError("kernels exist for control and treatment only");
    if (j < 1 || static_cast<std::size_t>(j) > n_) throw SizeError("source position out of range");
    return static_cast<std::size_t>(arm_index(k)) * n_ + static_cast<std::size_t>(j - 1);
  }

  std::size_t n_ = 0;
  KernelMode mode_ = KernelMode::Exact;
  std::uint64_t samples_ = 0;
  std::vector<std::optional<PositionDistribution>> cells_;
  std::vector<double> conditioning_;
};

inline constexpr std::size_t kDefaultEnumerationBound = 14;

/// Largest n accepted by exact enumeration; CFI_ENUM_BOUND overrides.
inline std::size_t default_enumeration_bound() {
  if (const char* env = std::getenv("CFI_ENUM_BOUND")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultEnumerationBound;
}

struct ExactKernelOptions {
  std::size_t max_items = default_enumeration_bound();
  unsigned threads = 0;  // 0: hardware concurrency
};

namespace detail {

// Unnormalized kernel mass for a range of enumerated outcomes.
struct KernelAccumulator {
  std::size_t n = 0;
  std::vector<double> mass;    // [(k * n + j - 1) * n + pos - 1]
  std::vector<double> weight;  // [k * n + j - 1]

  explicit KernelAccumulator(std::size_t items = 0) : n(items), mass(2 * items * items, 0.0), weight(2 * items, 0.0) {}

  // Records one realized ranking with probability w.
  void add(std::span<const Arm> arms, std::span<const Position> final_positions,
           const std::array<const std::vector<ItemIndex>*, 2>& item_at, double w) {
    for (int k = 0; k < 2; ++k) {
      const auto& order = *item_at[k];
      for (std::size_t j = 0; j < n; ++j) {
        const ItemIndex d = order[j];
        if (arm_index(arms[d]) != k) continue;
        const std::size_t cell = static_cast<std::size_t>(k) * n + j;
        mass[cell * n + static_cast<std::size_t>(final_positions[d] - 1)] += w;
        weight[cell] += w;
      }
    }
  }

  void absorb(const KernelAccumulator& o) {
    for (std::size_t i = 0; i < mass.size(); ++i) mass[i] += o.mass[i];
    for (std::size_t i = 0; i < weight.size(); ++i) weight[i] += o.weight[i];
  }

  KernelTable finish(KernelMode mode, std::uint64_t samples) const {
    KernelTable table(n, mode, samples);
    for (int k = 0; k < 2; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t cell = static_cast<std::size_t>(k) * n + j;
        const Arm arm = static_cast<Arm>(k);
        const auto pos = static_cast<Position>(j + 1);
        if (weight[cell] <= 0.0) {
          table.set(arm, pos, std::nullopt, 0.0);
          continue;
        }
        std::vector<double> m(mass.begin() + static_cast<std::ptrdiff_t>(cell * n),
                              mass.begin() + static_cast<std::ptrdiff_t>((cell + 1) * n));
        for (double& x : m) x /= weight[cell];
        table.set(arm, pos, PositionDistribution(std::move(m)), weight[cell]);
      }
    }
    return table;
  }
};

inline double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

inline double factorial(std::size_t n) {
  double r = 1.0;
  for (std::size_t i = 2; i <= n; ++i) r *= static_cast<double>(i);
  return r;
}

// Enumerates every coin outcome (order-preserving strategies) or every spot
// labeling (spot-labeling baseline) for one fixed assignment.
inline void enumerate_merges(const ExperimentDesign& s, std::span<const Arm> arms, double w,
                             const std::array<const std::vector<ItemIndex>*, 2>& item_at,
                             std::vector<Position>& positions, KernelAccumulator& acc) {
  const std::size_t n = s.size();
  if (s.strategy == MergeStrategy::RandomSpotLabeling) {
    std::vector<ItemIndex> control;
    std::vector<ItemIndex> treatment;
    for (ItemIndex d : s.r0.order()) {
      if (arms[d] == Arm::Control) control.push_back(d);
    }
    for (ItemIndex d : s.r1.order()) {
      if (arms[d] == Arm::Treatment) treatment.push_back(d);
    }
    const std::size_t nc = control.size();
    const double label_weight = w / binomial(n, nc);
    // Gosper's hack over n-bit masks with nc bits set; bit p = spot p+1 is C.
    std::uint64_t mask = nc == 0 ? 0 : (std::uint64_t{1} << nc) - 1;
    const std::uint64_t limit = std::uint64_t{1} << n;
    while (mask < limit) {
      std::size_t ic = 0;
      std::size_t it = 0;
      for (std::size_t p = 0; p < n; ++p) {
        const ItemIndex d = ((mask >> p) & 1u) ? control[ic++] : treatment[it++];
        positions[d] = static_cast<Position>(p + 1);
      }
      acc.add(arms, positions, item_at, label_weight);
      if (mask == 0) break;
      const std::uint64_t c = mask & (~mask + 1);
      const std::uint64_t r = mask + c;
      mask = (((r ^ mask) >> 2) / c) | r;
    }
    return;
  }

  const ArmAssignment assignment(std::vector<Arm>(arms.begin(), arms.end()), s.probabilities);
  const auto pre = sutva_merge(s.r0, s.r1, assignment, s.governance);
  const auto beta = tie_probabilities(pre, s.strategy, s.r0, s.r1, s.governance.r0_share(s.probabilities));
  const MergeRealizer realizer(pre);
  const std::size_t c = beta.size();
  for (std::uint64_t outcome = 0; outcome < (std::uint64_t{1} << c); ++outcome) {
    double p = w;
    for (std::size_t i = 0; i < c && p > 0.0; ++i) p *= ((outcome >> i) & 1u) ? beta[i] : 1.0 - beta[i];
    if (p <= 0.0) continue;
    struct BitCoins {
      std::uint64_t bits;
      bool operator[](std::size_t i) const { return ((bits >> i) & 1u) != 0; }
    };
    realizer.realize(BitCoins{outcome}, std::span<Position>(positions));
    acc.add(arms, positions, item_at, p);
  }
}

}  // namespace detail

/// Exact kernels by enumerating every arm assignment (weighted by its
/// probability) and, for each, every tie-coin outcome (weighted by the
/// product of tie probabilities). Holdout arms enumerate 3^n assignments.
///
/// Work is split into fixed-size blocks reduced in block order, so the
/// result is bit-identical for any thread count.
inline KernelTable compute_kernels_exact(const ExperimentDesign& s, const ExactKernelOptions& options = {}) {
  s.validate();
  const std::size_t n = s.size();
  if (n > options.max_items) {
    throw SizeError("exact enumeration supports at most " + std::to_string(options.max_items) + " items, got " +
                    std::to_string(n) + "; use Monte Carlo mode");
  }
  const ArmProbabilities& p = s.probabilities;
  const bool three_arms = p.has_holdout();
  const std::uint64_t base = three_arms ? 3 : 2;
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= base;

  std::array<std::size_t, 3> fixed_counts{};
  double fixed_weight = 0.0;
  if (s.scheme == AssignmentScheme::FixedSize) {
    fixed_counts = fixed_split_counts(p, n);
    fixed_weight = detail::factorial(fixed_counts[0]) * detail::factorial(fixed_counts[1]) *
                   detail::factorial(fixed_counts[2]) / detail::factorial(n);
  }

  const std::array<const std::vector<ItemIndex>*, 2> item_at{&s.r0.order(), &s.r1.order()};
  constexpr std::uint64_t kBlock = 1024;
  const std::size_t blocks = static_cast<std::size_t>((total + kBlock - 1) / kBlock);
  std::vector<detail::KernelAccumulator> partial(blocks);

  parallel_for_blocks(blocks, options.threads, [&](std::size_t b) {
    detail::KernelAccumulator acc(n);
    std::vector<Arm> arms(n);
    std::vector<Position> positions(n);
    const std::uint64_t end = std::min<std::uint64_t>(total, (b + 1) * kBlock);
    for (std::uint64_t code = b * kBlock; code < end; ++code) {
      std::uint64_t rest = code;
      double w = 1.0;
      std::array<std::size_t, 3> counts{};
      for (std::size_t i = 0; i < n; ++i) {
        arms[i] = static_cast<Arm>(rest % base);
        rest /= base;
        ++counts[static_cast<std::size_t>(arms[i])];
        w *= p.of(arms[i]);
      }
      if (s.scheme == AssignmentScheme::FixedSize) w = counts == fixed_counts ? fixed_weight : 0.0;
      if (w <= 0.0) continue;
      detail::enumerate_merges(s, arms, w, item_at, positions, acc);
    }
    partial[b] = std::move(acc);
  });

  detail::KernelAccumulator sum(n);
  for (const auto& part : partial) sum.absorb(part);
  return sum.finish(KernelMode::Exact, 0);
}

/// Empirical kernels over `samples` replications. Replication s uses the
/// same random stream as replication s of simulate(), so both see the same
/// merged rankings.
inline KernelTable compute_kernels_mc(const ExperimentDesign& s, std::uint64_t samples, std::uint64_t seed,
                                      unsigned threads = 0) {
  s.validate();
  if (samples < 1) throw PreconditionError("Monte Carlo kernels need at least one sample");
  const std::size_t n = s.size();
  const std::array<const std::vector<ItemIndex>*, 2> item_at{&s.r0.order(), &s.r1.order()};
  constexpr std::uint64_t kBlock = 4096;
  const std::size_t blocks = static_cast<std::size_t>((samples + kBlock - 1) / kBlock);
  std::vector<detail::KernelAccumulator> partial(blocks);

  parallel_for_blocks(blocks, threads, [&](std::size_t b) {
    detail::KernelAccumulator acc(n);
    const std::uint64_t end = std::min<std::uint64_t>(samples, (b + 1) * kBlock);
    for (std::uint64_t rep = b * kBlock; rep < end; ++rep) {
      const auto draw = draw_replication(s, seed, rep);
      acc.add(draw.assignment.arms(), draw.merged.positions(), item_at, 1.0);
    }
    partial[b] = std::move(acc);
  });

  // Unit weights keep every partial sum an exact integer, so the reduction
  // order cannot change the result.
  detail::KernelAccumulator sum(n);
  for (const auto& part : partial) sum.absorb(part);
  return sum.finish(KernelMode::MonteCarlo, samples);
}

inline KernelTable compute_kernels_exact(const Scenario& s, const ExactKernelOptions& options = {}) {
  s.validate();
  return compute_kernels_exact(s.design, options);
}

inline KernelTable compute_kernels_mc(const Scenario& s, std::uint64_t samples, std::uint64_t seed,
                                      unsigned threads = 0) {
  s.validate();
  return compute_kernels_mc(s.design, samples, seed, threads);
}

/// h^k(j) = sum over j' of kernel(k, j)(j') * h(j').
inline std::vector<double> convolve_attention(const KernelTable& kernels, const AttentionFunction& h, Arm k) {
  if (h.size() != kernels.size()) {
    throw SizeError("attention has " + std::to_string(h.size()) + " positions, kernels " +
                    std::to_string(kernels.size()));
  }
  std::vector<double> out(kernels.size());
  for (std::size_t j = 0; j < kernels.size(); ++j) {
    out[j] = kernels.at(k, static_cast<Position>(j + 1)).expect(h.values());
  }
  return out;
}

struct ConsistencyReport {
  bool passed = true;
  double max_deviation = 0.0;
  Position worst_source = 0;
  Position worst_position = 0;
  std::size_t cells_compared = 0;
};

/// Passes when the control and treatment kernels agree at every source
/// position within `tolerance`. Pairs with an empty cell are skipped.
inline ConsistencyReport check_consistency(const KernelTable& kernels, double tolerance) {
  ConsistencyReport r;
  for (std::size_t j = 1; j <= kernels.size(); ++j) {
    const auto pj = static_cast<Position>(j);
    const auto& a = kernels.cell(Arm::Control, pj);
    const auto& b = kernels.cell(Arm::Treatment, pj);
    if (!a || !b) continue;
    ++r.cells_compared;
    for (std::size_t q = 1; q <= kernels.size(); ++q) {
      const auto pq = static_cast<Position>(q);
      const double dev = std::abs((*a)(pq) - (*b)(pq));
      if (dev > r.max_deviation) {
        r.max_deviation = dev;
        r.worst_source = pj;
        r.worst_position = pq;
      }
    }
  }
  r.passed = r.max_deviation <= tolerance;
  return r;
}

struct MonotonicityViolation {
  Arm arm = Arm::Control;
  Position source = 0;   // kernel(arm, source) should precede kernel(arm, source + 1)
  Position witness = 0;  // position of the largest CDF violation
  double gap = 0.0;
};

struct MonotonicityReport {
  bool passed = true;
  std::size_t pairs_checked = 0;
  std::vector<MonotonicityViolation> violations;
};

/// Passes when kernel(k, j) ≺ kernel(k, j + 1) for every arm and j < n.
inline MonotonicityReport check_monotonicity(const KernelTable& kernels, double tolerance = 1e-12) {
  MonotonicityReport r;
  for (Arm k : kExperimentArms) {
    for (std::size_t j = 1; j < kernels.size(); ++j) {
      const auto pj = static_cast<Position>(j);
      const auto& a = kernels.cell(k, pj);
      const auto& b = kernels.cell(k, pj + 1);
      if (!a || !b) continue;
      ++r.pairs_checked;
      const Dominance d = is_dominated_by(*a, *b, tolerance);
      if (!d) r.violations.push_back({k, pj, d.witness, d.gap});
    }
  }
  r.passed = r.violations.empty();
  return r;
}

}  // namespace cfi
