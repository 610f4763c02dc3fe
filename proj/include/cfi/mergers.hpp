#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfi/assignment.hpp"
#include "cfi/core_ranking.hpp"
#include "cfi/errors.hpp"
#include "cfi/random.hpp"
#include "cfi/ranker.hpp"

namespace cfi {

enum class MergeStrategy : std::uint8_t {
  // Order-preserving merge with the consistency-derived tie-break probability.
  Consistent,
  // Order-preserving merge, conflicts decided by a fair coin.
  NaiveEqualTie,
  // Spots labeled C/T at random, each arm fills its spots in its own order.
  RandomSpotLabeling,
};

inline std::string_view strategy_name(MergeStrategy s) {
  switch (s) {
    case MergeStrategy::Consistent: return "consistent";
    case MergeStrategy::NaiveEqualTie: return "naive";
    case MergeStrategy::RandomSpotLabeling: return "spot-labeling";
  }
  return "?";
}

inline std::optional<MergeStrategy> parse_strategy(std::string_view name) {
  if (name == "consistent") return MergeStrategy::Consistent;
  if (name == "naive") return MergeStrategy::NaiveEqualTie;
  if (name == "spot-labeling") return MergeStrategy::RandomSpotLabeling;
  return std::nullopt;
}

inline bool preserves_sutva_order(MergeStrategy s) noexcept { return s != MergeStrategy::RandomSpotLabeling; }

/// Probability of placing `x` (positioned by R0 at j) ahead of `y`
/// (positioned by R1 at j) such that both arms see the same distribution of
/// realized positions.
///
/// `r0_share` is the probability that an item is positioned by R0, i.e. p0
/// plus the holdout share when holdout items follow R0.
inline double consistent_tie_break(Position j, ItemIndex x, ItemIndex y, const Ranker& r0, const Ranker& r1,
                                   double r0_share) {
  if (r0.position(x) != j || r1.position(y) != j) {
    throw PreconditionError("tie-break requires r0(x) = r1(y) = " + std::to_string(j));
  }
  if (x == y) throw PreconditionError("tie-break requires two distinct items");
  if (!(r0_share > 0.0 && r0_share < 1.0)) {
    throw DegenerateSplitError("tie-break needs 0 < p0 < 1, got " + std::to_string(r0_share));
  }
  const double r1_share = 1.0 - r0_share;
  // x != y and r1(y) = j, so r1(x) != j; likewise r0(y) != j.
  const bool x_below_in_r1 = r1.position(x) > j;
  const bool y_below_in_r0 = r0.position(y) > j;
  if (x_below_in_r1 && y_below_in_r0) return r1_share;
  if (!x_below_in_r1 && !y_below_in_r0) return r0_share;
  if (x_below_in_r1) return 1.0;
  return 0.0;
}

/// Tie-break probability for every conflict of `pre`, in conflict order.
inline std::vector<double> tie_probabilities(const SutvaPreRanking& pre, MergeStrategy strategy, const Ranker& r0,
                                             const Ranker& r1, double r0_share) {
  std::vector<double> beta;
  beta.reserve(pre.conflicts().size());
  for (const Conflict& c : pre.conflicts()) {
    switch (strategy) {
      case MergeStrategy::Consistent:
        beta.push_back(consistent_tie_break(c.position, c.r0_item, c.r1_item, r0, r1, r0_share));
        break;
      case MergeStrategy::NaiveEqualTie:
        beta.push_back(0.5);
        break;
      case MergeStrategy::RandomSpotLabeling:
        throw PreconditionError("spot labeling does not resolve SUTVA conflicts");
    }
  }
  return beta;
}

/// Turns a pre-ranking plus coin outcomes into final positions.
///
/// Final positions are the ranks in a stable sort by (pre-ranking value,
/// coin): items keep the relative order of the pre-ranking, and within a
/// conflict the coin decides which item goes first. Built once per
/// pre-ranking so that enumerating coin outcomes does not reallocate.
class MergeRealizer {
 public:
  explicit MergeRealizer(const SutvaPreRanking& pre) : n_(pre.size()), conflicts_(pre.conflicts()) {
    slots_.assign(2 * (n_ + 1), kNone);
    conflict_at_.assign(n_ + 1, -1);
    for (ItemIndex d = 0; d < n_; ++d) {
      slots_[2 * static_cast<std::size_t>(pre.value(d)) + static_cast<std::size_t>(pre.source(d))] = d;
    }
    for (std::size_t c = 0; c < conflicts_.size(); ++c) conflict_at_[conflicts_[c].position] = static_cast<int>(c);
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t conflict_count() const noexcept { return conflicts_.size(); }

  /// `r0_first[c]` tells whether the R0-side item of conflict c goes first.
  /// Writes positions per item into `out` (size n).
  template <typename Coins>
  void realize(const Coins& r0_first, std::span<Position> out) const {
    Position next = 1;
    for (std::size_t j = 1; j <= n_; ++j) {
      const ItemIndex a = slots_[2 * j];
      const ItemIndex b = slots_[2 * j + 1];
      if (conflict_at_[j] >= 0) {
        const bool first0 = r0_first[static_cast<std::size_t>(conflict_at_[j])];
        out[first0 ? a : b] = next++;
        out[first0 ? b : a] = next++;
      } else if (a != kNone) {
        out[a] = next++;
      } else if (b != kNone) {
        out[b] = next++;
      }
    }
  }

  template <typename Coins>
  Ranker realize(const Coins& r0_first) const {
    std::vector<Position> positions(n_);
    realize(r0_first, std::span<Position>(positions));
    return Ranker::from_positions(positions);
  }

 private:
  static constexpr ItemIndex kNone = static_cast<ItemIndex>(-1);
  std::size_t n_;
  std::vector<Conflict> conflicts_;
  std::vector<ItemIndex> slots_;  // [2 * value + source]
  std::vector<int> conflict_at_;
};

/// Order-preserving merge. Coins are drawn in ascending conflict-spot order,
/// one uniform per conflict even when beta is 0 or 1.
inline Ranker merge(const SutvaPreRanking& pre, std::span<const double> beta, RandomStream& rng) {
  if (beta.size() != pre.conflicts().size()) throw SizeError("one tie probability per conflict required");
  std::vector<bool> r0_first(beta.size());
  for (std::size_t c = 0; c < beta.size(); ++c) r0_first[c] = rng.bernoulli(beta[c]);
  return MergeRealizer(pre).realize(r0_first);
}

inline Ranker merge(const SutvaPreRanking& pre, MergeStrategy strategy, const Ranker& r0, const Ranker& r1,
                    double r0_share, RandomStream& rng) {
  const auto beta = tie_probabilities(pre, strategy, r0, r1, r0_share);
  return merge(pre, beta, rng);
}

/// Fills spots labeled Control with control items in R0 order and spots
/// labeled Treatment with treatment items in R1 order.
inline Ranker merge_with_spot_labels(const Ranker& r0, const Ranker& r1, const ArmAssignment& assignment,
                                     std::span<const Arm> labels) {
  const std::size_t n = r0.size();
  if (r1.size() != n || assignment.size() != n || labels.size() != n) {
    throw ConfigError("item-universe mismatch between rankers, assignment and spot labels");
  }
  std::vector<ItemIndex> control;
  std::vector<ItemIndex> treatment;
  for (ItemIndex d : r0.order()) {
    if (assignment.arm(d) == Arm::Control) control.push_back(d);
    else if (assignment.arm(d) == Arm::Holdout) throw UnsupportedBaselineError("spot labeling has no holdout arm");
  }
  for (ItemIndex d : r1.order()) {
    if (assignment.arm(d) == Arm::Treatment) treatment.push_back(d);
  }
  std::size_t next_c = 0;
  std::size_t next_t = 0;
  std::vector<ItemIndex> order;
  order.reserve(n);
  for (Arm label : labels) {
    if (label == Arm::Control) {
      if (next_c == control.size()) throw PreconditionError("more C-labeled spots than control items");
      order.push_back(control[next_c++]);
    } else if (label == Arm::Treatment) {
      if (next_t == treatment.size()) throw PreconditionError("more T-labeled spots than treatment items");
      order.push_back(treatment[next_t++]);
    } else {
      throw UnsupportedBaselineError("spot labels must be control or treatment");
    }
  }
  return Ranker::from_order(order);
}

/// Spot labels are a uniformly random arrangement of |D0| C-labels and |D1|
/// T-labels.
inline Ranker merge_random_spot_labeling(const Ranker& r0, const Ranker& r1, const ArmAssignment& assignment,
                                         RandomStream& rng) {
  if (assignment.count(Arm::Holdout) > 0 || assignment.probabilities().has_holdout()) {
    throw UnsupportedBaselineError("random spot labeling supports two-arm experiments only");
  }
  const std::size_t n_control = assignment.count(Arm::Control);
  std::vector<Arm> labels(assignment.size(), Arm::Treatment);
  std::fill_n(labels.begin(), n_control, Arm::Control);
  rng.shuffle(labels.begin(), labels.end());
  return merge_with_spot_labels(r0, r1, assignment, labels);
}

/// One complete merge for a drawn assignment, dispatching on strategy.
inline Ranker merge_assignment(const Ranker& r0, const Ranker& r1, const ArmAssignment& assignment,
                               MergeStrategy strategy, Governance governance, RandomStream& rng) {
  if (strategy == MergeStrategy::RandomSpotLabeling) return merge_random_spot_labeling(r0, r1, assignment, rng);
  const auto pre = sutva_merge(r0, r1, assignment, governance);
  if (!pre.has_conflicts()) return pre.as_ranker();
  return merge(pre, strategy, r0, r1, governance.r0_share(assignment.probabilities()), rng);
}

}  // namespace cfi
