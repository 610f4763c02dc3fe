#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "cfi/assignment.hpp"
#include "cfi/errors.hpp"
#include "cfi/item.hpp"
#include "cfi/ranker.hpp"

namespace cfi {

/// Two items demanding the same spot in the SUTVA pre-ranking. The pair is
/// always cross-source: `r0_item` is positioned by R0, `r1_item` by R1.
struct Conflict {
  ItemIndex r0_item = 0;
  ItemIndex r1_item = 0;
  Position position = 0;

  friend bool operator==(const Conflict&, const Conflict&) = default;
};

/// Per-item positions demanded by each item's own counterfactual ranker.
/// Not a valid ranking in general: up to two items can share a value.
class SutvaPreRanking {
 public:
  SutvaPreRanking() = default;
  SutvaPreRanking(std::vector<Position> values, std::vector<Source> sources, std::vector<Conflict> conflicts)
      : values_(std::move(values)), sources_(std::move(sources)), conflicts_(std::move(conflicts)) {}

  std::size_t size() const noexcept { return values_.size(); }
  Position value(ItemIndex i) const { return values_.at(i); }
  Source source(ItemIndex i) const { return sources_.at(i); }
  const std::vector<Position>& values() const noexcept { return values_; }
  const std::vector<Source>& sources() const noexcept { return sources_; }

  /// Sorted by ascending position.
  const std::vector<Conflict>& conflicts() const noexcept { return conflicts_; }
  bool has_conflicts() const noexcept { return !conflicts_.empty(); }

  bool is_conflicted(ItemIndex i) const {
    return std::any_of(conflicts_.begin(), conflicts_.end(),
                       [i](const Conflict& c) { return c.r0_item == i || c.r1_item == i; });
  }

  /// The pre-ranking itself, valid only when there are no conflicts.
  Ranker as_ranker() const {
    if (has_conflicts()) throw PreconditionError("SUTVA pre-ranking has merging conflicts");
    return Ranker::from_positions(values_);
  }

 private:
  std::vector<Position> values_;
  std::vector<Source> sources_;
  std::vector<Conflict> conflicts_;
};

/// Gives every item the position from the ranker governing its arm, and
/// records the spots claimed twice.
inline SutvaPreRanking sutva_merge(const Ranker& r0, const Ranker& r1, const ArmAssignment& assignment,
                                   Governance governance = {}) {
  const std::size_t n = r0.size();
  if (r1.size() != n || assignment.size() != n) {
    throw ConfigError("item-universe mismatch: r0 has " + std::to_string(n) + " items, r1 " +
                      std::to_string(r1.size()) + ", assignment " + std::to_string(assignment.size()));
  }
  std::vector<Position> values(n);
  std::vector<Source> sources(n);
  // Claimants per spot, one slot per source.
  constexpr ItemIndex kNone = static_cast<ItemIndex>(-1);
  std::vector<ItemIndex> claim0(n + 1, kNone);
  std::vector<ItemIndex> claim1(n + 1, kNone);
  for (ItemIndex d = 0; d < n; ++d) {
    const Source s = governance.source_of(assignment.arm(d));
    sources[d] = s;
    values[d] = s == Source::R0 ? r0.position(d) : r1.position(d);
    (s == Source::R0 ? claim0 : claim1)[values[d]] = d;
  }
  std::vector<Conflict> conflicts;
  for (Position j = 1; j <= static_cast<Position>(n); ++j) {
    if (claim0[j] != kNone && claim1[j] != kNone) conflicts.push_back({claim0[j], claim1[j], j});
  }
  return SutvaPreRanking(std::move(values), std::move(sources), std::move(conflicts));
}

/// Ranks items by descending utility; equal utilities fall back to ascending
/// ItemId. Maximizes sum u(d) * h(R(d)) for every non-increasing h.
inline Ranker ranker_from_utility(const ItemUniverse& universe, std::span<const double> utility) {
  if (utility.size() != universe.size()) {
    throw SizeError("utility has " + std::to_string(utility.size()) + " entries, universe has " +
                    std::to_string(universe.size()));
  }
  for (std::size_t i = 0; i < utility.size(); ++i) {
    if (!(utility[i] >= 0.0) || !std::isfinite(utility[i])) {
      throw DomainError("utility of '" + universe.id(i).str() + "' must be a non-negative finite number");
    }
  }
  std::vector<ItemIndex> order(universe.size());
  std::iota(order.begin(), order.end(), ItemIndex{0});
  std::sort(order.begin(), order.end(), [&](ItemIndex a, ItemIndex b) {
    if (utility[a] != utility[b]) return utility[a] > utility[b];
    return universe.id(a) < universe.id(b);
  });
  return Ranker::from_order(order);
}

/// Control counterfactual ranking from the treatment ranking when the
/// control candidate set is a subset of the treatment one: drop ineligible
/// items, keep order, truncate to `n`.
template <typename T, typename Eligible>
  requires std::predicate<const Eligible&, const T&>
std::vector<T> derive_control_ranking_shortcut(std::span<const T> treatment_ranking, const Eligible& eligible,
                                               std::size_t n) {
  std::vector<T> out;
  out.reserve(n);
  for (const T& item : treatment_ranking) {
    if (out.size() == n) break;
    if (eligible(item)) out.push_back(item);
  }
  if (out.size() < n) {
    throw InsufficientCandidatesError("only " + std::to_string(out.size()) + " eligible items, need " +
                                      std::to_string(n));
  }
  return out;
}

template <typename T, typename Hash = std::hash<T>>
std::vector<T> derive_control_ranking_shortcut(std::span<const T> treatment_ranking,
                                               const std::unordered_set<T, Hash>& control_eligible,
                                               std::size_t n) {
  std::size_t found = 0;
  for (const T& item : treatment_ranking) found += control_eligible.count(item);
  if (found != control_eligible.size()) {
    throw PreconditionError("control-eligible set contains items missing from the treatment ranking");
  }
  return derive_control_ranking_shortcut<T>(
      treatment_ranking, [&](const T& item) { return control_eligible.count(item) != 0; }, n);
}

}  // namespace cfi
