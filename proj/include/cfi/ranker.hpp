#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cfi/errors.hpp"
#include "cfi/item.hpp"

namespace cfi {

// 1-based spot in the ranked list.
using Position = int;

/// A bijection from items to positions 1..n.
///
/// Stores both directions: `position(item)` is the ranker itself and
/// `item_at(position)` is its spot-filling inverse. Construction validates
/// the bijection, so every Ranker in the program is a valid ranking.
class Ranker {
 public:
  Ranker() = default;

  /// Builds the ranker that puts `order[i]` at position i + 1.
  static Ranker from_order(std::span<const ItemIndex> order) {
    Ranker r;
    const std::size_t n = order.size();
    r.position_.assign(n, 0);
    r.item_at_.assign(order.begin(), order.end());
    for (std::size_t p = 0; p < n; ++p) {
      const ItemIndex item = order[p];
      if (item >= n) throw PreconditionError("ranker order references item outside 0.." + std::to_string(n - 1));
      if (r.position_[item] != 0) throw PreconditionError("ranker order lists an item twice");
      r.position_[item] = static_cast<Position>(p + 1);
    }
    return r;
  }

  /// Builds the ranker from per-item positions; throws unless they form a
  /// permutation of 1..n.
  static Ranker from_positions(std::span<const Position> positions) {
    Ranker r;
    const std::size_t n = positions.size();
    r.position_.assign(positions.begin(), positions.end());
    r.item_at_.assign(n, n);
    for (ItemIndex item = 0; item < n; ++item) {
      const Position p = positions[item];
      if (p < 1 || static_cast<std::size_t>(p) > n) {
        throw PreconditionError("position " + std::to_string(p) + " outside 1.." + std::to_string(n));
      }
      if (r.item_at_[p - 1] != n) throw PreconditionError("position " + std::to_string(p) + " assigned twice");
      r.item_at_[p - 1] = item;
    }
    return r;
  }

  static Ranker identity(std::size_t n) {
    std::vector<ItemIndex> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    return from_order(order);
  }

  std::size_t size() const noexcept { return position_.size(); }
  Position position(ItemIndex item) const { return position_.at(item); }
  ItemIndex item_at(Position p) const { return item_at_.at(static_cast<std::size_t>(p - 1)); }

  const std::vector<Position>& positions() const noexcept { return position_; }
  /// Items in ranked order (spot 1 first).
  const std::vector<ItemIndex>& order() const noexcept { return item_at_; }

  friend bool operator==(const Ranker& a, const Ranker& b) { return a.position_ == b.position_; }

 private:
  std::vector<Position> position_;
  std::vector<ItemIndex> item_at_;
};

/// Resolves item names against `universe`. Throws ConfigError when the list
/// is not a permutation of the universe.
inline Ranker ranker_from_names(const ItemUniverse& universe, std::span<const std::string> names,
                                const std::string& field = {}) {
  if (names.size() != universe.size()) {
    throw ConfigError("ranking lists " + std::to_string(names.size()) + " items, universe has " +
                          std::to_string(universe.size()),
                      field);
  }
  std::vector<ItemIndex> order;
  order.reserve(names.size());
  std::vector<bool> seen(universe.size(), false);
  for (const auto& name : names) {
    if (!universe.contains(name)) throw ConfigError("unknown item id '" + name + "'", field);
    const ItemIndex i = universe.index_of(name);
    if (seen[i]) throw ConfigError("item '" + name + "' listed twice", field);
    seen[i] = true;
    order.push_back(i);
  }
  return Ranker::from_order(order);
}

}  // namespace cfi
