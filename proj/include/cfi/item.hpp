#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cfi/errors.hpp"

namespace cfi {

// Dense index of an item inside its ItemUniverse.
using ItemIndex = std::size_t;

// Natural ordering of item identifiers: runs of digits compare by numeric
// value, everything else byte-wise. Integer ids order numerically and
// "x2" < "x10".
inline int compare_item_ids(std::string_view a, std::string_view b) {
  std::size_t i = 0;
  std::size_t j = 0;
  auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  while (i < a.size() && j < b.size()) {
    if (is_digit(a[i]) && is_digit(b[j])) {
      std::size_t ie = i;
      std::size_t je = j;
      while (ie < a.size() && is_digit(a[ie])) ++ie;
      while (je < b.size() && is_digit(b[je])) ++je;
      // Strip leading zeros, then compare by length and digits.
      std::size_t is = i;
      std::size_t js = j;
      while (is + 1 < ie && a[is] == '0') ++is;
      while (js + 1 < je && b[js] == '0') ++js;
      if (ie - is != je - js) return (ie - is) < (je - js) ? -1 : 1;
      for (; is < ie; ++is, ++js) {
        if (a[is] != b[js]) return a[is] < b[js] ? -1 : 1;
      }
      // Equal numeric value: more leading zeros sorts later.
      if (ie - i != je - j) return (ie - i) < (je - j) ? -1 : 1;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) {
        return static_cast<unsigned char>(a[i]) < static_cast<unsigned char>(b[j]) ? -1 : 1;
      }
      ++i;
      ++j;
    }
  }
  if (i == a.size() && j == b.size()) return 0;
  return i == a.size() ? -1 : 1;
}

class ItemId {
 public:
  ItemId() = default;
  explicit ItemId(std::string name) : name_(std::move(name)) {}

  const std::string& str() const noexcept { return name_; }

  friend bool operator==(const ItemId& a, const ItemId& b) { return a.name_ == b.name_; }
  friend bool operator<(const ItemId& a, const ItemId& b) {
    return compare_item_ids(a.name_, b.name_) < 0;
  }

 private:
  std::string name_;
};

// The finite set of producer items ranked in one session. Items keep the
// order in which they were declared; every other type refers to them by
// ItemIndex.
class ItemUniverse {
 public:
  ItemUniverse() = default;

  explicit ItemUniverse(std::vector<ItemId> ids) : ids_(std::move(ids)) {
    index_.reserve(ids_.size());
    for (ItemIndex i = 0; i < ids_.size(); ++i) {
      if (ids_[i].str().empty()) throw ConfigError("item ids must be non-empty");
      if (!index_.emplace(ids_[i].str(), i).second) {
        throw ConfigError("duplicate item id '" + ids_[i].str() + "'");
      }
    }
  }

  static ItemUniverse from_names(const std::vector<std::string>& names) {
    std::vector<ItemId> ids;
    ids.reserve(names.size());
    for (const auto& n : names) ids.emplace_back(n);
    return ItemUniverse(std::move(ids));
  }

  // x1..xn, the naming used by the bundled scenarios.
  static ItemUniverse numbered(std::size_t n, std::string_view prefix = "x") {
    std::vector<ItemId> ids;
    ids.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) ids.emplace_back(std::string(prefix) + std::to_string(i));
    return ItemUniverse(std::move(ids));
  }

  std::size_t size() const noexcept { return ids_.size(); }
  const ItemId& id(ItemIndex i) const { return ids_.at(i); }
  const std::vector<ItemId>& ids() const noexcept { return ids_; }

  bool contains(std::string_view name) const { return index_.count(std::string(name)) != 0; }

  ItemIndex index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw ConfigError("unknown item id '" + std::string(name) + "'");
    return it->second;
  }

  friend bool operator==(const ItemUniverse& a, const ItemUniverse& b) { return a.ids_ == b.ids_; }

 private:
  std::vector<ItemId> ids_;
  std::unordered_map<std::string, ItemIndex> index_;
};

}  // namespace cfi
