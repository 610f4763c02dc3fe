#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cfi/errors.hpp"
#include "cfi/ranker.hpp"

namespace cfi {

/// Consumer attention per position: non-negative and non-increasing.
class AttentionFunction {
 public:
  AttentionFunction() = default;

  explicit AttentionFunction(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
        throw DomainError("attention h(" + std::to_string(i + 1) + ") must be a non-negative finite number");
      }
      if (i > 0 && values_[i] > values_[i - 1]) {
        throw DomainError("attention must be non-increasing, but h(" + std::to_string(i + 1) + ") > h(" +
                          std::to_string(i) + ")");
      }
    }
  }

  /// h(j') = 1 for j' <= cutoff, else 0.
  static AttentionFunction step(std::size_t n, std::size_t cutoff) {
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 0; i < cutoff && i < n; ++i) v[i] = 1.0;
    return AttentionFunction(std::move(v));
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator()(Position p) const { return values_.at(static_cast<std::size_t>(p - 1)); }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

}  // namespace cfi
