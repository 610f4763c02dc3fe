#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cfi/errors.hpp"
#include "cfi/random.hpp"
#include "cfi/ranker.hpp"

namespace cfi {

enum class Arm : std::uint8_t { Control = 0, Treatment = 1, Holdout = 2 };

inline constexpr std::array<Arm, 2> kExperimentArms{Arm::Control, Arm::Treatment};

inline std::string_view arm_name(Arm a) {
  switch (a) {
    case Arm::Control: return "control";
    case Arm::Treatment: return "treatment";
    case Arm::Holdout: return "holdout";
  }
  return "?";
}

inline constexpr int arm_index(Arm a) noexcept { return static_cast<int>(a); }

// Which counterfactual ranker positions an item in the SUTVA pre-ranking.
enum class Source : std::uint8_t { R0 = 0, R1 = 1 };

struct ArmProbabilities {
  static constexpr double kSumTolerance = 1e-12;

  double control = 0.5;
  double treatment = 0.5;
  double holdout = 0.0;

  double of(Arm a) const {
    switch (a) {
      case Arm::Control: return control;
      case Arm::Treatment: return treatment;
      case Arm::Holdout: return holdout;
    }
    return 0.0;
  }

  bool has_holdout() const noexcept { return holdout > 0.0; }

  /// Throws ConfigError naming the first offending field.
  void validate() const {
    auto check = [](double p, const char* field) {
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        throw ConfigError("arm probability must lie in [0, 1], got " + std::to_string(p), field);
      }
    };
    check(control, "p0");
    check(treatment, "p1");
    check(holdout, "ph");
    const double sum = control + treatment + holdout;
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw ConfigError("p0 + p1 + ph must equal 1, got " + std::to_string(sum), "p1");
    }
  }
};

// Holdout items are ranked by R0 unless configured otherwise.
struct Governance {
  Source holdout_source = Source::R0;

  Source source_of(Arm a) const noexcept {
    switch (a) {
      case Arm::Control: return Source::R0;
      case Arm::Treatment: return Source::R1;
      case Arm::Holdout: return holdout_source;
    }
    return Source::R0;
  }

  /// Probability that an item is positioned by R0.
  double r0_share(const ArmProbabilities& p) const noexcept {
    return p.control + (holdout_source == Source::R0 ? p.holdout : 0.0);
  }
};

class ArmAssignment {
 public:
  ArmAssignment() = default;
  ArmAssignment(std::vector<Arm> arms, ArmProbabilities probabilities)
      : arms_(std::move(arms)), probabilities_(probabilities) {
    probabilities_.validate();
  }

  std::size_t size() const noexcept { return arms_.size(); }
  Arm arm(ItemIndex i) const { return arms_.at(i); }
  const std::vector<Arm>& arms() const noexcept { return arms_; }
  const ArmProbabilities& probabilities() const noexcept { return probabilities_; }

  std::size_t count(Arm a) const {
    std::size_t c = 0;
    for (Arm x : arms_) c += (x == a);
    return c;
  }

  friend bool operator==(const ArmAssignment& a, const ArmAssignment& b) { return a.arms_ == b.arms_; }

 private:
  std::vector<Arm> arms_;
  ArmProbabilities probabilities_;
};

enum class AssignmentScheme : std::uint8_t {
  // Every item independently: Control w.p. p0, Treatment w.p. p1, else Holdout.
  Bernoulli,
  // Exactly p0*n control and p1*n treatment items, uniformly at random.
  FixedSize,
};

/// Arm counts for a fixed-size split; throws unless p_k * n is integral.
inline std::array<std::size_t, 3> fixed_split_counts(const ArmProbabilities& p, std::size_t n) {
  std::array<std::size_t, 3> counts{};
  const std::array<double, 3> probs{p.control, p.treatment, p.holdout};
  const char* fields[3] = {"p0", "p1", "ph"};
  std::size_t total = 0;
  for (int k = 0; k < 3; ++k) {
    const double want = probs[k] * static_cast<double>(n);
    const double rounded = std::round(want);
    if (std::abs(want - rounded) > 1e-9) {
      throw ConfigError("fixed-size split needs " + std::string(fields[k]) + " * n to be an integer", fields[k]);
    }
    counts[k] = static_cast<std::size_t>(rounded);
    total += counts[k];
  }
  if (total != n) throw ConfigError("fixed-size split counts do not add up to n", "p1");
  return counts;
}

/// Draws one assignment. Bernoulli consumes exactly one uniform per item, in
/// item order.
inline ArmAssignment draw_assignment(std::size_t n, const ArmProbabilities& p, AssignmentScheme scheme,
                                     RandomStream& rng) {
  std::vector<Arm> arms(n, Arm::Control);
  if (scheme == AssignmentScheme::Bernoulli) {
    const double treat_cut = p.control + p.treatment;
    for (auto& a : arms) {
      const double u = rng.uniform();
      a = u < p.control ? Arm::Control : (u < treat_cut ? Arm::Treatment : Arm::Holdout);
    }
  } else {
    const auto counts = fixed_split_counts(p, n);
    std::size_t i = 0;
    for (std::size_t c = 0; c < counts[1]; ++c) arms[i++] = Arm::Treatment;
    for (std::size_t c = 0; c < counts[2]; ++c) arms[i++] = Arm::Holdout;
    rng.shuffle(arms.begin(), arms.end());
  }
  return ArmAssignment(std::move(arms), p);
}

}  // namespace cfi
