#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cfi/assignment.hpp"
#include "cfi/attention.hpp"
#include "cfi/errors.hpp"
#include "cfi/item.hpp"
#include "cfi/mergers.hpp"
#include "cfi/ranker.hpp"

namespace cfi {

/// Everything that drives the experiment's randomness: the two
/// counterfactual rankers, the traffic split and the merge rule. Holds no
/// metric information, so code that only sees a design cannot depend on u or h.
struct ExperimentDesign {
  Ranker r0;
  Ranker r1;
  ArmProbabilities probabilities;
  MergeStrategy strategy = MergeStrategy::Consistent;
  Governance governance;
  AssignmentScheme scheme = AssignmentScheme::Bernoulli;

  std::size_t size() const noexcept { return r0.size(); }
  const Ranker& ranker(Arm k) const { return k == Arm::Treatment ? r1 : r0; }

  void validate() const {
    if (r1.size() != r0.size()) throw ConfigError("r0 and r1 rank different item universes", "r1");
    probabilities.validate();
    if (strategy == MergeStrategy::RandomSpotLabeling && probabilities.has_holdout()) {
      throw ConfigError("spot-labeling strategy does not support a holdout arm", "ph");
    }
    if (scheme == AssignmentScheme::FixedSize) fixed_split_counts(probabilities, size());
  }

  /// Readouts normalize by p_k, so both arms need traffic.
  void require_split() const {
    if (!(probabilities.control > 0.0 && probabilities.control < 1.0)) {
      throw DegenerateSplitError("p0 must lie strictly between 0 and 1");
    }
    if (!(probabilities.treatment > 0.0 && probabilities.treatment < 1.0)) {
      throw DegenerateSplitError("p1 must lie strictly between 0 and 1");
    }
  }
};

/// One complete experiment configuration. The (u, h, R0, R1) tuple is fixed
/// across replications; only arm assignment and tie coins are random.
struct Scenario {
  ItemUniverse items;
  std::vector<double> utility;  // pure metric u(d), indexed by ItemIndex
  AttentionFunction attention;
  ExperimentDesign design;

  std::size_t size() const noexcept { return items.size(); }

  void validate() const {
    const std::size_t n = items.size();
    if (n == 0) throw ConfigError("scenario needs at least one item", "items");
    if (design.r0.size() != n) throw ConfigError("r0 does not cover the item universe", "r0");
    if (design.r1.size() != n) throw ConfigError("r1 does not cover the item universe", "r1");
    if (utility.size() != n) throw ConfigError("u must give a value for every item", "u");
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(utility[i]) || utility[i] < 0.0) {
        throw ConfigError("u('" + items.id(i).str() + "') must be a non-negative number", "u");
      }
    }
    if (attention.size() != n) {
      throw ConfigError("h has " + std::to_string(attention.size()) + " entries, expected " + std::to_string(n), "h");
    }
    design.validate();
  }
};

}  // namespace cfi
