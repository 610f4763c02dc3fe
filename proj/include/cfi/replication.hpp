#pragma once

#include <cstdint>

#include "cfi/assignment.hpp"
#include "cfi/mergers.hpp"
#include "cfi/random.hpp"
#include "cfi/ranker.hpp"
#include "cfi/scenario.hpp"

namespace cfi {

struct ReplicationDraw {
  ArmAssignment assignment;
  Ranker merged;
};

/// The random part of one replication: arm draws in item order, then tie
/// coins in ascending conflict-spot order, all from the replication's own
/// stream. Takes only the design, never u or h.
inline ReplicationDraw draw_replication(const ExperimentDesign& design, std::uint64_t master_seed,
                                        std::uint64_t index) {
  auto rng = RandomStream::for_replication(master_seed, index);
  auto assignment = draw_assignment(design.size(), design.probabilities, design.scheme, rng);
  auto merged = merge_assignment(design.r0, design.r1, assignment, design.strategy, design.governance, rng);
  return {std::move(assignment), std::move(merged)};
}

}  // namespace cfi
