#pragma once

// Counterfactual interleaving for producer-side ranking experiments.

#include "cfi/assignment.hpp"
#include "cfi/attention.hpp"
#include "cfi/config.hpp"
#include "cfi/core_ranking.hpp"
#include "cfi/errors.hpp"
#include "cfi/item.hpp"
#include "cfi/kernels.hpp"
#include "cfi/mergers.hpp"
#include "cfi/random.hpp"
#include "cfi/ranker.hpp"
#include "cfi/readout.hpp"
#include "cfi/replication.hpp"
#include "cfi/report.hpp"
#include "cfi/scenario.hpp"
