#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "cfi/cfi.hpp"
#include "oracle/brute_force.hpp"

namespace testing_support {

inline std::string fixture(const std::string& name) { return std::string(CFI_FIXTURES_DIR) + "/" + name; }

inline cfi::Ranker ranker_of(std::vector<cfi::ItemIndex> order) { return cfi::Ranker::from_order(order); }

// Four items, R0 = (x1, x2, x3, x4), R1 = (x2, x3, x4, x1), h = (1, 1, 0, 0).
inline cfi::Scenario four_item(cfi::MergeStrategy strategy, double p0) {
  cfi::Scenario s;
  s.items = cfi::ItemUniverse::numbered(4);
  s.utility = {0.9, 1.0, 1.0, 0.9};
  s.attention = cfi::AttentionFunction({1, 1, 0, 0});
  s.design.r0 = ranker_of({0, 1, 2, 3});
  s.design.r1 = ranker_of({1, 2, 3, 0});
  s.design.probabilities = {p0, 1.0 - p0, 0.0};
  s.design.strategy = strategy;
  s.validate();
  return s;
}

inline cfi::Ranker random_ranker(std::size_t n, std::mt19937_64& g) {
  std::vector<cfi::ItemIndex> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), g);
  return cfi::Ranker::from_order(order);
}

inline std::vector<double> random_attention(std::size_t n, std::mt19937_64& g) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> h(n);
  for (double& x : h) x = unit(g);
  std::sort(h.begin(), h.end(), std::greater<>());
  return h;
}

inline std::vector<double> random_utility(std::size_t n, std::mt19937_64& g) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> u(n);
  for (double& x : u) x = unit(g);
  return u;
}

inline cfi::Scenario random_scenario(std::size_t n, double p0, cfi::MergeStrategy strategy, std::mt19937_64& g) {
  cfi::Scenario s;
  s.items = cfi::ItemUniverse::numbered(n);
  s.utility = random_utility(n, g);
  s.attention = cfi::AttentionFunction(random_attention(n, g));
  s.design.r0 = random_ranker(n, g);
  s.design.r1 = random_ranker(n, g);
  s.design.probabilities = {p0, 1.0 - p0, 0.0};
  s.design.strategy = strategy;
  s.validate();
  return s;
}

inline oracle::Design to_oracle(const cfi::ExperimentDesign& d) {
  oracle::Design o;
  for (cfi::ItemIndex i = 0; i < d.size(); ++i) {
    o.r0.push_back(d.r0.position(i));
    o.r1.push_back(d.r1.position(i));
  }
  o.p0 = d.probabilities.control;
  o.p1 = d.probabilities.treatment;
  o.ph = d.probabilities.holdout;
  o.naive = d.strategy == cfi::MergeStrategy::NaiveEqualTie;
  return o;
}

inline double max_kernel_gap(const cfi::KernelTable& k, const std::vector<std::vector<std::vector<double>>>& ref) {
  double worst = 0.0;
  for (cfi::Arm arm : cfi::kExperimentArms) {
    for (std::size_t j = 1; j <= k.size(); ++j) {
      const auto& cell = k.cell(arm, static_cast<cfi::Position>(j));
      if (!cell) continue;
      for (std::size_t q = 1; q <= k.size(); ++q) {
        const double want = ref[cfi::arm_index(arm)][j - 1][q - 1];
        worst = std::max(worst, std::abs((*cell)(static_cast<cfi::Position>(q)) - want));
      }
    }
  }
  return worst;
}

}  // namespace testing_support
