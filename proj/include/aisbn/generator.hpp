#pragma once

#include <cstddef>
#include <cstdint>

#include "aisbn/exact.hpp"
#include "aisbn/model.hpp"

namespace aisbn {

struct GeneratorParams {
  std::size_t node_count = 30;
  std::size_t max_parents = 3;
  std::size_t max_outcomes = 3;   // outcome counts drawn uniformly from [2, max_outcomes]
  double min_probability = 1e-4;  // 0 keeps raw draws (zeros allowed)
  std::uint64_t seed = 1;
  // Dirichlet concentration of each CPT row; small values give the extreme
  // rows typical of diagnostic networks.
  double concentration = 0.3;
  // Parents are drawn from the previous `parent_window` nodes (0 = any).
  std::size_t parent_window = 8;
};

BayesianNetwork generate_network(const GeneratorParams& params);

enum class EvidenceStates {
  uniform,  // observed state uniform over states with nonzero prior probability
  sampled,  // observed states taken from one prior forward sample
};

// Picks `count` distinct leaf nodes and observed states, deterministic per
// seed. Retries until the joint evidence has nonzero probability (checked
// exactly). Throws InfeasibleError if no such evidence set is found.
Evidence select_leaf_evidence(const BayesianNetwork& net, std::size_t count, std::uint64_t seed,
                              EvidenceStates states = EvidenceStates::uniform,
                              const ExactOptions& exact = {});

}  // namespace aisbn
