#pragma once

#include <cstddef>
#include <vector>

#include "aisbn/marginals.hpp"
#include "aisbn/model.hpp"
#include "aisbn/rng.hpp"

namespace aisbn {

enum class ExactMethod {
  automatic,    // enumeration when the completion count fits the cap, else elimination
  enumeration,  // exhaustive sum over completions of the non-evidence nodes
  elimination,  // variable elimination with greedy min-fill ordering
};

struct ExactOptions {
  ExactMethod method = ExactMethod::automatic;
  // Enumeration: max completions. Elimination: max entries in any factor.
  double state_cap = 16777216.0;  // 2^24
  Execution exec{};
};

/// Conditional table Pr(X | Pa(X), e); rows with Pr(pa, e) = 0 are flagged
/// unreachable and hold zeros.
struct ConditionalTable {
  Cpt table;
  std::vector<bool> reachable;
};

// Pr(e). Throws InfeasibleError when the cap is exceeded.
double exact_pr_evidence(const BayesianNetwork& net, const Evidence& ev, const ExactOptions& opts = {});

// Pr(X = x | e) for every non-evidence node. Throws InfeasibleError on
// zero-probability evidence or when the cap is exceeded.
MarginalTable exact_posterior_marginals(const BayesianNetwork& net, const Evidence& ev,
                                        const ExactOptions& opts = {});

// Pr(X | e) for a single node (evidence may be empty: prior marginal).
std::vector<double> exact_node_marginal(const BayesianNetwork& net, const Evidence& ev, NodeId node,
                                        const ExactOptions& opts = {});

ConditionalTable exact_icpt(const BayesianNetwork& net, const Evidence& ev, NodeId node,
                            const ExactOptions& opts = {});

// Number of completions of the non-evidence nodes (as a double).
double completion_count(const BayesianNetwork& net, const Evidence& ev);

// ---------------------------------------------------------------------------
// Enumeration kernels. The serial version is the reference: a single odometer
// over all completions. The parallel version splits the completion index range
// into fixed blocks processed under OpenMP and merged in block order.

struct EnumerationTotals {
  double pr_evidence = 0.0;
  // Pr(X = x, e), flattened per node (offset by node_offset).
  std::vector<double> node_mass;
  std::vector<std::size_t> node_offset;
  // Pr(x, pa, e) in CPT layout, flattened per node (offset by family_offset).
  std::vector<double> family_mass;
  std::vector<std::size_t> family_offset;

  void merge(const EnumerationTotals& other);
};

EnumerationTotals enumerate_serial(const BayesianNetwork& net, const Evidence& ev);
EnumerationTotals enumerate_parallel(const BayesianNetwork& net, const Evidence& ev,
                                     const Execution& exec);

// ---------------------------------------------------------------------------
// Variable elimination. Returns the unnormalized joint Pr(keep, e) as a flat
// table over `keep` (in the given order, last varying fastest).
std::vector<double> eliminate_to(const BayesianNetwork& net, const Evidence& ev,
                                 const std::vector<NodeId>& keep, double max_factor_size);

}  // namespace aisbn
