#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "aisbn/baselines.hpp"
#include "aisbn/engine.hpp"
#include "aisbn/exact.hpp"

namespace aisbn {

enum class WeightMode {
  last_stage_only,  // w = 0 inside the zero-weight prefix, 1 afterwards
  inverse_sigma,    // w proportional to 1/sigma_hat, kept non-decreasing
};

/// Tunable parameters of the adaptive sampler. Defaults are the values used in
/// the published experiments.
struct AisConfig {
  std::size_t interval = 2500;         // samples per learning stage (l)
  std::size_t total_samples = 125000;  // full budget including learning (m)
  std::size_t stages = 10;             // learning stages (k_max)
  double rate_initial = 0.4;           // a
  double rate_final = 0.14;            // b
  double theta = 0.04;                 // small-probability threshold
  std::size_t zero_weight_stages = 10;  // stages k < this get w^k = 0
  WeightMode weight_mode = WeightMode::last_stage_only;
  double prob_floor = 1e-3;  // ICPT floor re-applied after every learning update
  double delta = 0.05;       // confidence parameter of the relative error bound
  bool heuristic_uniform = true;  // heuristic U
  bool heuristic_small = true;    // heuristic S
  // Evidence priors: exact when feasible under this cap, else a logic-sampling
  // pre-pass of `prior_presamples` samples.
  double prior_state_cap = 16777216.0;
  std::size_t prior_presamples = 100000;

  // Throws std::invalid_argument on violated invariants. With a network, also
  // checks theta < 1 / max outcome count.
  void validate() const;
  void validate(const BayesianNetwork& net) const;
};

struct StageStats {
  std::size_t k = 0;
  std::size_t samples = 0;
  double sigma_hat = 0.0;    // standard deviation of the stage's Pr(e) estimate
  double weight = 0.0;       // w^k
  double pr_estimate = 0.0;  // stage Pr(e) estimate
  bool learning = true;      // false for the final estimation phase
};

// Pr(E = e) for each evidence node separately, ignoring the other evidence.
std::map<NodeId, double> estimate_evidence_priors(const BayesianNetwork& net, const Evidence& ev,
                                                  const AisConfig& cfg, std::uint64_t seed = 0,
                                                  const Execution& exec = {});

// Raises entries below theta to theta and subtracts the total deficit from the
// row's largest entry. Throws InfeasibleError if that entry would drop below theta.
void raise_small_probabilities(std::span<double> row, double theta);

// CPTs, then heuristic U (parents of unlikely evidence -> uniform rows), then
// heuristic S on every non-evidence table.
IcptStore init_importance(const BayesianNetwork& net, const Evidence& ev,
                          const std::map<NodeId, double>& evidence_priors, const AisConfig& cfg);

// a * (b / a)^(k / k_max)
double learning_rate(std::size_t k, const AisConfig& cfg);

// One learning step for the evidence ancestors: blend each row toward the
// stage's normalized family scores, then re-apply the probability floor.
// Rows with no stage mass and all other nodes are left untouched.
IcptStore learn_stage(const BayesianNetwork& net, const Evidence& ev, const IcptStore& icpt,
                      const ScoreAccumulator& stage, std::size_t k, const AisConfig& cfg);

// w^k given sigma_hat for stages 0..k (sigma_history.size() == k + 1).
double stage_weight(std::size_t k, std::span<const double> sigma_history, const AisConfig& cfg);

struct AisResult {
  PrEstimate pr_evidence;
  std::optional<MarginalTable> marginals;  // empty when the weighted score sum is zero
  std::vector<StageStats> stages;
  IcptStore initial_icpt;
  IcptStore icpt;
  std::size_t samples = 0;
  bool learning_truncated = false;  // budget smaller than stages * interval
  std::optional<double> relative_error;  // CLT bound at cfg.delta, when defined

  bool effective() const noexcept { return marginals.has_value(); }
};

AisResult ais_bn_run(const BayesianNetwork& net, const Evidence& ev, const AisConfig& cfg,
                     std::uint64_t seed, const Execution& exec = {});

struct QueryResult {
  double probability = 0.0;  // Pr(a | e)
  PrEstimate pr_evidence;    // Pr(e)
  PrEstimate pr_joint;       // Pr(a, e)
  std::optional<double> relative_error_evidence;
  std::optional<double> relative_error_joint;
};

// Separate runs for Pr(e) and for Pr(a, e) (evidence extended by the query),
// combined as their ratio.
QueryResult ais_bn_query(const BayesianNetwork& net, const Evidence& ev, const Evidence& query,
                         const AisConfig& cfg, std::uint64_t seed, const Execution& exec = {});

}  // namespace aisbn
