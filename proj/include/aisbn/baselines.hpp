#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "aisbn/engine.hpp"

namespace aisbn {

struct SamplerResult {
  PrEstimate pr_evidence;                 // variance is NaN below two samples
  std::optional<MarginalTable> marginals;  // empty when the score sum is zero
  std::size_t samples = 0;

  bool effective() const noexcept { return marginals.has_value(); }
};

// Prior forward sampling; samples inconsistent with the evidence score 0 and
// still count toward n.
SamplerResult logic_sampling(const BayesianNetwork& net, const Evidence& ev, std::size_t samples,
                             std::uint64_t seed, const Execution& exec = {});

// Evidence clamped, non-evidence nodes drawn from their CPT rows.
SamplerResult likelihood_weighting(const BayesianNetwork& net, const Evidence& ev,
                                   std::size_t samples, std::uint64_t seed,
                                   const Execution& exec = {});

struct SisOptions {
  std::size_t interval = 2500;  // samples between table updates
};

// (prior + k * current) / (1 + k)
double sis_update_entry(double prior, double current, std::size_t k);

// Rewrites every non-evidence table from the cumulative family scores. Rows
// with no accumulated score mass keep the prior CPT row.
void sis_update(IcptStore& icpt, const BayesianNetwork& net, const Evidence& ev,
                const ScoreAccumulator& cumulative, std::size_t k);

// Self-importance sampling: starts from the likelihood-weighting importance
// function and revises it every `interval` samples; all samples contribute to
// the estimators with weight 1.
SamplerResult self_importance_sampling(const BayesianNetwork& net, const Evidence& ev,
                                       std::size_t samples, const SisOptions& opts,
                                       std::uint64_t seed, const Execution& exec = {});

// Variance NaN when n < 2, marginals empty when the score sum is zero.
SamplerResult summarize(const ScoreAccumulator& acc, const BayesianNetwork& net, const Evidence& ev);

}  // namespace aisbn
