#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "aisbn/marginals.hpp"
#include "aisbn/model.hpp"
#include "aisbn/rng.hpp"

namespace aisbn {

/// Importance conditional probability tables, one per node, shaped like the
/// node's CPT. Tables of evidence nodes are carried along but never read.
class IcptStore {
 public:
  IcptStore() = default;
  static IcptStore from_cpts(const BayesianNetwork& net);

  std::size_t size() const noexcept { return tables_.size(); }
  const Cpt& table(NodeId node) const { return tables_[node]; }
  Cpt& table(NodeId node) { return tables_[node]; }

  bool operator==(const IcptStore&) const = default;

 private:
  std::vector<Cpt> tables_;
};

/// Raw score moments of a batch of samples plus per-node (and optionally
/// per-family) score sums. Merging is field-wise addition.
class ScoreAccumulator {
 public:
  ScoreAccumulator() = default;
  explicit ScoreAccumulator(const BayesianNetwork& net, bool track_families = false);

  void add(const BayesianNetwork& net, const Assignment& a, double weighted_score);
  void merge(const ScoreAccumulator& other);

  std::size_t count() const noexcept { return n_; }
  double score_sum() const noexcept { return sum_; }
  double score_sq_sum() const noexcept { return sum_sq_; }
  std::span<const double> node_scores(NodeId node) const {
    return {node_scores_.data() + node_offset_[node], node_offset_[node + 1] - node_offset_[node]};
  }
  bool tracks_families() const noexcept { return !family_offset_.empty(); }
  // Score sums per (parent configuration, outcome) in CPT layout.
  std::span<const double> family_scores(NodeId node) const {
    return {family_scores_.data() + family_offset_[node],
            family_offset_[node + 1] - family_offset_[node]};
  }

  bool operator==(const ScoreAccumulator&) const = default;

 private:
  std::size_t n_ = 0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  std::vector<std::size_t> node_offset_;
  std::vector<double> node_scores_;
  std::vector<std::size_t> family_offset_;
  std::vector<double> family_scores_;
};

// Index of the first entry whose running cumulative sum exceeds u (u in [0,1)).
// Falls back to the last positive entry when rounding leaves the total below u.
Outcome select_outcome(std::span<const double> row, double u);

/// Forward sampling under `icpt`: evidence nodes are clamped, every other node
/// is drawn in topological order from the row selected by its parents.
/// `next_uniform` is any callable returning doubles in [0, 1).
template <class UniformSource>
Assignment forward_sample(const BayesianNetwork& net, const IcptStore& icpt, const Evidence& ev,
                          UniformSource&& next_uniform) {
  Assignment a(net.size(), 0);
  for (auto [node, value] : ev) a[node] = value;
  for (NodeId v : net.topological_order()) {
    if (ev.contains(v)) continue;
    a[v] = select_outcome(icpt.table(v).row(net.row_index(v, a)), next_uniform());
  }
  return a;
}

Assignment forward_sample(const BayesianNetwork& net, const IcptStore& icpt, const Evidence& ev,
                          RngStream& rng);

// Pr(a, e) / rho(a), where rho is the product of the icpt entries that generated
// the non-evidence values of `a`. Throws Error when rho(a) == 0.
double score_sample(const BayesianNetwork& net, const IcptStore& icpt, const Evidence& ev,
                    const Assignment& a);

void accumulate(ScoreAccumulator& acc, const BayesianNetwork& net, const Assignment& a,
                double weighted_score);

struct PrEstimate {
  double value = 0.0;
  double variance = 0.0;  // variance of the estimate itself
};

// Mean score and its sample variance divided by n. Throws InfeasibleError
// when fewer than two samples were accumulated.
PrEstimate estimate_pr_evidence(const ScoreAccumulator& acc);

// Normalized per-node score arrays for the non-evidence nodes. Throws
// InfeasibleError when the score sum is zero.
MarginalTable marginals_from_scores(const ScoreAccumulator& acc, const BayesianNetwork& net,
                                    const Evidence& ev);

// Two-sided standard-normal quantile z with P(|Z| >= z) = delta.
double normal_two_sided_quantile(double delta);

// CLT relative error sqrt(variance) / estimate * z(delta).
double relative_error_bound(double estimate, double variance, double delta);

// ---------------------------------------------------------------------------
// Sampling kernels.

enum class SamplingMode {
  importance,  // evidence clamped, score = Pr(s, e) / rho(s)
  rejection,   // full prior sample, score = 1 if consistent with evidence else 0
};

struct SamplingJob {
  const BayesianNetwork& net;
  const IcptStore& icpt;
  const Evidence& ev;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  SamplingMode mode = SamplingMode::importance;
  bool track_families = false;
};

inline constexpr std::size_t kSamplesPerChunk = 512;

// Stream id used by chunk `chunk` of a job with stream id `stream`.
std::uint64_t chunk_stream(std::uint64_t stream, std::size_t chunk);

// Reference kernel: chunks processed in order on the calling thread.
ScoreAccumulator sample_serial(const SamplingJob& job);
// OpenMP kernel over the same chunks; bit-identical to sample_serial.
ScoreAccumulator sample_parallel(const SamplingJob& job, const Execution& exec);

ScoreAccumulator run_sampling(const SamplingJob& job, const Execution& exec);

}  // namespace aisbn
