// Adaptive importance sampling for Bayesian networks.
//
// Run loop: initialize the ICPTs with the two heuristics, then for each
// learning stage k = 0..k_max-1 draw `interval` samples under the current
// ICPTs, fold them into the weighted estimator with weight w^k, and move the
// evidence ancestors' ICPTs toward the stage's normalized family scores with
// rate eta(k). Whatever budget remains is spent sampling under the final ICPTs
// as one more stage (index k_max). Posterior marginals come from the weighted
// per-node score arrays of all stages.

#include "aisbn/ais.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aisbn {

void AisConfig::validate() const {
  if (!(rate_final > 0.0 && rate_final <= rate_initial && rate_initial <= 1.0))
    throw std::invalid_argument("learning rates must satisfy 0 < b <= a <= 1");
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0, 1)");
  if (interval < 1) throw std::invalid_argument("stage interval must be at least 1");
  if (stages < 1) throw std::invalid_argument("at least one learning stage is required");
  if (total_samples < 1) throw std::invalid_argument("sample budget must be positive");
  if (!(prob_floor >= 0.0 && prob_floor < 1.0)) throw std::invalid_argument("probability floor must lie in [0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

void AisConfig::validate(const BayesianNetwork& net) const {
  validate();
  const double limit = 1.0 / static_cast<double>(net.max_outcomes());
  if (heuristic_small && !(theta < limit))
    throw std::invalid_argument("theta must be below 1 / (maximum outcome count)");
  if (prob_floor > 0.0 && !(prob_floor < limit))
    throw std::invalid_argument("probability floor must be below 1 / (maximum outcome count)");
}

std::map<NodeId, double> estimate_evidence_priors(const BayesianNetwork& net, const Evidence& ev,
                                                  const AisConfig& cfg, std::uint64_t seed,
                                                  const Execution& exec) {
  ev.check(net);
  std::map<NodeId, double> priors;
  std::optional<SamplerResult> presample;
  const Evidence none;
  for (auto [node, value] : ev) {
    if (net.node(node).parents.empty()) {
      priors[node] = net.cpt(node).at(0, value);
      continue;
    }
    try {
      ExactOptions opts;
      opts.state_cap = cfg.prior_state_cap;
      opts.exec = exec;
      priors[node] = exact_node_marginal(net, none, node, opts)[value];
    } catch (const InfeasibleError&) {
      if (!presample) presample = logic_sampling(net, none, cfg.prior_presamples, seed, exec);
      priors[node] = presample->marginals->at(node)[value];
    }
  }
  return priors;
}

void raise_small_probabilities(std::span<double> row, double theta) {
  if (row.empty()) return;
  const auto largest = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  double deficit = 0.0;
  for (std::size_t x = 0; x < row.size(); ++x) {
    if (x != largest && row[x] < theta) {
      deficit += theta - row[x];
      row[x] = theta;
    }
  }
  if (row[largest] - deficit < theta)
    throw InfeasibleError("probability threshold leaves the largest entry below the threshold");
  row[largest] -= deficit;
}

IcptStore init_importance(const BayesianNetwork& net, const Evidence& ev,
                          const std::map<NodeId, double>& evidence_priors, const AisConfig& cfg) {
  cfg.validate(net);
  ev.check(net);
  IcptStore icpt = IcptStore::from_cpts(net);

  if (cfg.heuristic_uniform) {
    for (auto [node, value] : ev) {
      (void)value;
      auto it = evidence_priors.find(node);
      if (it == evidence_priors.end()) throw std::invalid_argument("missing prior for an evidence node");
      const double n_e = static_cast<double>(net.outcome_count(node));
      if (!(it->second < 1.0 / (2.0 * n_e))) continue;
      for (NodeId parent : net.node(node).parents) {
        if (ev.contains(parent)) continue;
        Cpt& table = icpt.table(parent);
        const double u = 1.0 / static_cast<double>(table.outcomes());
        for (std::size_t r = 0; r < table.rows(); ++r)
          for (double& p : table.row(r)) p = u;
      }
    }
  }

  if (cfg.heuristic_small) {
    // Non-ancestors already hold their optimal table (the CPT); only the
    // evidence ancestors are thresholded.
    const auto ancestors = evidence_ancestor_mask(net, ev);
    for (NodeId v = 0; v < net.size(); ++v) {
      if (!ancestors[v]) continue;
      Cpt& table = icpt.table(v);
      for (std::size_t r = 0; r < table.rows(); ++r) raise_small_probabilities(table.row(r), cfg.theta);
    }
  }
  return icpt;
}

double learning_rate(std::size_t k, const AisConfig& cfg) {
  if (k > cfg.stages) throw std::invalid_argument("stage index beyond k_max");
  if (k == 0) return cfg.rate_initial;
  if (k == cfg.stages) return cfg.rate_final;
  const double exponent = static_cast<double>(k) / static_cast<double>(cfg.stages);
  return cfg.rate_initial * std::pow(cfg.rate_final / cfg.rate_initial, exponent);
}

IcptStore learn_stage(const BayesianNetwork& net, const Evidence& ev, const IcptStore& icpt,
                      const ScoreAccumulator& stage, std::size_t k, const AisConfig& cfg) {
  if (!stage.tracks_families()) throw std::invalid_argument("learning needs family scores");
  const double eta = learning_rate(k, cfg);
  const auto ancestors = evidence_ancestor_mask(net, ev);
  IcptStore next = icpt;
  for (NodeId v = 0; v < net.size(); ++v) {
    if (!ancestors[v]) continue;
    Cpt& table = next.table(v);
    const std::size_t outs = table.outcomes();
    auto scores = stage.family_scores(v);
    for (std::size_t r = 0; r < table.rows(); ++r) {
      double mass = 0.0;
      for (Outcome x = 0; x < outs; ++x) mass += scores[r * outs + x];
      if (!(mass > 0.0)) continue;
      auto row = table.row(r);
      for (Outcome x = 0; x < outs; ++x) {
        const double target = scores[r * outs + x] / mass;
        row[x] += eta * (target - row[x]);
      }
      if (cfg.prob_floor > 0.0) raise_small_probabilities(row, cfg.prob_floor);
    }
  }
  return next;
}

double stage_weight(std::size_t k, std::span<const double> sigma_history, const AisConfig& cfg) {
  const std::size_t first = cfg.zero_weight_stages;
  if (k < first) return 0.0;
  if (cfg.weight_mode == WeightMode::last_stage_only) return 1.0;
  if (sigma_history.size() < k + 1) throw std::invalid_argument("sigma history shorter than k + 1");

  // Anchored at the first weighted stage (w = 1 there), then clamped so the
  // sequence never decreases.
  const double anchor = sigma_history[first];
  double w = 1.0;
  if (anchor == 0.0) return w;
  for (std::size_t j = first + 1; j <= k; ++j) {
    const double sigma = sigma_history[j];
    if (sigma > 0.0) w = std::max(w, anchor / sigma);
  }
  return w;
}

namespace {

// Weighted combination of per-stage accumulators:
//   Pr(e) = sum_k w_k S_k / sum_k w_k n_k,   marginals = sum_k w_k P_k / sum_k w_k S_k.
class StageCombiner {
 public:
  explicit StageCombiner(const BayesianNetwork& net) : net_(net) {
    offset_.assign(net.size() + 1, 0);
    for (NodeId v = 0; v < net.size(); ++v) offset_[v + 1] = offset_[v] + net.outcome_count(v);
    node_.assign(offset_.back(), 0.0);
  }

  void add(const ScoreAccumulator& acc, double stage_variance, double w) {
    if (w == 0.0) return;
    const double n = static_cast<double>(acc.count());
    weighted_count_ += w * n;
    weighted_sum_ += w * acc.score_sum();
    if (std::isfinite(stage_variance)) weighted_var_ += w * w * n * n * stage_variance;
    for (NodeId v = 0; v < net_.size(); ++v) {
      auto s = acc.node_scores(v);
      for (std::size_t x = 0; x < s.size(); ++x) node_[offset_[v] + x] += w * s[x];
    }
  }

  PrEstimate estimate() const {
    if (weighted_count_ == 0.0) return {0.0, std::numeric_limits<double>::quiet_NaN()};
    return {weighted_sum_ / weighted_count_, weighted_var_ / (weighted_count_ * weighted_count_)};
  }

  std::optional<MarginalTable> marginals(const Evidence& ev) const {
    if (!(weighted_sum_ > 0.0)) return std::nullopt;
    MarginalTable out(net_.size());
    for (NodeId v = 0; v < net_.size(); ++v) {
      if (ev.contains(v)) continue;
      std::vector<double> dist(node_.begin() + static_cast<std::ptrdiff_t>(offset_[v]),
                               node_.begin() + static_cast<std::ptrdiff_t>(offset_[v + 1]));
      for (double& p : dist) p /= weighted_sum_;
      out.set(v, std::move(dist));
    }
    return out;
  }

 private:
  const BayesianNetwork& net_;
  std::vector<std::size_t> offset_;
  std::vector<double> node_;
  double weighted_count_ = 0.0;
  double weighted_sum_ = 0.0;
  double weighted_var_ = 0.0;
};

StageStats stage_stats(std::size_t k, const ScoreAccumulator& acc, bool learning) {
  StageStats s;
  s.k = k;
  s.samples = acc.count();
  s.learning = learning;
  if (acc.count() >= 2) {
    auto est = estimate_pr_evidence(acc);
    s.pr_estimate = est.value;
    s.sigma_hat = std::sqrt(est.variance);
  } else {
    s.pr_estimate = acc.count() == 1 ? acc.score_sum() : 0.0;
    s.sigma_hat = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

AisResult run(const BayesianNetwork& net, const Evidence& ev, const AisConfig& cfg,
              std::uint64_t seed, std::uint64_t stream_base, const Execution& exec) {
  cfg.validate(net);
  ev.check(net);

  std::map<NodeId, double> priors;
  if (cfg.heuristic_uniform) priors = estimate_evidence_priors(net, ev, cfg, seed, exec);

  AisResult result;
  IcptStore icpt = init_importance(net, ev, priors, cfg);
  result.initial_icpt = icpt;

  std::size_t learning_stages = cfg.stages;
  const std::size_t learning_budget = cfg.stages * cfg.interval;
  if (cfg.total_samples < learning_budget) {
    result.learning_truncated = true;
    learning_stages = cfg.total_samples / cfg.interval;
    // Keep some budget for the estimation phase.
    if (learning_stages > 0 && learning_stages * cfg.interval == cfg.total_samples) --learning_stages;
  }

  StageCombiner combiner(net);
  std::vector<double> sigmas;
  double max_weight = 0.0;
  auto fold = [&](std::size_t k, const ScoreAccumulator& acc, bool learning, bool force_weight) {
    StageStats stats = stage_stats(k, acc, learning);
    sigmas.push_back(stats.sigma_hat);
    double w = stage_weight(k, sigmas, cfg);
    if (force_weight && w == 0.0) w = std::max(1.0, max_weight);
    max_weight = std::max(max_weight, w);
    stats.weight = w;
    combiner.add(acc, stats.sigma_hat * stats.sigma_hat, w);
    result.stages.push_back(stats);
  };

  for (std::size_t k = 0; k < learning_stages; ++k) {
    SamplingJob job{net, icpt, ev, cfg.interval, seed, stream_base + 1 + k, SamplingMode::importance, true};
    ScoreAccumulator acc = run_sampling(job, exec);
    fold(k, acc, true, false);
    icpt = learn_stage(net, ev, icpt, acc, k, cfg);
    result.samples += acc.count();
  }

  const std::size_t remaining = cfg.total_samples - learning_stages * cfg.interval;
  if (remaining > 0) {
    SamplingJob job{net, icpt, ev, remaining, seed, stream_base + 1 + learning_stages,
                    SamplingMode::importance, false};
    ScoreAccumulator acc = run_sampling(job, exec);
    // The estimation phase always counts, even when truncation moved it into
    // the zero-weight prefix.
    fold(learning_stages, acc, false, true);
    result.samples += acc.count();
  }

  result.icpt = std::move(icpt);
  result.pr_evidence = combiner.estimate();
  result.marginals = combiner.marginals(ev);
  if (result.pr_evidence.value > 0.0 && std::isfinite(result.pr_evidence.variance))
    result.relative_error = relative_error_bound(result.pr_evidence.value, result.pr_evidence.variance, cfg.delta);
  return result;
}

}  // namespace

AisResult ais_bn_run(const BayesianNetwork& net, const Evidence& ev, const AisConfig& cfg,
                     std::uint64_t seed, const Execution& exec) {
  return run(net, ev, cfg, seed, 0, exec);
}

QueryResult ais_bn_query(const BayesianNetwork& net, const Evidence& ev, const Evidence& query,
                         const AisConfig& cfg, std::uint64_t seed, const Execution& exec) {
  query.check(net);
  for (auto [node, value] : query) {
    (void)value;
    if (ev.contains(node)) throw ModelError("query node '" + net.node(node).key + "' is observed");
  }
  // Disjoint stream ranges keep the two runs independent.
  constexpr std::uint64_t kJointStreamBase = 1u << 20;
  AisResult evidence_run = run(net, ev, cfg, seed, 0, exec);
  AisResult joint_run = run(net, ev.extended(query), cfg, seed, kJointStreamBase, exec);

  QueryResult out;
  out.pr_evidence = evidence_run.pr_evidence;
  out.pr_joint = joint_run.pr_evidence;
  if (!(out.pr_evidence.value > 0.0)) throw InfeasibleError("estimated Pr(e) is zero");
  out.probability = out.pr_joint.value / out.pr_evidence.value;
  out.relative_error_evidence = evidence_run.relative_error;
  out.relative_error_joint = joint_run.relative_error;
  return out;
}

}  // namespace aisbn
