#include "aisbn/engine.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace aisbn {

IcptStore IcptStore::from_cpts(const BayesianNetwork& net) {
  IcptStore store;
  store.tables_ = net.cpts();
  return store;
}

ScoreAccumulator::ScoreAccumulator(const BayesianNetwork& net, bool track_families) {
  node_offset_.assign(net.size() + 1, 0);
  for (NodeId v = 0; v < net.size(); ++v) node_offset_[v + 1] = node_offset_[v] + net.outcome_count(v);
  node_scores_.assign(node_offset_.back(), 0.0);
  if (track_families) {
    family_offset_.assign(net.size() + 1, 0);
    for (NodeId v = 0; v < net.size(); ++v)
      family_offset_[v + 1] = family_offset_[v] + net.cpt(v).values().size();
    family_scores_.assign(family_offset_.back(), 0.0);
  }
}

void ScoreAccumulator::add(const BayesianNetwork& net, const Assignment& a, double weighted_score) {
  ++n_;
  if (weighted_score == 0.0) return;
  sum_ += weighted_score;
  sum_sq_ += weighted_score * weighted_score;
  for (NodeId v = 0; v < net.size(); ++v) node_scores_[node_offset_[v] + a[v]] += weighted_score;
  if (!family_offset_.empty())
    for (NodeId v = 0; v < net.size(); ++v)
      family_scores_[family_offset_[v] + net.row_index(v, a) * net.outcome_count(v) + a[v]] +=
          weighted_score;
}

void ScoreAccumulator::merge(const ScoreAccumulator& other) {
  if (node_offset_.empty()) {
    *this = other;
    return;
  }
  if (other.node_offset_.empty()) return;
  if (other.node_scores_.size() != node_scores_.size() ||
      other.family_scores_.size() != family_scores_.size())
    throw std::invalid_argument("merging accumulators of different shapes");
  n_ += other.n_;
  sum_ += other.sum_;
  sum_sq_ += other.sum_sq_;
  for (std::size_t i = 0; i < node_scores_.size(); ++i) node_scores_[i] += other.node_scores_[i];
  for (std::size_t i = 0; i < family_scores_.size(); ++i) family_scores_[i] += other.family_scores_[i];
}

Outcome select_outcome(std::span<const double> row, double u) {
  double cumulative = 0.0;
  for (Outcome x = 0; x < row.size(); ++x) {
    cumulative += row[x];
    if (cumulative > u) return x;
  }
  for (Outcome x = row.size(); x-- > 0;)
    if (row[x] > 0.0) return x;
  return 0;
}

Assignment forward_sample(const BayesianNetwork& net, const IcptStore& icpt, const Evidence& ev,
                          RngStream& rng) {
  return forward_sample(net, icpt, ev, [&rng] { return rng.uniform(); });
}

double score_sample(const BayesianNetwork& net, const IcptStore& icpt, const Evidence& ev,
                    const Assignment& a) {
  double score = 1.0;
  for (NodeId v = 0; v < net.size(); ++v) {
    const std::size_t r = net.row_index(v, a);
    const double p = net.cpt(v).at(r, a[v]);
    if (ev.contains(v)) {
      score *= p;
      continue;
    }
    const double q = icpt.table(v).at(r, a[v]);
    if (q == 0.0)
      throw Error("importance function assigns zero probability to a generated sample at node " +
                  net.node(v).key);
    score *= p / q;
  }
  return score;
}

void accumulate(ScoreAccumulator& acc, const BayesianNetwork& net, const Assignment& a,
                double weighted_score) {
  acc.add(net, a, weighted_score);
}

PrEstimate estimate_pr_evidence(const ScoreAccumulator& acc) {
  const std::size_t n = acc.count();
  if (n < 2) throw InfeasibleError("variance estimate needs at least two samples");
  const double nd = static_cast<double>(n);
  const double mean = acc.score_sum() / nd;
  const double ss = acc.score_sq_sum() - acc.score_sum() * mean;
  return {mean, std::max(0.0, ss / (nd * (nd - 1.0)))};
}

MarginalTable marginals_from_scores(const ScoreAccumulator& acc, const BayesianNetwork& net,
                                    const Evidence& ev) {
  if (!(acc.score_sum() > 0.0))
    throw InfeasibleError("score sum is zero: no effective samples");
  MarginalTable out(net.size());
  for (NodeId v = 0; v < net.size(); ++v) {
    if (ev.contains(v)) continue;
    auto scores = acc.node_scores(v);
    std::vector<double> dist(scores.begin(), scores.end());
    for (double& p : dist) p /= acc.score_sum();
    out.set(v, std::move(dist));
  }
  return out;
}

double normal_two_sided_quantile(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - delta / 2.0);
}

double relative_error_bound(double estimate, double variance, double delta) {
  if (!(estimate > 0.0)) throw InfeasibleError("relative error needs a positive estimate");
  if (variance < 0.0) throw std::invalid_argument("variance must be non-negative");
  return std::sqrt(variance) / estimate * normal_two_sided_quantile(delta);
}

}  // namespace aisbn
