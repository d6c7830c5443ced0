#include "aisbn/baselines.hpp"

#include <limits>
#include <stdexcept>

namespace aisbn {

SamplerResult summarize(const ScoreAccumulator& acc, const BayesianNetwork& net, const Evidence& ev) {
  SamplerResult out;
  out.samples = acc.count();
  if (acc.count() >= 2) {
    out.pr_evidence = estimate_pr_evidence(acc);
  } else {
    out.pr_evidence.value = acc.count() == 0 ? 0.0 : acc.score_sum() / static_cast<double>(acc.count());
    out.pr_evidence.variance = std::numeric_limits<double>::quiet_NaN();
  }
  if (acc.score_sum() > 0.0) out.marginals = marginals_from_scores(acc, net, ev);
  return out;
}

SamplerResult logic_sampling(const BayesianNetwork& net, const Evidence& ev, std::size_t samples,
                             std::uint64_t seed, const Execution& exec) {
  if (samples < 1) throw std::invalid_argument("logic sampling needs at least one sample");
  ev.check(net);
  const IcptStore prior = IcptStore::from_cpts(net);
  SamplingJob job{net, prior, ev, samples, seed, 0, SamplingMode::rejection, false};
  return summarize(run_sampling(job, exec), net, ev);
}

SamplerResult likelihood_weighting(const BayesianNetwork& net, const Evidence& ev,
                                   std::size_t samples, std::uint64_t seed, const Execution& exec) {
  if (samples < 1) throw std::invalid_argument("likelihood weighting needs at least one sample");
  ev.check(net);
  const IcptStore prior = IcptStore::from_cpts(net);
  SamplingJob job{net, prior, ev, samples, seed, 0, SamplingMode::importance, false};
  return summarize(run_sampling(job, exec), net, ev);
}

double sis_update_entry(double prior, double current, std::size_t k) {
  const double kd = static_cast<double>(k);
  return (prior + kd * current) / (1.0 + kd);
}

void sis_update(IcptStore& icpt, const BayesianNetwork& net, const Evidence& ev,
                const ScoreAccumulator& cumulative, std::size_t k) {
  if (!cumulative.tracks_families()) throw std::invalid_argument("SIS update needs family scores");
  for (NodeId v = 0; v < net.size(); ++v) {
    if (ev.contains(v)) continue;
    const Cpt& prior = net.cpt(v);
    Cpt& table = icpt.table(v);
    auto scores = cumulative.family_scores(v);
    const std::size_t outs = prior.outcomes();
    for (std::size_t r = 0; r < prior.rows(); ++r) {
      double mass = 0.0;
      for (Outcome x = 0; x < outs; ++x) mass += scores[r * outs + x];
      if (!(mass > 0.0)) {
        for (Outcome x = 0; x < outs; ++x) table.at(r, x) = prior.at(r, x);
        continue;
      }
      for (Outcome x = 0; x < outs; ++x)
        table.at(r, x) = sis_update_entry(prior.at(r, x), scores[r * outs + x] / mass, k);
    }
  }
}

SamplerResult self_importance_sampling(const BayesianNetwork& net, const Evidence& ev,
                                       std::size_t samples, const SisOptions& opts,
                                       std::uint64_t seed, const Execution& exec) {
  if (samples < 1) throw std::invalid_argument("SIS needs at least one sample");
  if (opts.interval < 1) throw std::invalid_argument("SIS update interval must be positive");
  ev.check(net);
  // Without evidence the prior is already the optimal importance function.
  if (ev.empty()) return likelihood_weighting(net, ev, samples, seed, exec);

  IcptStore icpt = IcptStore::from_cpts(net);
  ScoreAccumulator cumulative(net, true);
  std::size_t done = 0;
  for (std::size_t stage = 0; done < samples; ++stage) {
    if (stage > 0) sis_update(icpt, net, ev, cumulative, stage);
    const std::size_t batch = std::min(opts.interval, samples - done);
    SamplingJob job{net, icpt, ev, batch, seed, stage, SamplingMode::importance, true};
    cumulative.merge(run_sampling(job, exec));
    done += batch;
  }
  return summarize(cumulative, net, ev);
}

}  // namespace aisbn
