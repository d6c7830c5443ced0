#include "aisbn/generator.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "aisbn/ais.hpp"
#include "aisbn/engine.hpp"

namespace aisbn {

namespace {

std::vector<double> dirichlet_row(std::size_t k, double alpha, std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> row(k);
  double sum = 0.0;
  for (auto& p : row) {
    p = gamma(rng);
    sum += p;
  }
  if (!(sum > 0.0)) {
    // Every draw underflowed: put all mass on one random outcome.
    std::fill(row.begin(), row.end(), 0.0);
    row[std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)] = 1.0;
    return row;
  }
  for (auto& p : row) p /= sum;
  return row;
}

}  // namespace

BayesianNetwork generate_network(const GeneratorParams& params) {
  if (params.node_count < 1) throw std::invalid_argument("generator needs at least one node");
  if (params.max_outcomes < 2) throw std::invalid_argument("max_outcomes must be at least 2");
  if (!(params.concentration > 0.0)) throw std::invalid_argument("concentration must be positive");
  if (params.min_probability < 0.0 ||
      params.min_probability * static_cast<double>(params.max_outcomes) >= 1.0)
    throw std::invalid_argument("min_probability must lie in [0, 1 / max_outcomes)");

  std::mt19937_64 rng(params.seed);
  NetworkDraft draft;
  draft.name = "synthetic_" + std::to_string(params.seed);

  std::uniform_int_distribution<std::size_t> outcome_dist(2, params.max_outcomes);
  for (std::size_t i = 0; i < params.node_count; ++i) {
    Node node;
    node.key = "X" + std::to_string(i);
    const std::size_t k = outcome_dist(rng);
    for (std::size_t x = 0; x < k; ++x) node.outcomes.push_back("s" + std::to_string(x));

    const std::size_t lo = params.parent_window == 0 || i < params.parent_window ? 0 : i - params.parent_window;
    std::vector<NodeId> candidates(i - lo);
    std::iota(candidates.begin(), candidates.end(), lo);
    const std::size_t max_k = std::min(params.max_parents, candidates.size());
    const std::size_t n_parents = std::uniform_int_distribution<std::size_t>(0, max_k)(rng);
    std::sample(candidates.begin(), candidates.end(), std::back_inserter(node.parents), n_parents, rng);
    draft.nodes.push_back(std::move(node));
  }

  for (const auto& node : draft.nodes) {
    std::size_t rows = 1;
    for (NodeId p : node.parents) rows *= draft.nodes[p].outcomes.size();
    const std::size_t k = node.outcomes.size();
    std::vector<double> values;
    values.reserve(rows * k);
    for (std::size_t r = 0; r < rows; ++r) {
      auto row = dirichlet_row(k, params.concentration, rng);
      if (params.min_probability > 0.0) raise_small_probabilities(row, params.min_probability);
      values.insert(values.end(), row.begin(), row.end());
    }
    draft.cpts.emplace_back(k, std::move(values));
  }
  return BayesianNetwork(std::move(draft));
}

Evidence select_leaf_evidence(const BayesianNetwork& net, std::size_t count, std::uint64_t seed,
                              EvidenceStates states, const ExactOptions& exact) {
  std::vector<NodeId> leaves;
  for (NodeId v = 0; v < net.size(); ++v)
    if (net.children(v).empty()) leaves.push_back(v);
  if (leaves.size() < count)
    throw InfeasibleError("network has " + std::to_string(leaves.size()) + " leaves, " +
                          std::to_string(count) + " requested");

  std::mt19937_64 rng(seed);
  const Evidence none;
  const IcptStore prior = IcptStore::from_cpts(net);
  constexpr int kAttempts = 100;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    std::vector<NodeId> chosen;
    std::sample(leaves.begin(), leaves.end(), std::back_inserter(chosen), count, rng);
    std::shuffle(chosen.begin(), chosen.end(), rng);

    Evidence ev;
    if (states == EvidenceStates::sampled) {
      Assignment a = forward_sample(net, prior, none, [&rng] {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
      });
      for (NodeId v : chosen) ev.set(v, a[v]);
    } else {
      for (NodeId v : chosen) {
        auto marginal = exact_node_marginal(net, none, v, exact);
        std::vector<Outcome> possible;
        for (Outcome x = 0; x < marginal.size(); ++x)
          if (marginal[x] > 0.0) possible.push_back(x);
        ev.set(v, possible[std::uniform_int_distribution<std::size_t>(0, possible.size() - 1)(rng)]);
      }
    }
    if (exact_pr_evidence(net, ev, exact) > 0.0) return ev;
  }
  throw InfeasibleError("no nonzero-probability leaf evidence found");
}

}  // namespace aisbn
