#include "aisbn/exact.hpp"

#include <numeric>

namespace aisbn {

MarginalTable uniform_marginals(const BayesianNetwork& net, const Evidence& ev) {
  MarginalTable out(net.size());
  for (NodeId v = 0; v < net.size(); ++v) {
    if (ev.contains(v)) continue;
    const auto k = net.outcome_count(v);
    out.set(v, std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }
  return out;
}

double completion_count(const BayesianNetwork& net, const Evidence& ev) {
  double count = 1.0;
  for (NodeId v = 0; v < net.size(); ++v)
    if (!ev.contains(v)) count *= static_cast<double>(net.outcome_count(v));
  return count;
}

namespace {

bool use_enumeration(const BayesianNetwork& net, const Evidence& ev, const ExactOptions& opts) {
  const double count = completion_count(net, ev);
  switch (opts.method) {
    case ExactMethod::enumeration:
      if (count > opts.state_cap)
        throw InfeasibleError("enumeration needs " + std::to_string(count) +
                              " completions, above the state cap");
      return true;
    case ExactMethod::elimination:
      return false;
    case ExactMethod::automatic:
      break;
  }
  return count <= opts.state_cap;
}

EnumerationTotals enumerate(const BayesianNetwork& net, const Evidence& ev, const ExactOptions& opts) {
  return opts.exec.parallel() ? enumerate_parallel(net, ev, opts.exec) : enumerate_serial(net, ev);
}

void require_positive(double pr_e) {
  if (!(pr_e > 0.0)) throw InfeasibleError("evidence has zero probability");
}

std::vector<double> normalized(std::vector<double> v) {
  double sum = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= sum;
  return v;
}

}  // namespace

double exact_pr_evidence(const BayesianNetwork& net, const Evidence& ev, const ExactOptions& opts) {
  ev.check(net);
  if (use_enumeration(net, ev, opts)) return enumerate(net, ev, opts).pr_evidence;
  return eliminate_to(net, ev, {}, opts.state_cap).front();
}

MarginalTable exact_posterior_marginals(const BayesianNetwork& net, const Evidence& ev,
                                        const ExactOptions& opts) {
  ev.check(net);
  MarginalTable out(net.size());
  if (use_enumeration(net, ev, opts)) {
    auto totals = enumerate(net, ev, opts);
    require_positive(totals.pr_evidence);
    for (NodeId v = 0; v < net.size(); ++v) {
      if (ev.contains(v)) continue;
      std::vector<double> dist(net.outcome_count(v));
      for (Outcome x = 0; x < dist.size(); ++x)
        dist[x] = totals.node_mass[totals.node_offset[v] + x] / totals.pr_evidence;
      out.set(v, std::move(dist));
    }
    return out;
  }
  require_positive(eliminate_to(net, ev, {}, opts.state_cap).front());
  for (NodeId v = 0; v < net.size(); ++v)
    if (!ev.contains(v)) out.set(v, normalized(eliminate_to(net, ev, {v}, opts.state_cap)));
  return out;
}

std::vector<double> exact_node_marginal(const BayesianNetwork& net, const Evidence& ev, NodeId node,
                                        const ExactOptions& opts) {
  ev.check(net);
  if (node >= net.size()) throw ModelError("unknown node #" + std::to_string(node));
  if (auto observed = ev.find(node)) {
    std::vector<double> dist(net.outcome_count(node), 0.0);
    dist[*observed] = 1.0;
    return dist;
  }
  std::vector<double> joint;
  if (use_enumeration(net, ev, opts)) {
    auto totals = enumerate(net, ev, opts);
    auto first = totals.node_mass.begin() + static_cast<std::ptrdiff_t>(totals.node_offset[node]);
    joint.assign(first, first + static_cast<std::ptrdiff_t>(net.outcome_count(node)));
  } else {
    joint = eliminate_to(net, ev, {node}, opts.state_cap);
  }
  require_positive(std::accumulate(joint.begin(), joint.end(), 0.0));
  return normalized(std::move(joint));
}

ConditionalTable exact_icpt(const BayesianNetwork& net, const Evidence& ev, NodeId node,
                            const ExactOptions& opts) {
  ev.check(net);
  if (node >= net.size()) throw ModelError("unknown node #" + std::to_string(node));
  if (ev.contains(node)) throw ModelError("exact_icpt requested for an evidence node");

  const Node& info = net.node(node);
  const std::size_t k = net.outcome_count(node);
  const std::size_t rows = net.cpt(node).rows();
  // Pr(x, pa, e) in CPT layout.
  std::vector<double> mass(rows * k, 0.0);

  if (use_enumeration(net, ev, opts)) {
    auto totals = enumerate(net, ev, opts);
    require_positive(totals.pr_evidence);
    auto first = totals.family_mass.begin() + static_cast<std::ptrdiff_t>(totals.family_offset[node]);
    std::copy(first, first + static_cast<std::ptrdiff_t>(rows * k), mass.begin());
  } else {
    require_positive(eliminate_to(net, ev, {}, opts.state_cap).front());
    std::vector<NodeId> keep;
    for (NodeId p : info.parents)
      if (!ev.contains(p)) keep.push_back(p);
    keep.push_back(node);
    auto joint = eliminate_to(net, ev, keep, opts.state_cap);
    const auto& strides = net.parent_strides(node);
    for (std::size_t r = 0; r < rows; ++r) {
      // Decode the parent configuration; skip rows contradicting evidence.
      std::size_t src = 0;
      bool consistent = true;
      for (std::size_t j = 0; j < info.parents.size(); ++j) {
        const NodeId p = info.parents[j];
        const Outcome value = (r / strides[j]) % net.outcome_count(p);
        if (auto observed = ev.find(p)) {
          if (*observed != value) consistent = false;
        } else {
          src = src * net.outcome_count(p) + value;
        }
      }
      if (!consistent) continue;
      for (Outcome x = 0; x < k; ++x) mass[r * k + x] = joint[src * k + x];
    }
  }

  ConditionalTable out{Cpt(k, std::vector<double>(rows * k, 0.0)), std::vector<bool>(rows, false)};
  for (std::size_t r = 0; r < rows; ++r) {
    double row_mass = 0.0;
    for (Outcome x = 0; x < k; ++x) row_mass += mass[r * k + x];
    if (!(row_mass > 0.0)) continue;
    out.reachable[r] = true;
    for (Outcome x = 0; x < k; ++x) out.table.at(r, x) = mass[r * k + x] / row_mass;
  }
  return out;
}

}  // namespace aisbn
