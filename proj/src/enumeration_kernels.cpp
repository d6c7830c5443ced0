#include <algorithm>
#include <cmath>

#include <omp.h>

#include "aisbn/exact.hpp"

namespace aisbn {

namespace {

constexpr std::size_t kBlockSize = 4096;

EnumerationTotals empty_totals(const BayesianNetwork& net) {
  EnumerationTotals t;
  t.node_offset.resize(net.size() + 1, 0);
  t.family_offset.resize(net.size() + 1, 0);
  for (NodeId v = 0; v < net.size(); ++v) {
    t.node_offset[v + 1] = t.node_offset[v] + net.outcome_count(v);
    t.family_offset[v + 1] = t.family_offset[v] + net.cpt(v).values().size();
  }
  t.node_mass.assign(t.node_offset.back(), 0.0);
  t.family_mass.assign(t.family_offset.back(), 0.0);
  return t;
}

std::vector<NodeId> free_nodes(const BayesianNetwork& net, const Evidence& ev) {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < net.size(); ++v)
    if (!ev.contains(v)) out.push_back(v);
  return out;
}

void visit(const BayesianNetwork& net, const Assignment& a, EnumerationTotals& t,
           std::vector<std::size_t>& rows) {
  double p = 1.0;
  for (NodeId v = 0; v < net.size(); ++v) {
    rows[v] = net.row_index(v, a);
    p *= net.cpt(v).at(rows[v], a[v]);
    if (p == 0.0) return;
  }
  t.pr_evidence += p;
  for (NodeId v = 0; v < net.size(); ++v) {
    t.node_mass[t.node_offset[v] + a[v]] += p;
    t.family_mass[t.family_offset[v] + rows[v] * net.outcome_count(v) + a[v]] += p;
  }
}

// Advances the odometer over `free` (last entry fastest). Returns false on wrap.
bool advance(const BayesianNetwork& net, const std::vector<NodeId>& free, Assignment& a) {
  for (std::size_t j = free.size(); j-- > 0;) {
    NodeId v = free[j];
    if (++a[v] < net.outcome_count(v)) return true;
    a[v] = 0;
  }
  return false;
}

Assignment start_assignment(const BayesianNetwork& net, const Evidence& ev) {
  Assignment a(net.size(), 0);
  for (auto [node, value] : ev) a[node] = value;
  return a;
}

}  // namespace

void EnumerationTotals::merge(const EnumerationTotals& other) {
  pr_evidence += other.pr_evidence;
  for (std::size_t i = 0; i < node_mass.size(); ++i) node_mass[i] += other.node_mass[i];
  for (std::size_t i = 0; i < family_mass.size(); ++i) family_mass[i] += other.family_mass[i];
}

EnumerationTotals enumerate_serial(const BayesianNetwork& net, const Evidence& ev) {
  ev.check(net);
  EnumerationTotals totals = empty_totals(net);
  const auto free = free_nodes(net, ev);
  Assignment a = start_assignment(net, ev);
  std::vector<std::size_t> rows(net.size());
  do {
    visit(net, a, totals, rows);
  } while (advance(net, free, a));
  return totals;
}

EnumerationTotals enumerate_parallel(const BayesianNetwork& net, const Evidence& ev,
                                     const Execution& exec) {
  ev.check(net);
  const auto free = free_nodes(net, ev);
  const double count = completion_count(net, ev);
  const auto total = static_cast<std::size_t>(count);
  const std::size_t blocks = (total + kBlockSize - 1) / kBlockSize;
  std::vector<EnumerationTotals> partial(blocks);

  const int threads = exec.threads > 0 ? exec.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t b = 0; b < blocks; ++b) {
    EnumerationTotals t = empty_totals(net);
    Assignment a = start_assignment(net, ev);
    // Decode the block's first completion index into the odometer.
    std::size_t index = b * kBlockSize;
    for (std::size_t j = free.size(); j-- > 0;) {
      NodeId v = free[j];
      a[v] = index % net.outcome_count(v);
      index /= net.outcome_count(v);
    }
    std::vector<std::size_t> rows(net.size());
    const std::size_t end = std::min(total, (b + 1) * kBlockSize);
    for (std::size_t i = b * kBlockSize; i < end; ++i) {
      visit(net, a, t, rows);
      advance(net, free, a);
    }
    partial[b] = std::move(t);
  }

  EnumerationTotals totals = empty_totals(net);
  for (const auto& t : partial) totals.merge(t);
  return totals;
}

}  // namespace aisbn
