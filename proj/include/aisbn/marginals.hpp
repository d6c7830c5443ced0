#pragma once

#include <span>
#include <vector>

#include "aisbn/model.hpp"

namespace aisbn {

/// Posterior distribution per non-evidence node. Evidence nodes have no entry.
class MarginalTable {
 public:
  MarginalTable() = default;
  explicit MarginalTable(std::size_t node_count) : dists_(node_count) {}

  std::size_t node_count() const noexcept { return dists_.size(); }
  bool has(NodeId node) const { return node < dists_.size() && !dists_[node].empty(); }
  std::span<const double> at(NodeId node) const { return dists_.at(node); }
  void set(NodeId node, std::vector<double> dist) { dists_.at(node) = std::move(dist); }

  bool operator==(const MarginalTable&) const = default;

 private:
  std::vector<std::vector<double>> dists_;
};

// Uniform distribution for every non-evidence node.
MarginalTable uniform_marginals(const BayesianNetwork& net, const Evidence& ev);

}  // namespace aisbn
