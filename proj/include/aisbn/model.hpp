#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "aisbn/errors.hpp"

namespace aisbn {

// Dense node index: position of the node in declaration order.
using NodeId = std::size_t;
using Outcome = std::size_t;
// One outcome index per node, indexed by NodeId.
using Assignment = std::vector<Outcome>;

struct Node {
  std::string key;    // identifier used in files and on the command line
  std::string label;  // free-form display name, may be empty
  std::vector<std::string> outcomes;
  std::vector<NodeId> parents;

  std::size_t outcome_count() const noexcept { return outcomes.size(); }
};

/// Conditional table laid out row-major: one row per parent configuration,
/// configurations enumerated with the first parent most significant and the
/// last parent varying fastest; columns follow the declared outcome order.
/// Used both for CPTs and for importance tables (ICPTs).
class Cpt {
 public:
  Cpt() = default;
  Cpt(std::size_t outcomes, std::vector<double> values);

  std::size_t outcomes() const noexcept { return outcomes_; }
  std::size_t rows() const noexcept { return outcomes_ == 0 ? 0 : values_.size() / outcomes_; }

  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * outcomes_, outcomes_};
  }
  std::span<double> row(std::size_t r) { return {values_.data() + r * outcomes_, outcomes_}; }

  double at(std::size_t r, Outcome x) const { return values_[r * outcomes_ + x]; }
  double& at(std::size_t r, Outcome x) { return values_[r * outcomes_ + x]; }

  const std::vector<double>& values() const noexcept { return values_; }

  bool operator==(const Cpt&) const = default;

 private:
  std::size_t outcomes_ = 0;
  std::vector<double> values_;
};

/// Unvalidated network description, as produced by a parser or a generator.
struct NetworkDraft {
  std::string name;
  std::vector<Node> nodes;
  std::vector<Cpt> cpts;
};

enum class IssueKind {
  duplicate_key,
  empty_outcomes,
  duplicate_outcome,
  unknown_parent,
  self_parent,
  duplicate_parent,
  cycle,
  dimension_mismatch,
  entry_range,
  row_sum,
};

struct ValidationIssue {
  IssueKind kind;
  std::optional<NodeId> node;
  std::optional<std::size_t> row;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const noexcept { return issues.empty(); }
  bool has(IssueKind kind) const;
  std::string summary() const;
};

inline constexpr double kRowSumTolerance = 1e-9;

ValidationReport validate_network(const NetworkDraft& draft);

// Kahn's algorithm, ready nodes taken in ascending id order. Throws ModelError
// on a cycle or on unresolved parent references.
std::vector<NodeId> topological_order(const NetworkDraft& draft);

class ValidationError : public ModelError {
 public:
  explicit ValidationError(ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// Immutable, validated discrete Bayesian network. Rows are renormalized on
/// construction so every CPT row sums to 1.
class BayesianNetwork {
 public:
  explicit BayesianNetwork(NetworkDraft draft);

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_[id]; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Cpt& cpt(NodeId id) const { return cpts_[id]; }
  const std::vector<Cpt>& cpts() const noexcept { return cpts_; }
  std::size_t outcome_count(NodeId id) const { return nodes_[id].outcomes.size(); }
  std::size_t max_outcomes() const noexcept { return max_outcomes_; }

  const std::vector<NodeId>& topological_order() const noexcept { return order_; }
  const std::vector<NodeId>& children(NodeId id) const { return children_[id]; }

  // Row of the node's table selected by the parent values in `a`.
  std::size_t row_index(NodeId id, const Assignment& a) const {
    std::size_t r = 0;
    const auto& ps = nodes_[id].parents;
    const auto& st = strides_[id];
    for (std::size_t j = 0; j < ps.size(); ++j) r += a[ps[j]] * st[j];
    return r;
  }
  const std::vector<std::size_t>& parent_strides(NodeId id) const { return strides_[id]; }

  std::optional<NodeId> find(std::string_view key) const;
  NodeId id_of(std::string_view key) const;  // throws ModelError
  std::optional<Outcome> find_outcome(NodeId id, std::string_view label) const;

  // log10 of the number of complete assignments.
  double log10_state_count() const;

  NetworkDraft to_draft() const;

 private:
  std::string name_;
  std::vector<Node> nodes_;
  std::vector<Cpt> cpts_;
  std::vector<NodeId> order_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<std::vector<std::size_t>> strides_;
  std::unordered_map<std::string, NodeId> index_;
  std::size_t max_outcomes_ = 0;
};

std::vector<NodeId> topological_order(const BayesianNetwork& net);

/// Observed node/outcome bindings, ordered by node id.
class Evidence {
 public:
  Evidence() = default;

  void set(NodeId node, Outcome value) { bindings_[node] = value; }
  bool contains(NodeId node) const { return bindings_.count(node) != 0; }
  std::optional<Outcome> find(NodeId node) const;
  Outcome at(NodeId node) const { return bindings_.at(node); }

  std::size_t size() const noexcept { return bindings_.size(); }
  bool empty() const noexcept { return bindings_.empty(); }
  auto begin() const { return bindings_.begin(); }
  auto end() const { return bindings_.end(); }

  Evidence extended(NodeId node, Outcome value) const;
  Evidence extended(const Evidence& more) const;

  // Throws ModelError when a node or outcome index is out of range.
  void check(const BayesianNetwork& net) const;

  // True when `a` agrees with every binding.
  bool consistent_with(const Assignment& a) const;

  bool operator==(const Evidence&) const = default;

 private:
  std::map<NodeId, Outcome> bindings_;
};

/// Non-evidence nodes with a directed path to some evidence node, ascending.
std::vector<NodeId> evidence_ancestor_set(const BayesianNetwork& net, const Evidence& ev);
std::vector<bool> evidence_ancestor_mask(const BayesianNetwork& net, const Evidence& ev);

double joint_probability(const BayesianNetwork& net, const Assignment& a);

}  // namespace aisbn
