#include "aisbn/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace aisbn {

Cpt::Cpt(std::size_t outcomes, std::vector<double> values)
    : outcomes_(outcomes), values_(std::move(values)) {
  if (outcomes_ == 0) throw ModelError("table must have at least one outcome column");
  if (values_.size() % outcomes_ != 0)
    throw ModelError("table size is not a multiple of the outcome count");
}

bool ValidationReport::has(IssueKind kind) const {
  return std::any_of(issues.begin(), issues.end(),
                     [kind](const ValidationIssue& i) { return i.kind == kind; });
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& issue : issues) os << issue.message << '\n';
  return os.str();
}

ValidationError::ValidationError(ValidationReport report)
    : ModelError("invalid network:\n" + report.summary()), report_(std::move(report)) {}

namespace {

std::string node_name(const NetworkDraft& d, NodeId id) {
  return id < d.nodes.size() && !d.nodes[id].key.empty() ? d.nodes[id].key
                                                          : "#" + std::to_string(id);
}

// Kahn's algorithm with a min-heap; returns fewer than n ids on a cycle.
std::vector<NodeId> kahn_order(std::size_t n, const std::vector<std::vector<NodeId>>& parents) {
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<NodeId>> children(n);
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId p : parents[v]) {
      if (p >= n || p == v) continue;
      ++indegree[v];
      children[p].push_back(v);
    }
  }
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push(v);
  std::vector<NodeId> order;
  order.reserve(n);
  while (!ready.empty()) {
    NodeId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (NodeId c : children[v])
      if (--indegree[c] == 0) ready.push(c);
  }
  return order;
}

std::vector<std::vector<NodeId>> parent_lists(const NetworkDraft& d) {
  std::vector<std::vector<NodeId>> ps;
  ps.reserve(d.nodes.size());
  for (const auto& n : d.nodes) ps.push_back(n.parents);
  return ps;
}

}  // namespace

ValidationReport validate_network(const NetworkDraft& d) {
  ValidationReport report;
  auto add = [&](IssueKind k, std::optional<NodeId> node, std::optional<std::size_t> row,
                 std::string msg) { report.issues.push_back({k, node, row, std::move(msg)}); };
  const std::size_t n = d.nodes.size();

  std::set<std::string> keys;
  bool structural_ok = true;
  for (NodeId v = 0; v < n; ++v) {
    const Node& node = d.nodes[v];
    if (!keys.insert(node.key).second)
      add(IssueKind::duplicate_key, v, {}, "duplicate node id '" + node.key + "'");
    if (node.outcomes.empty()) {
      add(IssueKind::empty_outcomes, v, {}, "node " + node_name(d, v) + " has no outcomes");
      structural_ok = false;
    }
    std::set<std::string> labels;
    for (const auto& o : node.outcomes)
      if (!labels.insert(o).second)
        add(IssueKind::duplicate_outcome, v, {},
            "node " + node_name(d, v) + " repeats outcome '" + o + "'");
    std::set<NodeId> seen;
    for (NodeId p : node.parents) {
      if (p >= n) {
        add(IssueKind::unknown_parent, v, {},
            "node " + node_name(d, v) + " references unknown parent #" + std::to_string(p));
        structural_ok = false;
      } else if (p == v) {
        add(IssueKind::self_parent, v, {}, "node " + node_name(d, v) + " lists itself as parent");
        structural_ok = false;
      }
      if (!seen.insert(p).second) {
        add(IssueKind::duplicate_parent, v, {},
            "node " + node_name(d, v) + " lists parent " + node_name(d, p) + " twice");
        structural_ok = false;
      }
    }
  }

  if (kahn_order(n, parent_lists(d)).size() != n)
    add(IssueKind::cycle, {}, {}, "network graph contains a directed cycle");

  if (d.cpts.size() != n) {
    add(IssueKind::dimension_mismatch, {}, {},
        "expected " + std::to_string(n) + " tables, found " + std::to_string(d.cpts.size()));
    return report;
  }
  if (!structural_ok) return report;

  for (NodeId v = 0; v < n; ++v) {
    const Node& node = d.nodes[v];
    const Cpt& cpt = d.cpts[v];
    std::size_t expected_rows = 1;
    for (NodeId p : node.parents) expected_rows *= d.nodes[p].outcomes.size();
    if (cpt.outcomes() != node.outcomes.size() || cpt.rows() != expected_rows) {
      add(IssueKind::dimension_mismatch, v, {},
          "node " + node_name(d, v) + ": table is " + std::to_string(cpt.rows()) + "x" +
              std::to_string(cpt.outcomes()) + ", expected " + std::to_string(expected_rows) +
              "x" + std::to_string(node.outcomes.size()));
      continue;
    }
    for (std::size_t r = 0; r < cpt.rows(); ++r) {
      auto row = cpt.row(r);
      bool range_ok = true;
      for (double p : row) {
        if (!(p >= 0.0 && p <= 1.0)) {
          range_ok = false;
          break;
        }
      }
      if (!range_ok) {
        add(IssueKind::entry_range, v, r,
            "node " + node_name(d, v) + " row " + std::to_string(r) + " has an entry outside [0, 1]");
        continue;
      }
      double sum = std::accumulate(row.begin(), row.end(), 0.0);
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        std::ostringstream msg;
        msg << "node " << node_name(d, v) << " row " << r << " sums to " << sum;
        add(IssueKind::row_sum, v, r, msg.str());
      }
    }
  }
  return report;
}

std::vector<NodeId> topological_order(const NetworkDraft& draft) {
  const std::size_t n = draft.nodes.size();
  for (const auto& node : draft.nodes)
    for (NodeId p : node.parents)
      if (p >= n) throw ModelError("unresolved parent reference in node " + node.key);
  auto order = kahn_order(n, parent_lists(draft));
  if (order.size() != n) throw ModelError("network graph contains a directed cycle");
  return order;
}

BayesianNetwork::BayesianNetwork(NetworkDraft draft) {
  auto report = validate_network(draft);
  if (!report.ok()) throw ValidationError(std::move(report));

  name_ = std::move(draft.name);
  nodes_ = std::move(draft.nodes);
  cpts_ = std::move(draft.cpts);
  const std::size_t n = nodes_.size();

  for (auto& cpt : cpts_) {
    for (std::size_t r = 0; r < cpt.rows(); ++r) {
      auto row = cpt.row(r);
      double sum = std::accumulate(row.begin(), row.end(), 0.0);
      // Rows already normalized up to summation rounding are kept verbatim so
      // exact entries (e.g. a probability floor) survive construction.
      if (std::abs(sum - 1.0) > 8.0 * std::numeric_limits<double>::epsilon())
        for (double& p : row) p /= sum;
    }
  }

  order_ = kahn_order(n, [&] {
    std::vector<std::vector<NodeId>> ps;
    for (const auto& node : nodes_) ps.push_back(node.parents);
    return ps;
  }());

  children_.assign(n, {});
  strides_.assign(n, {});
  for (NodeId v = 0; v < n; ++v) {
    const auto& ps = nodes_[v].parents;
    for (NodeId p : ps) children_[p].push_back(v);
    auto& st = strides_[v];
    st.assign(ps.size(), 1);
    for (std::size_t j = ps.size(); j-- > 1;) st[j - 1] = st[j] * nodes_[ps[j]].outcomes.size();
    index_.emplace(nodes_[v].key, v);
    max_outcomes_ = std::max(max_outcomes_, nodes_[v].outcomes.size());
  }
}

std::optional<NodeId> BayesianNetwork::find(std::string_view key) const {
  auto it = index_.find(std::string(key));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeId BayesianNetwork::id_of(std::string_view key) const {
  if (auto id = find(key)) return *id;
  throw ModelError("unknown node '" + std::string(key) + "'");
}

std::optional<Outcome> BayesianNetwork::find_outcome(NodeId id, std::string_view label) const {
  const auto& outs = nodes_[id].outcomes;
  auto it = std::find(outs.begin(), outs.end(), label);
  if (it == outs.end()) return std::nullopt;
  return static_cast<Outcome>(it - outs.begin());
}

double BayesianNetwork::log10_state_count() const {
  double total = 0.0;
  for (const auto& node : nodes_) total += std::log10(static_cast<double>(node.outcomes.size()));
  return total;
}

NetworkDraft BayesianNetwork::to_draft() const { return {name_, nodes_, cpts_}; }

std::vector<NodeId> topological_order(const BayesianNetwork& net) { return net.topological_order(); }

std::optional<Outcome> Evidence::find(NodeId node) const {
  auto it = bindings_.find(node);
  if (it == bindings_.end()) return std::nullopt;
  return it->second;
}

Evidence Evidence::extended(NodeId node, Outcome value) const {
  Evidence out = *this;
  out.set(node, value);
  return out;
}

Evidence Evidence::extended(const Evidence& more) const {
  Evidence out = *this;
  for (auto [node, value] : more) out.set(node, value);
  return out;
}

void Evidence::check(const BayesianNetwork& net) const {
  for (auto [node, value] : bindings_) {
    if (node >= net.size())
      throw ModelError("evidence references unknown node #" + std::to_string(node));
    if (value >= net.outcome_count(node))
      throw ModelError("evidence outcome index " + std::to_string(value) + " out of range for " +
                       net.node(node).key);
  }
}

bool Evidence::consistent_with(const Assignment& a) const {
  for (auto [node, value] : bindings_)
    if (a[node] != value) return false;
  return true;
}

std::vector<bool> evidence_ancestor_mask(const BayesianNetwork& net, const Evidence& ev) {
  std::vector<bool> reached(net.size(), false);
  std::vector<NodeId> stack;
  for (auto [node, value] : ev) {
    (void)value;
    for (NodeId p : net.node(node).parents) stack.push_back(p);
  }
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    if (reached[v]) continue;
    reached[v] = true;
    for (NodeId p : net.node(v).parents) stack.push_back(p);
  }
  for (auto [node, value] : ev) {
    (void)value;
    reached[node] = false;
  }
  return reached;
}

std::vector<NodeId> evidence_ancestor_set(const BayesianNetwork& net, const Evidence& ev) {
  auto mask = evidence_ancestor_mask(net, ev);
  std::vector<NodeId> out;
  for (NodeId v = 0; v < mask.size(); ++v)
    if (mask[v]) out.push_back(v);
  return out;
}

double joint_probability(const BayesianNetwork& net, const Assignment& a) {
  double p = 1.0;
  for (NodeId v = 0; v < net.size(); ++v) {
    p *= net.cpt(v).at(net.row_index(v, a), a[v]);
    if (p == 0.0) return 0.0;
  }
  return p;
}

}  // namespace aisbn
