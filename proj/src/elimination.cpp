// Variable elimination over CPT factors reduced by evidence. Barren nodes
// (neither evidence, kept, nor ancestors of either) are dropped up front since
// they sum to one.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>

#include "aisbn/exact.hpp"

namespace aisbn {

namespace {

struct Factor {
  std::vector<NodeId> vars;  // ascending
  std::vector<std::size_t> cards;
  std::vector<double> values;  // last var fastest
};

double table_size(const std::vector<std::size_t>& cards) {
  double s = 1.0;
  for (auto c : cards) s *= static_cast<double>(c);
  return s;
}

Factor cpt_factor(const BayesianNetwork& net, const Evidence& ev, NodeId v) {
  const Node& node = net.node(v);
  std::vector<NodeId> family = node.parents;
  family.push_back(v);

  Factor f;
  for (NodeId u : family)
    if (!ev.contains(u)) f.vars.push_back(u);
  std::sort(f.vars.begin(), f.vars.end());
  for (NodeId u : f.vars) f.cards.push_back(net.outcome_count(u));
  f.values.assign(static_cast<std::size_t>(table_size(f.cards)), 0.0);

  Assignment a(net.size(), 0);
  for (auto [n, val] : ev) a[n] = val;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    std::size_t rem = i;
    for (std::size_t j = f.vars.size(); j-- > 0;) {
      a[f.vars[j]] = rem % f.cards[j];
      rem /= f.cards[j];
    }
    f.values[i] = net.cpt(v).at(net.row_index(v, a), a[v]);
  }
  return f;
}

// Multiplies `fs` and, when `sum_var` is set, sums that variable out.
Factor combine(const std::vector<const Factor*>& fs, std::optional<NodeId> sum_var,
               const BayesianNetwork& net, double cap) {
  std::vector<NodeId> all;
  for (const Factor* f : fs) all.insert(all.end(), f->vars.begin(), f->vars.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  std::vector<std::size_t> cards;
  for (NodeId u : all) cards.push_back(net.outcome_count(u));
  if (table_size(cards) > cap)
    throw InfeasibleError("variable elimination factor exceeds the state cap");

  Factor out;
  for (std::size_t j = 0; j < all.size(); ++j)
    if (!sum_var || all[j] != *sum_var) {
      out.vars.push_back(all[j]);
      out.cards.push_back(cards[j]);
    }
  out.values.assign(static_cast<std::size_t>(table_size(out.cards)), 0.0);

  // strides[k][j]: stride of all[j] inside factor k (0 if absent); k == fs.size() is `out`.
  const std::size_t nf = fs.size();
  std::vector<std::vector<std::size_t>> strides(nf + 1, std::vector<std::size_t>(all.size(), 0));
  auto fill = [&](const std::vector<NodeId>& vars, const std::vector<std::size_t>& cs,
                  std::vector<std::size_t>& st) {
    std::size_t s = 1;
    for (std::size_t i = vars.size(); i-- > 0;) {
      auto pos = std::lower_bound(all.begin(), all.end(), vars[i]) - all.begin();
      st[pos] = s;
      s *= cs[i];
    }
  };
  for (std::size_t k = 0; k < nf; ++k) fill(fs[k]->vars, fs[k]->cards, strides[k]);
  fill(out.vars, out.cards, strides[nf]);

  std::vector<std::size_t> digit(all.size(), 0);
  std::vector<std::size_t> idx(nf + 1, 0);
  const auto total = static_cast<std::size_t>(table_size(cards));
  for (std::size_t i = 0; i < total; ++i) {
    double p = 1.0;
    for (std::size_t k = 0; k < nf && p != 0.0; ++k) p *= fs[k]->values[idx[k]];
    out.values[idx[nf]] += p;
    for (std::size_t j = all.size(); j-- > 0;) {
      if (++digit[j] < cards[j]) {
        for (std::size_t k = 0; k <= nf; ++k) idx[k] += strides[k][j];
        break;
      }
      digit[j] = 0;
      for (std::size_t k = 0; k <= nf; ++k) idx[k] -= (cards[j] - 1) * strides[k][j];
    }
  }
  return out;
}

}  // namespace

std::vector<double> eliminate_to(const BayesianNetwork& net, const Evidence& ev,
                                 const std::vector<NodeId>& keep, double max_factor_size) {
  ev.check(net);
  const std::size_t n = net.size();
  for (NodeId k : keep)
    if (k >= n || ev.contains(k)) throw ModelError("query node is unknown or observed");

  // Relevant nodes: evidence, kept nodes and all their ancestors.
  std::vector<bool> relevant(n, false);
  std::vector<NodeId> stack(keep.begin(), keep.end());
  for (auto [node, value] : ev) {
    (void)value;
    stack.push_back(node);
  }
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    if (relevant[v]) continue;
    relevant[v] = true;
    for (NodeId p : net.node(v).parents) stack.push_back(p);
  }

  std::vector<Factor> factors;
  for (NodeId v = 0; v < n; ++v)
    if (relevant[v]) factors.push_back(cpt_factor(net, ev, v));

  std::set<NodeId> keep_set(keep.begin(), keep.end());
  std::set<NodeId> pending;
  for (NodeId v = 0; v < n; ++v)
    if (relevant[v] && !ev.contains(v) && !keep_set.count(v)) pending.insert(v);

  while (!pending.empty()) {
    // Greedy min-fill, ties broken by the size of the created factor.
    NodeId best = *pending.begin();
    double best_fill = INFINITY, best_size = INFINITY;
    for (NodeId v : pending) {
      std::set<NodeId> nbrs;
      for (const auto& f : factors)
        if (std::binary_search(f.vars.begin(), f.vars.end(), v))
          nbrs.insert(f.vars.begin(), f.vars.end());
      nbrs.erase(v);
      double size = 1.0;
      for (NodeId u : nbrs) size *= static_cast<double>(net.outcome_count(u));
      std::vector<NodeId> nv(nbrs.begin(), nbrs.end());
      double fill = 0.0;
      for (std::size_t i = 0; i < nv.size(); ++i)
        for (std::size_t j = i + 1; j < nv.size(); ++j) {
          bool linked = std::any_of(factors.begin(), factors.end(), [&](const Factor& f) {
            return std::binary_search(f.vars.begin(), f.vars.end(), nv[i]) &&
                   std::binary_search(f.vars.begin(), f.vars.end(), nv[j]);
          });
          if (!linked) fill += 1.0;
        }
      if (fill < best_fill || (fill == best_fill && size < best_size)) {
        best = v;
        best_fill = fill;
        best_size = size;
      }
    }

    std::vector<Factor> rest;
    std::vector<Factor> touching;
    for (auto& f : factors) {
      if (std::binary_search(f.vars.begin(), f.vars.end(), best))
        touching.push_back(std::move(f));
      else
        rest.push_back(std::move(f));
    }
    std::vector<const Factor*> ptrs;
    for (const auto& f : touching) ptrs.push_back(&f);
    rest.push_back(combine(ptrs, best, net, max_factor_size));
    factors = std::move(rest);
    pending.erase(best);
  }

  std::vector<const Factor*> ptrs;
  for (const auto& f : factors) ptrs.push_back(&f);
  Factor joint = ptrs.empty() ? Factor{{}, {}, {1.0}} : combine(ptrs, std::nullopt, net, max_factor_size);

  // joint.vars ⊆ keep (ascending); spread to the requested order.
  std::vector<std::size_t> cards;
  for (NodeId k : keep) cards.push_back(net.outcome_count(k));
  const auto total = static_cast<std::size_t>(table_size(cards));
  std::vector<double> out(total, 0.0);
  std::vector<std::size_t> digit(keep.size(), 0);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t src = 0;
    for (std::size_t j = 0; j < joint.vars.size(); ++j) {
      auto pos = std::find(keep.begin(), keep.end(), joint.vars[j]) - keep.begin();
      src = src * joint.cards[j] + digit[pos];
    }
    out[i] = joint.values[src];
    for (std::size_t j = keep.size(); j-- > 0;) {
      if (++digit[j] < cards[j]) break;
      digit[j] = 0;
    }
  }
  return out;
}

}  // namespace aisbn
