#include "aisbn/network_io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace aisbn {

namespace {

std::vector<std::string> tokenize(std::string_view line, std::size_t line_no) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == '#') break;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '"') {
      auto close = line.find('"', i + 1);
      if (close == std::string_view::npos) throw ParseError(line_no, "unterminated quoted string");
      out.emplace_back(line.substr(i + 1, close - i - 1));
      i = close + 1;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' &&
           line[j] != '#')
      ++j;
    out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_probability(const std::string& tok, std::size_t line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(line_no, "not a number: '" + tok + "'");
  return value;
}

struct PendingNode {
  Node node;
  std::vector<std::string> parent_keys;
  std::vector<double> values;
  std::size_t line = 0;
  bool has_outcomes = false;
};

}  // namespace

NetworkDraft parse_network_draft(std::istream& in) {
  NetworkDraft draft;
  std::vector<PendingNode> pending;
  std::optional<PendingNode> current;
  bool have_name = false;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tok = tokenize(line, line_no);
    if (tok.empty()) continue;
    const std::string& kw = tok[0];

    if (kw == "network") {
      if (current) throw ParseError(line_no, "'network' inside a node block");
      if (have_name) throw ParseError(line_no, "duplicate 'network' line");
      if (tok.size() != 2) throw ParseError(line_no, "expected: network <name>");
      draft.name = tok[1];
      have_name = true;
    } else if (kw == "node") {
      if (current) throw ParseError(line_no, "missing 'end' before new node");
      if (tok.size() < 2 || tok.size() > 3) throw ParseError(line_no, "expected: node <id> [\"label\"]");
      current.emplace();
      current->node.key = tok[1];
      if (tok.size() == 3) current->node.label = tok[2];
      current->line = line_no;
    } else if (kw == "outcomes") {
      if (!current) throw ParseError(line_no, "'outcomes' outside a node block");
      if (current->has_outcomes) throw ParseError(line_no, "duplicate 'outcomes' line");
      current->node.outcomes.assign(tok.begin() + 1, tok.end());
      current->has_outcomes = true;
    } else if (kw == "parents") {
      if (!current) throw ParseError(line_no, "'parents' outside a node block");
      current->parent_keys.insert(current->parent_keys.end(), tok.begin() + 1, tok.end());
    } else if (kw == "row") {
      if (!current) throw ParseError(line_no, "'row' outside a node block");
      if (!current->has_outcomes) throw ParseError(line_no, "'row' before 'outcomes'");
      if (tok.size() - 1 != current->node.outcomes.size())
        throw ParseError(line_no, "row has " + std::to_string(tok.size() - 1) + " entries, node has " +
                                      std::to_string(current->node.outcomes.size()) + " outcomes");
      for (std::size_t i = 1; i < tok.size(); ++i)
        current->values.push_back(parse_probability(tok[i], line_no));
    } else if (kw == "end") {
      if (!current) throw ParseError(line_no, "'end' without a node block");
      if (!current->has_outcomes) throw ParseError(line_no, "node '" + current->node.key + "' has no 'outcomes' line");
      pending.push_back(std::move(*current));
      current.reset();
    } else {
      throw ParseError(line_no, "unknown keyword '" + kw + "'");
    }
  }
  if (current) throw ParseError(line_no, "missing 'end' for node '" + current->node.key + "'");
  if (!have_name) throw ParseError(line_no, "missing 'network <name>' line");

  std::unordered_map<std::string, NodeId> index;
  for (NodeId v = 0; v < pending.size(); ++v) index.emplace(pending[v].node.key, v);
  for (auto& p : pending) {
    for (const auto& key : p.parent_keys) {
      auto it = index.find(key);
      if (it == index.end()) throw ParseError(p.line, "unknown parent '" + key + "'");
      p.node.parents.push_back(it->second);
    }
    if (p.node.outcomes.empty()) throw ParseError(p.line, "node '" + p.node.key + "' has no outcomes");
    draft.cpts.emplace_back(p.node.outcomes.size(), std::move(p.values));
    draft.nodes.push_back(std::move(p.node));
  }
  return draft;
}

NetworkDraft read_network_draft(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open network file " + path.string());
  return parse_network_draft(in);
}

BayesianNetwork parse_network(std::istream& in) { return BayesianNetwork(parse_network_draft(in)); }

BayesianNetwork load_network(const std::filesystem::path& path) {
  return BayesianNetwork(read_network_draft(path));
}

void write_network(std::ostream& out, const BayesianNetwork& net) {
  auto flags = out.flags();
  auto prec = out.precision();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "network " << net.name() << "\n";
  for (NodeId v = 0; v < net.size(); ++v) {
    const Node& node = net.node(v);
    out << "\nnode " << node.key;
    if (!node.label.empty()) out << " \"" << node.label << '"';
    out << "\n  outcomes";
    for (const auto& o : node.outcomes) out << ' ' << o;
    out << "\n  parents";
    for (NodeId p : node.parents) out << ' ' << net.node(p).key;
    out << '\n';
    const Cpt& cpt = net.cpt(v);
    std::vector<Outcome> config(node.parents.size(), 0);
    for (std::size_t r = 0; r < cpt.rows(); ++r) {
      out << "  row";
      for (double p : cpt.row(r)) out << ' ' << p;
      if (!node.parents.empty()) {
        out << "  #";
        for (std::size_t j = 0; j < config.size(); ++j)
          out << ' ' << net.node(node.parents[j]).key << '=' << net.node(node.parents[j]).outcomes[config[j]];
        // Advance the parent odometer, last parent fastest.
        for (std::size_t j = config.size(); j-- > 0;) {
          if (++config[j] < net.outcome_count(node.parents[j])) break;
          config[j] = 0;
        }
      }
      out << '\n';
    }
    out << "end\n";
  }
  out.flags(flags);
  out.precision(prec);
}

void save_network(const std::filesystem::path& path, const BayesianNetwork& net) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write network file " + path.string());
  write_network(out, net);
}

Evidence parse_evidence(const BayesianNetwork& net, std::string_view text) {
  std::vector<std::string> pairs;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\n') {
      if (!cur.empty()) pairs.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) pairs.push_back(std::move(cur));
  return parse_evidence(net, pairs);
}

Evidence parse_evidence(const BayesianNetwork& net, const std::vector<std::string>& pairs) {
  Evidence ev;
  for (const auto& pair : pairs) {
    auto eq = pair.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size())
      throw ModelError("evidence must be NodeId=OutcomeLabel, got '" + pair + "'");
    std::string key = pair.substr(0, eq);
    std::string label = pair.substr(eq + 1);
    NodeId id = net.id_of(key);
    auto outcome = net.find_outcome(id, label);
    if (!outcome) throw ModelError("node '" + key + "' has no outcome '" + label + "'");
    if (auto prior = ev.find(id); prior && *prior != *outcome)
      throw ModelError("conflicting evidence for node '" + key + "'");
    ev.set(id, *outcome);
  }
  return ev;
}

std::string format_evidence(const BayesianNetwork& net, const Evidence& ev) {
  std::ostringstream os;
  bool first = true;
  for (auto [node, value] : ev) {
    if (!first) os << ',';
    os << net.node(node).key << '=' << net.node(node).outcomes[value];
    first = false;
  }
  return os.str();
}

}  // namespace aisbn
