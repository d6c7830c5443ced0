#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "aisbn/model.hpp"

namespace aisbn {

// Line-oriented network text format; see docs/network-format.md.
//
//   network <name>
//   node <id> ["display label"]
//     outcomes <label> <label> ...
//     parents <id> ...
//     row <p> <p> ...        (one per parent configuration)
//   end
//
// Throws ParseError (with line number) on syntax errors. The draft is not
// validated.
NetworkDraft parse_network_draft(std::istream& in);
NetworkDraft read_network_draft(const std::filesystem::path& path);

BayesianNetwork parse_network(std::istream& in);
BayesianNetwork load_network(const std::filesystem::path& path);

void write_network(std::ostream& out, const BayesianNetwork& net);
void save_network(const std::filesystem::path& path, const BayesianNetwork& net);

// `NodeId=OutcomeLabel` pairs, separated by commas and/or whitespace.
Evidence parse_evidence(const BayesianNetwork& net, std::string_view text);
Evidence parse_evidence(const BayesianNetwork& net, const std::vector<std::string>& pairs);
std::string format_evidence(const BayesianNetwork& net, const Evidence& ev);

}  // namespace aisbn
