#include "doctest.h"

#include <set>
#include <sstream>

#include "aisbn/generator.hpp"
#include "aisbn/network_io.hpp"

using namespace aisbn;

namespace {

std::string text_of(const BayesianNetwork& net) {
  std::ostringstream os;
  write_network(os, net);
  return os.str();
}

}  // namespace

TEST_CASE("same seed, same network") {
  GeneratorParams p;
  p.seed = 7;
  CHECK(text_of(generate_network(p)) == text_of(generate_network(p)));
  GeneratorParams q = p;
  q.seed = 8;
  CHECK(text_of(generate_network(p)) != text_of(generate_network(q)));
}

TEST_CASE("structural constraints hold") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GeneratorParams p;
    p.node_count = 30;
    p.max_parents = 3;
    p.seed = seed;
    auto net = generate_network(p);
    CHECK(net.size() == 30);
    for (NodeId v = 0; v < net.size(); ++v) {
      CHECK(net.node(v).parents.size() <= 3);
      CHECK(net.outcome_count(v) >= 2);
      CHECK(net.outcome_count(v) <= p.max_outcomes);
      for (double x : net.cpt(v).values()) CHECK(x >= p.min_probability);
    }
  }
}

TEST_CASE("extreme but floored rows appear") {
  GeneratorParams p;
  p.node_count = 40;
  p.seed = 2;
  auto net = generate_network(p);
  std::size_t below_theta = 0;
  for (NodeId v = 0; v < net.size(); ++v)
    for (double x : net.cpt(v).values())
      if (x < 0.04) ++below_theta;
  CHECK(below_theta > 0);
}

TEST_CASE("zero minimum keeps raw draws") {
  GeneratorParams p;
  p.min_probability = 0.0;
  p.seed = 3;
  CHECK_NOTHROW(generate_network(p));
  p.min_probability = 0.5;
  CHECK_THROWS_AS(generate_network(p), std::invalid_argument);
  p.min_probability = 1e-4;
  p.node_count = 0;
  CHECK_THROWS_AS(generate_network(p), std::invalid_argument);
}

TEST_CASE("leaf evidence selection") {
  GeneratorParams p;
  p.node_count = 30;
  p.seed = 5;
  auto net = generate_network(p);
  const Evidence a = select_leaf_evidence(net, 5, 11);
  const Evidence b = select_leaf_evidence(net, 5, 11);
  CHECK(a == b);
  CHECK(a.size() == 5);
  for (auto [v, x] : a) {
    (void)x;
    CHECK(net.children(v).empty());
  }
  CHECK(exact_pr_evidence(net, a) > 0.0);
  const Evidence sampled = select_leaf_evidence(net, 5, 11, EvidenceStates::sampled);
  CHECK(sampled.size() == 5);
  CHECK_THROWS_AS(select_leaf_evidence(net, 1000, 1), InfeasibleError);
}
