#include "doctest.h"

#include <cmath>
#include <vector>

#include "aisbn/ais.hpp"
#include "aisbn/bench.hpp"
#include "aisbn/exact.hpp"
#include "aisbn/generator.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace aisbn;

namespace {

AisConfig small_config() {
  AisConfig cfg;
  cfg.interval = 500;
  cfg.stages = 6;
  cfg.zero_weight_stages = 6;
  cfg.total_samples = 8000;
  return cfg;
}

}  // namespace

TEST_CASE("learning rate schedule") {
  AisConfig cfg;
  CHECK(learning_rate(0, cfg) == 0.4);
  CHECK(learning_rate(10, cfg) == 0.14);
  for (std::size_t k = 1; k <= 10; ++k) CHECK(learning_rate(k, cfg) < learning_rate(k - 1, cfg));
  CHECK(learning_rate(5, cfg) == doctest::Approx(0.4 * std::sqrt(0.35)).epsilon(1e-14));
  CHECK_THROWS_AS(learning_rate(11, cfg), std::invalid_argument);
}

TEST_CASE("raising small probabilities") {
  std::vector<double> row{0.01, 0.99};
  raise_small_probabilities(row, 0.04);
  CHECK(row[0] == 0.04);
  CHECK(row[1] == doctest::Approx(0.96).epsilon(1e-15));

  std::vector<double> three{0.001, 0.02, 0.979};
  raise_small_probabilities(three, 0.04);
  CHECK(three[0] == 0.04);
  CHECK(three[1] == 0.04);
  CHECK(three[2] == doctest::Approx(0.92).epsilon(1e-14));

  std::vector<double> untouched{0.3, 0.7};
  raise_small_probabilities(untouched, 0.04);
  CHECK(untouched == std::vector<double>{0.3, 0.7});

  std::vector<double> impossible{0.3, 0.3, 0.4};
  CHECK_THROWS_AS(raise_small_probabilities(impossible, 0.35), InfeasibleError);
}

TEST_CASE("config validation") {
  AisConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.rate_final = 0.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.interval = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.theta = 0.4;
  auto diamond = load_fixture("diamond.bn");  // a 3-outcome node caps theta below 1/3
  CHECK_THROWS_AS(cfg.validate(diamond), std::invalid_argument);
  cfg.heuristic_small = false;
  CHECK_NOTHROW(cfg.validate(diamond));
}

TEST_CASE("heuristic initialization") {
  auto net = load_fixture("asia.bn");
  const Evidence ev = parse_evidence(net, "tub=yes");
  AisConfig cfg;
  auto priors = estimate_evidence_priors(net, ev, cfg);
  CHECK(priors.at(net.id_of("tub")) == doctest::Approx(0.0104).epsilon(1e-12));

  SUBCASE("U makes the parents of unlikely evidence uniform") {
    cfg.heuristic_small = false;
    auto icpt = init_importance(net, ev, priors, cfg);
    CHECK(icpt.table(net.id_of("asia")).at(0, 0) == 0.5);
    CHECK(icpt.table(net.id_of("smoke")) == net.cpt(net.id_of("smoke")));
  }
  SUBCASE("S floors only evidence ancestors") {
    cfg.heuristic_uniform = false;
    auto icpt = init_importance(net, ev, {}, cfg);
    CHECK(icpt.table(net.id_of("asia")).at(0, 0) == 0.04);
    CHECK(icpt.table(net.id_of("asia")).at(0, 1) == doctest::Approx(0.96));
    CHECK(icpt.table(net.id_of("either")) == net.cpt(net.id_of("either")));
  }
  SUBCASE("likely evidence leaves parents alone") {
    cfg.heuristic_small = false;
    const Evidence likely = parse_evidence(net, "tub=no");
    auto icpt = init_importance(net, likely, estimate_evidence_priors(net, likely, cfg), cfg);
    CHECK(icpt == IcptStore::from_cpts(net));
  }
}

TEST_CASE("evidence priors fall back to presampling above the cap") {
  auto net = load_fixture("asia.bn");
  const Evidence ev = parse_evidence(net, "dysp=yes,smoke=no");
  AisConfig cfg;
  cfg.prior_state_cap = 1;
  cfg.prior_presamples = 50000;
  auto priors = estimate_evidence_priors(net, ev, cfg, 3);
  CHECK(priors.at(net.id_of("smoke")) == 0.5);
  const double exact = exact_node_marginal(net, {}, net.id_of("dysp"))[0];
  CHECK(priors.at(net.id_of("dysp")) == doctest::Approx(exact).epsilon(0.03));
}

TEST_CASE("learning step moves ancestors toward stage estimates and keeps the floor") {
  auto net = load_fixture("chain3.bn");
  const Evidence ev = parse_evidence(net, "C=true");
  AisConfig cfg;
  cfg.prob_floor = 0.01;
  IcptStore icpt = IcptStore::from_cpts(net);
  ScoreAccumulator stage(net, true);
  stage.add(net, {1, 1, 1}, 0.9);
  stage.add(net, {1, 1, 1}, 0.9);
  auto next = learn_stage(net, ev, icpt, stage, 0, cfg);
  // A: target [0, 1]; 0.3 + 0.4 * 0.7 = 0.58.
  CHECK(next.table(0).at(0, 1) == doctest::Approx(0.58));
  // B, row A=1: target [0, 1]; 0.8 + 0.4 * 0.2 = 0.88.
  CHECK(next.table(1).at(1, 1) == doctest::Approx(0.88));
  // Row A=0 saw no samples.
  CHECK(next.table(1).at(0, 0) == 0.9);
  CHECK(next.table(2) == icpt.table(2));

  cfg.rate_initial = 1.0;
  auto full = learn_stage(net, ev, icpt, stage, 0, cfg);
  CHECK(full.table(0).at(0, 0) == 0.01);
  CHECK(full.table(0).at(0, 1) == doctest::Approx(0.99));
}

TEST_CASE("stage weights") {
  AisConfig cfg;
  std::vector<double> sig{0.5, 0.4, 0.3, 0.2};
  cfg.zero_weight_stages = 2;
  CHECK(stage_weight(0, sig, cfg) == 0.0);
  CHECK(stage_weight(1, sig, cfg) == 0.0);
  CHECK(stage_weight(2, sig, cfg) == 1.0);
  CHECK(stage_weight(3, sig, cfg) == 1.0);
  cfg.weight_mode = WeightMode::inverse_sigma;
  CHECK(stage_weight(2, std::span(sig).first(3), cfg) == 1.0);
  CHECK(stage_weight(3, sig, cfg) == doctest::Approx(1.5));
  std::vector<double> worse{0.5, 0.4, 0.3, 0.6};
  CHECK(stage_weight(3, worse, cfg) == 1.0);
}

TEST_CASE("stage layout of a full run") {
  auto net = load_fixture("chain3.bn");
  const Evidence ev = parse_evidence(net, "C=true");
  AisConfig cfg;
  auto r = ais_bn_run(net, ev, cfg, 1);
  CHECK(r.samples == 125000);
  REQUIRE(r.stages.size() == 11);
  for (std::size_t k = 0; k < 10; ++k) {
    CHECK(r.stages[k].learning);
    CHECK(r.stages[k].samples == 2500);
    CHECK(r.stages[k].weight == 0.0);
  }
  CHECK_FALSE(r.stages[10].learning);
  CHECK(r.stages[10].samples == 100000);
  CHECK(r.stages[10].weight == 1.0);
  CHECK_FALSE(r.learning_truncated);
  CHECK(r.pr_evidence.value == doctest::Approx(0.417).epsilon(0.01));
  REQUIRE(r.relative_error.has_value());
  CHECK(*r.relative_error < 0.01);
  // The reported estimate is the final stage's own estimate.
  CHECK(r.pr_evidence.value == doctest::Approx(r.stages[10].pr_estimate).epsilon(1e-12));
}

TEST_CASE("budget smaller than the learning phase truncates learning") {
  auto net = load_fixture("chain3.bn");
  const Evidence ev = parse_evidence(net, "C=true");
  AisConfig cfg;
  cfg.total_samples = 7500;
  auto r = ais_bn_run(net, ev, cfg, 1);
  CHECK(r.learning_truncated);
  CHECK(r.samples == 7500);
  REQUIRE(r.stages.size() == 3);
  CHECK(r.stages[2].samples == 2500);
  CHECK(r.stages[2].weight == 1.0);
  CHECK(r.effective());
}

TEST_CASE("runs are deterministic and thread-independent") {
  auto net = load_fixture("asia.bn");
  const Evidence ev = parse_evidence(net, "xray=yes,dysp=yes");
  const auto cfg = small_config();
  auto a = ais_bn_run(net, ev, cfg, 4);
  auto b = ais_bn_run(net, ev, cfg, 4);
  auto c = ais_bn_run(net, ev, cfg, 4, Execution{3});
  CHECK(a.icpt == b.icpt);
  CHECK(a.icpt == c.icpt);
  CHECK(a.pr_evidence.value == c.pr_evidence.value);
  CHECK(*a.marginals == *c.marginals);
}

TEST_CASE("nodes outside the ancestor set keep their initial tables") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    GeneratorParams p;
    p.node_count = 20;
    p.seed = seed;
    auto net = generate_network(p);
    const Evidence ev = select_leaf_evidence(net, 3, seed);
    auto r = ais_bn_run(net, ev, small_config(), seed);
    const auto anc = oracle::ancestors_of_evidence(net, ev);
    for (NodeId v = 0; v < net.size(); ++v) {
      if (anc[v] || ev.contains(v)) continue;
      CHECK(r.icpt.table(v) == r.initial_icpt.table(v));
      CHECK(r.icpt.table(v) == net.cpt(v));
    }
  }
}

TEST_CASE("AIS-BN estimates match the exact posterior") {
  auto net = load_fixture("asia.bn");
  const Evidence ev = parse_evidence(net, "xray=yes,dysp=no,asia=yes");
  const auto exact = exact_posterior_marginals(net, ev);
  auto r = ais_bn_run(net, ev, {}, 2);
  CHECK(mse(exact, *r.marginals) < 0.005);
  CHECK(r.pr_evidence.value == doctest::Approx(exact_pr_evidence(net, ev)).epsilon(0.02));
}

TEST_CASE("conditional query by two runs") {
  auto net = load_fixture("chain3.bn");
  const Evidence ev = parse_evidence(net, "C=true");
  const Evidence q = parse_evidence(net, "A=true,B=true");
  AisConfig cfg;
  cfg.total_samples = 60000;
  auto r = ais_bn_query(net, ev, q, cfg, 5);
  CHECK(r.probability == doctest::Approx(0.216 / 0.417).epsilon(0.01));
  CHECK(r.pr_joint.value == doctest::Approx(0.216).epsilon(0.01));
  REQUIRE(r.relative_error_joint.has_value());
  CHECK_THROWS_AS(ais_bn_query(net, ev, parse_evidence(net, "C=false"), cfg, 5), ModelError);
}
