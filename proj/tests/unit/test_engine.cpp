#include "doctest.h"

#include <cmath>
#include <vector>

#include "aisbn/engine.hpp"
#include "aisbn/exact.hpp"
#include "aisbn/generator.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace aisbn;

namespace {

IcptStore exact_icpts(const BayesianNetwork& net, const Evidence& ev) {
  IcptStore icpt = IcptStore::from_cpts(net);
  for (NodeId v = 0; v < net.size(); ++v) {
    if (ev.contains(v)) continue;
    auto t = exact_icpt(net, ev, v);
    for (std::size_t r = 0; r < t.table.rows(); ++r)
      if (t.reachable[r])
        for (Outcome x = 0; x < t.table.outcomes(); ++x) icpt.table(v).at(r, x) = t.table.at(r, x);
  }
  return icpt;
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(5, 1), b(5, 1), c(5, 2), d(6, 1);
  std::vector<double> xa, xb, xc, xd;
  for (int i = 0; i < 8; ++i) {
    xa.push_back(a.uniform());
    xb.push_back(b.uniform());
    xc.push_back(c.uniform());
    xd.push_back(d.uniform());
  }
  CHECK(xa == xb);
  CHECK(xa != xc);
  CHECK(xa != xd);
  for (double u : xa) CHECK((u >= 0.0 && u < 1.0));
}

TEST_CASE("outcome selection") {
  const std::vector<double> row{0.2, 0.5, 0.3};
  CHECK(select_outcome(row, 0.0) == 0);
  CHECK(select_outcome(row, 0.19) == 0);
  CHECK(select_outcome(row, 0.2) == 1);
  CHECK(select_outcome(row, 0.69) == 1);
  CHECK(select_outcome(row, 0.7) == 2);
  CHECK(select_outcome(row, 0.999999) == 2);
  const std::vector<double> leading_zero{0.0, 1.0};
  CHECK(select_outcome(leading_zero, 0.0) == 1);
  // Total below u through rounding: last positive entry.
  const std::vector<double> short_row{0.3, 0.3, 0.3, 0.0};
  CHECK(select_outcome(short_row, 0.95) == 2);
}

TEST_CASE("forward sampling with scripted uniforms") {
  auto net = load_fixture("chain3.bn");
  const auto prior = IcptStore::from_cpts(net);
  Evidence ev;
  ev.set(2, 1);
  std::vector<double> script{0.2, 0.5};
  std::size_t i = 0;
  auto a = forward_sample(net, prior, ev, [&] { return script[i++]; });
  CHECK(a == Assignment{0, 0, 1});
  CHECK(i == 2);

  std::vector<double> script2{0.7, 0.1, 0.0};
  i = 0;
  a = forward_sample(net, prior, {}, [&] { return script2[i++]; });
  CHECK(a == Assignment{1, 0, 0});
}

TEST_CASE("sample scores") {
  auto net = load_fixture("chain3.bn");
  const auto prior = IcptStore::from_cpts(net);
  Evidence ev;
  ev.set(2, 1);
  CHECK(score_sample(net, prior, ev, {1, 1, 1}) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(score_sample(net, prior, ev, {0, 0, 1}) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(score_sample(net, prior, {}, {0, 0, 0}) == doctest::Approx(1.0).epsilon(1e-15));

  IcptStore broken = prior;
  broken.table(0).at(0, 1) = 0.0;
  broken.table(0).at(0, 0) = 1.0;
  CHECK_THROWS_AS(score_sample(net, broken, ev, {1, 1, 1}), Error);
}

TEST_CASE("estimator arithmetic") {
  auto net = load_fixture("chain3.bn");
  ScoreAccumulator acc(net);
  for (double s : {1.0, 2.0, 3.0, 4.0}) acc.add(net, {0, 0, 0}, s);
  auto est = estimate_pr_evidence(acc);
  CHECK(est.value == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(est.variance == doctest::Approx(5.0 / 12.0).epsilon(1e-15));

  ScoreAccumulator one(net);
  one.add(net, {0, 0, 0}, 1.0);
  CHECK_THROWS_AS(estimate_pr_evidence(one), InfeasibleError);

  ScoreAccumulator zeros(net);
  zeros.add(net, {0, 0, 0}, 0.0);
  zeros.add(net, {0, 0, 0}, 0.0);
  CHECK(zeros.count() == 2);
  CHECK(estimate_pr_evidence(zeros).value == 0.0);
  CHECK_THROWS_AS(marginals_from_scores(zeros, net, {}), InfeasibleError);
}

TEST_CASE("relative error bound") {
  CHECK(normal_two_sided_quantile(0.05) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(relative_error_bound(0.5, 1e-4, 0.05) == doctest::Approx(0.01 / 0.5 * 1.959963984540054).epsilon(1e-12));
  CHECK_THROWS_AS(relative_error_bound(0.0, 1e-4, 0.05), InfeasibleError);
  CHECK_THROWS_AS(relative_error_bound(0.5, 1e-4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(relative_error_bound(0.5, 1e-4, 1.0), std::invalid_argument);
}

TEST_CASE("optimal importance function gives constant scores") {
  for (const char* evs : {"C=true", "C=false", "B=true"}) {
    auto net = load_fixture("chain3.bn");
    const Evidence ev = parse_evidence(net, evs);
    const double pr = oracle::pr_evidence(net, ev);
    const auto icpt = exact_icpts(net, ev);
    RngStream rng(3, 0);
    for (int i = 0; i < 200; ++i) {
      auto a = forward_sample(net, icpt, ev, rng);
      CHECK(std::abs(score_sample(net, icpt, ev, a) - pr) <= 1e-12 * pr);
    }
  }
}

TEST_CASE("serial and parallel kernels are bit-identical") {
  GeneratorParams p;
  p.node_count = 25;
  p.seed = 6;
  auto net = generate_network(p);
  const Evidence ev = select_leaf_evidence(net, 3, 2);
  const auto prior = IcptStore::from_cpts(net);
  for (auto mode : {SamplingMode::importance, SamplingMode::rejection}) {
    for (std::size_t n : {std::size_t{1}, std::size_t{511}, std::size_t{512}, std::size_t{5000}}) {
      SamplingJob job{net, prior, ev, n, 9, 4, mode, true};
      const auto serial = sample_serial(job);
      CHECK(serial.count() == n);
      for (int threads : {0, 2, 3})
        CHECK(sample_parallel(job, Execution{threads}) == serial);
      CHECK(run_sampling(job, Execution{1}) == serial);
    }
  }
}

TEST_CASE("accumulator merge equals one pass over the same samples") {
  auto net = load_fixture("diamond.bn");
  const auto prior = IcptStore::from_cpts(net);
  const Evidence ev = parse_evidence(net, "E=pos");
  RngStream rng(1, 1);
  ScoreAccumulator whole(net, true), left(net, true), right(net, true);
  for (int i = 0; i < 300; ++i) {
    auto a = forward_sample(net, prior, ev, rng);
    const double s = score_sample(net, prior, ev, a);
    whole.add(net, a, s);
    (i < 150 ? left : right).add(net, a, s);
  }
  left.merge(right);
  CHECK(left.count() == whole.count());
  CHECK(left.score_sum() == doctest::Approx(whole.score_sum()).epsilon(1e-12));
  CHECK(left.score_sq_sum() == doctest::Approx(whole.score_sq_sum()).epsilon(1e-12));
  for (NodeId v = 0; v < net.size(); ++v) {
    auto a = left.family_scores(v);
    auto b = whole.family_scores(v);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
  ScoreAccumulator other(load_fixture("chain3.bn"));
  CHECK_THROWS(left.merge(other));
}

TEST_CASE("importance estimate is unbiased and its variance is consistent") {
  auto net = load_fixture("diamond.bn");
  const Evidence ev = parse_evidence(net, "E=pos,B=b0");
  const double exact = oracle::pr_evidence(net, ev);
  const auto prior = IcptStore::from_cpts(net);
  constexpr int kRuns = 300;
  constexpr std::size_t kSamples = 400;
  double sum = 0.0, sum_sq = 0.0, reported = 0.0;
  for (int r = 0; r < kRuns; ++r) {
    SamplingJob job{net, prior, ev, kSamples, static_cast<std::uint64_t>(r + 1), 0, SamplingMode::importance, false};
    auto est = estimate_pr_evidence(sample_serial(job));
    sum += est.value;
    sum_sq += est.value * est.value;
    reported += est.variance;
  }
  const double mean = sum / kRuns;
  const double empirical = (sum_sq - sum * sum / kRuns) / (kRuns - 1);
  const double se = std::sqrt(empirical / kRuns);
  CHECK(std::abs(mean - exact) <= 4.0 * se);
  const double ratio = (reported / kRuns) / empirical;
  CHECK(ratio > 1.0 / 1.5);
  CHECK(ratio < 1.5);
}

TEST_CASE("marginals from scores match the oracle for large samples") {
  auto net = load_fixture("asia.bn");
  const Evidence ev = parse_evidence(net, "dysp=yes");
  const auto prior = IcptStore::from_cpts(net);
  SamplingJob job{net, prior, ev, 200000, 5, 0, SamplingMode::importance, false};
  auto m = marginals_from_scores(sample_serial(job), net, ev);
  const auto post = oracle::posteriors(net, ev);
  for (NodeId v = 0; v < net.size(); ++v) {
    if (ev.contains(v)) continue;
    for (Outcome x = 0; x < 2; ++x) CHECK(m.at(v)[x] == doctest::Approx(post[v][x]).epsilon(0.01).scale(1.0));
  }
}
