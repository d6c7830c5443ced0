#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "aisbn/ais.hpp"
#include "aisbn/baselines.hpp"
#include "aisbn/bench.hpp"
#include "aisbn/exact.hpp"
#include "aisbn/generator.hpp"
#include "aisbn/network_io.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace aisbn;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Verdict chain3_oracle() {
  auto net = load_fixture("chain3.bn");
  const Evidence ev = parse_evidence(net, "C=true");
  const double pr = exact_pr_evidence(net, ev);
  const auto post = exact_posterior_marginals(net, ev);
  const NodeId a = net.id_of("A");
  const auto brute = oracle::posteriors(net, ev);
  const double brute_pr = oracle::pr_evidence(net, ev);
  auto round5 = [](double x) { return std::round(x * 1e5) / 1e5; };
  bool ok = std::abs(pr - 0.417) < 1e-12 && std::abs(brute_pr - 0.417) < 1e-12;
  ok = ok && round5(post.at(a)[0]) == 0.45324 && round5(post.at(a)[1]) == 0.54676;
  for (NodeId v = 0; v < net.size(); ++v) {
    if (ev.contains(v)) continue;
    for (std::size_t x = 0; x < net.outcome_count(v); ++x)
      ok = ok && std::abs(post.at(v)[x] - brute[v][x]) < 1e-12;
  }
  return {ok, fmt("Pr(e)=%.6f A=[%.5f, %.5f]", pr, post.at(a)[0], post.at(a)[1])};
}

Verdict unbiasedness() {
  struct Case {
    const char* file;
    const char* evidence;
  };
  const Case cases[] = {{"chain3.bn", "C=true"}, {"diamond.bn", "D=on,E=pos"},
                        {"asia.bn", "xray=yes,dysp=no,asia=yes"}};
  constexpr int runs = 200;
  constexpr std::size_t samples = 1000;
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    auto net = load_fixture(c.file);
    const Evidence ev = parse_evidence(net, c.evidence);
    const double exact = exact_pr_evidence(net, ev);
    AisConfig cfg;
    cfg.interval = 200;
    cfg.total_samples = cfg.interval * cfg.stages + samples;
    std::vector<double> lw, ais;
    for (int r = 0; r < runs; ++r) {
      const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(r);
      lw.push_back(likelihood_weighting(net, ev, samples, seed).pr_evidence.value);
      const auto res = ais_bn_run(net, ev, cfg, seed);
      ais.push_back(res.stages.back().pr_estimate);
    }
    for (auto* v : {&lw, &ais}) {
      const double z = (mean_of(*v) - exact) / (stddev_of(*v) / std::sqrt(double(runs)));
      ok = ok && std::abs(z) <= 4.0;
      detail += fmt("%s/%s z=%+.2f ", c.file, v == &lw ? "lw" : "ais", z);
    }
  }
  return {ok, detail};
}

Verdict zero_variance() {
  auto net = load_fixture("chain3.bn");
  bool ok = true;
  double worst = 0.0;
  for (const char* e : {"C=true", "C=false", "B=true", "A=false,C=true"}) {
    const Evidence ev = parse_evidence(net, e);
    const double exact = exact_pr_evidence(net, ev);
    IcptStore icpt = IcptStore::from_cpts(net);
    for (NodeId v = 0; v < net.size(); ++v)
      if (!ev.contains(v)) icpt.table(v) = exact_icpt(net, ev, v).table;
    RngStream rng(7, 0);
    for (int i = 0; i < 2000; ++i) {
      const auto a = forward_sample(net, icpt, ev, rng);
      const double rel = std::abs(score_sample(net, icpt, ev, a) - exact) / exact;
      worst = std::max(worst, rel);
      ok = ok && rel <= 1e-12;
    }
  }
  return {ok, fmt("max relative deviation %.2e", worst)};
}

Verdict theorem2() {
  bool ok = true;
  std::size_t checked = 0;
  double worst = 0.0;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    GeneratorParams p;
    p.node_count = 20 + s;
    p.seed = 500 + s;
    auto net = generate_network(p);
    const Evidence ev = select_leaf_evidence(net, 3, s);
    AisConfig cfg;
    cfg.interval = 1000;
    cfg.total_samples = 20000;
    const auto r = ais_bn_run(net, ev, cfg, s);
    const auto mask = evidence_ancestor_mask(net, ev);
    const auto brute_mask = oracle::ancestors_of_evidence(net, ev);
    for (NodeId v = 0; v < net.size(); ++v) {
      if (ev.contains(v)) continue;
      ok = ok && mask[v] == brute_mask[v];
      if (mask[v]) continue;
      ++checked;
      ok = ok && r.icpt.table(v) == r.initial_icpt.table(v);
      const auto ct = exact_icpt(net, ev, v);
      for (std::size_t row = 0; row < ct.table.rows(); ++row) {
        if (!ct.reachable[row]) continue;
        for (std::size_t x = 0; x < ct.table.outcomes(); ++x) {
          const double d = std::abs(ct.table.at(row, x) - net.cpt(v).at(row, x));
          worst = std::max(worst, d);
          ok = ok && d <= 1e-9;
        }
      }
    }
  }
  return {ok, fmt("%zu non-ancestor tables, max |exact ICPT - CPT| %.2e", checked, worst)};
}

Verdict icpt_learning() {
  auto net = load_fixture("chain3.bn");
  const Evidence ev = parse_evidence(net, "C=true");
  const NodeId b = net.id_of("B");
  const auto target = oracle::icpt(net, ev, b);
  int good = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = ais_bn_run(net, ev, AisConfig{}, seed);
    const auto& learned = r.icpt.table(b).values();
    double d = 0.0;
    for (std::size_t i = 0; i < learned.size(); ++i) d = std::max(d, std::abs(learned[i] - target[i]));
    worst = std::max(worst, d);
    good += d <= 0.05;
  }
  return {good >= 9, fmt("%d/10 seeds within 0.05, max deviation %.4f", good, worst)};
}

struct Suite {
  std::vector<NetworkSource> cases;
  ExperimentReport report;
};

AlgorithmSpec ais_variant(const char* name, bool u, bool s) {
  AlgorithmSpec a;
  a.name = name;
  a.kind = AlgorithmKind::ais;
  a.ais.heuristic_uniform = u;
  a.ais.heuristic_small = s;
  return a;
}

Suite run_suite() {
  GeneratorParams base;
  base.concentration = 0.03;
  base.seed = 1000;
  ExperimentSpec spec;
  spec.cases = synthetic_suite(20, 30, 50, base, 5);
  spec.evidence.random_leaves = 5;
  AlgorithmSpec lw{"lw", AlgorithmKind::lw, {}, {}};
  AlgorithmSpec sis{"sis", AlgorithmKind::sis, {}, {}};
  spec.algorithms = {lw,
                     sis,
                     ais_variant("ais+u+s", true, true),
                     ais_variant("ais", false, false),
                     ais_variant("ais+u", true, false),
                     ais_variant("ais+s", false, true)};
  spec.budget.samples = 125000;
  spec.repetitions = 10;
  spec.base_seed = 1;
  Suite out{spec.cases, run_experiment(spec)};
  return out;
}

double suite_median(const Suite& s, const std::string& alg) {
  return median(per_case_mse(s.report.rows, alg, false));
}

Verdict convergence(const Suite& s) {
  constexpr std::size_t n = 100000;
  std::vector<std::uint64_t> seeds(40);
  std::iota(seeds.begin(), seeds.end(), 1);
  const AlgorithmSpec ais = ais_variant("ais+u+s", true, true);
  std::size_t inside = 0;
  std::string detail;
  for (std::size_t i = 0; i < s.cases.size(); ++i) {
    auto net = generate_network(*s.cases[i].generate);
    const auto& info = s.report.cases[i];
    const Evidence ev = parse_evidence(net, info.evidence);
    const auto m = convergence_ratio(net, ev, *info.exact, ais, n, seeds);
    const bool in = m.ratio > 1.75 && m.ratio <= 2.25;
    inside += in;
    detail += fmt(in ? "%.2f " : "%.2f* ", m.ratio);
  }
  const bool ok = static_cast<double>(inside) >= 0.9 * static_cast<double>(s.cases.size());
  return {ok, fmt("%zu/%zu in (1.75, 2.25]: ", inside, s.cases.size()) + detail};
}

Verdict ordering(const Suite& s) {
  const double ais = suite_median(s, "ais+u+s");
  const double lw = suite_median(s, "lw");
  const double sis = suite_median(s, "sis");
  const double best = std::min(lw, sis);
  const bool ok = ais < lw && ais < sis && ais <= 0.2 * best;
  return {ok, fmt("median MSE ais=%.3e lw=%.3e sis=%.3e ratio=%.3f", ais, lw, sis, ais / best)};
}

Verdict ablation(const Suite& s) {
  const double us = suite_median(s, "ais+u+s");
  const double plain = suite_median(s, "ais");
  const double u = suite_median(s, "ais+u");
  const double sm = suite_median(s, "ais+s");
  const bool ok = us <= plain && us <= u && us <= sm;
  return {ok, fmt("median MSE u+s=%.3e none=%.3e u=%.3e s=%.3e", us, plain, u, sm)};
}

Verdict learning_schedule() {
  AisConfig cfg;
  bool ok = learning_rate(0, cfg) == 0.4 && learning_rate(10, cfg) == 0.14;
  for (std::size_t k = 1; k <= cfg.stages; ++k) ok = ok && learning_rate(k, cfg) < learning_rate(k - 1, cfg);
  return {ok, fmt("eta(0)=%.17g eta(10)=%.17g", learning_rate(0, cfg), learning_rate(10, cfg))};
}

Verdict mse_cases() {
  auto table = [](std::vector<std::vector<double>> rows) {
    MarginalTable t(rows.size());
    for (std::size_t v = 0; v < rows.size(); ++v) t.set(v, rows[v]);
    return t;
  };
  const auto exact = table({{0.3, 0.7}, {0.6, 0.4}});
  const double same = mse(exact, exact);
  const double off = mse(exact, table({{0.31, 0.71}, {0.61, 0.41}}));
  const double worst = mse(table({{0.0, 1.0}}), table({{1.0, 0.0}}));
  const bool ok = same == 0.0 && std::abs(off - 0.01) < 1e-12 && std::abs(worst - 1.0) < 1e-12;
  return {ok, fmt("identical=%g offset=%.15f opposite=%.15f", same, off, worst)};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](const char* name, const std::function<Verdict()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = f();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !v.pass;
    std::printf("%s %-22s %7.1fs  %s\n", v.pass ? "PASS" : "FAIL", name, secs, v.detail.c_str());
    std::fflush(stdout);
  };

  report("oracle_chain3", chain3_oracle);
  report("unbiasedness", unbiasedness);
  report("zero_variance", zero_variance);
  report("non_ancestor_tables", theorem2);
  report("icpt_learning", icpt_learning);

  std::optional<Suite> suite;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    suite = run_suite();
  } catch (const std::exception& e) {
    std::printf("synthetic suite failed: %s\n", e.what());
  }
  std::printf("synthetic suite: 20 networks, 6 algorithms x 10 repetitions, %.1fs\n",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  auto needs_suite = [&](auto f) {
    return [&, f]() -> Verdict {
      if (!suite) return {false, "suite unavailable"};
      return f(*suite);
    };
  };
  report("convergence_ratio", needs_suite(convergence));
  report("algorithm_ordering", needs_suite(ordering));
  report("heuristic_ablation", needs_suite(ablation));

  report("learning_schedule", learning_schedule);
  report("mse_metric", mse_cases);

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
