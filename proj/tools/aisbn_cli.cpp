#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "aisbn/ais.hpp"
#include "aisbn/baselines.hpp"
#include "aisbn/bench.hpp"
#include "aisbn/errors.hpp"
#include "aisbn/exact.hpp"
#include "aisbn/generator.hpp"
#include "aisbn/network_io.hpp"

using namespace aisbn;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInput = 2, kInfeasible = 3 };

struct Common {
  std::string network;
  std::vector<std::string> evidence;
  int threads = 1;
  int precision = 6;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-n,--network", c.network, "Network file")->required()->check(CLI::ExistingFile);
  cmd->add_option("-e,--evidence", c.evidence, "Evidence as Node=outcome pairs (repeatable, comma separated)");
  cmd->add_option("--threads", c.threads, "Worker threads (1 = serial reference kernels, 0 = OpenMP default)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--precision", c.precision, "Digits printed for probabilities")
      ->capture_default_str()
      ->check(CLI::Range(1, 17));
}

void add_ais_flags(CLI::App* cmd, AisConfig& cfg, std::string& weight_mode) {
  cmd->add_option("--interval", cfg.interval, "Samples per learning stage")->capture_default_str();
  cmd->add_option("--stages", cfg.stages, "Learning stages (k_max)")->capture_default_str();
  cmd->add_option("--rate-initial", cfg.rate_initial, "Learning rate at stage 0 (a)")->capture_default_str();
  cmd->add_option("--rate-final", cfg.rate_final, "Learning rate at stage k_max (b)")->capture_default_str();
  cmd->add_option("--theta", cfg.theta, "Small-probability threshold of heuristic S")->capture_default_str();
  cmd->add_option("--zero-weight-stages", cfg.zero_weight_stages, "Leading stages given weight 0")
      ->capture_default_str();
  cmd->add_option("--weight-mode", weight_mode, "Stage weights: last_stage_only or inverse_sigma")
      ->capture_default_str()
      ->check(CLI::IsMember({"last_stage_only", "inverse_sigma"}));
  cmd->add_option("--prob-floor", cfg.prob_floor, "Minimum ICPT entry after each update")->capture_default_str();
  cmd->add_option("--delta", cfg.delta, "Confidence parameter of the relative error bound")->capture_default_str();
  cmd->add_option("--heuristic-uniform", cfg.heuristic_uniform, "Uniform parent rows for unlikely evidence (U)")
      ->capture_default_str();
  cmd->add_option("--heuristic-small", cfg.heuristic_small, "Raise small ICPT entries to theta (S)")
      ->capture_default_str();
  cmd->add_option("--prior-state-cap", cfg.prior_state_cap, "State cap for exact evidence priors")
      ->capture_default_str();
  cmd->add_option("--prior-presamples", cfg.prior_presamples,
                  "Logic-sampling presamples when exact evidence priors are infeasible")
      ->capture_default_str();
}

Evidence evidence_of(const BayesianNetwork& net, const std::vector<std::string>& items) {
  std::string joined;
  for (const auto& item : items) joined += item + ',';
  return parse_evidence(net, joined);
}

WeightMode weight_mode_of(const std::string& s) {
  return s == "inverse_sigma" ? WeightMode::inverse_sigma : WeightMode::last_stage_only;
}

ExactMethod exact_method_of(const std::string& s) {
  if (s == "enumeration") return ExactMethod::enumeration;
  if (s == "elimination") return ExactMethod::elimination;
  return ExactMethod::automatic;
}

std::string fmt(double v, int precision) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

void print_marginals(const BayesianNetwork& net, const MarginalTable& m, int precision) {
  for (NodeId v = 0; v < net.size(); ++v) {
    if (!m.has(v)) continue;
    std::cout << net.node(v).key << ':';
    auto dist = m.at(v);
    for (Outcome x = 0; x < dist.size(); ++x)
      std::cout << ' ' << net.node(v).outcomes[x] << '=' << fmt(dist[x], precision);
    std::cout << '\n';
  }
}

int cmd_validate(const std::string& path) {
  NetworkDraft draft = read_network_draft(path);
  ValidationReport report = validate_network(draft);
  if (!report.ok()) {
    std::cerr << path << ": invalid network\n" << report.summary() << '\n';
    return kInput;
  }
  BayesianNetwork net(std::move(draft));
  std::cout << "ok: " << net.name() << ", " << net.size() << " nodes, log10 states "
            << fmt(net.log10_state_count(), 4) << '\n';
  return kOk;
}

int cmd_infer(const Common& c, const std::string& method, double state_cap) {
  BayesianNetwork net = load_network(c.network);
  Evidence ev = evidence_of(net, c.evidence);
  ExactOptions opts;
  opts.method = exact_method_of(method);
  opts.state_cap = state_cap;
  opts.exec.threads = c.threads;
  const double pr = exact_pr_evidence(net, ev, opts);
  MarginalTable m = exact_posterior_marginals(net, ev, opts);
  std::cout << "Pr(e) = " << fmt(pr, c.precision) << '\n';
  print_marginals(net, m, c.precision);
  return kOk;
}

int cmd_sample(const Common& c, const std::string& algorithm, std::size_t samples, std::uint64_t seed,
               AisConfig cfg, const std::string& weight_mode, std::size_t sis_interval,
               const std::vector<std::string>& query, bool show_stages) {
  BayesianNetwork net = load_network(c.network);
  Evidence ev = evidence_of(net, c.evidence);
  const Execution exec{c.threads};
  cfg.weight_mode = weight_mode_of(weight_mode);
  cfg.total_samples = samples;

  if (!query.empty()) {
    if (algorithm != "ais") throw CLI::ValidationError("--query", "only supported with --algorithm ais");
    Evidence q = evidence_of(net, query);
    QueryResult r = ais_bn_query(net, ev, q, cfg, seed, exec);
    std::cout << "Pr(q | e) = " << fmt(r.probability, c.precision) << '\n';
    std::cout << "Pr(e) = " << fmt(r.pr_evidence.value, c.precision) << '\n';
    std::cout << "Pr(q, e) = " << fmt(r.pr_joint.value, c.precision) << '\n';
    if (r.relative_error_evidence)
      std::cout << "relative error Pr(e) = " << fmt(*r.relative_error_evidence, c.precision) << '\n';
    if (r.relative_error_joint)
      std::cout << "relative error Pr(q, e) = " << fmt(*r.relative_error_joint, c.precision) << '\n';
    return kOk;
  }

  PrEstimate pr;
  std::optional<MarginalTable> marginals;
  std::size_t n = 0;
  std::optional<double> rel;
  std::vector<StageStats> stages;
  if (algorithm == "ais") {
    AisResult r = ais_bn_run(net, ev, cfg, seed, exec);
    pr = r.pr_evidence;
    marginals = std::move(r.marginals);
    n = r.samples;
    rel = r.relative_error;
    stages = std::move(r.stages);
  } else {
    SamplerResult r;
    if (algorithm == "logic") r = logic_sampling(net, ev, samples, seed, exec);
    else if (algorithm == "lw") r = likelihood_weighting(net, ev, samples, seed, exec);
    else r = self_importance_sampling(net, ev, samples, SisOptions{sis_interval}, seed, exec);
    pr = r.pr_evidence;
    marginals = std::move(r.marginals);
    n = r.samples;
    if (pr.value > 0.0 && std::isfinite(pr.variance)) rel = relative_error_bound(pr.value, pr.variance, cfg.delta);
  }

  std::cout << "samples = " << n << '\n';
  std::cout << "Pr(e) = " << fmt(pr.value, c.precision) << '\n';
  std::cout << "variance = " << fmt(pr.variance, c.precision) << '\n';
  if (rel) std::cout << "relative error (delta " << cfg.delta << ") = " << fmt(*rel, c.precision) << '\n';
  if (show_stages) {
    std::cout << "stage samples weight sigma pr_estimate\n";
    for (const auto& s : stages)
      std::cout << s.k << ' ' << s.samples << ' ' << s.weight << ' ' << fmt(s.sigma_hat, c.precision) << ' '
                << fmt(s.pr_estimate, c.precision) << (s.learning ? "" : " final") << '\n';
  }
  if (!marginals) {
    std::cerr << "no sample had a positive score; posterior marginals unavailable\n";
    return kInfeasible;
  }
  print_marginals(net, *marginals, c.precision);
  return kOk;
}

int cmd_benchmark(const std::string& config, const std::string& out, const std::string& summary, int threads,
                  bool threads_set) {
  ExperimentSpec spec = load_experiment_spec(config);
  if (threads_set) spec.threads = threads;
  ExperimentReport report = run_experiment(spec);
  if (out.empty() || out == "-") {
    write_report_csv(std::cout, report);
  } else {
    std::ofstream f(out);
    if (!f) throw ModelError("cannot write " + out);
    write_report_csv(f, report);
  }
  if (!summary.empty()) {
    if (summary == "-") {
      write_summary_csv(std::cout, report);
    } else {
      std::ofstream f(summary);
      if (!f) throw ModelError("cannot write " + summary);
      write_summary_csv(f, report);
    }
  }
  for (const auto& c : report.cases)
    if (!c.exact) std::cerr << "case " << c.id << ": exact oracle infeasible, MSE unavailable\n";
  return kOk;
}

int cmd_gen(const GeneratorParams& p, const std::string& out) {
  BayesianNetwork net = generate_network(p);
  if (out.empty() || out == "-") write_network(std::cout, net);
  else save_network(out, net);
  return kOk;
}

std::string row_label(const BayesianNetwork& net, NodeId v, std::size_t r) {
  const auto& parents = net.node(v).parents;
  if (parents.empty()) return "-";
  std::string label;
  const auto& strides = net.parent_strides(v);
  for (std::size_t j = 0; j < parents.size(); ++j) {
    const auto& pn = net.node(parents[j]);
    const std::size_t x = (r / strides[j]) % pn.outcomes.size();
    if (!label.empty()) label += ',';
    label += pn.key + '=' + pn.outcomes[x];
  }
  return label;
}

int cmd_icpt_dump(const Common& c, std::uint64_t seed, AisConfig cfg, const std::string& weight_mode,
                  std::size_t samples, const std::vector<std::string>& nodes) {
  BayesianNetwork net = load_network(c.network);
  Evidence ev = evidence_of(net, c.evidence);
  const Execution exec{c.threads};
  cfg.weight_mode = weight_mode_of(weight_mode);
  cfg.total_samples = samples;
  AisResult r = ais_bn_run(net, ev, cfg, seed, exec);

  std::vector<NodeId> selected;
  if (nodes.empty()) selected = evidence_ancestor_set(net, ev);
  else for (const auto& key : nodes) selected.push_back(net.id_of(key));

  ExactOptions opts;
  opts.exec = exec;
  std::cout << "node,parents,outcome,learned,exact\n";
  for (NodeId v : selected) {
    if (ev.contains(v)) continue;
    std::optional<ConditionalTable> exact;
    try {
      exact = exact_icpt(net, ev, v, opts);
    } catch (const InfeasibleError&) {
      std::cerr << net.node(v).key << ": exact ICPT infeasible\n";
    }
    const Cpt& learned = r.icpt.table(v);
    for (std::size_t row = 0; row < learned.rows(); ++row) {
      for (Outcome x = 0; x < learned.outcomes(); ++x) {
        std::cout << net.node(v).key << ',' << '"' << row_label(net, v, row) << '"' << ','
                  << net.node(v).outcomes[x] << ',' << fmt(learned.at(row, x), c.precision) << ',';
        if (exact && exact->reachable[row]) std::cout << fmt(exact->table.at(row, x), c.precision);
        std::cout << '\n';
      }
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian network inference with adaptive importance sampling"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a network file");
  validate->add_option("network", validate_path, "Network file")->required()->check(CLI::ExistingFile);

  Common infer_c;
  std::string method = "automatic";
  std::string algorithm_exact = "exact";
  double state_cap = ExactOptions{}.state_cap;
  auto* infer = app.add_subcommand("infer", "Exact posterior marginals and Pr(e)");
  add_common(infer, infer_c);
  infer->add_option("--algorithm", algorithm_exact, "Inference algorithm")
      ->capture_default_str()
      ->check(CLI::IsMember({"exact"}));
  infer->add_option("--method", method, "automatic, enumeration or elimination")
      ->capture_default_str()
      ->check(CLI::IsMember({"automatic", "enumeration", "elimination"}));
  infer->add_option("--state-cap", state_cap, "Max completions (enumeration) or factor entries (elimination)")
      ->capture_default_str();

  Common sample_c;
  std::string algorithm = "ais";
  std::size_t samples = AisConfig{}.total_samples;
  std::uint64_t seed = 1;
  AisConfig cfg;
  std::string weight_mode = "last_stage_only";
  std::size_t sis_interval = SisOptions{}.interval;
  std::vector<std::string> query;
  bool show_stages = false;
  auto* sample = app.add_subcommand("sample", "Approximate inference by stochastic sampling");
  add_common(sample, sample_c);
  sample->add_option("-a,--algorithm", algorithm, "logic, lw, sis or ais")
      ->capture_default_str()
      ->check(CLI::IsMember({"logic", "lw", "sis", "ais"}));
  sample->add_option("-s,--samples", samples, "Total samples (for ais, including learning stages)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed, "Random seed")->capture_default_str();
  sample->add_option("--sis-interval", sis_interval, "Samples between SIS table updates")->capture_default_str();
  sample->add_option("-q,--query", query, "Estimate Pr(query | evidence) with two runs (ais only)");
  sample->add_flag("--show-stages", show_stages, "Print per-stage diagnostics (ais)");
  add_ais_flags(sample, cfg, weight_mode);

  std::string config, out, summary;
  int bench_threads = 1;
  auto* benchmark = app.add_subcommand("benchmark", "Run an experiment described by a JSON config");
  benchmark->add_option("-c,--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  benchmark->add_option("-o,--out", out, "Raw per-run CSV (default: standard output)");
  benchmark->add_option("--summary", summary, "Aggregate CSV");
  auto* bench_threads_opt =
      benchmark->add_option("--threads", bench_threads, "Concurrent jobs, overriding the config (1 = serial)")
          ->check(CLI::NonNegativeNumber);

  GeneratorParams gen_params;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a random network");
  gen->add_option("--nodes", gen_params.node_count, "Node count")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--max-parents", gen_params.max_parents, "Maximum in-degree")->capture_default_str();
  gen->add_option("--max-outcomes", gen_params.max_outcomes, "Maximum outcomes per node")->capture_default_str();
  gen->add_option("--min-prob", gen_params.min_probability, "Smallest CPT entry (0 = unclamped)")
      ->capture_default_str();
  gen->add_option("--concentration", gen_params.concentration, "Dirichlet concentration of CPT rows")
      ->capture_default_str();
  gen->add_option("--parent-window", gen_params.parent_window, "Parents drawn from this many preceding nodes")
      ->capture_default_str();
  gen->add_option("--seed", gen_params.seed, "Random seed")->capture_default_str();
  gen->add_option("-o,--out", gen_out, "Output file (default: standard output)");

  Common dump_c;
  std::uint64_t dump_seed = 1;
  AisConfig dump_cfg;
  std::string dump_weight_mode = "last_stage_only";
  std::size_t dump_samples = AisConfig{}.total_samples;
  std::vector<std::string> dump_nodes;
  auto* dump = app.add_subcommand("icpt-dump", "Learned ICPT rows next to the exact ICPT (CSV)");
  add_common(dump, dump_c);
  dump->add_option("--seed", dump_seed, "Random seed")->capture_default_str();
  dump->add_option("-s,--samples", dump_samples, "Total samples including learning stages")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  dump->add_option("--node", dump_nodes, "Nodes to dump (default: evidence ancestors)");
  add_ais_flags(dump, dump_cfg, dump_weight_mode);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return cmd_validate(validate_path);
    if (*infer) return cmd_infer(infer_c, method, state_cap);
    if (*sample)
      return cmd_sample(sample_c, algorithm, samples, seed, cfg, weight_mode, sis_interval, query, show_stages);
    if (*benchmark) return cmd_benchmark(config, out, summary, bench_threads, bench_threads_opt->count() > 0);
    if (*gen) return cmd_gen(gen_params, gen_out);
    if (*dump) return cmd_icpt_dump(dump_c, dump_seed, dump_cfg, dump_weight_mode, dump_samples, dump_nodes);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  }
  return kUsage;
}
