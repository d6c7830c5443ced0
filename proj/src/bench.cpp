#include "aisbn/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <omp.h>

#include "json.hpp"

#include "aisbn/network_io.hpp"

namespace aisbn {

double mse(const MarginalTable& exact, const MarginalTable& estimated) {
  if (exact.node_count() != estimated.node_count())
    throw std::invalid_argument("marginal tables cover different networks");
  double sum = 0.0;
  std::size_t count = 0;
  for (NodeId v = 0; v < exact.node_count(); ++v) {
    if (exact.has(v) != estimated.has(v))
      throw std::invalid_argument("marginal tables cover different node sets");
    if (!exact.has(v)) continue;
    auto p = exact.at(v);
    auto q = estimated.at(v);
    if (p.size() != q.size()) throw std::invalid_argument("marginal tables disagree on outcome counts");
    for (std::size_t x = 0; x < p.size(); ++x) {
      const double d = q[x] - p[x];
      sum += d * d;
    }
    count += p.size();
  }
  if (count == 0) return 0.0;
  return std::sqrt(sum / static_cast<double>(count));
}

AlgorithmKind parse_algorithm_kind(const std::string& text) {
  if (text == "logic") return AlgorithmKind::logic;
  if (text == "lw") return AlgorithmKind::lw;
  if (text == "sis") return AlgorithmKind::sis;
  if (text == "ais") return AlgorithmKind::ais;
  throw std::invalid_argument("unknown algorithm '" + text + "' (expected logic, lw, sis or ais)");
}

std::string to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::logic: return "logic";
    case AlgorithmKind::lw: return "lw";
    case AlgorithmKind::sis: return "sis";
    case AlgorithmKind::ais: return "ais";
  }
  return "?";
}

RunOutcome run_algorithm(const AlgorithmSpec& spec, const BayesianNetwork& net, const Evidence& ev,
                         std::size_t samples, std::uint64_t seed, const Execution& exec) {
  RunOutcome out;
  auto take = [&out](SamplerResult r) {
    out.pr_evidence = r.pr_evidence;
    out.marginals = std::move(r.marginals);
    out.samples = r.samples;
  };
  switch (spec.kind) {
    case AlgorithmKind::logic: take(logic_sampling(net, ev, samples, seed, exec)); break;
    case AlgorithmKind::lw: take(likelihood_weighting(net, ev, samples, seed, exec)); break;
    case AlgorithmKind::sis: take(self_importance_sampling(net, ev, samples, spec.sis, seed, exec)); break;
    case AlgorithmKind::ais: {
      AisConfig cfg = spec.ais;
      cfg.total_samples = samples;
      AisResult r = ais_bn_run(net, ev, cfg, seed, exec);
      out.pr_evidence = r.pr_evidence;
      out.marginals = std::move(r.marginals);
      out.samples = r.samples;
      out.stages = std::move(r.stages);
      break;
    }
  }
  return out;
}

double convergence_ratio(double mse_n, double mse_4n) { return mse_n / mse_4n; }

ConvergenceMeasurement convergence_ratio(const BayesianNetwork& net, const Evidence& ev,
                                         const MarginalTable& exact, const AlgorithmSpec& spec,
                                         std::size_t n, std::span<const std::uint64_t> seeds,
                                         const Execution& exec) {
  if (seeds.empty()) throw std::invalid_argument("convergence ratio needs at least one seed");
  const std::size_t learning = spec.kind == AlgorithmKind::ais ? spec.ais.stages * spec.ais.interval : 0;
  const MarginalTable fallback = uniform_marginals(net, ev);
  auto mean_mse = [&](std::size_t budget) {
    double total = 0.0;
    for (std::uint64_t seed : seeds) {
      RunOutcome r = run_algorithm(spec, net, ev, learning + budget, seed, exec);
      total += mse(exact, r.marginals ? *r.marginals : fallback);
    }
    return total / static_cast<double>(seeds.size());
  };
  ConvergenceMeasurement m;
  m.mean_mse_n = mean_mse(n);
  m.mean_mse_4n = mean_mse(4 * n);
  m.ratio = convergence_ratio(m.mean_mse_n, m.mean_mse_4n);
  return m;
}

void ExperimentSpec::validate() const {
  if (cases.empty()) throw std::invalid_argument("experiment has no cases");
  if (algorithms.empty()) throw std::invalid_argument("experiment has no algorithms");
  if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  if (budget.samples == 0 && !(budget.time_ms > 0.0)) throw std::invalid_argument("budget must be positive");
  std::map<std::string, int> names;
  for (const auto& a : algorithms)
    if (++names[a.name] > 1) throw std::invalid_argument("duplicate algorithm name '" + a.name + "'");
  std::map<std::string, int> ids;
  for (const auto& c : cases)
    if (++ids[c.id] > 1) throw std::invalid_argument("duplicate case id '" + c.id + "'");
}

std::vector<NetworkSource> synthetic_suite(std::size_t count, std::size_t min_nodes,
                                           std::size_t max_nodes, const GeneratorParams& base,
                                           std::size_t min_leaves) {
  if (min_nodes < 1 || max_nodes < min_nodes) throw std::invalid_argument("bad node-count range");
  if (min_leaves > min_nodes) throw std::invalid_argument("min_leaves exceeds the node count");
  std::vector<NetworkSource> out;
  std::uint64_t seed = base.seed;
  for (std::size_t i = 0; i < count; ++i) {
    GeneratorParams p = base;
    const std::size_t span = max_nodes - min_nodes;
    p.node_count = min_nodes + (count > 1 ? span * i / (count - 1) : 0);
    for (;; ++seed) {
      p.seed = seed;
      if (min_leaves == 0) break;
      const BayesianNetwork net = generate_network(p);
      std::size_t leaves = 0;
      for (NodeId v = 0; v < net.size(); ++v) leaves += net.children(v).empty();
      if (leaves >= min_leaves) break;
    }
    ++seed;
    NetworkSource src;
    src.id = "syn" + std::to_string(i) + "_n" + std::to_string(p.node_count);
    src.generate = p;
    out.push_back(std::move(src));
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

std::vector<double> per_case_mse(const std::vector<ReportRow>& rows, const std::string& algorithm,
                                 bool effective_only) {
  // Rows are case-major, so first appearance order is case order.
  std::vector<std::string> order;
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (const auto& r : rows) {
    if (r.algorithm != algorithm || !r.mse) continue;
    if (effective_only && !r.effective) continue;
    auto [it, inserted] = sums.try_emplace(r.case_id, 0.0, 0);
    if (inserted) order.push_back(r.case_id);
    it->second.first += *r.mse;
    it->second.second += 1;
  }
  std::vector<double> out;
  for (const auto& id : order) out.push_back(sums[id].first / static_cast<double>(sums[id].second));
  return out;
}

std::vector<AggregateRow> aggregate(const std::vector<ReportRow>& rows,
                                    const std::vector<std::string>& algorithm_order) {
  std::vector<AggregateRow> out;
  for (const auto& name : algorithm_order) {
    for (bool filtered : {false, true}) {
      AggregateRow a;
      a.algorithm = name;
      a.effective_only = filtered;
      for (const auto& r : rows)
        if (r.algorithm == name && r.mse && (!filtered || r.effective)) ++a.runs;
      auto values = per_case_mse(rows, name, filtered);
      a.cases = values.size();
      if (!values.empty()) {
        double sum = 0.0;
        for (double v : values) sum += v;
        a.mean = sum / static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) ss += (v - a.mean) * (v - a.mean);
        a.stddev = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
        a.min = *std::min_element(values.begin(), values.end());
        a.max = *std::max_element(values.begin(), values.end());
        a.median = median(values);
      } else {
        a.mean = a.stddev = a.min = a.median = a.max = std::numeric_limits<double>::quiet_NaN();
      }
      out.push_back(a);
    }
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

struct PreparedCase {
  CaseInfo info;
  std::optional<BayesianNetwork> net;
  Evidence ev;
};

std::uint64_t evidence_seed(std::uint64_t base, std::size_t case_index) {
  return base ^ (0x9E3779B97F4A7C15ull * (case_index + 1));
}

PreparedCase prepare_case(const ExperimentSpec& spec, std::size_t index) {
  const NetworkSource& src = spec.cases[index];
  PreparedCase pc;
  pc.info.id = src.id;
  pc.net.emplace(src.generate ? generate_network(*src.generate) : load_network(src.path));
  const BayesianNetwork& net = *pc.net;
  if (!spec.evidence.bindings.empty())
    pc.ev = parse_evidence(net, spec.evidence.bindings);
  else if (spec.evidence.random_leaves > 0)
    pc.ev = select_leaf_evidence(net, spec.evidence.random_leaves, evidence_seed(spec.base_seed, index),
                                 spec.evidence.states, spec.exact);
  pc.info.evidence = format_evidence(net, pc.ev);
  try {
    pc.info.pr_exact = exact_pr_evidence(net, pc.ev, spec.exact);
    pc.info.exact = exact_posterior_marginals(net, pc.ev, spec.exact);
  } catch (const InfeasibleError&) {
    // Oracle unavailable: rows are kept without MSE.
  }
  return pc;
}

// Samples affordable in `time_ms`, from the throughput of a short pilot run.
std::size_t calibrate_samples(const AlgorithmSpec& algo, const BayesianNetwork& net, const Evidence& ev,
                              double time_ms, std::uint64_t seed) {
  const std::size_t overhead = algo.kind == AlgorithmKind::ais ? algo.ais.stages * algo.ais.interval : 0;
  const std::size_t pilot = overhead + 2000;
  const auto start = Clock::now();
  run_algorithm(algo, net, ev, pilot, seed);
  const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  const double per_sample = std::max(ms, 1e-3) / static_cast<double>(pilot);
  return std::max<std::size_t>(overhead + 2, static_cast<std::size_t>(time_ms / per_sample));
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentReport report;

  std::vector<PreparedCase> cases;
  for (std::size_t i = 0; i < spec.cases.size(); ++i) cases.push_back(prepare_case(spec, i));

  const std::size_t n_alg = spec.algorithms.size();
  const std::size_t n_rep = spec.repetitions;

  std::vector<std::size_t> budgets(cases.size() * n_alg, spec.budget.samples);
  if (spec.budget.samples == 0)
    for (std::size_t c = 0; c < cases.size(); ++c)
      for (std::size_t a = 0; a < n_alg; ++a)
        budgets[c * n_alg + a] = calibrate_samples(spec.algorithms[a], *cases[c].net, cases[c].ev,
                                                   spec.budget.time_ms, spec.base_seed);

  const std::size_t jobs = cases.size() * n_alg * n_rep;
  std::vector<ReportRow> rows(jobs);
  std::vector<std::exception_ptr> errors(jobs);

  auto run_job = [&](std::size_t j) {
    const std::size_t c = j / (n_alg * n_rep);
    const std::size_t a = (j / n_rep) % n_alg;
    const std::size_t rep = j % n_rep;
    const PreparedCase& pc = cases[c];
    const AlgorithmSpec& algo = spec.algorithms[a];
    ReportRow& row = rows[j];
    row.case_id = pc.info.id;
    row.algorithm = algo.name;
    row.repetition = rep;
    row.seed = spec.base_seed + rep;
    row.pr_exact = pc.info.pr_exact;
    const auto start = Clock::now();
    RunOutcome r;
    try {
      r = run_algorithm(algo, *pc.net, pc.ev, budgets[c * n_alg + a], row.seed);
    } catch (const InfeasibleError&) {
      // Counted as an ineffective run (e.g. no sample with positive score).
    }
    row.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    row.n_samples = r.samples;
    row.pr_estimate = r.pr_evidence.value;
    row.effective = r.marginals.has_value();
    row.stages = std::move(r.stages);
    if (pc.info.exact)
      row.mse = mse(*pc.info.exact, r.marginals ? *r.marginals : uniform_marginals(*pc.net, pc.ev));
  };

  if (spec.threads == 1) {
    for (std::size_t j = 0; j < jobs; ++j) run_job(j);
  } else {
    const int threads = spec.threads > 0 ? spec.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(jobs); ++j) {
      try {
        run_job(static_cast<std::size_t>(j));
      } catch (...) {
        errors[static_cast<std::size_t>(j)] = std::current_exception();
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  for (auto& pc : cases) report.cases.push_back(std::move(pc.info));
  report.rows = std::move(rows);
  std::vector<std::string> names;
  for (const auto& a : spec.algorithms) names.push_back(a.name);
  report.summary = aggregate(report.rows, names);
  return report;
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

}  // namespace

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "case_id,algorithm,repetition,seed,n_samples,pr_evidence_exact,pr_evidence_est,mse,elapsed_ms,effective\n";
  for (const auto& r : report.rows) {
    out << r.case_id << ',' << r.algorithm << ',' << r.repetition << ',' << r.seed << ',' << r.n_samples
        << ',' << fmt(r.pr_exact) << ',' << fmt(r.pr_estimate) << ',' << fmt(r.mse) << ','
        << fmt(r.elapsed_ms) << ',' << (r.effective ? 1 : 0) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const ExperimentReport& report) {
  out << "algorithm,filter,cases,runs,mean,std,min,median,max\n";
  for (const auto& a : report.summary) {
    out << a.algorithm << ',' << (a.effective_only ? "effective" : "all") << ',' << a.cases << ','
        << a.runs << ',' << fmt(a.mean) << ',' << fmt(a.stddev) << ',' << fmt(a.min) << ','
        << fmt(a.median) << ',' << fmt(a.max) << '\n';
  }
}

namespace {

using nlohmann::json;

template <class T>
void read_opt(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

GeneratorParams parse_generator(const json& j, GeneratorParams p = {}) {
  read_opt(j, "node_count", p.node_count);
  read_opt(j, "max_parents", p.max_parents);
  read_opt(j, "max_outcomes", p.max_outcomes);
  read_opt(j, "min_probability", p.min_probability);
  read_opt(j, "seed", p.seed);
  read_opt(j, "concentration", p.concentration);
  read_opt(j, "parent_window", p.parent_window);
  return p;
}

WeightMode parse_weight_mode(const std::string& s) {
  if (s == "last_stage_only") return WeightMode::last_stage_only;
  if (s == "inverse_sigma") return WeightMode::inverse_sigma;
  throw std::invalid_argument("unknown weight_mode '" + s + "'");
}

AisConfig parse_ais(const json& j) {
  AisConfig c;
  read_opt(j, "interval", c.interval);
  read_opt(j, "stages", c.stages);
  read_opt(j, "rate_initial", c.rate_initial);
  read_opt(j, "rate_final", c.rate_final);
  read_opt(j, "theta", c.theta);
  read_opt(j, "zero_weight_stages", c.zero_weight_stages);
  if (j.contains("weight_mode")) c.weight_mode = parse_weight_mode(j.at("weight_mode").get<std::string>());
  read_opt(j, "prob_floor", c.prob_floor);
  read_opt(j, "delta", c.delta);
  read_opt(j, "heuristic_uniform", c.heuristic_uniform);
  read_opt(j, "heuristic_small", c.heuristic_small);
  read_opt(j, "prior_state_cap", c.prior_state_cap);
  read_opt(j, "prior_presamples", c.prior_presamples);
  return c;
}

ExactMethod parse_exact_method(const std::string& s) {
  if (s == "automatic") return ExactMethod::automatic;
  if (s == "enumeration") return ExactMethod::enumeration;
  if (s == "elimination") return ExactMethod::elimination;
  throw std::invalid_argument("unknown exact method '" + s + "'");
}

}  // namespace

ExperimentSpec parse_experiment_spec(const std::string& json_text, const std::filesystem::path& base_dir) {
  ExperimentSpec spec;
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("experiment config: ") + e.what());
  }
  try {
    if (root.contains("evidence")) {
      const auto& e = root.at("evidence");
      read_opt(e, "bindings", spec.evidence.bindings);
      read_opt(e, "random_leaves", spec.evidence.random_leaves);
      if (e.contains("states")) {
        const auto s = e.at("states").get<std::string>();
        if (s == "uniform") spec.evidence.states = EvidenceStates::uniform;
        else if (s == "sampled") spec.evidence.states = EvidenceStates::sampled;
        else throw std::invalid_argument("unknown evidence states '" + s + "'");
      }
    }
    if (root.contains("cases")) {
      for (const auto& c : root.at("cases")) {
        NetworkSource src;
        if (c.contains("generate")) {
          src.generate = parse_generator(c.at("generate"));
          src.id = c.value("id", "gen" + std::to_string(src.generate->seed));
        } else {
          std::filesystem::path p = c.at("network").get<std::string>();
          src.path = p.is_relative() ? base_dir / p : p;
          src.id = c.value("id", p.stem().string());
        }
        spec.cases.push_back(std::move(src));
      }
    }
    if (root.contains("synthetic_suite")) {
      const auto& s = root.at("synthetic_suite");
      GeneratorParams base = s.contains("params") ? parse_generator(s.at("params")) : GeneratorParams{};
      auto suite = synthetic_suite(s.value("count", std::size_t{10}), s.value("min_nodes", std::size_t{30}),
                                   s.value("max_nodes", std::size_t{50}), base,
                                   s.value("min_leaves", spec.evidence.random_leaves));
      spec.cases.insert(spec.cases.end(), suite.begin(), suite.end());
    }
    for (const auto& a : root.at("algorithms")) {
      AlgorithmSpec algo;
      algo.kind = parse_algorithm_kind(a.at("kind").get<std::string>());
      algo.name = a.value("name", to_string(algo.kind));
      if (a.contains("config")) {
        const auto& cfg = a.at("config");
        if (algo.kind == AlgorithmKind::ais) algo.ais = parse_ais(cfg);
        if (algo.kind == AlgorithmKind::sis) read_opt(cfg, "interval", algo.sis.interval);
      }
      spec.algorithms.push_back(std::move(algo));
    }
    const auto& b = root.at("budget");
    read_opt(b, "samples", spec.budget.samples);
    read_opt(b, "time_ms", spec.budget.time_ms);
    read_opt(root, "repetitions", spec.repetitions);
    read_opt(root, "base_seed", spec.base_seed);
    read_opt(root, "threads", spec.threads);
    if (root.contains("exact")) {
      const auto& e = root.at("exact");
      if (e.contains("method")) spec.exact.method = parse_exact_method(e.at("method").get<std::string>());
      read_opt(e, "state_cap", spec.exact.state_cap);
    }
  } catch (const json::exception& e) {
    throw ModelError(std::string("experiment config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelError(std::string("experiment config: ") + e.what());
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ModelError(std::string("experiment config: ") + e.what());
  }
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open experiment config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_spec(buf.str(), path.parent_path());
}

}  // namespace aisbn
