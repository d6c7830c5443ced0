#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aisbn/ais.hpp"
#include "aisbn/baselines.hpp"
#include "aisbn/exact.hpp"
#include "aisbn/generator.hpp"

namespace aisbn {

// Root-mean-square difference over every outcome of every node present in the
// exact table. Throws std::invalid_argument when the tables do not cover the
// same nodes and outcomes.
double mse(const MarginalTable& exact, const MarginalTable& estimated);

enum class AlgorithmKind { logic, lw, sis, ais };

struct AlgorithmSpec {
  std::string name;
  AlgorithmKind kind = AlgorithmKind::ais;
  AisConfig ais{};
  SisOptions sis{};
};

AlgorithmKind parse_algorithm_kind(const std::string& text);
std::string to_string(AlgorithmKind kind);

struct RunOutcome {
  PrEstimate pr_evidence;
  std::optional<MarginalTable> marginals;
  std::size_t samples = 0;
  std::vector<StageStats> stages;
};

// Runs one algorithm with a total budget of `samples` (for AIS-BN this
// includes the learning stages).
RunOutcome run_algorithm(const AlgorithmSpec& spec, const BayesianNetwork& net, const Evidence& ev,
                         std::size_t samples, std::uint64_t seed, const Execution& exec = {});

double convergence_ratio(double mse_n, double mse_4n);

struct ConvergenceMeasurement {
  double mean_mse_n = 0.0;
  double mean_mse_4n = 0.0;
  double ratio = 0.0;
};

// Mean MSE at n samples over mean MSE at 4n samples across the seed batch.
// For AIS-BN, n counts post-learning samples only. Ineffective runs are scored
// against uniform marginals.
ConvergenceMeasurement convergence_ratio(const BayesianNetwork& net, const Evidence& ev,
                                         const MarginalTable& exact, const AlgorithmSpec& spec,
                                         std::size_t n, std::span<const std::uint64_t> seeds,
                                         const Execution& exec = {});

// ---------------------------------------------------------------------------
// Experiment harness.

struct NetworkSource {
  std::string id;
  std::filesystem::path path;              // used when `generate` is empty
  std::optional<GeneratorParams> generate;
};

struct EvidencePolicy {
  std::vector<std::string> bindings;  // explicit NodeId=OutcomeLabel pairs
  std::size_t random_leaves = 0;      // used when bindings is empty
  EvidenceStates states = EvidenceStates::uniform;
};

struct Budget {
  std::size_t samples = 0;  // sample-count budget (deterministic)
  double time_ms = 0.0;     // wall-time budget, used when samples == 0
};

struct ExperimentSpec {
  std::vector<NetworkSource> cases;
  EvidencePolicy evidence;
  std::vector<AlgorithmSpec> algorithms;
  Budget budget;
  std::size_t repetitions = 10;
  std::uint64_t base_seed = 1;
  ExactOptions exact{};
  int threads = 1;  // jobs run concurrently when != 1; each job is single-threaded

  void validate() const;
};

// Networks of `count` cases with node counts spread over [min_nodes, max_nodes].
// Generator seeds run upward from base.seed; seeds whose network has fewer than
// `min_leaves` leaves are skipped.
std::vector<NetworkSource> synthetic_suite(std::size_t count, std::size_t min_nodes,
                                           std::size_t max_nodes, const GeneratorParams& base,
                                           std::size_t min_leaves = 0);

struct CaseInfo {
  std::string id;
  std::string evidence;
  std::optional<double> pr_exact;
  std::optional<MarginalTable> exact;  // empty when the oracle was infeasible
};

struct ReportRow {
  std::string case_id;
  std::string algorithm;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;
  std::optional<double> pr_exact;
  double pr_estimate = 0.0;
  // Against the exact marginals; ineffective runs are scored with uniform
  // marginals. Empty when the oracle was infeasible.
  std::optional<double> mse;
  bool effective = false;
  double elapsed_ms = 0.0;
  std::vector<StageStats> stages;
};

struct AggregateRow {
  std::string algorithm;
  bool effective_only = false;
  std::size_t cases = 0;
  std::size_t runs = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};

struct ExperimentReport {
  std::vector<CaseInfo> cases;
  std::vector<ReportRow> rows;  // case-major, then algorithm, then repetition
  std::vector<AggregateRow> summary;
};

ExperimentReport run_experiment(const ExperimentSpec& spec);

// Per algorithm: MSE averaged over repetitions per case, then summarized across
// cases. Produces an all-runs row and an effective-runs-only row per algorithm.
std::vector<AggregateRow> aggregate(const std::vector<ReportRow>& rows,
                                    const std::vector<std::string>& algorithm_order);

// Per-case mean MSE for one algorithm (all runs, or effective runs only).
std::vector<double> per_case_mse(const std::vector<ReportRow>& rows, const std::string& algorithm,
                                 bool effective_only);

double median(std::vector<double> values);

void write_report_csv(std::ostream& out, const ExperimentReport& report);
void write_summary_csv(std::ostream& out, const ExperimentReport& report);

// JSON experiment description; see docs/experiment-config.md. Relative network
// paths resolve against `base_dir`.
ExperimentSpec parse_experiment_spec(const std::string& json_text, const std::filesystem::path& base_dir);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

}  // namespace aisbn
