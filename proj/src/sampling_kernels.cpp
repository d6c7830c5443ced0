#include <omp.h>

#include "aisbn/engine.hpp"

namespace aisbn {

namespace {

std::size_t chunk_count(std::size_t samples) {
  return (samples + kSamplesPerChunk - 1) / kSamplesPerChunk;
}

// One chunk: generate, score and accumulate. Sampling and scoring are fused so
// each row index is computed once.
ScoreAccumulator run_chunk(const SamplingJob& job, std::size_t chunk) {
  const BayesianNetwork& net = job.net;
  const auto& order = net.topological_order();
  ScoreAccumulator acc(net, job.track_families);
  RngStream rng(job.seed, chunk_stream(job.stream, chunk));

  const std::size_t begin = chunk * kSamplesPerChunk;
  const std::size_t end = std::min(job.samples, begin + kSamplesPerChunk);
  Assignment a(net.size(), 0);
  std::vector<bool> observed(net.size(), false);
  for (auto [node, value] : job.ev) {
    a[node] = value;
    observed[node] = true;
  }

  for (std::size_t i = begin; i < end; ++i) {
    double score = 1.0;
    if (job.mode == SamplingMode::importance) {
      for (NodeId v : order) {
        const std::size_t r = net.row_index(v, a);
        if (observed[v]) {
          score *= net.cpt(v).at(r, a[v]);
          continue;
        }
        const auto row = job.icpt.table(v).row(r);
        const Outcome x = select_outcome(row, rng.uniform());
        a[v] = x;
        if (row[x] == 0.0)
          throw Error("importance function assigns zero probability to a generated sample");
        score *= net.cpt(v).at(r, x) / row[x];
      }
    } else {
      for (NodeId v : order)
        a[v] = select_outcome(net.cpt(v).row(net.row_index(v, a)), rng.uniform());
      score = job.ev.consistent_with(a) ? 1.0 : 0.0;
    }
    acc.add(net, a, score);
  }
  return acc;
}

}  // namespace

std::uint64_t chunk_stream(std::uint64_t stream, std::size_t chunk) {
  return (stream << 32) ^ static_cast<std::uint64_t>(chunk);
}

ScoreAccumulator sample_serial(const SamplingJob& job) {
  ScoreAccumulator total(job.net, job.track_families);
  const std::size_t chunks = chunk_count(job.samples);
  for (std::size_t c = 0; c < chunks; ++c) total.merge(run_chunk(job, c));
  return total;
}

ScoreAccumulator sample_parallel(const SamplingJob& job, const Execution& exec) {
  const std::size_t chunks = chunk_count(job.samples);
  std::vector<ScoreAccumulator> partial(chunks);
  const int threads = exec.threads > 0 ? exec.threads : omp_get_max_threads();
  // Exceptions must not escape the parallel region.
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t c = 0; c < chunks; ++c) {
    try {
      partial[c] = run_chunk(job, c);
    } catch (...) {
#pragma omp critical(aisbn_sampling_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  ScoreAccumulator total(job.net, job.track_families);
  for (const auto& acc : partial) total.merge(acc);
  return total;
}

ScoreAccumulator run_sampling(const SamplingJob& job, const Execution& exec) {
  return exec.parallel() ? sample_parallel(job, exec) : sample_serial(job);
}

}  // namespace aisbn
