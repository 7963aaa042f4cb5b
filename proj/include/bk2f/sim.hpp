#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bk2f/params.hpp"
#include "bk2f/quantiles.hpp"

namespace bk2f {

// One node of the branching tree, in rate space (both levels strictly positive).
struct NodeState {
    double r = 0.0;  // short rate
    double m = 0.0;  // stochastic mean level
};

// One Euler step of the exponential scheme. The r update uses the
// pre-update ln m. Positivity is structural (outputs are exponentials).
NodeState euler_step(const NodeState& node, double z_m, double z_r,
                     const ModelParams& p);

// Percentile-condensed branching dataset: per scenario, per t = 0..n_steps,
// the 200-point quantile vector of r (t = 0 rows are constant r0).
struct PercentileDataset {
    ModelParams params;
    SimConfig sim;
    EtaSource eta_source = EtaSource::as_printed;
    std::uint64_t fingerprint = 0;  // dataset_fingerprint(params, sim, eta_source)
    std::vector<double> q;          // [scenario][t][kNumQuantiles]

    int n_scenarios() const { return sim.n_scenarios; }
    int n_steps() const { return sim.n_steps; }
    std::span<const double, kNumQuantiles> quantiles(int scenario, int t) const;
    std::span<double, kNumQuantiles> quantiles(int scenario, int t);
};

// Simulates one scenario tree and writes (n_steps+1) quantile vectors to
// `out`. OpenMP-parallel over each level's children; results are
// bit-identical for any thread count because every child's shocks are a pure
// function of (master_seed, scenario_id, step, child_index).
void simulate_scenario(const ModelParams& p, const SimConfig& cfg,
                       std::uint32_t scenario_id, double* out);

// Plain-loop reference implementation of the same recursion; kept for
// testing the parallel kernel (results must match bit for bit).
void simulate_scenario_reference(const ModelParams& p, const SimConfig& cfg,
                                 std::uint32_t scenario_id, double* out);

// Runs all scenarios (OpenMP-parallel across scenarios) and assembles the
// dataset. Errors carry the offending scenario_id; the level-width guard
// (max_nodes) fails before any work starts.
PercentileDataset generate_dataset(const ModelParams& p, const SimConfig& cfg,
                                   EtaSource eta_source = EtaSource::as_printed);

// Reference-engine variant of generate_dataset (serial, for tests/benchmarks).
PercentileDataset generate_dataset_reference(const ModelParams& p, const SimConfig& cfg,
                                             EtaSource eta_source = EtaSource::as_printed);

// Peak resident bytes for the widest level transition (parents + children
// + sort scratch); used by the CLI large-run guard's refusal message.
std::uint64_t estimate_peak_bytes(const SimConfig& cfg);

}  // namespace bk2f
