#pragma once

#include <functional>
#include <vector>

#include "bk2f/mlp.hpp"
#include "bk2f/sim.hpp"
#include "bk2f/standardize.hpp"

namespace bk2f {

// One-step rate-space predictor: given the realized 200-vector at t_prev,
// returns the predicted 200-vector at t_prev + 1.
using Predictor =
    std::function<std::vector<double>(const std::vector<double>&, int)>;

Predictor make_mom_predictor(const ModelParams& p, const G2Stats& g,
                             DriftMode mode = DriftMode::none);
Predictor make_nn_predictor(const MlpModel& m, const ModelParams& p,
                            const G2Stats& g);

// RMSE per target t = 2..n_steps over (scenario x 200 percentiles) of
// predicted minus realized standardized quantiles, feeding each prediction
// the realized t-1 vector (one-step-ahead, no iteration).
std::vector<double> rmse_by_timestep(const Predictor& predict,
                                     const PercentileDataset& data);

// Cross-scenario sample sd (ddof = 1) of the realized standardized quantile,
// per (t, percentile); t = 1..n_steps indexed from 0. Needs >= 2 scenarios.
std::vector<std::vector<double>> stochastic_error(const PercentileDataset& data);

// Mean prediction error over scenarios divided by the stochastic error,
// per percentile, at target t. Throws naming (t, percentile) on a zero
// stochastic error.
std::vector<double> cross_section(const Predictor& predict,
                                  const PercentileDataset& data, int t);

struct EvalReport {
    std::vector<int> ts;          // 2..n_steps
    std::vector<double> nn_in, nn_oos, mom_in, mom_oos;
    std::vector<int> cross_ts;    // default {3,6,9,12} clipped to the horizon
    std::vector<std::vector<double>> cross_nn;   // per cross_ts, 200 values
    std::vector<std::vector<double>> cross_mom;  // per cross_ts, 200 values
    int n_scenarios_eval = 0;
    std::uint64_t train_fingerprint = 0;
    std::uint64_t valid_fingerprint = 0;
};

// Full pipeline in memory: trains on `train_data`, evaluates in-sample on it
// and out-of-sample on `valid_data` (each standardized with its own params),
// cross-sections on the training dataset.
EvalReport run_experiment(const PercentileDataset& train_data,
                          const PercentileDataset& valid_data,
                          const TrainConfig& tcfg, EtaSource source,
                          DriftMode drift);

std::vector<int> default_cross_section_ts(int n_steps);

}  // namespace bk2f
