#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bk2f/analytics.hpp"
#include "bk2f/params.hpp"
#include "bk2f/sim.hpp"

namespace bk2f {

enum class InputActivation { identity, logistic };
std::string to_string(InputActivation a);
InputActivation input_activation_from_string(const std::string& s);

// Single-hidden-layer perceptron out = W2 * f(W1 * g(x) + b1) + b2 with
// logistic f and configurable input activation g. Row-major weights.
struct MlpModel {
    int n_in = 0, n_hidden = 0, n_out = 0;
    std::vector<double> w1;  // [n_hidden][n_in]
    std::vector<double> b1;  // [n_hidden]
    std::vector<double> w2;  // [n_out][n_hidden]
    std::vector<double> b2;  // [n_out]
    InputActivation input_activation = InputActivation::identity;
    // Scaler recipe the net was trained against.
    EtaSource scaler_eta_source = EtaSource::as_printed;
    std::uint64_t scaler_fingerprint = 0;  // params_fingerprint at train time

    // hidden must hold n_hidden doubles; x exactly n_in, out exactly n_out.
    void forward(const double* x, double* out, double* hidden) const;
    std::vector<double> forward(const std::vector<double>& x) const;
};

MlpModel make_zero_model(int n_in, int n_hidden, int n_out,
                         InputActivation g = InputActivation::identity);

// Standardized one-step pairs (x at t, y at t+1) drawn from t = 1..n_steps-1.
// Construction fails fast on non-finite values.
struct TrainingPairs {
    int n_in = 0, n_out = 0;
    std::vector<double> x;         // [row][n_in]
    std::vector<double> y;         // [row][n_out]
    std::vector<int> scenario;     // per row
    std::vector<int> t_from;       // per row
    int n_rows() const { return static_cast<int>(scenario.size()); }
};

TrainingPairs make_training_pairs(const PercentileDataset& data, EtaSource source);

// Mean squared error over all rows x outputs, plus l2/2 * ||weights||^2
// (biases unpenalized).
double loss(const MlpModel& m, const TrainingPairs& pairs, double l2);

// Gradient of `loss` restricted to `rows` (batch), exact backpropagation.
struct Gradients {
    std::vector<double> w1, b1, w2, b2;
};
void backward(const MlpModel& m, const TrainingPairs& pairs,
              const std::vector<int>& rows, double l2, Gradients& g);

struct TrainConfig {
    double learning_rate = 0.2;  // per-entry MSE scale; see model file header
    int batch_size = 32;
    int max_epochs = 200;
    double tol = 1e-6;           // min holdout improvement
    int patience = 10;           // stagnant epochs before stopping
    double l2 = 1e-6;
    std::uint64_t seed = 1;
    double holdout_fraction = 0.1;  // held out by scenario, not by row
    InputActivation input_activation = InputActivation::identity;
};

struct TrainResult {
    MlpModel model;          // best holdout-MSE snapshot
    int epochs_run = 0;
    double best_holdout_mse = 0.0;
    std::vector<int> holdout_scenarios;
};

// Deterministic SGD: (seed, pairs, cfg) fully determine the result.
// Divergence (non-finite loss) aborts with diagnostics.
TrainResult train(const TrainingPairs& pairs, const TrainConfig& cfg,
                  EtaSource scaler_eta_source, std::uint64_t scaler_fingerprint);

// Standardize prev at t with the supplied params, run the net, destandardize
// at t+1. Rejects a G2Stats whose eta source differs from the scaler recipe
// the model was trained with.
std::vector<double> nn_predict(const MlpModel& m, const std::vector<double>& prev,
                               int t, const ModelParams& p, const G2Stats& g);

// Flat text model file (dims, activations, scaler fingerprint, training
// hyperparameters, then one line per coefficient at 17 significant digits).
void write_model(const std::string& path, const MlpModel& m, const TrainConfig& cfg);
MlpModel read_model(const std::string& path);

}  // namespace bk2f
