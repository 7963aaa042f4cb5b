#pragma once

#include <cstdint>
#include <string>

namespace bk2f {

// Source of the hump-volatility eta in the two-factor decomposition.
//   as_printed: eta = |alpha1*sigma1 / (alpha1 - alpha2)|  (default)
//   derivation: eta = |alpha1*sigma2 / (alpha1 - alpha2)|
enum class EtaSource { as_printed, derivation };

// Extra drift applied by the moment-matching predictor.
//   none:    identity in standardized space (default)
//   indexed: multiplies predictions by exp(e^{alpha1*dt} + e^{alpha2*dt})
enum class DriftMode { none, indexed };

std::string to_string(EtaSource s);
std::string to_string(DriftMode m);
EtaSource eta_source_from_string(const std::string& s);
DriftMode drift_mode_from_string(const std::string& s);

// Two-factor lognormal short-rate model
//   d ln r = alpha1 (ln m - ln r) dt + sigma1 dZ1
//   d ln m = alpha2 (mu' - ln m) dt + sigma2 dZ2,  corr(dZ1,dZ2) = rho'
struct ModelParams {
    double alpha1 = 0.0;     // short-rate reversion speed, > 0
    double alpha2 = 0.0;     // mean-process reversion speed, > 0, != alpha1
    double sigma1 = 0.0;     // short-rate log volatility, >= 0
    double sigma2 = 0.0;     // mean-process log volatility, >= 0
    double mu_prime = 0.0;   // long-run log level (config stores the level, engine its log)
    double rho_prime = 0.0;  // shock correlation, |rho'| <= 1
    double r0 = 0.0;         // initial short rate, > 0
    double m0 = 0.0;         // initial mean-process level, > 0 (defaults to exp(mu'))
    double dt = 1.0 / 12.0;  // timestep in years, > 0
    int n_steps = 12;        // horizon in steps, >= 2

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

// Uniform grid t_k = k * dt, k = 0..n_steps.
struct TimeGrid {
    double dt = 0.0;
    int n_steps = 0;
    double time(int k) const { return k * dt; }
};

// Branching Monte Carlo configuration. Levels multiply by branch_factor up to
// branch_depth, then evolve one child per node until n_steps.
struct SimConfig {
    int branch_factor = 4;              // children per node while branching, >= 1
    int n_steps = 12;                   // must equal ModelParams::n_steps
    int branch_depth = 8;               // levels that branch; cap on tree width
    int n_scenarios = 500;              // independent trees, >= 1
    std::uint64_t master_seed = 20240901;
    std::uint64_t max_nodes = 16777216; // hard cap on a level's width; exceeding fails

    void validate() const;
    // Width of level k (nodes alive after step k), k >= 0.
    std::uint64_t level_size(int k) const;
};

// Stable 64-bit fingerprints over canonical text serializations (FNV-1a).
std::uint64_t fnv1a64(const std::string& text);
std::string canonical_text(const ModelParams& p);
std::string canonical_text(const SimConfig& c);
// Identifies the standardization scaler: params + eta source.
std::uint64_t params_fingerprint(const ModelParams& p, EtaSource s);
// Identifies a generated dataset: params + sim config (incl. effective seed).
std::uint64_t dataset_fingerprint(const ModelParams& p, const SimConfig& c, EtaSource s);

std::string format_double(double v);  // 17 significant digits, round-trip exact

}  // namespace bk2f
