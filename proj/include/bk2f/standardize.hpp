#pragma once

#include <vector>

#include "bk2f/analytics.hpp"
#include "bk2f/params.hpp"

namespace bk2f {

// Maps raw rate quantiles at timestep t (1..n_steps) into standardized
// log space: z = (ln q - phi(t dt)) / sqrt(var_s(t dt)). Inputs must be
// positive; t = 0 is rejected (zero variance at the root). For a fully
// degenerate model (var_s == 0 at t >= 1) every value standardizes to 0:
// deviations from a point mass are measured as zero sd units.
std::vector<double> standardize(const std::vector<double>& raw, int t,
                                const ModelParams& p, const G2Stats& g);

// Inverse map: q = exp(phi(t dt) + sqrt(var_s(t dt)) * z).
std::vector<double> destandardize(const std::vector<double>& z, int t,
                                  const ModelParams& p, const G2Stats& g);

// Method-of-moments one-step predictor: standardize at t, destandardize the
// same vector at t+1 (identity in standardized space). DriftMode::indexed
// additionally multiplies by exp(e^{alpha1 dt} + e^{alpha2 dt}), the extra
// factor of the indexed-expectation display beyond the phi recentering.
std::vector<double> mom_predict(const std::vector<double>& prev, int t,
                                const ModelParams& p, const G2Stats& g,
                                DriftMode mode = DriftMode::none);

// Indexed one-step expectation display, evaluated verbatim:
// r_t * exp((e^{alpha1 dt} + e^{alpha2 dt}) + phi((t+1) dt) - phi(t dt)).
double drift_index(double r_t, int t, const ModelParams& p);

}  // namespace bk2f
