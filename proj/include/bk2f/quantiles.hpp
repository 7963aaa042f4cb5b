#pragma once

#include <cstddef>
#include <vector>

namespace bk2f {

// Fixed probability grid: p_k = k/200 for k = 1..200 (0.5% steps, last = 100%).
inline constexpr int kNumQuantiles = 200;

double quantile_probability(int k);       // k = 0..199 -> (k+1)/200
std::vector<double> percentile_grid();    // all 200 probabilities

// Order-statistic condensation: out[k] = sorted(values)[ceil(p_k * n)] with
// 1-based rank (so p = 1.00 is the max). Rank arithmetic is exact (integer).
// Sorts `values` in place. Throws std::invalid_argument on empty input.
void condense_percentiles(std::vector<double>& values, double* out);

std::vector<double> condense_percentiles(std::vector<double> values);

}  // namespace bk2f
