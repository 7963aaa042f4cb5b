#include "bk2f/quantiles.hpp"

#include <algorithm>
#include <stdexcept>

namespace bk2f {

double quantile_probability(int k) { return (k + 1) / static_cast<double>(kNumQuantiles); }

std::vector<double> percentile_grid() {
    std::vector<double> g(kNumQuantiles);
    for (int k = 0; k < kNumQuantiles; ++k) g[k] = quantile_probability(k);
    return g;
}

void condense_percentiles(std::vector<double>& values, double* out) {
    if (values.empty())
        throw std::invalid_argument("condense_percentiles: empty sample");
    std::sort(values.begin(), values.end());
    const std::uint64_t n = values.size();
    for (int k = 1; k <= kNumQuantiles; ++k) {
        // 1-based rank ceil(p_k * n) with p_k = k/200, computed exactly.
        const std::uint64_t rank =
            (static_cast<std::uint64_t>(k) * n + kNumQuantiles - 1) / kNumQuantiles;
        out[k - 1] = values[rank - 1];
    }
}

std::vector<double> condense_percentiles(std::vector<double> values) {
    std::vector<double> out(kNumQuantiles);
    condense_percentiles(values, out.data());
    return out;
}

}  // namespace bk2f
