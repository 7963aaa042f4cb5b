#include "bk2f/standardize.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bk2f {

namespace {

double sd_at(int t, const ModelParams& p, const G2Stats& g, const char* who) {
    if (t < 1)
        throw std::invalid_argument(std::string(who) +
                                    ": t must be >= 1 (got " + std::to_string(t) + ")");
    const double v = var_s(t * p.dt, p, g);
    return v > 0.0 ? std::sqrt(v) : 0.0;
}

}  // namespace

std::vector<double> standardize(const std::vector<double>& raw, int t,
                                const ModelParams& p, const G2Stats& g) {
    const double sd = sd_at(t, p, g, "standardize");
    const double center = phi(t * p.dt, p);
    std::vector<double> z(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!(raw[i] > 0.0) || !std::isfinite(raw[i]))
            throw std::invalid_argument("standardize: values must be positive finite");
        z[i] = sd > 0.0 ? (std::log(raw[i]) - center) / sd : 0.0;
    }
    return z;
}

std::vector<double> destandardize(const std::vector<double>& z, int t,
                                  const ModelParams& p, const G2Stats& g) {
    const double sd = sd_at(t, p, g, "destandardize");
    const double center = phi(t * p.dt, p);
    std::vector<double> q(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) q[i] = std::exp(center + sd * z[i]);
    return q;
}

std::vector<double> mom_predict(const std::vector<double>& prev, int t,
                                const ModelParams& p, const G2Stats& g,
                                DriftMode mode) {
    std::vector<double> out = destandardize(standardize(prev, t, p, g), t + 1, p, g);
    if (mode == DriftMode::indexed) {
        const double factor =
            std::exp(std::exp(p.alpha1 * p.dt) + std::exp(p.alpha2 * p.dt));
        for (double& v : out) v *= factor;
    }
    return out;
}

double drift_index(double r_t, int t, const ModelParams& p) {
    if (t < 1) throw std::invalid_argument("drift_index: t must be >= 1");
    const double index = std::exp(p.alpha1 * p.dt) + std::exp(p.alpha2 * p.dt);
    return r_t * std::exp(index + phi((t + 1) * p.dt, p) - phi(t * p.dt, p));
}

}  // namespace bk2f
