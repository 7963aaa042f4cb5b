#include "bk2f/analytics.hpp"

#include <cmath>
#include <stdexcept>

namespace bk2f {

double G2Stats::rho_g() const {
    if (!rho_g_.has_value())
        throw std::domain_error("rho_g undefined: sigma_g = 0 (degenerate model)");
    return *rho_g_;
}

G2Stats derive_g2(const ModelParams& p, EtaSource source) {
    p.validate();
    G2Stats g;
    g.source = source;
    const double sig_eta = source == EtaSource::as_printed ? p.sigma1 : p.sigma2;
    g.eta = std::fabs(p.alpha1 * sig_eta / (p.alpha1 - p.alpha2));
    const double var =
        p.sigma1 * p.sigma1 + g.eta * g.eta - 2.0 * p.rho_prime * p.sigma1 * g.eta;
    g.sigma_g = std::sqrt(var > 0.0 ? var : 0.0);
    if (g.sigma_g > 0.0)
        g.rho_g_ = (p.rho_prime * p.sigma1 - g.eta) / g.sigma_g;
    return g;
}

double theta(double t, const ModelParams& p) {
    const double decay = std::exp(-p.alpha2 * t);
    return p.alpha1 * std::log(p.m0) * decay + p.alpha1 * p.mu_prime * (1.0 - decay);
}

double phi(double t, const ModelParams& p) {
    // Closed form of ln(r0) e^{-a1 t} + int_0^t theta(v) e^{-a1 (t - v)} dv:
    // the integrand is a sum of exponentials in v, integrated term by term.
    const double e1 = std::exp(-p.alpha1 * t);
    const double e2 = std::exp(-p.alpha2 * t);
    return std::log(p.r0) * e1 + p.mu_prime * (1.0 - e1) +
           p.alpha1 * (std::log(p.m0) - p.mu_prime) * (e2 - e1) /
               (p.alpha1 - p.alpha2);
}

double mean_s(double t, double x0, double y0, const ModelParams& p) {
    return x0 * std::exp(-p.alpha1 * t) + y0 * std::exp(-p.alpha2 * t);
}

double var_s(double t, const ModelParams& p, const G2Stats& g) {
    const double a1 = p.alpha1, a2 = p.alpha2;
    const double v = g.sigma_g * g.sigma_g / (2.0 * a1) * (1.0 - std::exp(-2.0 * a1 * t)) -
                     2.0 * g.eta * g.eta / (a1 + a2) * (1.0 - std::exp(-(a1 + a2) * t)) +
                     g.eta * g.eta / (2.0 * a2) * (1.0 - std::exp(-2.0 * a2 * t));
    if (v < 0.0)
        throw std::domain_error("var_s: negative variance at t = " + format_double(t));
    return v;
}

double var_s_recomposed(double t, const ModelParams& p, const G2Stats& g) {
    const double a1 = p.alpha1, a2 = p.alpha2;
    const double vx = g.sigma_g * g.sigma_g / (2.0 * a1) * (1.0 - std::exp(-2.0 * a1 * t));
    const double vy = g.eta * g.eta / (2.0 * a2) * (1.0 - std::exp(-2.0 * a2 * t));
    const double cov = g.rho_g() * g.sigma_g * g.eta / (a1 + a2) *
                       (1.0 - std::exp(-(a1 + a2) * t));
    return vx + 2.0 * cov + vy;
}

}  // namespace bk2f
