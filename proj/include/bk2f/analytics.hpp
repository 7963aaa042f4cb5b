#pragma once

#include <optional>

#include "bk2f/params.hpp"

namespace bk2f {

// Constants of the equivalent two-factor Gaussian decomposition of ln r.
struct G2Stats {
    double eta = 0.0;      // |alpha1*sigma / (alpha1 - alpha2)|, >= 0
    double sigma_g = 0.0;  // sqrt(sigma1^2 + eta^2 - 2 rho' sigma1 eta), >= 0
    EtaSource source = EtaSource::as_printed;

    // Defined only for sigma_g > 0; throws std::domain_error otherwise.
    double rho_g() const;

    bool has_rho() const { return rho_g_.has_value(); }
    std::optional<double> rho_g_;  // (rho' sigma1 - eta) / sigma_g
};

G2Stats derive_g2(const ModelParams& p, EtaSource source = EtaSource::as_printed);

// Mean-process drift feeding the short-rate factor:
// theta(t) = alpha1 ln(m0) e^{-alpha2 t} + alpha1 mu' (1 - e^{-alpha2 t}).
double theta(double t, const ModelParams& p);

// Deterministic recentering term of ln r:
// phi(t) = ln(r0) e^{-alpha1 t} + integral_0^t theta(v) e^{-alpha1 (t-v)} dv,
// evaluated in closed form. Independent of sigma1/sigma2.
double phi(double t, const ModelParams& p);

// E[S_t] for the centered factor sum started at (x0, y0).
double mean_s(double t, double x0, double y0, const ModelParams& p);

// Var[S_t] =   sigma_g^2/(2 a1) (1 - e^{-2 a1 t})
//            - 2 eta^2/(a1+a2)  (1 - e^{-(a1+a2) t})
//            + eta^2/(2 a2)     (1 - e^{-2 a2 t});  nonnegative on the grid.
double var_s(double t, const ModelParams& p, const G2Stats& g);

// Same variance assembled as Var[x] + 2 Cov[x,y] + Var[y] with the
// rho_g sigma_g eta cross term; equals var_s when rho' = 0. Needs rho_g.
double var_s_recomposed(double t, const ModelParams& p, const G2Stats& g);

}  // namespace bk2f
