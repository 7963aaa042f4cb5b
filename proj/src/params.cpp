#include "bk2f/params.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace bk2f {

std::string to_string(EtaSource s) {
    return s == EtaSource::as_printed ? "as_printed" : "derivation";
}

std::string to_string(DriftMode m) {
    return m == DriftMode::none ? "none" : "indexed";
}

EtaSource eta_source_from_string(const std::string& s) {
    if (s == "as_printed") return EtaSource::as_printed;
    if (s == "derivation") return EtaSource::derivation;
    throw std::invalid_argument("eta_source must be as_printed or derivation, got '" + s + "'");
}

DriftMode drift_mode_from_string(const std::string& s) {
    if (s == "none") return DriftMode::none;
    if (s == "indexed") return DriftMode::indexed;
    throw std::invalid_argument("drift_mode must be none or indexed, got '" + s + "'");
}

void ModelParams::validate() const {
    auto bad = [](const std::string& field, const std::string& why) {
        throw std::invalid_argument("ModelParams." + field + ": " + why);
    };
    if (!(alpha1 > 0.0)) bad("alpha1", "must be > 0");
    if (!(alpha2 > 0.0)) bad("alpha2", "must be > 0");
    if (alpha1 == alpha2) bad("alpha2", "must differ from alpha1");
    if (!(sigma1 >= 0.0)) bad("sigma1", "must be >= 0");
    if (!(sigma2 >= 0.0)) bad("sigma2", "must be >= 0");
    if (!(std::fabs(rho_prime) <= 1.0)) bad("rho_prime", "must lie in [-1, 1]");
    if (!(r0 > 0.0)) bad("r0", "must be > 0");
    if (!(m0 > 0.0)) bad("m0", "must be > 0");
    if (!(dt > 0.0)) bad("dt", "must be > 0");
    if (n_steps < 2) bad("n_steps", "must be >= 2");
    if (!std::isfinite(mu_prime)) bad("mu_prime", "must be finite");
}

void SimConfig::validate() const {
    auto bad = [](const std::string& field, const std::string& why) {
        throw std::invalid_argument("SimConfig." + field + ": " + why);
    };
    if (branch_factor < 1) bad("branch_factor", "must be >= 1");
    if (n_steps < 2) bad("n_steps", "must be >= 2");
    if (branch_depth < 0) bad("branch_depth", "must be >= 0");
    if (n_scenarios < 1) bad("n_scenarios", "must be >= 1");
    if (max_nodes < 1) bad("max_nodes", "must be >= 1");
    // Level widths must stay under max_nodes; report the first offender.
    std::uint64_t width = 1;
    for (int k = 1; k <= n_steps; ++k) {
        if (k <= branch_depth) {
            if (width > max_nodes / static_cast<std::uint64_t>(branch_factor)) {
                std::ostringstream os;
                os << "SimConfig.max_nodes: level " << k << " would hold "
                   << width << " x " << branch_factor << " nodes, above the cap of "
                   << max_nodes;
                throw std::invalid_argument(os.str());
            }
            width *= static_cast<std::uint64_t>(branch_factor);
        }
    }
}

std::uint64_t SimConfig::level_size(int k) const {
    std::uint64_t width = 1;
    int levels = k < branch_depth ? k : branch_depth;
    for (int i = 0; i < levels; ++i) width *= static_cast<std::uint64_t>(branch_factor);
    return width;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string canonical_text(const ModelParams& p) {
    std::ostringstream os;
    os << "alpha1=" << format_double(p.alpha1)
       << ";alpha2=" << format_double(p.alpha2)
       << ";sigma1=" << format_double(p.sigma1)
       << ";sigma2=" << format_double(p.sigma2)
       << ";mu_prime=" << format_double(p.mu_prime)
       << ";rho_prime=" << format_double(p.rho_prime)
       << ";r0=" << format_double(p.r0)
       << ";m0=" << format_double(p.m0)
       << ";dt=" << format_double(p.dt)
       << ";n_steps=" << p.n_steps;
    return os.str();
}

std::string canonical_text(const SimConfig& c) {
    std::ostringstream os;
    os << "branch_factor=" << c.branch_factor
       << ";n_steps=" << c.n_steps
       << ";branch_depth=" << c.branch_depth
       << ";n_scenarios=" << c.n_scenarios
       << ";master_seed=" << c.master_seed
       << ";max_nodes=" << c.max_nodes;
    return os.str();
}

std::uint64_t params_fingerprint(const ModelParams& p, EtaSource s) {
    return fnv1a64(canonical_text(p) + ";eta_source=" + to_string(s));
}

std::uint64_t dataset_fingerprint(const ModelParams& p, const SimConfig& c, EtaSource s) {
    return fnv1a64(canonical_text(p) + "|" + canonical_text(c) +
                   ";eta_source=" + to_string(s));
}

}  // namespace bk2f
