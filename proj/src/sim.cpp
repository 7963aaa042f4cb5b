#include "bk2f/sim.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bk2f/rng.hpp"

namespace bk2f {

namespace {

// Shared single-child arithmetic: both engines must perform bit-identical
// operations. The r drift uses the parent's (pre-update) ln m.
inline void child_update(const ModelParams& p, double sqrt_dt, double corr_scale,
                         double lr_p, double lm_p, std::uint64_t seed,
                         std::uint32_t scenario_id, std::uint32_t step,
                         std::uint64_t child_index, double& lr_c, double& lm_c) {
    const ShockPair z = child_shocks(seed, scenario_id, step, child_index);
    const double zm = z.z_m;
    const double zr = p.rho_prime * z.z_m + corr_scale * z.z_r;
    lm_c = lm_p + p.alpha2 * (p.mu_prime - lm_p) * p.dt + p.sigma2 * zm * sqrt_dt;
    lr_c = lr_p + p.alpha1 * (lm_p - lr_p) * p.dt + p.sigma1 * zr * sqrt_dt;
}

// Quantiles of r from a level of ln r values (exp is monotone, so selecting
// in log space and exponentiating the 200 picks is exact and cheap).
void condense_level(std::vector<double>& scratch, double* out) {
    double picks[kNumQuantiles];
    condense_percentiles(scratch, picks);
    for (int k = 0; k < kNumQuantiles; ++k) out[k] = std::exp(picks[k]);
}

template <bool Parallel>
void run_scenario(const ModelParams& p, const SimConfig& cfg,
                  std::uint32_t scenario_id, double* out) {
    const std::uint64_t width = cfg.level_size(cfg.n_steps);
    std::vector<double> lr_cur(1, std::log(p.r0)), lm_cur(1, std::log(p.m0));
    std::vector<double> lr_next, lm_next, scratch;
    lr_next.reserve(width);
    lm_next.reserve(width);
    scratch.reserve(width);

    for (int k = 0; k < kNumQuantiles; ++k) out[k] = p.r0;  // t = 0 row

    const double sqrt_dt = std::sqrt(p.dt);
    const double corr_scale = std::sqrt(1.0 - p.rho_prime * p.rho_prime);
    for (int step = 1; step <= cfg.n_steps; ++step) {
        const std::int64_t bf = step <= cfg.branch_depth ? cfg.branch_factor : 1;
        const std::int64_t n_children = static_cast<std::int64_t>(lr_cur.size()) * bf;
        lr_next.resize(n_children);
        lm_next.resize(n_children);
        if constexpr (Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n_children >= 16384 && !omp_in_parallel())
#endif
            for (std::int64_t ci = 0; ci < n_children; ++ci) {
                const std::int64_t parent = ci / bf;
                child_update(p, sqrt_dt, corr_scale, lr_cur[parent], lm_cur[parent],
                             cfg.master_seed, scenario_id, static_cast<std::uint32_t>(step),
                             static_cast<std::uint64_t>(ci), lr_next[ci], lm_next[ci]);
            }
        } else {
            std::int64_t ci = 0;
            for (std::int64_t parent = 0; parent < static_cast<std::int64_t>(lr_cur.size());
                 ++parent) {
                for (std::int64_t c = 0; c < bf; ++c, ++ci) {
                    child_update(p, sqrt_dt, corr_scale, lr_cur[parent], lm_cur[parent],
                                 cfg.master_seed, scenario_id,
                                 static_cast<std::uint32_t>(step),
                                 static_cast<std::uint64_t>(ci), lr_next[ci], lm_next[ci]);
                }
            }
        }
        scratch.assign(lr_next.begin(), lr_next.end());
        condense_level(scratch, out + static_cast<std::size_t>(step) * kNumQuantiles);
        lr_cur.swap(lr_next);
        lm_cur.swap(lm_next);
    }
}

void validate_pair(const ModelParams& p, const SimConfig& cfg) {
    p.validate();
    cfg.validate();
    if (p.n_steps != cfg.n_steps)
        throw std::invalid_argument(
            "SimConfig.n_steps: must equal ModelParams.n_steps (" +
            std::to_string(cfg.n_steps) + " vs " + std::to_string(p.n_steps) + ")");
}

template <bool Parallel>
PercentileDataset run_dataset(const ModelParams& p, const SimConfig& cfg,
                              EtaSource eta_source) {
    validate_pair(p, cfg);
    PercentileDataset data;
    data.params = p;
    data.sim = cfg;
    data.eta_source = eta_source;
    data.fingerprint = dataset_fingerprint(p, cfg, eta_source);
    const std::size_t per_scen = static_cast<std::size_t>(cfg.n_steps + 1) * kNumQuantiles;
    data.q.resize(static_cast<std::size_t>(cfg.n_scenarios) * per_scen);

    std::atomic<bool> failed{false};
    std::string err;
    if constexpr (Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (int s = 0; s < cfg.n_scenarios; ++s) {
            if (failed.load(std::memory_order_relaxed)) continue;
            try {
                run_scenario<true>(p, cfg, static_cast<std::uint32_t>(s),
                                   data.q.data() + static_cast<std::size_t>(s) * per_scen);
            } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
                {
                    if (!failed.exchange(true)) {
                        err = "scenario " + std::to_string(s) + ": " + e.what();
                    }
                }
            }
        }
    } else {
        for (int s = 0; s < cfg.n_scenarios; ++s) {
            try {
                run_scenario<false>(p, cfg, static_cast<std::uint32_t>(s),
                                    data.q.data() + static_cast<std::size_t>(s) * per_scen);
            } catch (const std::exception& e) {
                failed = true;
                err = "scenario " + std::to_string(s) + ": " + e.what();
                break;
            }
        }
    }
    if (failed) throw std::runtime_error("generate_dataset: " + err);
    return data;
}

}  // namespace

NodeState euler_step(const NodeState& node, double z_m, double z_r,
                     const ModelParams& p) {
    if (!(node.r > 0.0) || !(node.m > 0.0))
        throw std::invalid_argument("euler_step: node levels must be > 0");
    const double lm = std::log(node.m);
    const double lr = std::log(node.r);
    const double sqrt_dt = std::sqrt(p.dt);
    NodeState next;
    next.m = std::exp(lm + p.alpha2 * (p.mu_prime - lm) * p.dt + p.sigma2 * z_m * sqrt_dt);
    next.r = std::exp(lr + p.alpha1 * (lm - lr) * p.dt + p.sigma1 * z_r * sqrt_dt);
    return next;
}

std::span<const double, kNumQuantiles> PercentileDataset::quantiles(int scenario,
                                                                    int t) const {
    const std::size_t off =
        (static_cast<std::size_t>(scenario) * (sim.n_steps + 1) + t) * kNumQuantiles;
    return std::span<const double, kNumQuantiles>(q.data() + off, kNumQuantiles);
}

std::span<double, kNumQuantiles> PercentileDataset::quantiles(int scenario, int t) {
    const std::size_t off =
        (static_cast<std::size_t>(scenario) * (sim.n_steps + 1) + t) * kNumQuantiles;
    return std::span<double, kNumQuantiles>(q.data() + off, kNumQuantiles);
}

void simulate_scenario(const ModelParams& p, const SimConfig& cfg,
                       std::uint32_t scenario_id, double* out) {
    validate_pair(p, cfg);
    run_scenario<true>(p, cfg, scenario_id, out);
}

void simulate_scenario_reference(const ModelParams& p, const SimConfig& cfg,
                                 std::uint32_t scenario_id, double* out) {
    validate_pair(p, cfg);
    run_scenario<false>(p, cfg, scenario_id, out);
}

PercentileDataset generate_dataset(const ModelParams& p, const SimConfig& cfg,
                                   EtaSource eta_source) {
    return run_dataset<true>(p, cfg, eta_source);
}

PercentileDataset generate_dataset_reference(const ModelParams& p, const SimConfig& cfg,
                                             EtaSource eta_source) {
    return run_dataset<false>(p, cfg, eta_source);
}

std::uint64_t estimate_peak_bytes(const SimConfig& cfg) {
    const std::uint64_t w = cfg.level_size(cfg.n_steps);
    const std::uint64_t parent = cfg.level_size(cfg.n_steps - 1);
    // two child arrays + two parent arrays + sort scratch, 8 bytes each
    return 8 * (2 * w + 2 * parent + w);
}

}  // namespace bk2f
