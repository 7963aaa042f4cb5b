#include "bk2f/eval.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bk2f {

namespace {

std::vector<double> realized_row(const PercentileDataset& data, int s, int t) {
    auto span = data.quantiles(s, t);
    return std::vector<double>(span.begin(), span.end());
}

void check_target_t(const PercentileDataset& data, int t, const char* who) {
    if (t < 2 || t > data.n_steps())
        throw std::invalid_argument(std::string(who) + ": target t must be in [2, " +
                                    std::to_string(data.n_steps()) + "], got " +
                                    std::to_string(t));
}

}  // namespace

Predictor make_mom_predictor(const ModelParams& p, const G2Stats& g, DriftMode mode) {
    return [p, g, mode](const std::vector<double>& prev, int t) {
        return mom_predict(prev, t, p, g, mode);
    };
}

Predictor make_nn_predictor(const MlpModel& m, const ModelParams& p, const G2Stats& g) {
    return [m, p, g](const std::vector<double>& prev, int t) {
        return nn_predict(m, prev, t, p, g);
    };
}

std::vector<double> rmse_by_timestep(const Predictor& predict,
                                     const PercentileDataset& data) {
    if (data.n_scenarios() < 1 || data.n_steps() < 2)
        throw std::invalid_argument("rmse_by_timestep: need >= 1 scenario, >= 2 steps");
    const G2Stats g = derive_g2(data.params, data.eta_source);
    std::vector<double> rmse;
    rmse.reserve(data.n_steps() - 1);
    for (int t = 2; t <= data.n_steps(); ++t) {
        double acc = 0.0;
        for (int s = 0; s < data.n_scenarios(); ++s) {
            const std::vector<double> pred = predict(realized_row(data, s, t - 1), t - 1);
            if (static_cast<int>(pred.size()) != kNumQuantiles)
                throw std::invalid_argument("rmse_by_timestep: predictor returned " +
                                            std::to_string(pred.size()) + " values");
            const std::vector<double> zp = standardize(pred, t, data.params, g);
            const std::vector<double> zr =
                standardize(realized_row(data, s, t), t, data.params, g);
            for (int k = 0; k < kNumQuantiles; ++k) {
                const double d = zp[k] - zr[k];
                acc += d * d;
            }
        }
        rmse.push_back(
            std::sqrt(acc / (static_cast<double>(data.n_scenarios()) * kNumQuantiles)));
    }
    return rmse;
}

std::vector<std::vector<double>> stochastic_error(const PercentileDataset& data) {
    const int n = data.n_scenarios();
    if (n < 2) throw std::invalid_argument("stochastic_error: need >= 2 scenarios");
    const G2Stats g = derive_g2(data.params, data.eta_source);
    std::vector<std::vector<double>> sd(data.n_steps(),
                                        std::vector<double>(kNumQuantiles, 0.0));
    std::vector<std::vector<double>> z_rows(n);
    for (int t = 1; t <= data.n_steps(); ++t) {
        for (int s = 0; s < n; ++s)
            z_rows[s] = standardize(realized_row(data, s, t), t, data.params, g);
        for (int k = 0; k < kNumQuantiles; ++k) {
            double mean = 0.0;
            for (int s = 0; s < n; ++s) mean += z_rows[s][k];
            mean /= n;
            double acc = 0.0;
            for (int s = 0; s < n; ++s) {
                const double d = z_rows[s][k] - mean;
                acc += d * d;
            }
            sd[t - 1][k] = std::sqrt(acc / (n - 1));
        }
    }
    return sd;
}

std::vector<double> cross_section(const Predictor& predict,
                                  const PercentileDataset& data, int t) {
    check_target_t(data, t, "cross_section");
    const int n = data.n_scenarios();
    if (n < 2) throw std::invalid_argument("cross_section: need >= 2 scenarios");
    const G2Stats g = derive_g2(data.params, data.eta_source);

    std::vector<double> mean_err(kNumQuantiles, 0.0);
    std::vector<std::vector<double>> z_rows(n);
    for (int s = 0; s < n; ++s) {
        const std::vector<double> pred = predict(realized_row(data, s, t - 1), t - 1);
        const std::vector<double> zp = standardize(pred, t, data.params, g);
        z_rows[s] = standardize(realized_row(data, s, t), t, data.params, g);
        for (int k = 0; k < kNumQuantiles; ++k) mean_err[k] += zp[k] - z_rows[s][k];
    }
    for (int k = 0; k < kNumQuantiles; ++k) mean_err[k] /= n;

    std::vector<double> out(kNumQuantiles, 0.0);
    for (int k = 0; k < kNumQuantiles; ++k) {
        double mean = 0.0;
        for (int s = 0; s < n; ++s) mean += z_rows[s][k];
        mean /= n;
        double acc = 0.0;
        for (int s = 0; s < n; ++s) {
            const double d = z_rows[s][k] - mean;
            acc += d * d;
        }
        const double sd = std::sqrt(acc / (n - 1));
        if (!(sd > 0.0))
            throw std::runtime_error("cross_section: zero stochastic error at t " +
                                     std::to_string(t) + ", percentile index " +
                                     std::to_string(k));
        out[k] = mean_err[k] / sd;
    }
    return out;
}

std::vector<int> default_cross_section_ts(int n_steps) {
    std::vector<int> ts;
    for (int t : {3, 6, 9, 12})
        if (t <= n_steps) ts.push_back(t);
    return ts;
}

EvalReport run_experiment(const PercentileDataset& train_data,
                          const PercentileDataset& valid_data,
                          const TrainConfig& tcfg, EtaSource source,
                          DriftMode drift) {
    if (train_data.eta_source != source || valid_data.eta_source != source)
        throw std::invalid_argument(
            "run_experiment: dataset eta sources must match the requested source");
    if (train_data.n_steps() != valid_data.n_steps())
        throw std::invalid_argument("run_experiment: datasets disagree on n_steps");

    const TrainingPairs pairs = make_training_pairs(train_data, source);
    const std::uint64_t scaler_fp = params_fingerprint(train_data.params, source);
    const TrainResult tr = train(pairs, tcfg, source, scaler_fp);

    const G2Stats g_train = derive_g2(train_data.params, source);
    const G2Stats g_valid = derive_g2(valid_data.params, source);
    const Predictor nn_in = make_nn_predictor(tr.model, train_data.params, g_train);
    const Predictor nn_oos = make_nn_predictor(tr.model, valid_data.params, g_valid);
    const Predictor mom_in = make_mom_predictor(train_data.params, g_train, drift);
    const Predictor mom_oos = make_mom_predictor(valid_data.params, g_valid, drift);

    EvalReport rep;
    for (int t = 2; t <= train_data.n_steps(); ++t) rep.ts.push_back(t);
    rep.nn_in = rmse_by_timestep(nn_in, train_data);
    rep.nn_oos = rmse_by_timestep(nn_oos, valid_data);
    rep.mom_in = rmse_by_timestep(mom_in, train_data);
    rep.mom_oos = rmse_by_timestep(mom_oos, valid_data);
    rep.cross_ts = default_cross_section_ts(train_data.n_steps());
    for (int t : rep.cross_ts) {
        rep.cross_nn.push_back(cross_section(nn_in, train_data, t));
        rep.cross_mom.push_back(cross_section(mom_in, train_data, t));
    }
    rep.n_scenarios_eval = valid_data.n_scenarios();
    rep.train_fingerprint = train_data.fingerprint;
    rep.valid_fingerprint = valid_data.fingerprint;
    return rep;
}

}  // namespace bk2f
