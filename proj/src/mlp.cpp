#include "bk2f/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bk2f/rng.hpp"
#include "bk2f/standardize.hpp"

namespace bk2f {

namespace {

inline double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

double mse_on_rows(const MlpModel& m, const TrainingPairs& pairs,
                   const std::vector<int>& rows, std::vector<double>& hidden,
                   std::vector<double>& out) {
    double acc = 0.0;
    for (int r : rows) {
        const double* x = pairs.x.data() + static_cast<std::size_t>(r) * pairs.n_in;
        const double* y = pairs.y.data() + static_cast<std::size_t>(r) * pairs.n_out;
        m.forward(x, out.data(), hidden.data());
        for (int j = 0; j < pairs.n_out; ++j) {
            const double d = out[j] - y[j];
            acc += d * d;
        }
    }
    return acc / (static_cast<double>(rows.size()) * pairs.n_out);
}

void fisher_yates(std::vector<int>& v, CounterStream& stream) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(stream.index(i));
        std::swap(v[i - 1], v[j]);
    }
}

void check_model_shape(const MlpModel& m, const char* who) {
    if (m.n_in <= 0 || m.n_hidden <= 0 || m.n_out <= 0)
        throw std::invalid_argument(std::string(who) + ": dimensions must be positive");
    const std::size_t nh = static_cast<std::size_t>(m.n_hidden);
    if (m.w1.size() != nh * m.n_in || m.b1.size() != nh ||
        m.w2.size() != static_cast<std::size_t>(m.n_out) * nh ||
        m.b2.size() != static_cast<std::size_t>(m.n_out))
        throw std::invalid_argument(std::string(who) + ": coefficient sizes do not match dims");
}

}  // namespace

std::string to_string(InputActivation a) {
    return a == InputActivation::identity ? "identity" : "logistic";
}

InputActivation input_activation_from_string(const std::string& s) {
    if (s == "identity") return InputActivation::identity;
    if (s == "logistic") return InputActivation::logistic;
    throw std::invalid_argument("input_activation: expected identity|logistic, got '" + s +
                                "'");
}

void MlpModel::forward(const double* x, double* out, double* hidden) const {
    for (int h = 0; h < n_hidden; ++h) {
        const double* row = w1.data() + static_cast<std::size_t>(h) * n_in;
        double acc = b1[h];
        if (input_activation == InputActivation::logistic) {
            for (int i = 0; i < n_in; ++i) acc += row[i] * logistic(x[i]);
        } else {
            for (int i = 0; i < n_in; ++i) acc += row[i] * x[i];
        }
        hidden[h] = logistic(acc);
    }
    for (int j = 0; j < n_out; ++j) {
        const double* row = w2.data() + static_cast<std::size_t>(j) * n_hidden;
        double acc = b2[j];
        for (int h = 0; h < n_hidden; ++h) acc += row[h] * hidden[h];
        out[j] = acc;
    }
}

std::vector<double> MlpModel::forward(const std::vector<double>& x) const {
    check_model_shape(*this, "MlpModel::forward");
    if (static_cast<int>(x.size()) != n_in)
        throw std::invalid_argument("MlpModel::forward: input size " +
                                    std::to_string(x.size()) + ", expected " +
                                    std::to_string(n_in));
    std::vector<double> out(n_out), hidden(n_hidden);
    forward(x.data(), out.data(), hidden.data());
    return out;
}

MlpModel make_zero_model(int n_in, int n_hidden, int n_out, InputActivation g) {
    MlpModel m;
    m.n_in = n_in;
    m.n_hidden = n_hidden;
    m.n_out = n_out;
    m.input_activation = g;
    m.w1.assign(static_cast<std::size_t>(n_hidden) * n_in, 0.0);
    m.b1.assign(n_hidden, 0.0);
    m.w2.assign(static_cast<std::size_t>(n_out) * n_hidden, 0.0);
    m.b2.assign(n_out, 0.0);
    check_model_shape(m, "make_zero_model");
    return m;
}

TrainingPairs make_training_pairs(const PercentileDataset& data, EtaSource source) {
    if (data.n_steps() < 2)
        throw std::invalid_argument("make_training_pairs: need at least 2 timesteps");
    const G2Stats g = derive_g2(data.params, source);
    TrainingPairs pairs;
    pairs.n_in = kNumQuantiles;
    pairs.n_out = kNumQuantiles;
    const int per_scen = data.n_steps() - 1;  // t_from = 1 .. n_steps-1
    const std::size_t n_rows =
        static_cast<std::size_t>(data.n_scenarios()) * per_scen;
    pairs.x.reserve(n_rows * kNumQuantiles);
    pairs.y.reserve(n_rows * kNumQuantiles);
    pairs.scenario.reserve(n_rows);
    pairs.t_from.reserve(n_rows);
    std::vector<double> row(kNumQuantiles);
    for (int s = 0; s < data.n_scenarios(); ++s) {
        for (int t = 1; t < data.n_steps(); ++t) {
            auto from = data.quantiles(s, t);
            auto to = data.quantiles(s, t + 1);
            row.assign(from.begin(), from.end());
            const std::vector<double> zx = standardize(row, t, data.params, g);
            row.assign(to.begin(), to.end());
            const std::vector<double> zy = standardize(row, t + 1, data.params, g);
            for (double v : zx)
                if (!std::isfinite(v))
                    throw std::invalid_argument(
                        "make_training_pairs: non-finite input at scenario " +
                        std::to_string(s) + ", t " + std::to_string(t));
            for (double v : zy)
                if (!std::isfinite(v))
                    throw std::invalid_argument(
                        "make_training_pairs: non-finite target at scenario " +
                        std::to_string(s) + ", t " + std::to_string(t + 1));
            pairs.x.insert(pairs.x.end(), zx.begin(), zx.end());
            pairs.y.insert(pairs.y.end(), zy.begin(), zy.end());
            pairs.scenario.push_back(s);
            pairs.t_from.push_back(t);
        }
    }
    return pairs;
}

double loss(const MlpModel& m, const TrainingPairs& pairs, double l2) {
    check_model_shape(m, "loss");
    if (pairs.n_rows() == 0) throw std::invalid_argument("loss: no rows");
    if (m.n_in != pairs.n_in || m.n_out != pairs.n_out)
        throw std::invalid_argument("loss: model dims do not match pairs");
    std::vector<int> all(pairs.n_rows());
    for (int i = 0; i < pairs.n_rows(); ++i) all[i] = i;
    std::vector<double> hidden(m.n_hidden), out(m.n_out);
    double v = mse_on_rows(m, pairs, all, hidden, out);
    double w2sum = 0.0;
    for (double w : m.w1) w2sum += w * w;
    for (double w : m.w2) w2sum += w * w;
    return v + 0.5 * l2 * w2sum;
}

void backward(const MlpModel& m, const TrainingPairs& pairs,
              const std::vector<int>& rows, double l2, Gradients& g) {
    check_model_shape(m, "backward");
    if (rows.empty()) throw std::invalid_argument("backward: empty batch");
    if (m.n_in != pairs.n_in || m.n_out != pairs.n_out)
        throw std::invalid_argument("backward: model dims do not match pairs");
    g.w1.assign(m.w1.size(), 0.0);
    g.b1.assign(m.b1.size(), 0.0);
    g.w2.assign(m.w2.size(), 0.0);
    g.b2.assign(m.b2.size(), 0.0);

    const double scale = 2.0 / (static_cast<double>(rows.size()) * m.n_out);
    std::vector<double> gx(m.n_in), hidden(m.n_hidden), out(m.n_out);
    std::vector<double> dout(m.n_out), dhidden(m.n_hidden);
    for (int r : rows) {
        const double* x = pairs.x.data() + static_cast<std::size_t>(r) * m.n_in;
        const double* y = pairs.y.data() + static_cast<std::size_t>(r) * m.n_out;
        if (m.input_activation == InputActivation::logistic) {
            for (int i = 0; i < m.n_in; ++i) gx[i] = logistic(x[i]);
        } else {
            for (int i = 0; i < m.n_in; ++i) gx[i] = x[i];
        }
        for (int h = 0; h < m.n_hidden; ++h) {
            const double* row = m.w1.data() + static_cast<std::size_t>(h) * m.n_in;
            double acc = m.b1[h];
            for (int i = 0; i < m.n_in; ++i) acc += row[i] * gx[i];
            hidden[h] = logistic(acc);
        }
        for (int j = 0; j < m.n_out; ++j) {
            const double* row = m.w2.data() + static_cast<std::size_t>(j) * m.n_hidden;
            double acc = m.b2[j];
            for (int h = 0; h < m.n_hidden; ++h) acc += row[h] * hidden[h];
            out[j] = acc;
            dout[j] = scale * (acc - y[j]);
        }
        for (int h = 0; h < m.n_hidden; ++h) dhidden[h] = 0.0;
        for (int j = 0; j < m.n_out; ++j) {
            const double* row = m.w2.data() + static_cast<std::size_t>(j) * m.n_hidden;
            double* grow = g.w2.data() + static_cast<std::size_t>(j) * m.n_hidden;
            for (int h = 0; h < m.n_hidden; ++h) {
                grow[h] += dout[j] * hidden[h];
                dhidden[h] += row[h] * dout[j];
            }
            g.b2[j] += dout[j];
        }
        for (int h = 0; h < m.n_hidden; ++h) {
            const double dpre = dhidden[h] * hidden[h] * (1.0 - hidden[h]);
            double* grow = g.w1.data() + static_cast<std::size_t>(h) * m.n_in;
            for (int i = 0; i < m.n_in; ++i) grow[i] += dpre * gx[i];
            g.b1[h] += dpre;
        }
    }
    for (std::size_t i = 0; i < m.w1.size(); ++i) g.w1[i] += l2 * m.w1[i];
    for (std::size_t i = 0; i < m.w2.size(); ++i) g.w2[i] += l2 * m.w2[i];
}

TrainResult train(const TrainingPairs& pairs, const TrainConfig& cfg,
                  EtaSource scaler_eta_source, std::uint64_t scaler_fingerprint) {
    if (pairs.n_rows() == 0) throw std::invalid_argument("train: no rows");
    if (cfg.learning_rate <= 0.0) throw std::invalid_argument("train: learning_rate must be > 0");
    if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (cfg.max_epochs < 1) throw std::invalid_argument("train: max_epochs must be >= 1");
    if (cfg.patience < 1) throw std::invalid_argument("train: patience must be >= 1");
    if (cfg.holdout_fraction < 0.0 || cfg.holdout_fraction >= 1.0)
        throw std::invalid_argument("train: holdout_fraction must be in [0, 1)");

    // Scenario-level holdout split (streams: 0 init, 1 split, 2 shuffle).
    std::set<int> scen_set(pairs.scenario.begin(), pairs.scenario.end());
    std::vector<int> scenarios(scen_set.begin(), scen_set.end());
    CounterStream split_stream(cfg.seed, 1);
    fisher_yates(scenarios, split_stream);
    int n_hold = static_cast<int>(
        std::floor(cfg.holdout_fraction * static_cast<double>(scenarios.size()) + 0.5));
    if (cfg.holdout_fraction > 0.0 && n_hold == 0) n_hold = 1;
    if (n_hold >= static_cast<int>(scenarios.size()))
        n_hold = static_cast<int>(scenarios.size()) - 1;
    std::set<int> hold_set(scenarios.begin(), scenarios.begin() + n_hold);

    std::vector<int> train_rows, hold_rows;
    for (int r = 0; r < pairs.n_rows(); ++r) {
        if (hold_set.count(pairs.scenario[r]))
            hold_rows.push_back(r);
        else
            train_rows.push_back(r);
    }
    if (train_rows.empty()) throw std::invalid_argument("train: holdout left no training rows");
    const std::vector<int>& metric_rows = hold_rows.empty() ? train_rows : hold_rows;

    // Glorot-uniform init, biases zero.
    MlpModel m = make_zero_model(pairs.n_in, 10, pairs.n_out, cfg.input_activation);
    m.scaler_eta_source = scaler_eta_source;
    m.scaler_fingerprint = scaler_fingerprint;
    CounterStream init_stream(cfg.seed, 0);
    const double lim1 = std::sqrt(6.0 / (m.n_in + m.n_hidden));
    for (double& w : m.w1) w = init_stream.uniform(-lim1, lim1);
    const double lim2 = std::sqrt(6.0 / (m.n_hidden + m.n_out));
    for (double& w : m.w2) w = init_stream.uniform(-lim2, lim2);

    std::vector<double> hidden(m.n_hidden), out(m.n_out);
    TrainResult result;
    result.model = m;
    result.best_holdout_mse = mse_on_rows(m, pairs, metric_rows, hidden, out);
    result.holdout_scenarios.assign(hold_set.begin(), hold_set.end());

    CounterStream shuffle_stream(cfg.seed, 2);
    Gradients grad;
    std::vector<int> order = train_rows;
    std::vector<int> batch;
    int stagnant = 0;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        fisher_yates(order, shuffle_stream);
        for (std::size_t pos = 0; pos < order.size(); pos += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), pos + cfg.batch_size);
            batch.assign(order.begin() + pos, order.begin() + end);
            backward(m, pairs, batch, cfg.l2, grad);
            for (std::size_t i = 0; i < m.w1.size(); ++i)
                m.w1[i] -= cfg.learning_rate * grad.w1[i];
            for (std::size_t i = 0; i < m.b1.size(); ++i)
                m.b1[i] -= cfg.learning_rate * grad.b1[i];
            for (std::size_t i = 0; i < m.w2.size(); ++i)
                m.w2[i] -= cfg.learning_rate * grad.w2[i];
            for (std::size_t i = 0; i < m.b2.size(); ++i)
                m.b2[i] -= cfg.learning_rate * grad.b2[i];
        }
        const double metric = mse_on_rows(m, pairs, metric_rows, hidden, out);
        if (!std::isfinite(metric))
            throw std::runtime_error(
                "train: diverged (non-finite holdout MSE) at epoch " +
                std::to_string(epoch) + "; learning_rate " +
                format_double(cfg.learning_rate));
        result.epochs_run = epoch;
        if (metric < result.best_holdout_mse) {
            result.model = m;
            if (result.best_holdout_mse - metric > cfg.tol)
                stagnant = 0;
            else
                ++stagnant;
            result.best_holdout_mse = metric;
        } else {
            ++stagnant;
        }
        if (stagnant >= cfg.patience) break;
    }
    return result;
}

std::vector<double> nn_predict(const MlpModel& m, const std::vector<double>& prev,
                               int t, const ModelParams& p, const G2Stats& g) {
    if (g.source != m.scaler_eta_source)
        throw std::invalid_argument(
            "nn_predict: scaler mismatch: model trained with eta source '" +
            to_string(m.scaler_eta_source) + "', got '" + to_string(g.source) + "'");
    return destandardize(m.forward(standardize(prev, t, p, g)), t + 1, p, g);
}

namespace {

constexpr int kModelFormatVersion = 1;

void write_block(std::ostream& os, const char* name, const std::vector<double>& v) {
    os << name << ' ' << v.size() << '\n';
    for (double x : v) os << format_double(x) << '\n';
}

void read_block(std::istream& is, const std::string& path, const char* name,
                std::size_t expected, std::vector<double>& v) {
    std::string tag;
    std::size_t count = 0;
    if (!(is >> tag >> count) || tag != name || count != expected)
        throw std::runtime_error(path + ": bad '" + name + "' block header");
    v.resize(count);
    for (std::size_t i = 0; i < count; ++i)
        if (!(is >> v[i]))
            throw std::runtime_error(path + ": bad coefficient in '" + name + "' block");
}

}  // namespace

void write_model(const std::string& path, const MlpModel& m, const TrainConfig& cfg) {
    check_model_shape(m, "write_model");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_model: cannot open " + path);
    os << "bk2f-mlp " << kModelFormatVersion << '\n';
    os << "dims " << m.n_in << ' ' << m.n_hidden << ' ' << m.n_out << '\n';
    os << "input_activation " << to_string(m.input_activation) << '\n';
    os << "scaler_eta_source " << to_string(m.scaler_eta_source) << '\n';
    os << "scaler_fingerprint " << m.scaler_fingerprint << '\n';
    os << "learning_rate " << format_double(cfg.learning_rate) << '\n';
    os << "batch_size " << cfg.batch_size << '\n';
    os << "max_epochs " << cfg.max_epochs << '\n';
    os << "tol " << format_double(cfg.tol) << '\n';
    os << "patience " << cfg.patience << '\n';
    os << "l2 " << format_double(cfg.l2) << '\n';
    os << "seed " << cfg.seed << '\n';
    os << "holdout_fraction " << format_double(cfg.holdout_fraction) << '\n';
    write_block(os, "w1", m.w1);
    write_block(os, "b1", m.b1);
    write_block(os, "w2", m.w2);
    write_block(os, "b2", m.b2);
    os << "end\n";
    if (!os) throw std::runtime_error("write_model: write failed for " + path);
}

MlpModel read_model(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_model: cannot open " + path);
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "bk2f-mlp" || version != kModelFormatVersion)
        throw std::runtime_error(path + ": not a version-" +
                                 std::to_string(kModelFormatVersion) + " bk2f-mlp file");
    MlpModel m;
    std::string key, value;
    auto expect_key = [&](const char* name) {
        if (!(is >> key) || key != name)
            throw std::runtime_error(path + ": expected '" + name + "', got '" + key + "'");
    };
    expect_key("dims");
    if (!(is >> m.n_in >> m.n_hidden >> m.n_out))
        throw std::runtime_error(path + ": bad dims line");
    expect_key("input_activation");
    is >> value;
    m.input_activation = input_activation_from_string(value);
    expect_key("scaler_eta_source");
    is >> value;
    m.scaler_eta_source = eta_source_from_string(value);
    expect_key("scaler_fingerprint");
    if (!(is >> m.scaler_fingerprint))
        throw std::runtime_error(path + ": bad scaler_fingerprint");
    // Training hyperparameters are recorded for the audit trail; skip their values.
    for (const char* name :
         {"learning_rate", "batch_size", "max_epochs", "tol", "patience", "l2", "seed",
          "holdout_fraction"}) {
        expect_key(name);
        if (!(is >> value)) throw std::runtime_error(path + ": bad value for " + key);
    }
    if (m.n_in <= 0 || m.n_hidden <= 0 || m.n_out <= 0)
        throw std::runtime_error(path + ": non-positive dims");
    const std::size_t nh = static_cast<std::size_t>(m.n_hidden);
    read_block(is, path, "w1", nh * m.n_in, m.w1);
    read_block(is, path, "b1", nh, m.b1);
    read_block(is, path, "w2", static_cast<std::size_t>(m.n_out) * nh, m.w2);
    read_block(is, path, "b2", static_cast<std::size_t>(m.n_out), m.b2);
    expect_key("end");
    check_model_shape(m, "read_model");
    return m;
}

}  // namespace bk2f
