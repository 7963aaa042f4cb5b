#include "bk2f/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "bk2f/dataset_io.hpp"
#include "bk2f/rng.hpp"

namespace bk2f {

namespace {

std::string trim(const std::string& s) {
    const std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
        throw std::invalid_argument("config key '" + key + "': bad numeric value '" +
                                    value + "'");
    return v;
}

long long parse_int(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0')
        throw std::invalid_argument("config key '" + key + "': bad integer value '" +
                                    value + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0' || value.find('-') != std::string::npos)
        throw std::invalid_argument("config key '" + key + "': bad unsigned value '" +
                                    value + "'");
    return v;
}

// Keys shared by the two parameter blocks. Setting `mu` also resets `m0` to
// the same level (the long-run default); put an explicit m0 after mu to pin
// a different starting mean.
bool apply_params_key(ModelParams& p, const std::string& key, const std::string& field,
                      const std::string& value) {
    if (field == "alpha1") p.alpha1 = parse_double(key, value);
    else if (field == "alpha2") p.alpha2 = parse_double(key, value);
    else if (field == "sigma1") p.sigma1 = parse_double(key, value);
    else if (field == "sigma2") p.sigma2 = parse_double(key, value);
    else if (field == "mu") {
        const double level = parse_double(key, value);
        if (!(level > 0.0))
            throw std::invalid_argument("config key '" + key + "': mu must be > 0");
        p.mu_prime = std::log(level);
        p.m0 = level;
    } else if (field == "rho_prime") p.rho_prime = parse_double(key, value);
    else if (field == "r0") p.r0 = parse_double(key, value);
    else if (field == "m0") p.m0 = parse_double(key, value);
    else if (field == "dt") p.dt = parse_double(key, value);
    else if (field == "n_steps") p.n_steps = static_cast<int>(parse_int(key, value));
    else return false;
    return true;
}

std::string params_value(const ModelParams& p, const std::string& field) {
    if (field == "alpha1") return format_double(p.alpha1);
    if (field == "alpha2") return format_double(p.alpha2);
    if (field == "sigma1") return format_double(p.sigma1);
    if (field == "sigma2") return format_double(p.sigma2);
    if (field == "mu") return format_double(std::exp(p.mu_prime));
    if (field == "rho_prime") return format_double(p.rho_prime);
    if (field == "r0") return format_double(p.r0);
    if (field == "m0") return format_double(p.m0);
    if (field == "dt") return format_double(p.dt);
    if (field == "n_steps") return std::to_string(p.n_steps);
    throw std::logic_error("params_value: unknown field " + field);
}

const char* const kParamsFields[] = {"alpha1", "alpha2", "sigma1", "sigma2", "mu",
                                     "rho_prime", "r0", "m0", "dt", "n_steps"};
const char* const kSimFields[] = {"branch_factor", "n_steps", "branch_depth",
                                  "n_scenarios", "master_seed", "max_nodes"};
const char* const kTrainFields[] = {"learning_rate", "batch_size", "max_epochs",
                                    "tol", "patience", "l2", "seed",
                                    "holdout_fraction", "input_activation"};

void ensure_output_dir(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.output_dir) / name).string();
}

// Assembles the report from an already-trained model (the measurement half
// of run_experiment; cmd_evaluate must not retrain).
EvalReport report_from_model(const MlpModel& model, const PercentileDataset& train_data,
                             const PercentileDataset& valid_data, DriftMode drift) {
    const EtaSource source = model.scaler_eta_source;
    if (train_data.eta_source != source || valid_data.eta_source != source)
        throw std::runtime_error(
            "evaluate: datasets were generated with a different eta source than the "
            "model's scaler ('" + to_string(train_data.eta_source) + "'/'" +
            to_string(valid_data.eta_source) + "' vs '" + to_string(source) + "')");
    if (train_data.n_steps() != valid_data.n_steps())
        throw std::runtime_error("evaluate: datasets disagree on n_steps");
    const std::uint64_t scaler_fp = params_fingerprint(train_data.params, source);
    if (model.scaler_fingerprint != scaler_fp)
        throw std::runtime_error(
            "evaluate: model was trained against different parameters (scaler "
            "fingerprint " + std::to_string(model.scaler_fingerprint) +
            ", dataset gives " + std::to_string(scaler_fp) + ")");

    const G2Stats g_train = derive_g2(train_data.params, source);
    const G2Stats g_valid = derive_g2(valid_data.params, source);
    const Predictor nn_in = make_nn_predictor(model, train_data.params, g_train);
    const Predictor nn_oos = make_nn_predictor(model, valid_data.params, g_valid);
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

std::vector<std::string> write_report_files(const RunConfig& cfg, const EvalReport& rep) {
    ensure_output_dir(cfg);
    std::vector<std::string> paths;
    const std::string rmse_path = out_path(cfg, "rmse.csv");
    write_rmse_csv(rmse_path, rep);
    paths.push_back(rmse_path);
    for (std::size_t i = 0; i < rep.cross_ts.size(); ++i) {
        const std::string path =
            out_path(cfg, "cross_section_t" + std::to_string(rep.cross_ts[i]) + ".csv");
        write_cross_section_csv(path, rep, static_cast<int>(i));
        paths.push_back(path);
    }
    return paths;
}

}  // namespace

RunConfig default_config() {
    RunConfig cfg;
    ModelParams& tp = cfg.params_train;
    tp.alpha1 = 0.1759;
    tp.alpha2 = 0.0785;
    tp.sigma1 = 0.3423;
    tp.sigma2 = 0.2242;
    tp.mu_prime = std::log(0.0377);
    tp.rho_prime = 0.0;
    tp.r0 = 0.0307;
    tp.m0 = 0.0377;
    tp.dt = 1.0 / 12.0;
    tp.n_steps = 12;
    ModelParams& vp = cfg.params_valid;
    vp = tp;
    vp.alpha1 = 0.1776;
    vp.alpha2 = 0.0819;
    vp.sigma1 = 0.3407;
    vp.sigma2 = 0.2177;
    vp.r0 = 0.0394;
    return cfg;  // sim/train members carry their struct defaults
}

void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value) {
    const std::size_t dot = key.find('.');
    const std::string head = dot == std::string::npos ? key : key.substr(0, dot);
    const std::string field = dot == std::string::npos ? "" : key.substr(dot + 1);

    if (head == "params_train" || head == "params_valid") {
        ModelParams& p = head == "params_train" ? cfg.params_train : cfg.params_valid;
        if (apply_params_key(p, key, field, value)) return;
    } else if (head == "sim") {
        SimConfig& s = cfg.sim;
        if (field == "branch_factor") { s.branch_factor = static_cast<int>(parse_int(key, value)); return; }
        if (field == "n_steps") { s.n_steps = static_cast<int>(parse_int(key, value)); return; }
        if (field == "branch_depth") { s.branch_depth = static_cast<int>(parse_int(key, value)); return; }
        if (field == "n_scenarios") { s.n_scenarios = static_cast<int>(parse_int(key, value)); return; }
        if (field == "master_seed") { s.master_seed = parse_u64(key, value); return; }
        if (field == "max_nodes") { s.max_nodes = parse_u64(key, value); return; }
    } else if (head == "train") {
        TrainConfig& t = cfg.train;
        if (field == "learning_rate") { t.learning_rate = parse_double(key, value); return; }
        if (field == "batch_size") { t.batch_size = static_cast<int>(parse_int(key, value)); return; }
        if (field == "max_epochs") { t.max_epochs = static_cast<int>(parse_int(key, value)); return; }
        if (field == "tol") { t.tol = parse_double(key, value); return; }
        if (field == "patience") { t.patience = static_cast<int>(parse_int(key, value)); return; }
        if (field == "l2") { t.l2 = parse_double(key, value); return; }
        if (field == "seed") { t.seed = parse_u64(key, value); return; }
        if (field == "holdout_fraction") { t.holdout_fraction = parse_double(key, value); return; }
        if (field == "input_activation") { t.input_activation = input_activation_from_string(value); return; }
    } else if (key == "eta_source") {
        cfg.eta_source = eta_source_from_string(value);
        return;
    } else if (key == "drift_mode") {
        cfg.drift_mode = drift_mode_from_string(value);
        return;
    } else if (key == "output_dir") {
        if (value.empty())
            throw std::invalid_argument("config key 'output_dir': must not be empty");
        cfg.output_dir = value;
        return;
    }
    throw std::invalid_argument("unknown config key '" + key + "'");
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_config: cannot open " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            apply_config_line(base, key, value);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                                     e.what());
        }
    }
    return base;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const char* block : {"params_train", "params_valid"})
        for (const char* f : kParamsFields) keys.push_back(std::string(block) + "." + f);
    for (const char* f : kSimFields) keys.push_back(std::string("sim.") + f);
    for (const char* f : kTrainFields) keys.push_back(std::string("train.") + f);
    keys.push_back("eta_source");
    keys.push_back("drift_mode");
    keys.push_back("output_dir");
    return keys;
}

std::string canonical_config_text(const RunConfig& cfg) {
    std::ostringstream os;
    auto emit_params = [&](const char* block, const ModelParams& p) {
        // m0 last so a round-trip through the mu -> m0 reset stays exact.
        for (const char* f : kParamsFields)
            if (std::string(f) != "m0")
                os << block << '.' << f << " = " << params_value(p, f) << '\n';
        os << block << ".m0 = " << params_value(p, "m0") << '\n';
    };
    emit_params("params_train", cfg.params_train);
    emit_params("params_valid", cfg.params_valid);
    os << "sim.branch_factor = " << cfg.sim.branch_factor << '\n';
    os << "sim.n_steps = " << cfg.sim.n_steps << '\n';
    os << "sim.branch_depth = " << cfg.sim.branch_depth << '\n';
    os << "sim.n_scenarios = " << cfg.sim.n_scenarios << '\n';
    os << "sim.master_seed = " << cfg.sim.master_seed << '\n';
    os << "sim.max_nodes = " << cfg.sim.max_nodes << '\n';
    os << "train.learning_rate = " << format_double(cfg.train.learning_rate) << '\n';
    os << "train.batch_size = " << cfg.train.batch_size << '\n';
    os << "train.max_epochs = " << cfg.train.max_epochs << '\n';
    os << "train.tol = " << format_double(cfg.train.tol) << '\n';
    os << "train.patience = " << cfg.train.patience << '\n';
    os << "train.l2 = " << format_double(cfg.train.l2) << '\n';
    os << "train.seed = " << cfg.train.seed << '\n';
    os << "train.holdout_fraction = " << format_double(cfg.train.holdout_fraction) << '\n';
    os << "train.input_activation = " << to_string(cfg.train.input_activation) << '\n';
    os << "eta_source = " << to_string(cfg.eta_source) << '\n';
    os << "drift_mode = " << to_string(cfg.drift_mode) << '\n';
    os << "output_dir = " << cfg.output_dir << '\n';
    return os.str();
}

std::uint64_t effective_seed(const RunConfig& cfg, const std::string& which) {
    if (which == "train") return cfg.sim.master_seed;
    if (which == "valid") return splitmix64(cfg.sim.master_seed);
    throw std::invalid_argument("effective_seed: expected train|valid, got '" + which +
                                "'");
}

void check_scale_allowed(const SimConfig& sim, bool allow_large) {
    constexpr std::uint64_t kDefaultCap = 65536;  // 4^8
    const std::uint64_t widest = sim.level_size(sim.n_steps);
    if (!allow_large && widest > kDefaultCap) {
        const double mib = static_cast<double>(estimate_peak_bytes(sim)) / (1024.0 * 1024.0);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.1f", mib);
        throw std::runtime_error(
            "refusing to run: widest tree level has " + std::to_string(widest) +
            " nodes (> " + std::to_string(kDefaultCap) +
            "), estimated peak ~" + buf +
            " MiB per in-flight scenario; rerun with --allow-large to proceed");
    }
}

void write_manifest(const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& artifact_lines) {
    ensure_output_dir(cfg);
    std::ofstream os(out_path(cfg, "manifest.txt"));
    if (!os) throw std::runtime_error("write_manifest: cannot open manifest.txt");
    os << "tool = bk2f " << kToolVersion << '\n';
    os << "command = " << command << '\n';
    os << "dataset_format_version = " << kDatasetFormatVersion << '\n';
    os << "model_format_version = " << kModelFormatVersion << '\n';
    os << "[config]\n" << canonical_config_text(cfg);
    os << "[artifacts]\n";
    for (const std::string& l : artifact_lines) os << l << '\n';
    if (!os) throw std::runtime_error("write_manifest: write failed");
}

std::string cmd_generate(const RunConfig& cfg, const std::string& which,
                         bool allow_large) {
    const ModelParams& p = which == "train" ? cfg.params_train : cfg.params_valid;
    SimConfig sim = cfg.sim;
    sim.master_seed = effective_seed(cfg, which);  // rejects bad `which`
    p.validate();
    sim.validate();
    check_scale_allowed(sim, allow_large);
    const PercentileDataset data = generate_dataset(p, sim, cfg.eta_source);
    ensure_output_dir(cfg);
    const std::string csv_path = out_path(cfg, which + ".csv");
    write_dataset_csv(csv_path, data);
    write_manifest(cfg, "generate " + which,
                   {which + ".csv fingerprint=" + std::to_string(data.fingerprint),
                    meta_path_for(which + ".csv")});
    return csv_path;
}

std::string cmd_train(const RunConfig& cfg, const std::string& dataset_csv) {
    const PercentileDataset data = read_dataset_csv(dataset_csv);
    if (data.eta_source != cfg.eta_source)
        throw std::runtime_error("train: dataset was generated with eta source '" +
                                 to_string(data.eta_source) + "' but config requests '" +
                                 to_string(cfg.eta_source) + "'");
    const TrainingPairs pairs = make_training_pairs(data, cfg.eta_source);
    const std::uint64_t scaler_fp = params_fingerprint(data.params, cfg.eta_source);
    TrainConfig tcfg = cfg.train;
    const TrainResult result = train(pairs, tcfg, cfg.eta_source, scaler_fp);
    ensure_output_dir(cfg);
    const std::string model_path = out_path(cfg, "model.txt");
    write_model(model_path, result.model, tcfg);
    write_manifest(cfg, "train",
                   {"model.txt scaler_fingerprint=" + std::to_string(scaler_fp),
                    "epochs_run=" + std::to_string(result.epochs_run),
                    "best_holdout_mse=" + format_double(result.best_holdout_mse)});
    return model_path;
}

EvalReport evaluate_files(const RunConfig& cfg, const std::string& model_path,
                          const std::string& train_csv, const std::string& valid_csv) {
    const MlpModel model = read_model(model_path);
    if (model.scaler_eta_source != cfg.eta_source)
        throw std::runtime_error("evaluate: model scaler eta source '" +
                                 to_string(model.scaler_eta_source) +
                                 "' does not match config '" +
                                 to_string(cfg.eta_source) + "'");
    const PercentileDataset train_data = read_dataset_csv(train_csv);
    const PercentileDataset valid_data = read_dataset_csv(valid_csv);
    return report_from_model(model, train_data, valid_data, cfg.drift_mode);
}

void write_rmse_csv(const std::string& path, const EvalReport& rep) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_rmse_csv: cannot open " + path);
    os << "t,nn_in,nn_oos,mom_in,mom_oos\n";
    for (std::size_t i = 0; i < rep.ts.size(); ++i)
        os << rep.ts[i] << ',' << format_double(rep.nn_in[i]) << ','
           << format_double(rep.nn_oos[i]) << ',' << format_double(rep.mom_in[i]) << ','
           << format_double(rep.mom_oos[i]) << '\n';
    if (!os) throw std::runtime_error("write_rmse_csv: write failed for " + path);
}

void write_cross_section_csv(const std::string& path, const EvalReport& rep, int idx) {
    if (idx < 0 || idx >= static_cast<int>(rep.cross_ts.size()))
        throw std::invalid_argument("write_cross_section_csv: bad index");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_cross_section_csv: cannot open " + path);
    os << "percentile,nn_rel_err,mom_rel_err\n";
    for (int k = 0; k < kNumQuantiles; ++k)
        os << format_double(quantile_probability(k)) << ','
           << format_double(rep.cross_nn[idx][k]) << ','
           << format_double(rep.cross_mom[idx][k]) << '\n';
    if (!os) throw std::runtime_error("write_cross_section_csv: write failed for " + path);
}

std::vector<std::string> cmd_evaluate(const RunConfig& cfg, const std::string& model_path,
                                      const std::string& train_csv,
                                      const std::string& valid_csv) {
    const EvalReport rep = evaluate_files(cfg, model_path, train_csv, valid_csv);
    const std::vector<std::string> paths = write_report_files(cfg, rep);
    std::vector<std::string> artifacts;
    for (const std::string& p : paths)
        artifacts.push_back(std::filesystem::path(p).filename().string());
    artifacts.push_back("train_fingerprint=" + std::to_string(rep.train_fingerprint));
    artifacts.push_back("valid_fingerprint=" + std::to_string(rep.valid_fingerprint));
    write_manifest(cfg, "evaluate", artifacts);
    return paths;
}

void cmd_report(const RunConfig& cfg, const std::string& model_path,
                const std::string& train_csv, const std::string& valid_csv) {
    const EvalReport rep = evaluate_files(cfg, model_path, train_csv, valid_csv);
    const std::vector<std::string> paths = write_report_files(cfg, rep);
    std::vector<std::string> artifacts;
    for (const std::string& p : paths)
        artifacts.push_back(std::filesystem::path(p).filename().string());
    artifacts.push_back("train_fingerprint=" + std::to_string(rep.train_fingerprint));
    artifacts.push_back("valid_fingerprint=" + std::to_string(rep.valid_fingerprint));
    write_manifest(cfg, "report", artifacts);

    std::printf("One-step quantile prediction RMSE (standardized units)\n");
    std::printf("%4s %10s %10s %10s %10s\n", "t", "nn_in", "nn_oos", "mom_in", "mom_oos");
    for (std::size_t i = 0; i < rep.ts.size(); ++i)
        std::printf("%4d %10.4f %10.4f %10.4f %10.4f\n", rep.ts[i], rep.nn_in[i],
                    rep.nn_oos[i], rep.mom_in[i], rep.mom_oos[i]);
    std::printf("\nCross-section mean error / stochastic error (in-sample)\n");
    std::printf("%4s %26s %26s\n", "t", "nn within +/-1 (of 200)", "mom within +/-1 (of 200)");
    for (std::size_t i = 0; i < rep.cross_ts.size(); ++i) {
        int nn_ok = 0, mom_ok = 0;
        for (int k = 0; k < kNumQuantiles; ++k) {
            if (std::fabs(rep.cross_nn[i][k]) <= 1.0) ++nn_ok;
            if (std::fabs(rep.cross_mom[i][k]) <= 1.0) ++mom_ok;
        }
        std::printf("%4d %26d %26d\n", rep.cross_ts[i], nn_ok, mom_ok);
    }
    std::printf("\nEvaluated %d validation scenarios; outputs in %s\n",
                rep.n_scenarios_eval, cfg.output_dir.c_str());
}

}  // namespace bk2f
