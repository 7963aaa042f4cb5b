// Command-line front end: generate / train / evaluate / report.
#include <cstdlib>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "bk2f/config.hpp"
#include "bk2f/dataset_io.hpp"

namespace {

struct CliState {
    std::string config_path;
    int threads = 0;
    bool allow_large = false;
    std::string which;
    std::string data_path;
    std::string model_path;
    std::string train_csv;
    std::string valid_csv;
    // (key, value) pairs in command-line order; applied after the config file.
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_common_options(CLI::App* sub, CliState& st) {
    sub->add_option("--config", st.config_path, "key = value configuration file");
    sub->add_option("--threads", st.threads, "OpenMP thread count (0 = library default)")
        ->check(CLI::NonNegativeNumber);
    auto push = [&st](const std::string& key) {
        return [&st, key](const std::string& v) { st.overrides.emplace_back(key, v); };
    };
    sub->add_option_function<std::string>("--seed", push("sim.master_seed"),
                                          "master seed (alias of sim.master_seed)");
    sub->add_option_function<std::string>("--depth", push("sim.branch_depth"),
                                          "branching depth (alias of sim.branch_depth)");
    sub->add_option_function<std::string>("--scenarios", push("sim.n_scenarios"),
                                          "scenario count (alias of sim.n_scenarios)");
    sub->add_option_function<std::string>("--eta-source", push("eta_source"),
                                          "as_printed | derivation");
    sub->add_option_function<std::string>("--drift-mode", push("drift_mode"),
                                          "none | indexed");
    sub->add_option_function<std::string>("--out", push("output_dir"),
                                          "output directory (env BK2F_OUT)");
    for (const std::string& key : bk2f::config_keys())
        sub->add_option_function<std::string>("--" + key, push(key))->group("Config keys");
}

bk2f::RunConfig resolve_config(const CliState& st) {
    bk2f::RunConfig cfg = bk2f::default_config();
    if (!st.config_path.empty()) cfg = bk2f::load_config(st.config_path, cfg);
    if (const char* env_out = std::getenv("BK2F_OUT"); env_out && *env_out)
        cfg.output_dir = env_out;
    for (const auto& [key, value] : st.overrides) bk2f::apply_config_line(cfg, key, value);
    return cfg;
}

std::string default_in(const bk2f::RunConfig& cfg, const std::string& given,
                       const char* name) {
    return given.empty() ? cfg.output_dir + "/" + name : given;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bk2f: branching two-factor lognormal short-rate laboratory"};
    app.require_subcommand(1);
    CliState st;

    CLI::App* gen = app.add_subcommand(
        "generate", "simulate scenario trees and write the percentile dataset");
    gen->add_option("which", st.which, "which parameter block to use")
        ->required()
        ->check(CLI::IsMember({"train", "valid"}));
    gen->add_flag("--allow-large", st.allow_large,
                  "allow tree levels wider than 65536 nodes");
    add_common_options(gen, st);

    CLI::App* trn = app.add_subcommand("train", "fit the quantile-transition net");
    trn->add_option("--data", st.data_path, "training dataset CSV (default <out>/train.csv)");
    add_common_options(trn, st);

    CLI::App* evl = app.add_subcommand("evaluate", "write rmse and cross-section tables");
    CLI::App* rpt = app.add_subcommand("report", "evaluate plus a readable summary table");
    for (CLI::App* sub : {evl, rpt}) {
        sub->add_option("--model", st.model_path, "model file (default <out>/model.txt)");
        sub->add_option("--train-data", st.train_csv,
                        "in-sample dataset CSV (default <out>/train.csv)");
        sub->add_option("--valid-data", st.valid_csv,
                        "out-of-sample dataset CSV (default <out>/valid.csv)");
        add_common_options(sub, st);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const bk2f::RunConfig cfg = resolve_config(st);
#ifdef _OPENMP
        if (st.threads > 0) omp_set_num_threads(st.threads);
#endif
        if (gen->parsed()) {
            const std::string csv = bk2f::cmd_generate(cfg, st.which, st.allow_large);
            std::cout << "wrote " << csv << " and " << bk2f::meta_path_for(csv) << '\n';
        } else if (trn->parsed()) {
            const std::string data = default_in(cfg, st.data_path, "train.csv");
            const std::string model = bk2f::cmd_train(cfg, data);
            std::cout << "wrote " << model << '\n';
        } else {
            const std::string model = default_in(cfg, st.model_path, "model.txt");
            const std::string tdata = default_in(cfg, st.train_csv, "train.csv");
            const std::string vdata = default_in(cfg, st.valid_csv, "valid.csv");
            if (evl->parsed()) {
                for (const std::string& p : bk2f::cmd_evaluate(cfg, model, tdata, vdata))
                    std::cout << "wrote " << p << '\n';
            } else {
                bk2f::cmd_report(cfg, model, tdata, vdata);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "bk2f: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
