#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bk2f/config.hpp"
#include "bk2f/dataset_io.hpp"
#include "bk2f/rng.hpp"
#include "bk2f/sim.hpp"

using namespace bk2f;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    REQUIRE(is.good());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    REQUIRE(os.good());
    os << text;
}

PercentileDataset small_dataset() {
    ModelParams p = default_config().params_train;
    p.n_steps = 5;
    SimConfig sim;
    sim.n_steps = 5;
    sim.branch_depth = 3;
    sim.n_scenarios = 4;
    sim.master_seed = 7;
    return generate_dataset(p, sim, EtaSource::derivation);
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("the dataset header names all 200 percentile columns") {
    const std::string h = dataset_csv_header();
    CHECK(h.rfind("scenario,t,q0005,q0010", 0) == 0);
    CHECK(h.size() >= 6);
    CHECK(h.substr(h.size() - 6) == ",q1000");
    CHECK(std::count(h.begin(), h.end(), ',') == 201);
}

TEST_CASE("the sidecar path swaps the extension, respecting directories") {
    CHECK(meta_path_for("a/b.csv") == "a/b.meta");
    CHECK(meta_path_for("noext") == "noext.meta");
    CHECK(meta_path_for("dir.v2/name") == "dir.v2/name.meta");
    CHECK(meta_path_for("x.y/z.csv") == "x.y/z.meta");
}

TEST_CASE("dataset files round-trip bit for bit") {
    const PercentileDataset data = small_dataset();
    const std::string path = "io_roundtrip.csv";
    write_dataset_csv(path, data);
    const PercentileDataset back = read_dataset_csv(path);
    CHECK(back.q == data.q);
    CHECK(back.fingerprint == data.fingerprint);
    CHECK(back.eta_source == data.eta_source);
    CHECK(back.params.alpha1 == data.params.alpha1);
    CHECK(back.params.alpha2 == data.params.alpha2);
    CHECK(back.params.sigma1 == data.params.sigma1);
    CHECK(back.params.sigma2 == data.params.sigma2);
    CHECK(back.params.mu_prime == data.params.mu_prime);
    CHECK(back.params.rho_prime == data.params.rho_prime);
    CHECK(back.params.r0 == data.params.r0);
    CHECK(back.params.m0 == data.params.m0);
    CHECK(back.params.dt == data.params.dt);
    CHECK(back.params.n_steps == data.params.n_steps);
    CHECK(back.sim.branch_factor == data.sim.branch_factor);
    CHECK(back.sim.n_steps == data.sim.n_steps);
    CHECK(back.sim.branch_depth == data.sim.branch_depth);
    CHECK(back.sim.n_scenarios == data.sim.n_scenarios);
    CHECK(back.sim.master_seed == data.sim.master_seed);
    CHECK(back.sim.max_nodes == data.sim.max_nodes);
    std::remove(path.c_str());
    std::remove(meta_path_for(path).c_str());
}

TEST_CASE("a dataset without its sidecar is rejected") {
    const PercentileDataset data = small_dataset();
    const std::string path = "io_nosidecar.csv";
    write_dataset_csv(path, data);
    std::remove(meta_path_for(path).c_str());
    try {
        read_dataset_csv(path);
        FAIL("expected a throw");
    } catch (const std::runtime_error& e) {
        CHECK(contains(e.what(), "sidecar"));
    }
    std::remove(path.c_str());
}

TEST_CASE("tampered metadata fails the fingerprint check") {
    const PercentileDataset data = small_dataset();
    const std::string path = "io_tamper.csv";
    write_dataset_csv(path, data);
    std::string meta = slurp(meta_path_for(path));
    const std::string from = "params.alpha1=";
    const std::size_t at = meta.find(from);
    REQUIRE(at != std::string::npos);
    meta.replace(at, from.size() + 1, from + "9");
    spit(meta_path_for(path), meta);
    try {
        read_dataset_csv(path);
        FAIL("expected a throw");
    } catch (const std::runtime_error& e) {
        CHECK(contains(e.what(), "fingerprint mismatch"));
    }
    std::remove(path.c_str());
    std::remove(meta_path_for(path).c_str());
}

TEST_CASE("a truncated table fails the row-count check") {
    const PercentileDataset data = small_dataset();
    const std::string path = "io_truncated.csv";
    write_dataset_csv(path, data);
    std::string csv = slurp(path);
    const std::size_t cut = csv.find_last_of('\n', csv.size() - 2);
    REQUIRE(cut != std::string::npos);
    spit(path, csv.substr(0, cut + 1));
    try {
        read_dataset_csv(path);
        FAIL("expected a throw");
    } catch (const std::runtime_error& e) {
        CHECK(contains(e.what(), "data rows"));
    }
    std::remove(path.c_str());
    std::remove(meta_path_for(path).c_str());
}

TEST_CASE("a foreign header is rejected") {
    const PercentileDataset data = small_dataset();
    const std::string path = "io_badheader.csv";
    write_dataset_csv(path, data);
    std::string csv = slurp(path);
    csv[0] = 'S';
    spit(path, csv);
    try {
        read_dataset_csv(path);
        FAIL("expected a throw");
    } catch (const std::runtime_error& e) {
        CHECK(contains(e.what(), "bad header"));
    }
    std::remove(path.c_str());
    std::remove(meta_path_for(path).c_str());
}

TEST_CASE("the default configuration carries the calibrated values") {
    const RunConfig cfg = default_config();
    CHECK(cfg.params_train.alpha1 == 0.1759);
    CHECK(cfg.params_train.alpha2 == 0.0785);
    CHECK(cfg.params_train.sigma1 == 0.3423);
    CHECK(cfg.params_train.sigma2 == 0.2242);
    CHECK(cfg.params_train.mu_prime == std::log(0.0377));
    CHECK(cfg.params_train.rho_prime == 0.0);
    CHECK(cfg.params_train.r0 == 0.0307);
    CHECK(cfg.params_train.m0 == 0.0377);
    CHECK(cfg.params_train.dt == 1.0 / 12.0);
    CHECK(cfg.params_train.n_steps == 12);
    CHECK(cfg.params_valid.alpha1 == 0.1776);
    CHECK(cfg.params_valid.alpha2 == 0.0819);
    CHECK(cfg.params_valid.sigma1 == 0.3407);
    CHECK(cfg.params_valid.sigma2 == 0.2177);
    CHECK(cfg.params_valid.r0 == 0.0394);
    CHECK(cfg.params_valid.m0 == 0.0377);
    CHECK(cfg.sim.branch_factor == 4);
    CHECK(cfg.sim.n_steps == 12);
    CHECK(cfg.sim.branch_depth == 8);
    CHECK(cfg.sim.n_scenarios == 500);
    CHECK(cfg.sim.master_seed == 20240901);
    CHECK(cfg.train.learning_rate == 0.2);
    CHECK(cfg.train.batch_size == 32);
    CHECK(cfg.train.max_epochs == 200);
    CHECK(cfg.train.tol == 1e-6);
    CHECK(cfg.train.patience == 10);
    CHECK(cfg.train.l2 == 1e-6);
    CHECK(cfg.train.seed == 1);
    CHECK(cfg.train.holdout_fraction == 0.1);
    CHECK(cfg.eta_source == EtaSource::as_printed);
    CHECK(cfg.drift_mode == DriftMode::none);
    CHECK(cfg.output_dir == "out");
}

TEST_CASE("configuration lines reach their fields") {
    RunConfig cfg = default_config();
    apply_config_line(cfg, "params_train.alpha1", "0.5");
    CHECK(cfg.params_train.alpha1 == 0.5);
    apply_config_line(cfg, "params_valid.r0", "0.02");
    CHECK(cfg.params_valid.r0 == 0.02);
    apply_config_line(cfg, "sim.branch_depth", "6");
    CHECK(cfg.sim.branch_depth == 6);
    apply_config_line(cfg, "sim.master_seed", "123456789012345");
    CHECK(cfg.sim.master_seed == 123456789012345ull);
    apply_config_line(cfg, "train.learning_rate", "0.05");
    CHECK(cfg.train.learning_rate == 0.05);
    apply_config_line(cfg, "train.input_activation", "logistic");
    CHECK(cfg.train.input_activation == InputActivation::logistic);
    apply_config_line(cfg, "eta_source", "derivation");
    CHECK(cfg.eta_source == EtaSource::derivation);
    apply_config_line(cfg, "drift_mode", "indexed");
    CHECK(cfg.drift_mode == DriftMode::indexed);
    apply_config_line(cfg, "output_dir", "elsewhere");
    CHECK(cfg.output_dir == "elsewhere");
    CHECK_THROWS_WITH_AS(apply_config_line(cfg, "bogus.key", "1"),
                         "unknown config key 'bogus.key'", std::invalid_argument);
    CHECK_THROWS_AS(apply_config_line(cfg, "sim.branch_depth", "six"),
                    std::invalid_argument);
}

TEST_CASE("setting the long-run level recenters the initial mean") {
    RunConfig cfg = default_config();
    apply_config_line(cfg, "params_train.mu", "0.05");
    CHECK(cfg.params_train.mu_prime == std::log(0.05));
    CHECK(cfg.params_train.m0 == 0.05);
    apply_config_line(cfg, "params_train.m0", "0.041");
    CHECK(cfg.params_train.m0 == 0.041);
    CHECK(cfg.params_train.mu_prime == std::log(0.05));
}

TEST_CASE("configuration files accept comments and whitespace") {
    const std::string path = "io_config.cfg";
    spit(path,
         "# experiment knobs\n"
         "\n"
         "  sim.branch_depth = 5   # smaller tree\n"
         "\ttrain.max_epochs=7\n"
         "eta_source = derivation\n");
    const RunConfig cfg = load_config(path, default_config());
    CHECK(cfg.sim.branch_depth == 5);
    CHECK(cfg.train.max_epochs == 7);
    CHECK(cfg.eta_source == EtaSource::derivation);
    std::remove(path.c_str());
}

TEST_CASE("configuration errors carry the file and line") {
    const std::string path = "io_badconfig.cfg";
    spit(path, "sim.branch_depth = 5\n\nnot a key value line\n");
    try {
        load_config(path, default_config());
        FAIL("expected a throw");
    } catch (const std::runtime_error& e) {
        CHECK(contains(e.what(), "io_badconfig.cfg:3"));
    }
    spit(path, "sim.bogus = 1\n");
    try {
        load_config(path, default_config());
        FAIL("expected a throw");
    } catch (const std::runtime_error& e) {
        CHECK(contains(e.what(), "io_badconfig.cfg:1"));
        CHECK(contains(e.what(), "unknown config key"));
    }
    std::remove(path.c_str());
}

TEST_CASE("canonical text round-trips through a file unchanged") {
    RunConfig cfg = default_config();
    apply_config_line(cfg, "params_train.mu", "0.05");
    apply_config_line(cfg, "sim.branch_depth", "5");
    apply_config_line(cfg, "train.input_activation", "logistic");
    apply_config_line(cfg, "drift_mode", "indexed");
    const std::string text = canonical_config_text(cfg);
    const std::string path = "io_canonical.cfg";
    spit(path, text);
    const RunConfig back = load_config(path, default_config());
    CHECK(canonical_config_text(back) == text);
    std::remove(path.c_str());
}

TEST_CASE("the validation stream derives its seed from the master seed") {
    const RunConfig cfg = default_config();
    CHECK(effective_seed(cfg, "train") == 20240901);
    CHECK(effective_seed(cfg, "valid") == splitmix64(20240901));
    CHECK(effective_seed(cfg, "valid") == 13090727737338805659ull);
    CHECK_THROWS_AS(effective_seed(cfg, "test"), std::invalid_argument);
}

TEST_CASE("the configuration surface is closed and known") {
    const std::vector<std::string> keys = config_keys();
    CHECK(keys.size() == 38);
    auto has = [&](const char* k) {
        return std::find(keys.begin(), keys.end(), k) != keys.end();
    };
    CHECK(has("params_train.mu"));
    CHECK(has("params_valid.r0"));
    CHECK(has("sim.master_seed"));
    CHECK(has("train.learning_rate"));
    CHECK(has("eta_source"));
    CHECK(has("drift_mode"));
    CHECK(has("output_dir"));
    RunConfig cfg = default_config();
    for (const std::string& k : keys) {
        if (k == "eta_source")
            apply_config_line(cfg, k, "derivation");
        else if (k == "drift_mode")
            apply_config_line(cfg, k, "indexed");
        else if (k == "output_dir")
            apply_config_line(cfg, k, "d");
        else if (k == "train.input_activation")
            apply_config_line(cfg, k, "logistic");
        else if (contains(k, "n_steps") || contains(k, "branch") ||
                 contains(k, "scenarios") || contains(k, "seed") ||
                 contains(k, "epochs") || contains(k, "batch") ||
                 contains(k, "patience") || contains(k, "max_nodes"))
            apply_config_line(cfg, k, "3");
        else
            apply_config_line(cfg, k, "0.25");
    }
}

TEST_CASE("numeric formatting survives a parse round trip") {
    for (double v : {3.141592653589793, 0.1, 1.0 / 3.0, 1e-300,
                     1.7976931348623157e308, -0.0377, 42.0, 6.02e23}) {
        const std::string s = format_double(v);
        char* end = nullptr;
        const double back = std::strtod(s.c_str(), &end);
        CHECK(*end == '\0');
        CHECK(back == v);
    }
}
