#pragma once

#include <map>
#include <string>
#include <vector>

#include "bk2f/eval.hpp"
#include "bk2f/mlp.hpp"
#include "bk2f/params.hpp"
#include "bk2f/sim.hpp"

namespace bk2f {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kDatasetFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;

// Full run configuration. Flat key = value files with dotted keys
// (e.g. "params_train.alpha1 = 0.1759"); '#' starts a comment. mu and m0 are
// stored as levels; the engine keeps mu_prime = ln(mu). Unknown keys are
// rejected by name.
struct RunConfig {
    ModelParams params_train;
    ModelParams params_valid;
    SimConfig sim;
    TrainConfig train;
    EtaSource eta_source = EtaSource::as_printed;
    DriftMode drift_mode = DriftMode::none;
    std::string output_dir = "out";
};

RunConfig default_config();                       // desk-scale defaults
void apply_config_line(RunConfig& cfg, const std::string& key,
                       const std::string& value);
RunConfig load_config(const std::string& path, RunConfig base);
std::string canonical_config_text(const RunConfig& cfg);  // round-trips exactly

// Ordered list of every recognized config key (drives CLI overrides).
std::vector<std::string> config_keys();

// Effective stream seeds: "train" uses the master seed, "valid" a splitmix64
// derivation of it, so the two datasets never share shocks.
std::uint64_t effective_seed(const RunConfig& cfg, const std::string& which);

// Pipeline commands (file-level contracts behind the CLI). All throw on
// error; reruns with identical inputs produce byte-identical outputs.
// Paths under cfg.output_dir: train.csv/valid.csv (+ .meta), model.txt,
// rmse.csv, cross_section_t<k>.csv, manifest.txt.
std::string cmd_generate(const RunConfig& cfg, const std::string& which,
                         bool allow_large);
std::string cmd_train(const RunConfig& cfg, const std::string& dataset_csv);
std::vector<std::string> cmd_evaluate(const RunConfig& cfg,
                                      const std::string& model_path,
                                      const std::string& train_csv,
                                      const std::string& valid_csv);
// Evaluate plus a human-readable table on stdout.
void cmd_report(const RunConfig& cfg, const std::string& model_path,
                const std::string& train_csv, const std::string& valid_csv);

void write_manifest(const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& artifact_lines);

// Level-width guard used by generate: without allow_large the widest level
// is capped at 4^8 nodes; the refusal message carries the memory estimate.
void check_scale_allowed(const SimConfig& sim, bool allow_large);

EvalReport evaluate_files(const RunConfig& cfg, const std::string& model_path,
                          const std::string& train_csv, const std::string& valid_csv);
void write_rmse_csv(const std::string& path, const EvalReport& rep);
void write_cross_section_csv(const std::string& path, const EvalReport& rep, int idx);

}  // namespace bk2f
