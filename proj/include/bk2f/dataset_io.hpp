#pragma once

#include <string>

#include "bk2f/sim.hpp"

namespace bk2f {

// CSV layout: header "scenario,t,q0005,q0010,...,q1000" (per-mille column
// labels), one row per (scenario, t = 0..n_steps), values at 17 significant
// digits. A sidecar (same basename, .meta extension) carries params, sim
// config, effective seed and fingerprint as key = value lines.
void write_dataset_csv(const std::string& csv_path, const PercentileDataset& data);
PercentileDataset read_dataset_csv(const std::string& csv_path);

std::string meta_path_for(const std::string& csv_path);
std::string dataset_csv_header();

}  // namespace bk2f
