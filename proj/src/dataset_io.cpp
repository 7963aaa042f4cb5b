#include "bk2f/dataset_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace bk2f {

namespace {

std::string parse_error(const std::string& path, const std::string& what) {
    return path + ": " + what;
}

double to_double(const std::string& path, const std::string& key, const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw std::runtime_error(parse_error(path, "bad numeric value for " + key));
    return v;
}

long long to_int(const std::string& path, const std::string& key, const std::string& s) {
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw std::runtime_error(parse_error(path, "bad integer value for " + key));
    return v;
}

std::uint64_t to_u64(const std::string& path, const std::string& key,
                     const std::string& s) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw std::runtime_error(parse_error(path, "bad unsigned value for " + key));
    return v;
}

}  // namespace

std::string meta_path_for(const std::string& csv_path) {
    const std::size_t dot = csv_path.find_last_of('.');
    const std::size_t slash = csv_path.find_last_of("/\\");
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
        return csv_path.substr(0, dot) + ".meta";
    return csv_path + ".meta";
}

std::string dataset_csv_header() {
    std::string h = "scenario,t";
    char buf[16];
    for (int k = 1; k <= kNumQuantiles; ++k) {
        std::snprintf(buf, sizeof(buf), ",q%04d", k * 5);
        h += buf;
    }
    return h;
}

void write_dataset_csv(const std::string& csv_path, const PercentileDataset& data) {
    std::ofstream meta(meta_path_for(csv_path));
    if (!meta)
        throw std::runtime_error("write_dataset_csv: cannot open " +
                                 meta_path_for(csv_path));
    meta << "format=bk2f-dataset\n";
    meta << "format_version=1\n";
    meta << "params.alpha1=" << format_double(data.params.alpha1) << '\n';
    meta << "params.alpha2=" << format_double(data.params.alpha2) << '\n';
    meta << "params.sigma1=" << format_double(data.params.sigma1) << '\n';
    meta << "params.sigma2=" << format_double(data.params.sigma2) << '\n';
    meta << "params.mu_prime=" << format_double(data.params.mu_prime) << '\n';
    meta << "params.rho_prime=" << format_double(data.params.rho_prime) << '\n';
    meta << "params.r0=" << format_double(data.params.r0) << '\n';
    meta << "params.m0=" << format_double(data.params.m0) << '\n';
    meta << "params.dt=" << format_double(data.params.dt) << '\n';
    meta << "params.n_steps=" << data.params.n_steps << '\n';
    meta << "sim.branch_factor=" << data.sim.branch_factor << '\n';
    meta << "sim.n_steps=" << data.sim.n_steps << '\n';
    meta << "sim.branch_depth=" << data.sim.branch_depth << '\n';
    meta << "sim.n_scenarios=" << data.sim.n_scenarios << '\n';
    meta << "sim.master_seed=" << data.sim.master_seed << '\n';
    meta << "sim.max_nodes=" << data.sim.max_nodes << '\n';
    meta << "eta_source=" << to_string(data.eta_source) << '\n';
    meta << "fingerprint=" << data.fingerprint << '\n';
    if (!meta)
        throw std::runtime_error("write_dataset_csv: write failed for " +
                                 meta_path_for(csv_path));
    meta.close();

    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("write_dataset_csv: cannot open " + csv_path);
    csv << dataset_csv_header() << '\n';
    for (int s = 0; s < data.n_scenarios(); ++s) {
        for (int t = 0; t <= data.n_steps(); ++t) {
            csv << s << ',' << t;
            auto row = data.quantiles(s, t);
            for (double v : row) csv << ',' << format_double(v);
            csv << '\n';
        }
    }
    if (!csv) throw std::runtime_error("write_dataset_csv: write failed for " + csv_path);
}

PercentileDataset read_dataset_csv(const std::string& csv_path) {
    const std::string meta_path = meta_path_for(csv_path);
    std::ifstream meta(meta_path);
    if (!meta)
        throw std::runtime_error("read_dataset_csv: cannot open sidecar " + meta_path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(meta, line)) {
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(parse_error(meta_path, "expected key=value: " + line));
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto need = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end())
            throw std::runtime_error(parse_error(meta_path, "missing key " + key));
        return it->second;
    };
    if (need("format") != "bk2f-dataset" || need("format_version") != "1")
        throw std::runtime_error(parse_error(meta_path, "unsupported dataset format"));

    PercentileDataset data;
    ModelParams& p = data.params;
    p.alpha1 = to_double(meta_path, "params.alpha1", need("params.alpha1"));
    p.alpha2 = to_double(meta_path, "params.alpha2", need("params.alpha2"));
    p.sigma1 = to_double(meta_path, "params.sigma1", need("params.sigma1"));
    p.sigma2 = to_double(meta_path, "params.sigma2", need("params.sigma2"));
    p.mu_prime = to_double(meta_path, "params.mu_prime", need("params.mu_prime"));
    p.rho_prime = to_double(meta_path, "params.rho_prime", need("params.rho_prime"));
    p.r0 = to_double(meta_path, "params.r0", need("params.r0"));
    p.m0 = to_double(meta_path, "params.m0", need("params.m0"));
    p.dt = to_double(meta_path, "params.dt", need("params.dt"));
    p.n_steps = static_cast<int>(to_int(meta_path, "params.n_steps", need("params.n_steps")));
    SimConfig& c = data.sim;
    c.branch_factor =
        static_cast<int>(to_int(meta_path, "sim.branch_factor", need("sim.branch_factor")));
    c.n_steps = static_cast<int>(to_int(meta_path, "sim.n_steps", need("sim.n_steps")));
    c.branch_depth =
        static_cast<int>(to_int(meta_path, "sim.branch_depth", need("sim.branch_depth")));
    c.n_scenarios =
        static_cast<int>(to_int(meta_path, "sim.n_scenarios", need("sim.n_scenarios")));
    c.master_seed = to_u64(meta_path, "sim.master_seed", need("sim.master_seed"));
    c.max_nodes = to_u64(meta_path, "sim.max_nodes", need("sim.max_nodes"));
    data.eta_source = eta_source_from_string(need("eta_source"));
    data.fingerprint = to_u64(meta_path, "fingerprint", need("fingerprint"));
    const std::uint64_t recomputed = dataset_fingerprint(p, c, data.eta_source);
    if (recomputed != data.fingerprint)
        throw std::runtime_error(parse_error(
            meta_path, "fingerprint mismatch: recorded " +
                           std::to_string(data.fingerprint) + ", recomputed " +
                           std::to_string(recomputed)));
    p.validate();
    c.validate();

    std::ifstream csv(csv_path);
    if (!csv) throw std::runtime_error("read_dataset_csv: cannot open " + csv_path);
    if (!std::getline(csv, line) || line != dataset_csv_header())
        throw std::runtime_error(parse_error(csv_path, "bad header line"));
    const std::size_t per_scen = static_cast<std::size_t>(c.n_steps + 1) * kNumQuantiles;
    data.q.assign(static_cast<std::size_t>(c.n_scenarios) * per_scen, 0.0);
    std::size_t n_rows = 0;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        const char* ptr = line.c_str();
        char* end = nullptr;
        const long long s = std::strtoll(ptr, &end, 10);
        if (end == ptr || *end != ',')
            throw std::runtime_error(parse_error(csv_path, "bad scenario field: " + line));
        ptr = end + 1;
        const long long t = std::strtoll(ptr, &end, 10);
        if (end == ptr || *end != ',')
            throw std::runtime_error(parse_error(csv_path, "bad t field: " + line));
        ptr = end;
        if (s < 0 || s >= c.n_scenarios || t < 0 || t > c.n_steps)
            throw std::runtime_error(parse_error(
                csv_path, "row out of range: scenario " + std::to_string(s) + ", t " +
                              std::to_string(t)));
        double* out = data.q.data() + static_cast<std::size_t>(s) * per_scen +
                      static_cast<std::size_t>(t) * kNumQuantiles;
        for (int k = 0; k < kNumQuantiles; ++k) {
            if (*ptr != ',')
                throw std::runtime_error(
                    parse_error(csv_path, "expected 202 fields: " + line.substr(0, 40)));
            ptr += 1;
            out[k] = std::strtod(ptr, &end);
            if (end == ptr)
                throw std::runtime_error(
                    parse_error(csv_path, "bad quantile value in row scenario " +
                                              std::to_string(s)));
            ptr = end;
        }
        if (*ptr != '\0')
            throw std::runtime_error(
                parse_error(csv_path, "trailing characters in row scenario " +
                                          std::to_string(s)));
        ++n_rows;
    }
    const std::size_t expected_rows =
        static_cast<std::size_t>(c.n_scenarios) * (c.n_steps + 1);
    if (n_rows != expected_rows)
        throw std::runtime_error(parse_error(
            csv_path, "expected " + std::to_string(expected_rows) + " data rows, got " +
                          std::to_string(n_rows)));
    return data;
}

}  // namespace bk2f
