// Times the OpenMP scenario engine against the serial reference and verifies
// that the two produce bit-identical datasets.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bk2f/config.hpp"
#include "bk2f/sim.hpp"

int main(int argc, char** argv) {
    int n_scenarios = 32, depth = 8, n_steps = 12;
    if (argc > 1) n_scenarios = std::atoi(argv[1]);
    if (argc > 2) depth = std::atoi(argv[2]);
    if (argc > 3) n_steps = std::atoi(argv[3]);
    if (n_scenarios < 1 || depth < 0 || n_steps < 2) {
        std::fprintf(stderr, "usage: sim_bench [n_scenarios] [branch_depth] [n_steps]\n");
        return 2;
    }

    bk2f::RunConfig cfg = bk2f::default_config();
    bk2f::ModelParams p = cfg.params_train;
    p.n_steps = n_steps;
    bk2f::SimConfig sim = cfg.sim;
    sim.n_scenarios = n_scenarios;
    sim.branch_depth = depth;
    sim.n_steps = n_steps;

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    const bk2f::PercentileDataset serial = bk2f::generate_dataset_reference(p, sim);
    const auto t1 = clock::now();
    const bk2f::PercentileDataset parallel = bk2f::generate_dataset(p, sim);
    const auto t2 = clock::now();

    const double serial_s = std::chrono::duration<double>(t1 - t0).count();
    const double parallel_s = std::chrono::duration<double>(t2 - t1).count();
    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("scenarios=%d depth=%d steps=%d widest_level=%llu\n", n_scenarios, depth,
                n_steps, static_cast<unsigned long long>(sim.level_size(n_steps)));
    std::printf("serial reference: %8.3f s\n", serial_s);
    std::printf("openmp (%2d thr): %8.3f s  speedup %.2fx\n", threads, parallel_s,
                parallel_s > 0.0 ? serial_s / parallel_s : 0.0);

    const bool same =
        serial.q.size() == parallel.q.size() &&
        std::memcmp(serial.q.data(), parallel.q.data(),
                    serial.q.size() * sizeof(double)) == 0;
    std::printf("bit-identical: %s\n", same ? "yes" : "NO");
    return same ? 0 : 1;
}
