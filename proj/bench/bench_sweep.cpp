// Times the parallel sweep engine against the serial reference on the
// same config and confirms they produce identical error counts.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "smsim/sweep.hpp"

using namespace smsim;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

} // namespace

int main(int argc, char** argv) {
    ExperimentConfig cfg;
    cfg.n_tx = 64;
    cfg.n_rx = 16;
    cfg.n_active = 1;
    cfg.mod_order = 8;
    cfg.group_size = 4;
    cfg.r_tx = 0.4;
    cfg.r_rx = 0.4;
    cfg.snr_db = {-4, 0, 4};
    cfg.trials_per_point = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 4000;
    cfg.max_errors = 1ULL << 30;
    cfg.master_seed = 1;
    cfg.detectors = {"ssp", "ncs_omp"};

    auto start = clock_type::now();
    const auto serial = run_sweep_serial(cfg);
    const double t_serial = seconds_since(start);

    start = clock_type::now();
    const auto parallel = run_sweep(cfg);
    const double t_parallel = seconds_since(start);

    bool identical = serial.size() == parallel.size();
    for (std::size_t i = 0; identical && i < serial.size(); ++i)
        identical = serial[i].detector == parallel[i].detector &&
                    serial[i].snr_db == parallel[i].snr_db &&
                    serial[i].trials == parallel[i].trials &&
                    serial[i].spatial_errors == parallel[i].spatial_errors &&
                    serial[i].bit_errors == parallel[i].bit_errors;

    std::printf("trials/point: %llu\n",
                static_cast<unsigned long long>(cfg.trials_per_point));
    std::printf("serial:   %.3f s\n", t_serial);
    std::printf("parallel: %.3f s (speedup %.2fx)\n", t_parallel,
                t_serial / t_parallel);
    std::printf("records identical: %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
