#ifndef SMSIM_SWEEP_HPP
#define SMSIM_SWEEP_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smsim/constellation.hpp"

namespace smsim {

enum class DetectorKind {
    Ssp,
    SspNoninterleaved,
    SspIidChannels,
    Sp,
    NcsOmp,
    Lmmse,
    Ml,
    AnalyticGmmv,
    AnalyticMmv,
    GaussianApprox,
};

std::optional<DetectorKind> detector_from_name(const std::string& name);
const char* detector_name(DetectorKind kind);
bool detector_is_analytic(DetectorKind kind);

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
    int n_tx = 64;
    int n_rx = 16;
    int n_active = 1;
    int mod_order = 8;
    Scheme scheme = Scheme::PSK;
    int group_size = 1;
    double r_tx = 0.0;
    double r_rx = 0.0;
    std::vector<double> snr_db;
    std::vector<std::string> detectors;
    std::uint64_t trials_per_point = 20000;
    std::uint64_t max_errors = 200;
    std::uint64_t master_seed = 1;
    std::uint64_t ml_budget = 1ULL << 22;
    std::string output_path;

    /// Throws ConfigError on any inconsistency.
    void validate() const;
};

struct SweepRecord {
    std::string detector;
    double snr_db = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t spatial_errors = 0;
    double scser = 0.0;
    std::uint64_t bit_errors = 0;
    std::uint64_t total_bits = 0;
    double ber = 0.0;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    bool refused = false; // detector budget refusal (not persisted as a column)
};

/// Runs every (snr, detector) point. Per-trial seeds derive from
/// (master_seed, snr index, trial index), so records do not depend on
/// the worker count. workers = 0 uses the OpenMP default.
std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg, int workers = 0);

/// Serial reference path, kept alongside the parallel engine; must
/// produce records identical to run_sweep (wall time aside).
std::vector<SweepRecord> run_sweep_serial(const ExperimentConfig& cfg);

// Flat key=value config files, '#' comments, one key per line.
ExperimentConfig parse_config_file(const std::string& path);
void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value);

enum class OutputFormat { Csv, Json };

void emit_results(const std::vector<SweepRecord>& records, OutputFormat format,
                  std::ostream& out);
void emit_results_file(const std::vector<SweepRecord>& records, OutputFormat format,
                       const std::string& path);
std::vector<SweepRecord> parse_results_csv(std::istream& in);

/// Standalone matplotlib script for one figure replica; missing series
/// are listed in a header comment.
std::string plot_script(const std::vector<SweepRecord>& records,
                        const std::string& figure);
void emit_plot_script(const std::vector<SweepRecord>& records,
                      const std::string& figure, const std::string& path);

} // namespace smsim

#endif
