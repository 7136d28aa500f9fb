#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smsim/sweep.hpp"

namespace {

using smsim::ExperimentConfig;
using smsim::OutputFormat;
using smsim::SweepRecord;

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    int workers = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_override_flags(CLI::App* app, std::vector<std::pair<std::string, std::string>>& kv) {
    // Flag names mirror config keys with a '--' prefix.
    static const char* keys[] = {"n_t",  "n_r", "n_a", "m",  "scheme", "g",
                                 "r_t",  "r_r", "snr_db_list", "detectors",
                                 "trials_per_point", "max_errors", "master_seed",
                                 "ml_budget", "output_path"};
    for (const char* key : keys) {
        app->add_option_function<std::string>(
            std::string("--") + key,
            [key, &kv](const std::string& v) { kv.emplace_back(key, v); });
    }
}

OutputFormat parse_format(const std::string& f) {
    if (f == "csv") return OutputFormat::Csv;
    if (f == "json") return OutputFormat::Json;
    throw smsim::ConfigError("unknown format: " + f);
}

int emit(const std::vector<SweepRecord>& records, const CommonOpts& opts,
         const ExperimentConfig& cfg) {
    const std::string path = !opts.out_path.empty() ? opts.out_path : cfg.output_path;
    if (path.empty()) {
        smsim::emit_results(records, parse_format(opts.format), std::cout);
    } else {
        smsim::emit_results_file(records, parse_format(opts.format), path);
    }
    for (const auto& r : records)
        if (r.refused) {
            std::cerr << "refused: " << r.detector << " at " << r.snr_db
                      << " dB (hypothesis budget)\n";
            return 2;
        }
    return 0;
}

std::vector<SweepRecord> run_labeled(ExperimentConfig cfg, int workers,
                                     const std::string& suffix) {
    auto records = smsim::run_sweep(cfg, workers);
    if (!suffix.empty())
        for (auto& r : records) r.detector += suffix;
    return records;
}

ExperimentConfig base_config(int n_tx, int n_rx, int n_active, int m, int g, double r,
                             std::vector<double> snr, std::vector<std::string> dets,
                             std::uint64_t trials, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.n_tx = n_tx;
    cfg.n_rx = n_rx;
    cfg.n_active = n_active;
    cfg.mod_order = m;
    cfg.group_size = g;
    cfg.r_tx = r;
    cfg.r_rx = r;
    cfg.snr_db = std::move(snr);
    cfg.detectors = std::move(dets);
    cfg.trials_per_point = trials;
    cfg.master_seed = seed;
    return cfg;
}

std::vector<double> snr_range(double lo, double hi, double step) {
    std::vector<double> v;
    for (double s = lo; s <= hi + 1e-9; s += step) v.push_back(s);
    return v;
}

std::vector<SweepRecord> run_figure(const std::string& name, std::uint64_t trials,
                                    std::uint64_t seed, int workers) {
    std::vector<SweepRecord> records;
    auto append = [&](std::vector<SweepRecord> recs) {
        records.insert(records.end(), recs.begin(), recs.end());
    };
    if (name == "fig3") {
        append(run_labeled(base_config(64, 16, 1, 8, 1, 0.0, snr_range(0, 10, 1),
                                       {"sp", "ncs_omp", "analytic_gmmv"}, trials, seed),
                           workers, "_g1"));
        append(run_labeled(
            base_config(64, 16, 1, 8, 4, 0.0, snr_range(0, 10, 1),
                        {"ssp", "ssp_noninterleaved", "ssp_iid_channels",
                         "analytic_gmmv", "analytic_mmv"},
                        trials, seed),
            workers, "_g4"));
    } else if (name == "fig4") {
        append(run_labeled(
            base_config(64, 16, 1, 8, 4, 0.4, snr_range(0, 12, 1),
                        {"lmmse", "ncs_omp", "ssp_noninterleaved", "ssp",
                         "ssp_iid_channels"},
                        trials, seed),
            workers, ""));
    } else if (name == "fig5") {
        append(run_labeled(base_config(64, 16, 1, 2, 1, 0.4, snr_range(0, 16, 2),
                                       {"ncs_omp"}, trials, seed),
                           workers, "_7bpcu"));
        ExperimentConfig qpsk = base_config(65, 16, 2, 4, 2, 0.4, snr_range(0, 16, 2),
                                            {"ssp"}, trials, seed);
        append(run_labeled(qpsk, workers, "_9.5bpcu"));
        append(run_labeled(base_config(65, 16, 2, 8, 2, 0.4, snr_range(0, 16, 2),
                                       {"ssp"}, trials, seed),
                           workers, "_11.5bpcu"));
    } else if (name == "fig6") {
        append(run_labeled(base_config(65, 3, 2, 8, 1, 0.4, snr_range(0, 30, 5),
                                       {"ncs_omp", "ssp"}, trials, seed),
                           workers, "_g1"));
        for (int g : {2, 4})
            append(run_labeled(base_config(65, 3, 2, 8, g, 0.4, snr_range(0, 30, 5),
                                           {"ssp"}, trials, seed),
                               workers, "_g" + std::to_string(g)));
    } else if (name == "fig7") {
        append(run_labeled(base_config(65, 16, 2, 8, 3, 0.4, snr_range(0, 12, 2),
                                       {"ssp", "ml"}, trials, seed),
                           workers, ""));
    } else {
        throw smsim::ConfigError("unknown figure: " + name);
    }
    return records;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo link-level simulator for grouped spatial modulation"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::vector<std::pair<std::string, std::string>> overrides;

    auto* sweep = app.add_subcommand("sweep", "run a configured SNR sweep");
    sweep->add_option("--config", opts.config_path, "key=value config file");
    sweep->add_option("--seed", opts.seed, "master seed override")
        ->each([&](const std::string&) { opts.seed_set = true; });
    sweep->add_option("--out", opts.out_path, "output file (default: stdout)");
    sweep->add_option("--workers", opts.workers, "worker threads (0 = default)");
    sweep->add_option("--format", opts.format, "csv|json");
    add_override_flags(sweep, overrides);

    auto* analytic = app.add_subcommand("analytic", "evaluate analytical curves");
    analytic->add_option("--seed", opts.seed)
        ->each([&](const std::string&) { opts.seed_set = true; });
    analytic->add_option("--out", opts.out_path);
    analytic->add_option("--format", opts.format, "csv|json");
    add_override_flags(analytic, overrides);

    std::string figure_name;
    std::uint64_t figure_trials = 20000;
    auto* figure = app.add_subcommand("figure", "run a named figure replica");
    figure->add_option("name", figure_name, "fig3|fig4|fig5|fig6|fig7")->required();
    figure->add_option("--trials", figure_trials, "trials per point");
    figure->add_option("--seed", opts.seed)
        ->each([&](const std::string&) { opts.seed_set = true; });
    figure->add_option("--out", opts.out_path, "output basename (default: figure name)");
    figure->add_option("--workers", opts.workers);
    figure->add_option("--format", opts.format, "csv|json");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed() || analytic->parsed()) {
            ExperimentConfig cfg;
            if (!opts.config_path.empty()) cfg = smsim::parse_config_file(opts.config_path);
            if (analytic->parsed() && cfg.detectors.empty())
                cfg.detectors = {"analytic_gmmv", "analytic_mmv", "gaussian_approx"};
            for (const auto& [k, v] : overrides) smsim::apply_config_entry(cfg, k, v);
            if (opts.seed_set) cfg.master_seed = opts.seed;
            const auto records = smsim::run_sweep(cfg, opts.workers);
            return emit(records, opts, cfg);
        }
        // figure
        const std::uint64_t seed = opts.seed_set ? opts.seed : 1;
        const auto records = run_figure(figure_name, figure_trials, seed, opts.workers);
        const std::string base = opts.out_path.empty() ? figure_name : opts.out_path;
        const std::string ext = opts.format == "json" ? ".json" : ".csv";
        smsim::emit_results_file(records, parse_format(opts.format), base + ext);
        smsim::emit_plot_script(records, figure_name, base + ".py");
        for (const auto& r : records)
            if (r.refused) return 2;
        return 0;
    } catch (const smsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
