#include "smsim/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "smsim/analysis.hpp"
#include "smsim/channel.hpp"
#include "smsim/detect.hpp"
#include "smsim/interleave.hpp"
#include "smsim/rng.hpp"

namespace smsim {

namespace {

struct DetectorNameEntry {
    const char* name;
    DetectorKind kind;
};

constexpr DetectorNameEntry kDetectorNames[] = {
    {"ssp", DetectorKind::Ssp},
    {"ssp_noninterleaved", DetectorKind::SspNoninterleaved},
    {"ssp_iid_channels", DetectorKind::SspIidChannels},
    {"sp", DetectorKind::Sp},
    {"ncs_omp", DetectorKind::NcsOmp},
    {"lmmse", DetectorKind::Lmmse},
    {"ml", DetectorKind::Ml},
    {"analytic_gmmv", DetectorKind::AnalyticGmmv},
    {"analytic_mmv", DetectorKind::AnalyticMmv},
    {"gaussian_approx", DetectorKind::GaussianApprox},
};

struct TrialOutcome {
    bool spatial_error = false;
    std::uint32_t bit_errors = 0;
    std::uint32_t total_bits = 0;
    bool refused = false;
};

/// Immutable per-sweep context shared by all workers.
struct SweepContext {
    const ExperimentConfig& cfg;
    SpatialConstellation a;
    SignalConstellation b;
    ChannelModel model;

    explicit SweepContext(const ExperimentConfig& c)
        : cfg(c),
          a(build_spatial_constellation(c.n_tx, c.n_active)),
          b(SignalConstellation::make(c.scheme, c.mod_order)),
          model(c.n_rx, c.n_tx, CorrelationSpec{c.r_tx, c.r_rx}) {}
};

TrialOutcome run_trial(const SweepContext& ctx, DetectorKind kind, double sigma_w2,
                       std::uint64_t trial_seed, std::uint64_t group_index) {
    const auto& cfg = ctx.cfg;
    const int g = cfg.group_size;
    Rng rng(trial_seed);

    // Random group bit word.
    BitWord bits(group_bit_length(ctx.a, ctx.b, g));
    for (auto& bit : bits) bit = rng.bit() ? 1 : 0;

    // Only the proposed scheme (and its ML benchmark) uses the per-slot
    // permutations; the conventional baselines detect the plain
    // transmission, slot by slot.
    const bool interleaved = kind == DetectorKind::Ssp || kind == DetectorKind::Ml;
    const PermutationSchedule schedule =
        interleaved ? make_schedule(cfg.n_tx, g, cfg.master_seed, group_index)
                    : identity_schedule(cfg.n_tx, g);

    const TransmissionGroup tg = encode_group(bits, ctx.a, ctx.b, schedule);

    GmmvInstance inst;
    inst.a = &ctx.a;
    inst.b = &ctx.b;
    inst.y.resize(g);
    inst.channels.resize(g);
    if (kind == DetectorKind::SspIidChannels) {
        // Ideal reference: independent channel per slot, no interleaving.
        for (int t = 0; t < g; ++t) {
            inst.channels[t] = ctx.model.draw(rng);
            inst.y[t] = inst.channels[t] * tg.signals[t].values;
            add_noise(inst.y[t], sigma_w2, rng);
        }
    } else {
        // Quasi-static group: one channel shared by the G slots.
        const Eigen::MatrixXcd h = ctx.model.draw(rng);
        for (int t = 0; t < g; ++t) {
            inst.y[t] = h * tg.transmitted[t];
            add_noise(inst.y[t], sigma_w2, rng);
            inst.channels[t] = deinterleave_channel(h, schedule, t + 1);
        }
    }

    DetectionResult res;
    try {
        switch (kind) {
            case DetectorKind::Ssp:
            case DetectorKind::SspNoninterleaved:
            case DetectorKind::SspIidChannels:
            case DetectorKind::Sp:
                res = ssp_detect(inst);
                break;
            case DetectorKind::NcsOmp:
                res = ncs_omp_detect(inst);
                break;
            case DetectorKind::Lmmse:
                res = lmmse_detect(inst, sigma_w2);
                break;
            case DetectorKind::Ml:
                res = ml_detect(inst, cfg.ml_budget);
                break;
            default:
                break;
        }
    } catch (const MlBudgetExceeded&) {
        TrialOutcome out;
        out.refused = true;
        return out;
    }

    const std::uint64_t true_pat = bits_to_index(bits, 0, ctx.a.spatial_bits);
    TrialOutcome out;
    out.spatial_error = res.pattern_index != static_cast<int>(true_pat);
    out.total_bits = static_cast<std::uint32_t>(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i] != res.bits[i]) ++out.bit_errors;
    return out;
}

SweepRecord analytic_record(const ExperimentConfig& cfg, DetectorKind kind,
                            double snr_db) {
    AnalysisParams p;
    p.n_tx = cfg.n_tx;
    p.n_rx = cfg.n_rx;
    p.m = cfg.mod_order;
    p.g = cfg.group_size;
    p.sigma_s2 = 1.0;
    p.sigma_w2 = noise_variance_for_snr_db(snr_db, cfg.n_active);

    SweepRecord rec;
    rec.detector = detector_name(kind);
    rec.snr_db = snr_db;
    rec.seed = cfg.master_seed;
    switch (kind) {
        case DetectorKind::AnalyticGmmv:
            rec.scser = scser_analytic(MetricKind::GMMV, p);
            break;
        case DetectorKind::AnalyticMmv:
            rec.scser = scser_analytic(MetricKind::MMV, p);
            break;
        case DetectorKind::GaussianApprox:
            rec.scser = 1.0 - pairwise_correct_gaussian(MetricKind::GMMV, p);
            break;
        default:
            break;
    }
    return rec;
}

SweepRecord run_point(const SweepContext& ctx, DetectorKind kind,
                      std::size_t snr_index, int workers) {
    const auto& cfg = ctx.cfg;
    const double snr_db = cfg.snr_db[snr_index];
    const auto t0 = std::chrono::steady_clock::now();

    SweepRecord rec;
    rec.detector = detector_name(kind);
    rec.snr_db = snr_db;
    rec.seed = mix_seed(cfg.master_seed, snr_index);

    if (detector_is_analytic(kind)) {
        rec = analytic_record(cfg, kind, snr_db);
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return rec;
    }

    const double sigma_w2 = noise_variance_for_snr_db(snr_db, cfg.n_active);
    const std::uint64_t point_seed = rec.seed;

    std::uint64_t next = 0;
    bool stopped = false;
    std::vector<TrialOutcome> chunk;
    while (!stopped && next < cfg.trials_per_point) {
        const std::uint64_t n =
            std::min<std::uint64_t>(1024, cfg.trials_per_point - next);
        chunk.assign(n, TrialOutcome{});
#ifdef _OPENMP
        const int nthreads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 8) num_threads(nthreads)
#else
        (void)workers;
#endif
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
            const std::uint64_t trial = next + static_cast<std::uint64_t>(i);
            chunk[i] = run_trial(ctx, kind, sigma_w2, mix_seed(point_seed, trial), trial);
        }
        // Sequential merge in trial order keeps early stopping
        // independent of the worker count.
        for (std::uint64_t i = 0; i < n && !stopped; ++i) {
            const TrialOutcome& out = chunk[i];
            if (out.refused) {
                rec.refused = true;
                stopped = true;
                break;
            }
            ++rec.trials;
            rec.spatial_errors += out.spatial_error ? 1 : 0;
            rec.bit_errors += out.bit_errors;
            rec.total_bits += out.total_bits;
            if (rec.spatial_errors >= cfg.max_errors) stopped = true;
        }
        next += n;
    }

    rec.scser = rec.trials ? static_cast<double>(rec.spatial_errors) / rec.trials
                           : std::nan("");
    rec.ber = rec.total_bits ? static_cast<double>(rec.bit_errors) / rec.total_bits
                             : std::nan("");
    if (rec.refused) {
        rec.scser = std::nan("");
        rec.ber = std::nan("");
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

SweepRecord run_point_serial(const SweepContext& ctx, DetectorKind kind,
                             std::size_t snr_index) {
    const auto& cfg = ctx.cfg;
    const auto t0 = std::chrono::steady_clock::now();

    SweepRecord rec;
    rec.detector = detector_name(kind);
    rec.snr_db = cfg.snr_db[snr_index];
    rec.seed = mix_seed(cfg.master_seed, snr_index);

    if (detector_is_analytic(kind)) {
        rec = analytic_record(cfg, kind, cfg.snr_db[snr_index]);
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return rec;
    }

    const double sigma_w2 = noise_variance_for_snr_db(cfg.snr_db[snr_index], cfg.n_active);
    for (std::uint64_t trial = 0; trial < cfg.trials_per_point; ++trial) {
        const TrialOutcome out =
            run_trial(ctx, kind, sigma_w2, mix_seed(rec.seed, trial), trial);
        if (out.refused) {
            rec.refused = true;
            break;
        }
        ++rec.trials;
        rec.spatial_errors += out.spatial_error ? 1 : 0;
        rec.bit_errors += out.bit_errors;
        rec.total_bits += out.total_bits;
        if (rec.spatial_errors >= cfg.max_errors) break;
    }

    rec.scser = rec.trials ? static_cast<double>(rec.spatial_errors) / rec.trials
                           : std::nan("");
    rec.ber = rec.total_bits ? static_cast<double>(rec.bit_errors) / rec.total_bits
                             : std::nan("");
    if (rec.refused) {
        rec.scser = std::nan("");
        rec.ber = std::nan("");
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

} // namespace

std::optional<DetectorKind> detector_from_name(const std::string& name) {
    for (const auto& e : kDetectorNames)
        if (name == e.name) return e.kind;
    return std::nullopt;
}

const char* detector_name(DetectorKind kind) {
    for (const auto& e : kDetectorNames)
        if (e.kind == kind) return e.name;
    return "?";
}

bool detector_is_analytic(DetectorKind kind) {
    return kind == DetectorKind::AnalyticGmmv || kind == DetectorKind::AnalyticMmv ||
           kind == DetectorKind::GaussianApprox;
}

void ExperimentConfig::validate() const {
    if (n_active < 1 || n_active >= n_tx)
        throw ConfigError("require 1 <= n_a < n_t");
    if (n_rx < n_active + 1) throw ConfigError("require n_r >= n_a + 1");
    if (mod_order < 2 || (mod_order & (mod_order - 1)) != 0)
        throw ConfigError("m must be a power of two >= 2");
    if (scheme == Scheme::QAM && mod_order < 4) throw ConfigError("QAM needs m >= 4");
    if (group_size < 1) throw ConfigError("g must be >= 1");
    if (r_tx < 0.0 || r_tx >= 1.0 || r_rx < 0.0 || r_rx >= 1.0)
        throw ConfigError("correlation coefficients must be in [0,1)");
    if (snr_db.empty()) throw ConfigError("empty snr_db_list");
    if (std::adjacent_find(snr_db.begin(), snr_db.end(),
                           [](double x, double y) { return x >= y; }) != snr_db.end())
        throw ConfigError("snr_db_list must be strictly increasing");
    if (trials_per_point < 1) throw ConfigError("trials_per_point must be >= 1");
    if (detectors.empty()) throw ConfigError("no detectors requested");
    for (const auto& d : detectors) {
        const auto kind = detector_from_name(d);
        if (!kind) throw ConfigError("unknown detector: " + d);
        if (*kind == DetectorKind::Sp && group_size != 1)
            throw ConfigError("detector 'sp' requires g = 1");
        if (detector_is_analytic(*kind)) {
            if (n_active != 1)
                throw ConfigError("analytic detectors require n_a = 1");
            if (r_tx != 0.0 || r_rx != 0.0)
                throw ConfigError("analytic detectors require uncorrelated channels");
        }
    }
}

std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg, int workers) {
    cfg.validate();
    SweepContext ctx(cfg);
    std::vector<SweepRecord> records;
    for (std::size_t s = 0; s < cfg.snr_db.size(); ++s)
        for (const auto& name : cfg.detectors)
            records.push_back(run_point(ctx, *detector_from_name(name), s, workers));
    return records;
}

std::vector<SweepRecord> run_sweep_serial(const ExperimentConfig& cfg) {
    cfg.validate();
    SweepContext ctx(cfg);
    std::vector<SweepRecord> records;
    for (std::size_t s = 0; s < cfg.snr_db.size(); ++s)
        for (const auto& name : cfg.detectors)
            records.push_back(run_point_serial(ctx, *detector_from_name(name), s));
    return records;
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
    auto parse_u64 = [&](const std::string& v) {
        return static_cast<std::uint64_t>(std::stoull(v));
    };
    auto parse_list = [](const std::string& v) {
        std::vector<std::string> out;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item.erase(0, item.find_first_not_of(" \t"));
            item.erase(item.find_last_not_of(" \t") + 1);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    };
    try {
        if (key == "n_t") cfg.n_tx = std::stoi(value);
        else if (key == "n_r") cfg.n_rx = std::stoi(value);
        else if (key == "n_a") cfg.n_active = std::stoi(value);
        else if (key == "m") cfg.mod_order = std::stoi(value);
        else if (key == "scheme") {
            if (value == "psk" || value == "PSK") cfg.scheme = Scheme::PSK;
            else if (value == "qam" || value == "QAM") cfg.scheme = Scheme::QAM;
            else throw ConfigError("unknown scheme: " + value);
        } else if (key == "g") cfg.group_size = std::stoi(value);
        else if (key == "r_t") cfg.r_tx = std::stod(value);
        else if (key == "r_r") cfg.r_rx = std::stod(value);
        else if (key == "snr_db_list") {
            cfg.snr_db.clear();
            for (const auto& s : parse_list(value)) cfg.snr_db.push_back(std::stod(s));
        } else if (key == "detectors") cfg.detectors = parse_list(value);
        else if (key == "trials_per_point") cfg.trials_per_point = parse_u64(value);
        else if (key == "max_errors") cfg.max_errors = parse_u64(value);
        else if (key == "master_seed") cfg.master_seed = parse_u64(value);
        else if (key == "ml_budget") cfg.ml_budget = parse_u64(value);
        else if (key == "output_path") cfg.output_path = value;
        else throw ConfigError("unknown config key: " + key);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("bad value for " + key + ": " + value);
    }
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
        };
        trim(key);
        trim(value);
        apply_config_entry(cfg, key, value);
    }
    return cfg;
}

} // namespace smsim
