#include "smsim/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace smsim {

namespace {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct FigureSpec {
    const char* metric; // "scser" or "ber"
    std::vector<const char*> required;
};

const std::map<std::string, FigureSpec>& figure_specs() {
    static const std::map<std::string, FigureSpec> specs = {
        {"fig3",
         {"scser",
          {"ncs_omp", "ssp_noninterleaved", "ssp", "ssp_iid_channels", "analytic_gmmv"}}},
        {"fig4",
         {"scser", {"lmmse", "ncs_omp", "ssp_noninterleaved", "ssp", "ssp_iid_channels"}}},
        {"fig5", {"ber", {"ncs_omp", "ssp"}}},
        {"fig6", {"ber", {"ncs_omp", "ssp"}}},
        {"fig7", {"ber", {"ssp", "ml"}}},
    };
    return specs;
}

} // namespace

void emit_results(const std::vector<SweepRecord>& records, OutputFormat format,
                  std::ostream& out) {
    if (records.empty()) throw std::invalid_argument("no records to emit");
    if (format == OutputFormat::Csv) {
        out << "detector,snr_db,trials,spatial_errors,scser,bit_errors,total_bits,ber,"
               "seed,wall_seconds\n";
        for (const auto& r : records) {
            out << r.detector << ',' << fmt_double(r.snr_db) << ',' << r.trials << ','
                << r.spatial_errors << ',' << fmt_double(r.scser) << ',' << r.bit_errors
                << ',' << r.total_bits << ',' << fmt_double(r.ber) << ',' << r.seed
                << ',' << fmt_double(r.wall_seconds) << '\n';
        }
        return;
    }
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json j;
        j["detector"] = r.detector;
        j["snr_db"] = r.snr_db;
        j["trials"] = r.trials;
        j["spatial_errors"] = r.spatial_errors;
        j["scser"] = r.scser;
        j["bit_errors"] = r.bit_errors;
        j["total_bits"] = r.total_bits;
        j["ber"] = r.ber;
        j["seed"] = r.seed;
        j["wall_seconds"] = r.wall_seconds;
        arr.push_back(std::move(j));
    }
    out << arr.dump(2) << '\n';
}

void emit_results_file(const std::vector<SweepRecord>& records, OutputFormat format,
                       const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    emit_results(records, format, out);
}

std::vector<SweepRecord> parse_results_csv(std::istream& in) {
    std::vector<SweepRecord> records;
    std::string line;
    if (!std::getline(in, line)) return records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        SweepRecord r;
        std::getline(ss, field, ',');
        r.detector = field;
        auto next_d = [&]() {
            std::getline(ss, field, ',');
            return field == "nan" ? std::nan("") : std::stod(field);
        };
        auto next_u = [&]() {
            std::getline(ss, field, ',');
            return static_cast<std::uint64_t>(std::stoull(field));
        };
        r.snr_db = next_d();
        r.trials = next_u();
        r.spatial_errors = next_u();
        r.scser = next_d();
        r.bit_errors = next_u();
        r.total_bits = next_u();
        r.ber = next_d();
        r.seed = next_u();
        r.wall_seconds = next_d();
        records.push_back(std::move(r));
    }
    return records;
}

std::string plot_script(const std::vector<SweepRecord>& records,
                        const std::string& figure) {
    const auto it = figure_specs().find(figure);
    if (it == figure_specs().end())
        throw std::invalid_argument("unknown figure: " + figure);
    const FigureSpec& spec = it->second;
    const bool use_ber = std::string(spec.metric) == "ber";

    // One series per detector label; labels may carry a run suffix
    // (e.g. ssp_g4), matched by prefix against the required set.
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    for (const auto& r : records) {
        const double v = use_ber ? r.ber : r.scser;
        if (std::isnan(v)) continue;
        series[r.detector].emplace_back(r.snr_db, v);
    }
    if (series.empty()) throw std::invalid_argument("no plottable records for " + figure);
    for (auto& [name, pts] : series) std::sort(pts.begin(), pts.end());

    std::vector<std::string> missing;
    for (const char* req : spec.required) {
        bool found = false;
        for (const auto& [name, pts] : series)
            if (name.rfind(req, 0) == 0) found = true;
        if (!found) missing.push_back(req);
    }

    std::ostringstream out;
    out << "#!/usr/bin/env python3\n";
    out << "# " << figure << ": " << (use_ber ? "BER" : "SCSER") << " vs SNR\n";
    if (!missing.empty()) {
        out << "# missing series:";
        for (const auto& m : missing) out << ' ' << m;
        out << '\n';
    }
    out << "import matplotlib.pyplot as plt\n\n";
    out << "series = {\n";
    for (const auto& [name, pts] : series) {
        out << "    \"" << name << "\": [";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) out << ", ";
            out << '(' << fmt_double(pts[i].first) << ", " << fmt_double(pts[i].second)
                << ')';
        }
        out << "],\n";
    }
    out << "}\n\n";
    out << "for name, pts in series.items():\n";
    out << "    xs = [p[0] for p in pts]\n";
    out << "    ys = [p[1] for p in pts]\n";
    out << "    plt.semilogy(xs, ys, marker=\"o\", label=name)\n";
    out << "plt.xlabel(\"SNR (dB)\")\n";
    out << "plt.ylabel(\"" << (use_ber ? "BER" : "SCSER") << "\")\n";
    out << "plt.grid(True, which=\"both\", alpha=0.3)\n";
    out << "plt.legend()\n";
    out << "plt.title(\"" << figure << "\")\n";
    out << "plt.savefig(\"" << figure << ".png\", dpi=150, bbox_inches=\"tight\")\n";
    return out.str();
}

void emit_plot_script(const std::vector<SweepRecord>& records,
                      const std::string& figure, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << plot_script(records, figure);
}

} // namespace smsim
