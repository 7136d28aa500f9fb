#ifndef SMSIM_ANALYSIS_HPP
#define SMSIM_ANALYSIS_HPP

#include <cstddef>
#include <vector>

namespace smsim {

/// Moments of the correlation metric terms F_{m,l} for the single-active-
/// antenna analysis. Means are all zero; variances depend on the
/// constellation through the BPSK special case.
struct MomentSet {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double mu3 = 0.0;
    double sigma1_sq = 0.0; // Re{F_mm}
    double sigma2_sq = 0.0; // Im{F_mm}
    double sigma3_sq = 0.0; // Re/Im{F_ml}, l != m
};

MomentSet moment_set(int n_rx, double sigma_s2, double sigma_w2, int m);

enum class MetricKind { GMMV, MMV };
enum class MetricComponent { Signal, Noise };

/// Distribution family of the per-antenna correlation metric C_l over a
/// group of size g: weighted chi-square for the active antenna, plain
/// scaled chi-square for the rest.
struct MetricDistribution {
    MetricKind kind = MetricKind::GMMV;
    int g = 1;
    int n_tx = 0;
    int n_active = 1;
    MomentSet moments;
};

/// Piecewise-constant density on cells [i*dx, (i+1)*dx), stored as
/// cell-averaged values so the grid integral matches the cell masses
/// exactly up to tail truncation.
struct GriddedPdf {
    double dx = 0.0;
    std::vector<double> density;

    double integral() const;
    double mean() const;
    /// CDF at right cell edges.
    std::vector<double> cdf() const;
};

GriddedPdf metric_pdf(const MetricDistribution& dist, MetricComponent which,
                      std::size_t min_cells = std::size_t(1) << 14);

/// Density of the second largest of (n_tx - n_active) i.i.d. draws from
/// f2, with F2 sampled at cell midpoints.
GriddedPdf second_order_statistic_pdf(const GriddedPdf& f2,
                                      const std::vector<double>& f2_cdf_mid,
                                      int n_tx, int n_active);

struct AnalysisParams {
    int n_tx = 64;
    int n_rx = 16;
    int m = 8; // signal constellation order
    int g = 1;
    double sigma_s2 = 1.0;
    double sigma_w2 = 0.0;
    std::size_t grid_cells = std::size_t(1) << 14;
};

/// Spatial-symbol error probability from the pairwise order-statistic
/// model: 1 - P(C_m > C^[2]), by nested quadrature over the gridded
/// densities. Valid for n_active = 1 over uncorrelated channels.
double scser_analytic(MetricKind kind, const AnalysisParams& params);

/// High-SNR/large-G Gaussian approximation of the pairwise correct-
/// comparison probability P(C_m - C_l > 0).
double pairwise_correct_gaussian(MetricKind kind, const AnalysisParams& params);

/// Q(x): upper tail of the standard normal.
double q_function(double x);

} // namespace smsim

#endif
