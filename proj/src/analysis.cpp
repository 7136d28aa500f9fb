#include "smsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/gamma.hpp>

namespace smsim {

namespace {

using GammaDist = boost::math::gamma_distribution<double>;

struct GammaPair {
    // C = first + second (independent scaled chi-squares as gammas);
    // second.scale == 0 marks a degenerate (point-mass-at-zero) part.
    double shape1 = 0.0, scale1 = 0.0;
    double shape2 = 0.0, scale2 = 0.0;
};

GammaPair signal_components(const MetricDistribution& d) {
    const double s1 = d.moments.sigma1_sq;
    const double s2 = d.moments.sigma2_sq;
    GammaPair p;
    if (d.kind == MetricKind::GMMV) {
        p = {d.g / 2.0, 2.0 * s1, d.g / 2.0, 2.0 * s2};
    } else {
        p = {0.5, 2.0 * d.g * s1, 0.5, 2.0 * d.g * s2};
    }
    return p;
}

GammaDist noise_gamma(const MetricDistribution& d) {
    const double s3 = d.moments.sigma3_sq;
    if (d.kind == MetricKind::GMMV) return GammaDist(d.g, 2.0 * s3);
    return GammaDist(1.0, 2.0 * d.g * s3);
}

constexpr double kTailMass = 1e-9;

double upper_quantile(const GammaDist& d) {
    return boost::math::quantile(boost::math::complement(d, kTailMass));
}

/// Cell masses of a gamma distribution on n cells of width dx.
std::vector<double> cell_masses(const GammaDist& d, double dx, std::size_t n) {
    std::vector<double> mass(n);
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double next = boost::math::cdf(d, (i + 1) * dx);
        mass[i] = next - prev;
        prev = next;
    }
    return mass;
}

bool degenerate_second(const GammaPair& p) {
    return p.scale2 <= 1e-14 * p.scale1;
}

/// Cell-averaged density of the signal metric on [0, n*dx): either a
/// single gamma or the convolution of the two components' cell masses.
std::vector<double> signal_density(const GammaPair& p, double dx, std::size_t n) {
    if (degenerate_second(p)) {
        auto mass = cell_masses(GammaDist(p.shape1, p.scale1), dx, n);
        for (auto& v : mass) v /= dx;
        return mass;
    }
    if (std::abs(p.scale1 - p.scale2) <= 1e-12 * p.scale1) {
        // equal scales merge into one gamma with summed shape
        auto mass = cell_masses(GammaDist(p.shape1 + p.shape2, p.scale1), dx, n);
        for (auto& v : mass) v /= dx;
        return mass;
    }
    const auto ma = cell_masses(GammaDist(p.shape1, p.scale1), dx, n);
    const auto mb = cell_masses(GammaDist(p.shape2, p.scale2), dx, n);
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (ma[i] == 0.0) continue;
        const std::size_t lim = n - i;
        for (std::size_t j = 0; j < lim; ++j) out[i + j] += ma[i] * mb[j];
    }
    for (auto& v : out) v /= dx;
    return out;
}

double signal_upper_bound(const GammaPair& p) {
    double x = upper_quantile(GammaDist(p.shape1, p.scale1));
    if (!degenerate_second(p)) x += upper_quantile(GammaDist(p.shape2, p.scale2));
    return x;
}

} // namespace

MomentSet moment_set(int n_rx, double sigma_s2, double sigma_w2, int m) {
    if (n_rx < 1 || sigma_s2 <= 0.0 || sigma_w2 < 0.0)
        throw std::invalid_argument("invalid moment parameters");
    const double n = n_rx;
    const double delta = m == 2 ? 1.0 : 0.0;
    MomentSet ms;
    ms.sigma1_sq = (n * n + n) * sigma_s2 / (2.0 - delta) + n * sigma_w2 / 2.0;
    ms.sigma2_sq = (1.0 - delta) * (n * n + n) * sigma_s2 / 2.0 + n * sigma_w2 / 2.0;
    ms.sigma3_sq = n * sigma_s2 / 2.0 + n * sigma_w2 / 2.0;
    return ms;
}

double GriddedPdf::integral() const {
    double s = 0.0;
    for (double v : density) s += v;
    return s * dx;
}

double GriddedPdf::mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < density.size(); ++i)
        s += density[i] * (i + 0.5) * dx;
    return s * dx;
}

std::vector<double> GriddedPdf::cdf() const {
    std::vector<double> c(density.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < density.size(); ++i) {
        acc += density[i] * dx;
        c[i] = acc;
    }
    return c;
}

GriddedPdf metric_pdf(const MetricDistribution& dist, MetricComponent which,
                      std::size_t min_cells) {
    const GammaPair sig = signal_components(dist);
    const GammaDist noise = noise_gamma(dist);

    // One grid wide enough for whichever component is requested; the
    // 1e-9 tail rule fixes the upper edge.
    const double x_max = which == MetricComponent::Signal ? signal_upper_bound(sig)
                                                          : upper_quantile(noise);
    GriddedPdf pdf;
    pdf.dx = x_max / static_cast<double>(min_cells);
    if (which == MetricComponent::Signal) {
        pdf.density = signal_density(sig, pdf.dx, min_cells);
    } else {
        pdf.density = cell_masses(noise, pdf.dx, min_cells);
        for (auto& v : pdf.density) v /= pdf.dx;
    }
    return pdf;
}

GriddedPdf second_order_statistic_pdf(const GriddedPdf& f2,
                                      const std::vector<double>& f2_cdf_mid,
                                      int n_tx, int n_active) {
    const int n = n_tx - n_active;
    if (n < 2) throw std::invalid_argument("need at least two inactive antennas");
    const double coef = static_cast<double>(n) * (n - 1);
    GriddedPdf out;
    out.dx = f2.dx;
    out.density.resize(f2.density.size());
    for (std::size_t i = 0; i < f2.density.size(); ++i) {
        const double cdf = f2_cdf_mid[i];
        out.density[i] =
            coef * std::pow(cdf, n - 2) * (1.0 - cdf) * f2.density[i];
    }
    return out;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double scser_analytic(MetricKind kind, const AnalysisParams& params) {
    if (params.n_tx - 1 < 2)
        throw std::invalid_argument("n_tx too small for the order statistic");

    MetricDistribution dist;
    dist.kind = kind;
    dist.g = params.g;
    dist.n_tx = params.n_tx;
    dist.n_active = 1;
    dist.moments = moment_set(params.n_rx, params.sigma_s2, params.sigma_w2, params.m);

    const GammaPair sig = signal_components(dist);
    const GammaDist noise = noise_gamma(dist);

    // Shared grid covering both metrics.
    const std::size_t n = params.grid_cells;
    const double x_max = std::max(signal_upper_bound(sig), upper_quantile(noise));
    const double dx = x_max / static_cast<double>(n);

    const std::vector<double> f1 = signal_density(sig, dx, n);

    std::vector<double> f2(n), f2_cdf_mid(n);
    {
        auto mass = cell_masses(noise, dx, n);
        for (std::size_t i = 0; i < n; ++i) {
            f2[i] = mass[i] / dx;
            f2_cdf_mid[i] = boost::math::cdf(noise, (i + 0.5) * dx);
        }
    }

    GriddedPdf f2g;
    f2g.dx = dx;
    f2g.density = f2;
    const GriddedPdf f22 = second_order_statistic_pdf(f2g, f2_cdf_mid,
                                                      params.n_tx, 1);

    // Inner quadrature: CDF of the second-order statistic at cell
    // midpoints; outer quadrature against the signal density.
    double p_correct = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double cdf_mid = acc + 0.5 * f22.density[i] * dx;
        acc += f22.density[i] * dx;
        p_correct += f1[i] * dx * cdf_mid;
    }
    return std::clamp(1.0 - p_correct, 0.0, 1.0);
}

double pairwise_correct_gaussian(MetricKind kind, const AnalysisParams& params) {
    const MomentSet ms =
        moment_set(params.n_rx, params.sigma_s2, params.sigma_w2, params.m);
    const double g = params.g;
    const double mu4 =
        g * (ms.mu1 * ms.mu1 + ms.mu2 * ms.mu2 - 2.0 * ms.mu3 * ms.mu3 +
             ms.sigma1_sq + ms.sigma2_sq - 2.0 * ms.sigma3_sq);
    const double var4 =
        g * (2.0 * ms.sigma1_sq * ms.sigma1_sq + 4.0 * ms.mu1 * ms.mu1 * ms.sigma1_sq +
             2.0 * ms.sigma2_sq * ms.sigma2_sq + 4.0 * ms.mu2 * ms.mu2 * ms.sigma2_sq +
             2.0 * ms.sigma3_sq * ms.sigma3_sq + 4.0 * ms.mu3 * ms.mu3 * ms.sigma3_sq);
    const double sigma4 = std::sqrt(var4);
    if (kind == MetricKind::GMMV) return q_function(-mu4 / sigma4);
    return q_function(-mu4 / (std::sqrt(g) * sigma4));
}

} // namespace smsim
