#include "smsim/channel.hpp"

#include "smsim/constellation.hpp"

#include <cmath>
#include <stdexcept>

namespace smsim {

double noise_variance_for_snr_db(double snr_db, int n_active) {
    // SNR = sigma_s^2 / sigma_w^2 with sigma_s^2 = n_active under
    // unit-energy constellations.
    return static_cast<double>(n_active) * std::pow(10.0, -snr_db / 10.0);
}

Eigen::MatrixXd correlation_sqrt(int n, double r) {
    if (r < 0.0 || r >= 1.0) throw std::invalid_argument("correlation must be in [0,1)");
    if (r == 0.0) return Eigen::MatrixXd::Identity(n, n);

    Eigen::MatrixXd corr(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) corr(i, j) = std::pow(r, std::abs(i - j));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed");
    Eigen::VectorXd lam = es.eigenvalues();
    for (int i = 0; i < n; ++i) {
        if (lam[i] <= 0.0)
            throw std::runtime_error("correlation matrix not positive definite");
        lam[i] = std::sqrt(lam[i]);
    }
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

ChannelModel::ChannelModel(int n_rx, int n_tx, const CorrelationSpec& spec)
    : n_rx_(n_rx), n_tx_(n_tx), correlated_(spec.r_rx != 0.0 || spec.r_tx != 0.0) {
    if (n_rx < 1 || n_tx < 1) throw std::invalid_argument("invalid channel dimensions");
    if (correlated_) {
        sqrt_rx_ = correlation_sqrt(n_rx, spec.r_rx);
        sqrt_tx_ = correlation_sqrt(n_tx, spec.r_tx);
    }
}

Eigen::MatrixXcd ChannelModel::draw(Rng& rng) const {
    Eigen::MatrixXcd h(n_rx_, n_tx_);
    // CN(0,1): variance 0.5 per real dimension. Column-major fill order
    // is part of the determinism contract.
    constexpr double s = 0.70710678118654752440; // 1/sqrt(2)
    for (int j = 0; j < n_tx_; ++j)
        for (int i = 0; i < n_rx_; ++i)
            h(i, j) = cxd(s * rng.gauss(), s * rng.gauss());
    if (correlated_) h = sqrt_rx_ * h * sqrt_tx_;
    return h;
}

Eigen::MatrixXcd draw_channel(int n_rx, int n_tx, const CorrelationSpec& spec, Rng& rng) {
    return ChannelModel(n_rx, n_tx, spec).draw(rng);
}

void add_noise(Eigen::VectorXcd& y, double sigma_w2, Rng& rng) {
    if (sigma_w2 < 0.0) throw std::invalid_argument("negative noise variance");
    if (sigma_w2 == 0.0) return;
    const double s = std::sqrt(sigma_w2 / 2.0);
    for (Eigen::Index i = 0; i < y.size(); ++i)
        y[i] += cxd(s * rng.gauss(), s * rng.gauss());
}

} // namespace smsim
