#ifndef SMSIM_CHANNEL_HPP
#define SMSIM_CHANNEL_HPP

#include <Eigen/Dense>

#include "smsim/rng.hpp"

namespace smsim {

/// Exponential antenna correlation, r_ij = r^|i-j|, for transmit and
/// receive sides.
struct CorrelationSpec {
    double r_tx = 0.0;
    double r_rx = 0.0;
};

struct NoiseSpec {
    double sigma_w2 = 0.0; // total variance per complex entry
    double snr_db = 0.0;
};

/// sigma_w^2 for a target SNR in dB under the sigma_s^2 = n_active
/// signal-power convention.
double noise_variance_for_snr_db(double snr_db, int n_active);

/// Symmetric positive-definite square root of the exponential
/// correlation matrix R (R_ij = r^|i-j|), via eigendecomposition.
Eigen::MatrixXd correlation_sqrt(int n, double r);

/// Correlated Rayleigh channel factory. Caches the correlation square
/// roots so per-trial draws only cost the Gaussian fill and two products.
class ChannelModel {
public:
    ChannelModel(int n_rx, int n_tx, const CorrelationSpec& spec);

    Eigen::MatrixXcd draw(Rng& rng) const;

    int n_rx() const { return n_rx_; }
    int n_tx() const { return n_tx_; }

private:
    int n_rx_;
    int n_tx_;
    bool correlated_;
    Eigen::MatrixXd sqrt_rx_;
    Eigen::MatrixXd sqrt_tx_;
};

/// H = R_r^{1/2} * Hiid * R_t^{1/2}, Hiid entries i.i.d. CN(0,1).
Eigen::MatrixXcd draw_channel(int n_rx, int n_tx, const CorrelationSpec& spec, Rng& rng);

/// Adds i.i.d. CN(0, sigma_w2) noise in place; sigma_w2 = 0 is a no-op.
void add_noise(Eigen::VectorXcd& y, double sigma_w2, Rng& rng);

} // namespace smsim

#endif
