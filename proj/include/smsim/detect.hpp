#ifndef SMSIM_DETECT_HPP
#define SMSIM_DETECT_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "smsim/constellation.hpp"

namespace smsim {

/// One grouped detection problem: G received vectors with their
/// per-slot effective (deinterleaved) channel matrices.
struct GmmvInstance {
    std::vector<Eigen::VectorXcd> y;        // G vectors, length n_rx
    std::vector<Eigen::MatrixXcd> channels; // G matrices, n_rx x n_tx
    const SpatialConstellation* a = nullptr;
    const SignalConstellation* b = nullptr;

    int group_size() const { return static_cast<int>(y.size()); }
    int n_rx() const { return static_cast<int>(y.front().size()); }
};

struct DetectionResult {
    std::vector<int> support;              // estimated spatial symbol, sorted
    int pattern_index = -1;
    std::vector<Eigen::VectorXcd> symbols; // G rough symbol blocks, length n_active
    BitWord bits;                          // spatial bits then per-slot symbol bits
    std::vector<double> residual_norms;    // per-iteration diagnostics
    bool rank_deficient = false;
    std::uint64_t ls_flops_total = 0;      // leading-order flops over all LS solves
    std::vector<std::uint64_t> ls_flops_per_iteration;
};

/// Thrown when the exhaustive detector would exceed its hypothesis budget.
class MlBudgetExceeded : public std::runtime_error {
public:
    explicit MlBudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

/// Structured subspace pursuit over the G slots jointly: correlation,
/// candidate expansion, merged least squares, pattern-constrained prune,
/// fixed n_active iterations.
DetectionResult ssp_detect(const GmmvInstance& inst);

/// Exhaustive minimization of the summed residual norm over all legal
/// supports and per-slot symbol tuples. Refuses instances whose per-slot
/// hypothesis count exceeds max_hypotheses.
DetectionResult ml_detect(const GmmvInstance& inst,
                          std::uint64_t max_hypotheses = (1ULL << 22));

/// Per-slot LMMSE equalization followed by the energy-maximizing legal
/// pattern and symbol quantization on it.
DetectionResult lmmse_detect(const GmmvInstance& inst, double sigma_w2);

/// Column-normalized OMP per slot, support projected to the nearest
/// legal pattern; grouped instances majority-vote the support.
DetectionResult ncs_omp_detect(const GmmvInstance& inst);

} // namespace smsim

#endif
