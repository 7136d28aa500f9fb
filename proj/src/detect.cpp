#include "smsim/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace smsim {

namespace {

constexpr double kRankTol = 1e-10;

std::uint64_t ls_flops(int n_rx, int cols) {
    const std::uint64_t k = static_cast<std::uint64_t>(cols);
    return 2ULL * n_rx * k * k + k * k * k;
}

/// Minimum-norm least squares on the column subset `idx`; sets
/// rank_deficient when the submatrix is numerically rank-deficient.
Eigen::VectorXcd solve_subset(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& y,
                              const std::vector<int>& idx, bool& rank_deficient) {
    Eigen::MatrixXcd sub(h.rows(), idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) sub.col(j) = h.col(idx[j]);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(sub);
    cod.setThreshold(kRankTol);
    if (cod.rank() < static_cast<Eigen::Index>(idx.size())) rank_deficient = true;
    return cod.solve(y);
}

/// Top-k indices by descending score, ties broken toward the lowest
/// index; only indices with mask set are eligible.
std::vector<int> top_indices(const Eigen::VectorXd& score,
                             const std::vector<std::uint8_t>& mask, int k) {
    std::vector<int> order;
    order.reserve(score.size());
    for (int l = 0; l < score.size(); ++l)
        if (mask[l]) order.push_back(l);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return score[x] > score[y]; });
    if (static_cast<int>(order.size()) > k) order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

/// Pattern maximizing the summed per-index energy; first (lowest
/// lexicographic) pattern wins ties.
int best_pattern(const SpatialConstellation& a, const Eigen::VectorXd& energy) {
    int best = 0;
    double best_score = -1.0;
    for (std::size_t p = 0; p < a.patterns.size(); ++p) {
        double s = 0.0;
        for (int i : a.patterns[p]) s += energy[i];
        if (s > best_score) {
            best_score = s;
            best = static_cast<int>(p);
        }
    }
    return best;
}

/// Assembles the group bit word from the detected pattern and the rough
/// per-slot symbol blocks (nearest-point quantization).
void finish_result(DetectionResult& res, const GmmvInstance& inst) {
    const auto& a = *inst.a;
    const auto& b = *inst.b;
    const int g = inst.group_size();
    const int bps = b.bits_per_symbol();
    res.bits.assign(a.spatial_bits + static_cast<std::size_t>(g) * a.n_active * bps, 0);
    index_to_bits(static_cast<std::uint64_t>(res.pattern_index), res.bits, 0,
                  a.spatial_bits);
    std::size_t pos = a.spatial_bits;
    for (int t = 0; t < g; ++t) {
        for (int i = 0; i < a.n_active; ++i) {
            const int sym = b.nearest(res.symbols[t][i]);
            index_to_bits(static_cast<std::uint64_t>(sym), res.bits, pos, bps);
            pos += bps;
        }
    }
}

} // namespace

DetectionResult ssp_detect(const GmmvInstance& inst) {
    const auto& a = *inst.a;
    const int g = inst.group_size();
    const int n_rx = inst.n_rx();
    const int n_act = a.n_active;
    if (n_rx < n_act + 1)
        throw std::invalid_argument("SSP requires n_rx >= n_active + 1");

    DetectionResult res;
    std::vector<Eigen::VectorXcd> residual(inst.y.begin(), inst.y.end());
    std::vector<int> omega; // current support estimate

    for (int k = 1; k <= n_act; ++k) {
        // Correlation with the residual, summed over slots.
        Eigen::VectorXd corr_energy = Eigen::VectorXd::Zero(a.n_tx);
        for (int t = 0; t < g; ++t) {
            const Eigen::VectorXcd c = inst.channels[t].adjoint() * residual[t];
            corr_energy += c.cwiseAbs2();
        }

        const int expand = k == 1 ? std::min(2 * n_act, n_rx)
                                  : std::min(n_act, n_rx - n_act);
        const std::vector<int> gamma = top_indices(corr_energy, a.index_used, expand);

        // Merge with the previous support estimate.
        std::vector<int> xi = omega;
        xi.insert(xi.end(), gamma.begin(), gamma.end());
        std::sort(xi.begin(), xi.end());
        xi.erase(std::unique(xi.begin(), xi.end()), xi.end());

        // Least squares on the merged set, then prune to the best legal
        // pattern by coefficient energy (indices outside xi score zero).
        std::uint64_t iter_flops = 0;
        Eigen::VectorXd ls_energy = Eigen::VectorXd::Zero(a.n_tx);
        for (int t = 0; t < g; ++t) {
            const Eigen::VectorXcd bsol =
                solve_subset(inst.channels[t], inst.y[t], xi, res.rank_deficient);
            for (std::size_t j = 0; j < xi.size(); ++j)
                ls_energy[xi[j]] += std::norm(bsol[j]);
            iter_flops += ls_flops(n_rx, static_cast<int>(xi.size()));
        }
        const int pat = best_pattern(a, ls_energy);
        omega = a.patterns[pat];
        res.pattern_index = pat;

        // Re-solve on the pruned support and update residuals.
        res.symbols.assign(g, Eigen::VectorXcd());
        double rnorm2 = 0.0;
        for (int t = 0; t < g; ++t) {
            const Eigen::VectorXcd c =
                solve_subset(inst.channels[t], inst.y[t], omega, res.rank_deficient);
            iter_flops += ls_flops(n_rx, n_act);
            res.symbols[t] = c;
            Eigen::VectorXcd fit = Eigen::VectorXcd::Zero(n_rx);
            for (int j = 0; j < n_act; ++j) fit += inst.channels[t].col(omega[j]) * c[j];
            residual[t] = inst.y[t] - fit;
            rnorm2 += residual[t].squaredNorm();
        }
        res.residual_norms.push_back(std::sqrt(rnorm2));
        res.ls_flops_per_iteration.push_back(iter_flops);
        res.ls_flops_total += iter_flops;
    }

    res.support = omega;
    finish_result(res, inst);
    return res;
}

DetectionResult ml_detect(const GmmvInstance& inst, std::uint64_t max_hypotheses) {
    const auto& a = *inst.a;
    const auto& b = *inst.b;
    const int g = inst.group_size();
    const int n_act = a.n_active;
    const int m = b.order;

    const std::uint64_t hypotheses = ml_hypothesis_count(a, b);
    if (hypotheses > max_hypotheses)
        throw MlBudgetExceeded("ML hypothesis count " + std::to_string(hypotheses) +
                               " exceeds budget " + std::to_string(max_hypotheses));

    std::uint64_t tuples = 1;
    for (int i = 0; i < n_act; ++i) tuples *= static_cast<std::uint64_t>(m);

    // Per slot: Gram matrix and correlation, so each hypothesis costs
    // O(n_act^2) instead of O(n_rx * n_act).
    std::vector<Eigen::MatrixXcd> gram(g);
    std::vector<Eigen::VectorXcd> corr(g);
    std::vector<double> ynorm2(g);
    for (int t = 0; t < g; ++t) {
        gram[t] = inst.channels[t].adjoint() * inst.channels[t];
        corr[t] = inst.channels[t].adjoint() * inst.y[t];
        ynorm2[t] = inst.y[t].squaredNorm();
    }

    int best_pat = 0;
    double best_obj = std::numeric_limits<double>::infinity();
    std::vector<std::vector<int>> best_syms; // per slot, symbol indices
    std::vector<int> syms(n_act);
    std::vector<std::vector<int>> slot_syms(g, std::vector<int>(n_act));
    Eigen::VectorXcd s(n_act);

    for (std::size_t p = 0; p < a.patterns.size(); ++p) {
        const auto& pat = a.patterns[p];
        double obj = 0.0;
        for (int t = 0; t < g; ++t) {
            // Joint spatial symbol; per-slot symbol tuples factorize.
            double slot_best = std::numeric_limits<double>::infinity();
            std::fill(syms.begin(), syms.end(), 0);
            for (std::uint64_t u = 0; u < tuples; ++u) {
                for (int i = 0; i < n_act; ++i) s[i] = b.points[syms[i]];
                cxd cross = 0.0;
                cxd quad_c = 0.0;
                for (int i = 0; i < n_act; ++i) {
                    cross += std::conj(s[i]) * corr[t][pat[i]];
                    for (int j = 0; j < n_act; ++j)
                        quad_c += std::conj(s[i]) * gram[t](pat[i], pat[j]) * s[j];
                }
                const double quad =
                    ynorm2[t] - 2.0 * cross.real() + quad_c.real();
                if (quad < slot_best) {
                    slot_best = quad;
                    slot_syms[t] = syms;
                }
                // odometer over symbol tuples
                for (int i = n_act - 1; i >= 0; --i) {
                    if (++syms[i] < m) break;
                    syms[i] = 0;
                }
            }
            obj += std::sqrt(std::max(slot_best, 0.0));
        }
        if (obj < best_obj) {
            best_obj = obj;
            best_pat = static_cast<int>(p);
            best_syms = slot_syms;
        }
    }

    DetectionResult res;
    res.pattern_index = best_pat;
    res.support = a.patterns[best_pat];
    res.symbols.assign(g, Eigen::VectorXcd(n_act));
    for (int t = 0; t < g; ++t)
        for (int i = 0; i < n_act; ++i) res.symbols[t][i] = b.points[best_syms[t][i]];
    res.residual_norms.push_back(best_obj);
    finish_result(res, inst);
    return res;
}

DetectionResult lmmse_detect(const GmmvInstance& inst, double sigma_w2) {
    const auto& a = *inst.a;
    const int g = inst.group_size();
    const int n_rx = inst.n_rx();

    DetectionResult res;
    Eigen::VectorXd energy = Eigen::VectorXd::Zero(a.n_tx);
    std::vector<Eigen::VectorXcd> xt(g);
    for (int t = 0; t < g; ++t) {
        const Eigen::MatrixXcd& h = inst.channels[t];
        if (sigma_w2 > 0.0) {
            Eigen::MatrixXcd gramr = h * h.adjoint();
            gramr.diagonal().array() += sigma_w2;
            xt[t] = h.adjoint() * gramr.llt().solve(inst.y[t]);
        } else {
            // sigma = 0: minimum-norm solve covers rank deficiency.
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(h);
            cod.setThreshold(kRankTol);
            if (cod.rank() < std::min<Eigen::Index>(n_rx, a.n_tx))
                res.rank_deficient = true;
            xt[t] = cod.solve(inst.y[t]);
        }
        energy += xt[t].cwiseAbs2();
    }

    res.pattern_index = best_pattern(a, energy);
    res.support = a.patterns[res.pattern_index];
    res.symbols.assign(g, Eigen::VectorXcd(a.n_active));
    for (int t = 0; t < g; ++t) {
        for (int i = 0; i < a.n_active; ++i) res.symbols[t][i] = xt[t][res.support[i]];
        res.residual_norms.push_back(
            (inst.y[t] - inst.channels[t] * xt[t]).norm());
    }
    finish_result(res, inst);
    return res;
}

DetectionResult ncs_omp_detect(const GmmvInstance& inst) {
    const auto& a = *inst.a;
    const int g = inst.group_size();
    const int n_act = a.n_active;

    DetectionResult res;
    std::vector<int> votes(a.patterns.size(), 0);
    for (int t = 0; t < g; ++t) {
        const Eigen::MatrixXcd& h = inst.channels[t];
        // Column-normalized dictionary for atom selection.
        Eigen::VectorXd inv_norm(a.n_tx);
        for (int l = 0; l < a.n_tx; ++l) {
            const double n = h.col(l).norm();
            inv_norm[l] = n > 0.0 ? 1.0 / n : 0.0;
        }

        Eigen::VectorXcd r = inst.y[t];
        std::vector<int> selected;
        std::vector<std::uint8_t> free_idx(a.n_tx, 1);
        for (int j = 0; j < n_act; ++j) {
            int pick = -1;
            double best = -1.0;
            for (int l = 0; l < a.n_tx; ++l) {
                if (!free_idx[l]) continue;
                const double c = std::abs(h.col(l).dot(r)) * inv_norm[l];
                if (c > best) {
                    best = c;
                    pick = l;
                }
            }
            selected.push_back(pick);
            free_idx[pick] = 0;
            std::sort(selected.begin(), selected.end());
            const Eigen::VectorXcd bsol =
                solve_subset(h, inst.y[t], selected, res.rank_deficient);
            res.ls_flops_total += ls_flops(static_cast<int>(h.rows()),
                                           static_cast<int>(selected.size()));
            r = inst.y[t];
            for (std::size_t i = 0; i < selected.size(); ++i)
                r -= h.col(selected[i]) * bsol[i];
        }
        res.residual_norms.push_back(r.norm());

        // Project to the legal pattern with maximal overlap, lexicographic
        // first on ties.
        int best_overlap = -1;
        int best_pat = 0;
        for (std::size_t p = 0; p < a.patterns.size(); ++p) {
            int overlap = 0;
            for (int i : a.patterns[p])
                if (std::binary_search(selected.begin(), selected.end(), i)) ++overlap;
            if (overlap > best_overlap) {
                best_overlap = overlap;
                best_pat = static_cast<int>(p);
            }
        }
        ++votes[best_pat];
    }

    // Majority vote across slots, lowest pattern index on ties.
    res.pattern_index = static_cast<int>(
        std::max_element(votes.begin(), votes.end()) - votes.begin());
    res.support = a.patterns[res.pattern_index];

    res.symbols.assign(g, Eigen::VectorXcd(n_act));
    for (int t = 0; t < g; ++t) {
        res.symbols[t] =
            solve_subset(inst.channels[t], inst.y[t], res.support, res.rank_deficient);
        res.ls_flops_total += ls_flops(inst.n_rx(), n_act);
    }
    finish_result(res, inst);
    return res;
}

} // namespace smsim
