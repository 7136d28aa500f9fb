#include "smsim/interleave.hpp"

#include <numeric>
#include <stdexcept>

#include "smsim/rng.hpp"

namespace smsim {

PermutationSchedule make_schedule(int n_tx, int group_size, std::uint64_t seed,
                                  std::uint64_t group_index) {
    if (group_size < 1) throw std::invalid_argument("group size must be >= 1");
    PermutationSchedule s;
    s.n_tx = n_tx;
    s.seed = seed;
    s.perms.resize(group_size);

    // Slot 1 is the identity; later slots use independent Fisher-Yates
    // shuffles seeded from (seed, group_index, t).
    s.perms[0].resize(n_tx);
    std::iota(s.perms[0].begin(), s.perms[0].end(), 0);
    for (int t = 1; t < group_size; ++t) {
        auto& p = s.perms[t];
        p.resize(n_tx);
        std::iota(p.begin(), p.end(), 0);
        Rng rng(mix_seed(mix_seed(seed, group_index), static_cast<std::uint64_t>(t)));
        for (int i = n_tx - 1; i > 0; --i)
            std::swap(p[i], p[rng.uniform_int(static_cast<std::uint32_t>(i + 1))]);
    }
    return s;
}

PermutationSchedule identity_schedule(int n_tx, int group_size) {
    PermutationSchedule s;
    s.n_tx = n_tx;
    s.perms.assign(group_size, std::vector<int>(n_tx));
    for (auto& p : s.perms) std::iota(p.begin(), p.end(), 0);
    return s;
}

std::size_t group_bit_length(const SpatialConstellation& a, const SignalConstellation& b,
                             int group_size) {
    return static_cast<std::size_t>(a.spatial_bits) +
           static_cast<std::size_t>(group_size) * a.n_active * b.bits_per_symbol();
}

TransmissionGroup encode_group(const BitWord& bits, const SpatialConstellation& a,
                               const SignalConstellation& b,
                               const PermutationSchedule& schedule) {
    const int g = schedule.group_size();
    if (bits.size() != group_bit_length(a, b, g))
        throw std::invalid_argument("group bit word length mismatch");

    const std::uint64_t pat = bits_to_index(bits, 0, a.spatial_bits);
    const auto& support = a.patterns[pat];
    const int bps = b.bits_per_symbol();

    TransmissionGroup tg;
    tg.signals.resize(g);
    tg.transmitted.resize(g);
    std::size_t pos = a.spatial_bits;
    for (int t = 0; t < g; ++t) {
        SmSignal& x = tg.signals[t];
        x.values = Eigen::VectorXcd::Zero(a.n_tx);
        x.support = support;
        for (int i = 0; i < a.n_active; ++i) {
            x.values[support[i]] = b.points[bits_to_index(bits, pos, bps)];
            pos += bps;
        }
        const auto& p = schedule.perms[t];
        Eigen::VectorXcd tx = Eigen::VectorXcd::Zero(a.n_tx);
        for (int i : support) tx[p[i]] = x.values[i];
        tg.transmitted[t] = std::move(tx);
    }
    return tg;
}

Eigen::MatrixXcd deinterleave_channel(const Eigen::MatrixXcd& h,
                                      const PermutationSchedule& schedule, int t) {
    if (t < 1 || t > schedule.group_size())
        throw std::invalid_argument("slot index out of range");
    const auto& p = schedule.perms[t - 1];
    Eigen::MatrixXcd hp(h.rows(), h.cols());
    for (int l = 0; l < schedule.n_tx; ++l) hp.col(l) = h.col(p[l]);
    return hp;
}

} // namespace smsim
