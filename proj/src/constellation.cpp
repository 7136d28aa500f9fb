#include "smsim/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace smsim {

namespace {

bool is_power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }

int ilog2(std::uint64_t v) {
    int b = 0;
    while (v > 1) {
        v >>= 1;
        ++b;
    }
    return b;
}

} // namespace

int SignalConstellation::bits_per_symbol() const { return ilog2(static_cast<std::uint64_t>(order)); }

double SignalConstellation::average_energy() const {
    double s = 0.0;
    for (cxd p : points) s += std::norm(p);
    return s / static_cast<double>(points.size());
}

int SignalConstellation::nearest(cxd v) const {
    int best = 0;
    double best_d = std::norm(v - points[0]);
    for (int i = 1; i < order; ++i) {
        const double d = std::norm(v - points[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

SignalConstellation SignalConstellation::psk(int m) {
    if (!is_power_of_two(m) || m < 2)
        throw std::invalid_argument("PSK order must be a power of two >= 2");
    SignalConstellation c;
    c.order = m;
    c.scheme = Scheme::PSK;
    c.points.resize(m);
    for (int k = 0; k < m; ++k) {
        const double a = 2.0 * std::numbers::pi * k / m;
        c.points[k] = cxd(std::cos(a), std::sin(a));
    }
    if (m == 2) {
        // exact +-1 for BPSK
        c.points[0] = cxd(1.0, 0.0);
        c.points[1] = cxd(-1.0, 0.0);
    }
    return c;
}

SignalConstellation SignalConstellation::qam(int m) {
    if (!is_power_of_two(m) || m < 4)
        throw std::invalid_argument("QAM order must be a power of two >= 4");
    const int bits = ilog2(static_cast<std::uint64_t>(m));
    const int bi = bits - bits / 2; // in-phase bits
    const int bq = bits / 2;
    const int ni = 1 << bi;
    const int nq = 1 << bq;
    SignalConstellation c;
    c.order = m;
    c.scheme = Scheme::QAM;
    c.points.resize(m);
    double energy = 0.0;
    for (int r = 0; r < ni; ++r) {
        for (int q = 0; q < nq; ++q) {
            const double re = 2.0 * r - (ni - 1);
            const double im = 2.0 * q - (nq - 1);
            c.points[r * nq + q] = cxd(re, im);
            energy += re * re + im * im;
        }
    }
    const double g = std::sqrt(static_cast<double>(m) / energy);
    for (auto& p : c.points) p *= g;
    return c;
}

SignalConstellation SignalConstellation::make(Scheme scheme, int m) {
    return scheme == Scheme::PSK ? psk(m) : qam(m);
}

SpatialConstellation build_spatial_constellation(int n_tx, int n_active) {
    if (n_active < 1 || n_active >= n_tx)
        throw std::invalid_argument("require 1 <= n_active < n_tx");

    // floor(log2 C(n_tx, n_active)) without overflow: count patterns only
    // until the next power of two is unreachable.
    double log2c = 0.0;
    for (int i = 0; i < n_active; ++i)
        log2c += std::log2(static_cast<double>(n_tx - i) / (i + 1));
    const int bits = static_cast<int>(std::floor(log2c + 1e-12));
    const std::uint64_t count = 1ULL << bits;

    SpatialConstellation a;
    a.n_tx = n_tx;
    a.n_active = n_active;
    a.spatial_bits = bits;
    a.patterns.reserve(count);
    a.index_used.assign(n_tx, 0);

    // Enumerate n_active-subsets in lexicographic order, keep the first
    // 2^bits of them.
    std::vector<int> comb(n_active);
    for (int i = 0; i < n_active; ++i) comb[i] = i;
    for (std::uint64_t taken = 0; taken < count; ++taken) {
        a.patterns.push_back(comb);
        for (int i : comb) a.index_used[i] = 1;
        // advance to next combination
        int i = n_active - 1;
        while (i >= 0 && comb[i] == n_tx - n_active + i) --i;
        if (i < 0) break;
        ++comb[i];
        for (int j = i + 1; j < n_active; ++j) comb[j] = comb[j - 1] + 1;
    }
    return a;
}

int SpatialConstellation::pattern_index(const std::vector<int>& support) const {
    auto it = std::lower_bound(patterns.begin(), patterns.end(), support);
    if (it == patterns.end() || *it != support) return -1;
    return static_cast<int>(it - patterns.begin());
}

std::uint64_t bits_to_index(const BitWord& bits, std::size_t pos, std::size_t len) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < len; ++i) v = (v << 1) | (bits[pos + i] & 1u);
    return v;
}

void index_to_bits(std::uint64_t value, BitWord& bits, std::size_t pos, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i)
        bits[pos + i] = static_cast<std::uint8_t>((value >> (len - 1 - i)) & 1u);
}

SmSignal map_bits_to_sm(const BitWord& bits, const SpatialConstellation& a,
                        const SignalConstellation& b) {
    const int bps = b.bits_per_symbol();
    const std::size_t expect = static_cast<std::size_t>(a.spatial_bits) +
                               static_cast<std::size_t>(a.n_active) * bps;
    if (bits.size() != expect)
        throw std::invalid_argument("bit word length mismatch");

    const std::uint64_t pat = bits_to_index(bits, 0, a.spatial_bits);
    const auto& support = a.patterns[pat];

    SmSignal x;
    x.values = Eigen::VectorXcd::Zero(a.n_tx);
    x.support = support;
    std::size_t pos = a.spatial_bits;
    for (int i = 0; i < a.n_active; ++i) {
        const std::uint64_t sym = bits_to_index(bits, pos, bps);
        x.values[support[i]] = b.points[sym];
        pos += bps;
    }
    return x;
}

BitWord demap_sm_to_bits(const SmSignal& x, const SpatialConstellation& a,
                         const SignalConstellation& b) {
    const int pat = a.pattern_index(x.support);
    if (pat < 0) throw std::invalid_argument("support is not a legal pattern");

    const int bps = b.bits_per_symbol();
    BitWord bits(static_cast<std::size_t>(a.spatial_bits) +
                 static_cast<std::size_t>(a.n_active) * bps);
    index_to_bits(static_cast<std::uint64_t>(pat), bits, 0, a.spatial_bits);
    std::size_t pos = a.spatial_bits;
    for (int i = 0; i < a.n_active; ++i) {
        const int sym = b.nearest(x.values[x.support[i]]);
        index_to_bits(static_cast<std::uint64_t>(sym), bits, pos, bps);
        pos += bps;
    }
    return bits;
}

BitBudget bit_budget(const SpatialConstellation& a, const SignalConstellation& b,
                     int group_size) {
    if (group_size < 1) throw std::invalid_argument("group size must be >= 1");
    BitBudget bb;
    bb.spatial_bits = a.spatial_bits;
    bb.signal_bits = a.n_active * b.bits_per_symbol();
    bb.group_size = group_size;
    bb.bpcu = bb.signal_bits + static_cast<double>(bb.spatial_bits) / group_size;
    return bb;
}

double bpcu(const SpatialConstellation& a, const SignalConstellation& b, int group_size) {
    return bit_budget(a, b, group_size).bpcu;
}

std::uint64_t ml_hypothesis_count(const SpatialConstellation& a,
                                  const SignalConstellation& b) {
    std::uint64_t n = a.patterns.size();
    for (int i = 0; i < a.n_active; ++i) n *= static_cast<std::uint64_t>(b.order);
    return n;
}

} // namespace smsim
