#ifndef SMSIM_CONSTELLATION_HPP
#define SMSIM_CONSTELLATION_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace smsim {

using cxd = std::complex<double>;
using BitWord = std::vector<std::uint8_t>; // one bit per element, MSB first

enum class Scheme { PSK, QAM };

/// M-ary signal constellation, normalized to unit average symbol energy.
struct SignalConstellation {
    int order = 0; // M, power of two
    Scheme scheme = Scheme::PSK;
    std::vector<cxd> points;

    int bits_per_symbol() const;
    double average_energy() const;

    /// Index of the nearest point in Euclidean distance, ties to the
    /// lowest point index.
    int nearest(cxd v) const;

    static SignalConstellation psk(int m);
    static SignalConstellation qam(int m);
    static SignalConstellation make(Scheme scheme, int m);
};

/// Legal active-antenna pattern family: the lexicographically first
/// 2^floor(log2 C(n_tx, n_active)) subsets of size n_active, in strictly
/// increasing lexicographic order. Pattern index i encodes spatial bit
/// word i.
struct SpatialConstellation {
    int n_tx = 0;
    int n_active = 0;
    int spatial_bits = 0;
    std::vector<std::vector<int>> patterns; // each sorted ascending
    std::vector<std::uint8_t> index_used;   // 1 if antenna index appears in some pattern

    std::size_t size() const { return patterns.size(); }

    /// Pattern index of a given support, or -1 if the support is not a
    /// legal pattern.
    int pattern_index(const std::vector<int>& support) const;
};

SpatialConstellation build_spatial_constellation(int n_tx, int n_active);

/// A sparse SM signal: support in the spatial constellation, nonzero
/// values from the signal constellation.
struct SmSignal {
    Eigen::VectorXcd values;
    std::vector<int> support; // sorted ascending
};

struct BitBudget {
    int spatial_bits = 0;
    int signal_bits = 0; // per slot: n_active * log2 M
    int group_size = 1;
    double bpcu = 0.0;
};

SmSignal map_bits_to_sm(const BitWord& bits, const SpatialConstellation& a,
                        const SignalConstellation& b);
BitWord demap_sm_to_bits(const SmSignal& x, const SpatialConstellation& a,
                         const SignalConstellation& b);

BitBudget bit_budget(const SpatialConstellation& a, const SignalConstellation& b,
                     int group_size);
double bpcu(const SpatialConstellation& a, const SignalConstellation& b,
            int group_size);

/// Size of the ML hypothesis space per slot: M^n_active * |patterns|.
std::uint64_t ml_hypothesis_count(const SpatialConstellation& a,
                                  const SignalConstellation& b);

// Bit-word helpers (MSB-first packing).
std::uint64_t bits_to_index(const BitWord& bits, std::size_t pos, std::size_t len);
void index_to_bits(std::uint64_t value, BitWord& bits, std::size_t pos, std::size_t len);

} // namespace smsim

#endif
