#ifndef SMSIM_INTERLEAVE_HPP
#define SMSIM_INTERLEAVE_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "smsim/constellation.hpp"

namespace smsim {

/// Per-slot antenna permutations for one transmission group. Slot 1 is
/// always the identity so G=1 reduces exactly to conventional SM.
/// perms[t][l] is the physical antenna carrying logical entry l in slot t.
struct PermutationSchedule {
    int n_tx = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<int>> perms;

    int group_size() const { return static_cast<int>(perms.size()); }
};

PermutationSchedule make_schedule(int n_tx, int group_size, std::uint64_t seed,
                                  std::uint64_t group_index);

/// Schedule with all slots identity (non-interleaved / MMV operation).
PermutationSchedule identity_schedule(int n_tx, int group_size);

/// G SM signals sharing one support, and the vectors actually radiated
/// (after per-slot permutation).
struct TransmissionGroup {
    std::vector<SmSignal> signals;
    std::vector<Eigen::VectorXcd> transmitted;
};

/// Bit layout: [spatial_bits | slot 1 symbols | ... | slot G symbols].
TransmissionGroup encode_group(const BitWord& bits, const SpatialConstellation& a,
                               const SignalConstellation& b,
                               const PermutationSchedule& schedule);

/// Effective per-slot matrix H' with column l = column perms[t][l] of H,
/// so that y = H' x + w after deinterleaving. t is 1-based as in the
/// slot indexing.
Eigen::MatrixXcd deinterleave_channel(const Eigen::MatrixXcd& h,
                                      const PermutationSchedule& schedule, int t);

std::size_t group_bit_length(const SpatialConstellation& a, const SignalConstellation& b,
                             int group_size);

} // namespace smsim

#endif
