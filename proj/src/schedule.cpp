// SPDX-License-Identifier: Apache-2.0
#include "v6drift/schedule.hpp"

#include <stdexcept>

namespace v6drift {

IndexPermutation::IndexPermutation(uint64_t n, uint64_t seed) : n_(n) {
    if (n == 0)
        throw std::invalid_argument("permutation over empty domain");
    int bits = 2;
    while ((uint64_t{1} << bits) < n && bits < 62)
        bits += 2;  // balanced Feistel wants an even width
    half_bits_ = bits / 2;
    half_mask_ = (uint64_t{1} << half_bits_) - 1;
    domain_ = uint64_t{1} << bits;
    for (int r = 0; r < 4; ++r)
        keys_[r] = mix64(seed + 0x9e3779b97f4a7c15ULL * uint64_t(r + 1));
}

uint64_t IndexPermutation::permute_once(uint64_t x) const {
    uint64_t left = x >> half_bits_;
    uint64_t right = x & half_mask_;
    for (int r = 0; r < 4; ++r) {
        uint64_t f = mix64(right ^ keys_[r]) & half_mask_;
        uint64_t next = left ^ f;
        left = right;
        right = next;
    }
    return (left << half_bits_) | right;
}

uint64_t IndexPermutation::unpermute_once(uint64_t x) const {
    uint64_t left = x >> half_bits_;
    uint64_t right = x & half_mask_;
    for (int r = 3; r >= 0; --r) {
        uint64_t prev_left = right ^ (mix64(left ^ keys_[r]) & half_mask_);
        right = left;
        left = prev_left;
    }
    return (left << half_bits_) | right;
}

uint64_t IndexPermutation::at(uint64_t rank) const {
    // Cycle-walk: the Feistel output is a permutation of [0, domain); chase
    // values until one lands inside [0, n). Expected walk length < 4.
    uint64_t x = permute_once(rank);
    while (x >= n_)
        x = permute_once(x);
    return x;
}

uint64_t IndexPermutation::rank_of(uint64_t index) const {
    uint64_t x = unpermute_once(index);
    while (x >= n_)
        x = unpermute_once(x);
    return x;
}

PermutedSchedule::PermutedSchedule(const TargetSource& source, uint64_t seed,
                                   std::string_view run)
    : source_(&source), perm_(source.size(), seed), run_(run) {
    // IndexPermutation already rejected an empty source.
}

}  // namespace v6drift
