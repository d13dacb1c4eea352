// SPDX-License-Identifier: Apache-2.0
#ifndef V6DRIFT_SCHEDULE_HPP
#define V6DRIFT_SCHEDULE_HPP

#include <cstdint>
#include <string_view>
#include <vector>

#include "v6drift/addr.hpp"

namespace v6drift {

/// One scheduled probe. (run, sequence) is unique within a campaign; the run
/// id is owned by the campaign issuing the schedule.
struct ProbeSpec {
    Ipv6Addr128 target;
    std::string_view run;
    uint64_t sequence = 0;
};

/// Indexable target collection. Schedules address targets by index so
/// million-target campaigns never materialize their target list.
class TargetSource {
public:
    virtual ~TargetSource() = default;
    virtual uint64_t size() const = 0;
    virtual Ipv6Addr128 at(uint64_t index) const = 0;
};

class VectorTargetSource : public TargetSource {
public:
    explicit VectorTargetSource(std::vector<Ipv6Addr128> targets)
        : targets_(std::move(targets)) {}
    uint64_t size() const override { return targets_.size(); }
    Ipv6Addr128 at(uint64_t index) const override { return targets_[index]; }

private:
    std::vector<Ipv6Addr128> targets_;
};

/// Seeded format-preserving permutation of [0, n): a four-round Feistel
/// network over the next power-of-two domain with cycle-walking, so the full
/// permutation needs O(1) state regardless of n. Identical (n, seed) yields
/// an identical order.
class IndexPermutation {
public:
    IndexPermutation(uint64_t n, uint64_t seed);

    uint64_t size() const { return n_; }
    /// Index visited at position `rank` of the permuted order.
    uint64_t at(uint64_t rank) const;
    /// Inverse: the position at which `index` is visited; at(rank_of(i)) == i.
    uint64_t rank_of(uint64_t index) const;

private:
    uint64_t permute_once(uint64_t x) const;
    uint64_t unpermute_once(uint64_t x) const;

    uint64_t n_;
    int half_bits_;
    uint64_t half_mask_;
    uint64_t domain_;
    uint64_t keys_[4];
};

/// Pseudorandom full-coverage probe order over a target source. Throws
/// std::invalid_argument on an empty source.
class PermutedSchedule {
public:
    PermutedSchedule(const TargetSource& source, uint64_t seed, std::string_view run = "");

    uint64_t size() const { return perm_.size(); }
    Ipv6Addr128 target_at(uint64_t rank) const { return source_->at(perm_.at(rank)); }
    uint64_t index_at(uint64_t rank) const { return perm_.at(rank); }

    class iterator {
    public:
        iterator(const PermutedSchedule* sched, uint64_t rank) : sched_(sched), rank_(rank) {}
        ProbeSpec operator*() const {
            return {sched_->target_at(rank_), sched_->run_, rank_};
        }
        iterator& operator++() {
            ++rank_;
            return *this;
        }
        bool operator!=(const iterator& o) const { return rank_ != o.rank_; }

    private:
        const PermutedSchedule* sched_;
        uint64_t rank_;
    };

    iterator begin() const { return {this, 0}; }
    iterator end() const { return {this, size()}; }

private:
    const TargetSource* source_;
    IndexPermutation perm_;
    std::string run_;
};

}  // namespace v6drift

#endif
