// SPDX-License-Identifier: Apache-2.0

#include "rx/baselines.hpp"

#include <algorithm>
#include <limits>

namespace rx {

namespace {
constexpr std::uint64_t kHashSeed = 0x9E3779B97F4A7C15ull;
}

std::uint64_t hash_key(Key k) {
    std::uint64_t z = k ^ kHashSeed;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::size_t HashTableIndex::capacity_for(std::size_t count) {
    if (count > std::numeric_limits<std::size_t>::max() / 8) {
        throw Error(ErrorCode::CapacityExceeded, "hash table too large");
    }
    // ceil(count / 0.8) without floating point, then group aligned.
    const std::size_t min_slots = (count * 5 + 3) / 4;
    const std::size_t groups = std::max<std::size_t>(1, (min_slots + kGroupSize - 1) / kGroupSize);
    return groups * kGroupSize;
}

HashTableIndex HashTableIndex::build(std::span<const Key> keys) {
    if (keys.size() >= kMissRowId) {
        throw Error(ErrorCode::CapacityExceeded, "key column too large for 32-bit row ids");
    }
    HashTableIndex table;
    table.slots_.resize(capacity_for(keys.size()));
    table.count_ = keys.size();
    const std::size_t groups = table.slots_.size() / kGroupSize;
    for (std::size_t row = 0; row < keys.size(); ++row) {
        std::size_t g = hash_key(keys[row]) % groups;
        for (std::size_t probed = 0;; ++probed) {
            if (probed == groups) {
                throw Error(ErrorCode::CapacityExceeded, "no free slot left");
            }
            Slot* group = &table.slots_[g * kGroupSize];
            Slot* free_slot = nullptr;
            for (std::size_t s = 0; s < kGroupSize && free_slot == nullptr; ++s) {
                if (group[s].row == kMissRowId) {
                    free_slot = &group[s];
                }
            }
            if (free_slot != nullptr) {
                *free_slot = {keys[row], static_cast<RowId>(row)};
                break;
            }
            g = g + 1 == groups ? 0 : g + 1;
        }
    }
    return table;
}

std::size_t HashTableIndex::footprint_bytes() const { return sizeof(*this) + slots_.capacity() * sizeof(Slot); }

void HashTableIndex::probe(Key k, std::vector<RowId>& out, WorkCounters& counters) const {
    const std::size_t groups = slots_.size() / kGroupSize;
    std::size_t g = hash_key(k) % groups;
    // Without deletions every key sits before the first group that had a free
    // slot when it was inserted, so that group ends the probe sequence.
    for (std::size_t probed = 0; probed < groups; ++probed) {
        const Slot* group = &slots_[g * kGroupSize];
        bool saw_empty = false;
        for (std::size_t s = 0; s < kGroupSize; ++s) {
            ++counters.probe_slots;
            if (group[s].row == kMissRowId) {
                saw_empty = true;
            } else if (group[s].key == k) {
                out.push_back(group[s].row);
                ++counters.hits_reported;
            }
        }
        if (saw_empty) {
            return;
        }
        g = g + 1 == groups ? 0 : g + 1;
    }
}

LookupResultSet HashTableIndex::point_lookup_batch(std::span<const Key> keys, const BatchOptions& options) const {
    check_values(options, count_);
    return BatchRunner::run(keys.size(), options, [&](std::size_t i, std::vector<RowId>& out, WorkCounters& c) {
        probe(keys[i], out, c);
    });
}

LookupResultSet HashTableIndex::range_lookup_batch(std::span<const RangeLookup>, const BatchOptions&) const {
    throw Error(ErrorCode::Unsupported, "hash table does not support range lookups");
}

} // namespace rx
