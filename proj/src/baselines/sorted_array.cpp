// SPDX-License-Identifier: Apache-2.0

#include "rx/baselines.hpp"

#include <algorithm>
#include <numeric>

namespace rx {

SortedArrayIndex SortedArrayIndex::build(std::span<const Key> keys) {
    if (keys.size() >= kMissRowId) {
        throw Error(ErrorCode::InvalidArgument, "key column too large for 32-bit row ids");
    }
    std::vector<RowId> order(keys.size());
    std::iota(order.begin(), order.end(), RowId{0});
    std::stable_sort(order.begin(), order.end(), [&](RowId a, RowId b) { return keys[a] < keys[b]; });
    SortedArrayIndex index;
    index.keys_.reserve(keys.size());
    for (RowId r : order) {
        index.keys_.push_back(keys[r]);
    }
    index.rows_ = std::move(order);
    return index;
}

std::size_t SortedArrayIndex::footprint_bytes() const {
    return sizeof(*this) + keys_.capacity() * sizeof(Key) + rows_.capacity() * sizeof(RowId);
}

void SortedArrayIndex::scan(Key lower, Key upper, std::vector<RowId>& out, WorkCounters& counters) const {
    // Plain lower-bound binary search so every comparison can be counted.
    std::size_t lo = 0;
    std::size_t len = keys_.size();
    while (len > 0) {
        const std::size_t half = len / 2;
        ++counters.comparisons;
        if (keys_[lo + half] < lower) {
            lo += half + 1;
            len -= half + 1;
        } else {
            len = half;
        }
    }
    for (std::size_t i = lo; i < keys_.size(); ++i) {
        ++counters.comparisons;
        if (keys_[i] > upper) {
            break;
        }
        out.push_back(rows_[i]);
        ++counters.hits_reported;
    }
}

LookupResultSet SortedArrayIndex::point_lookup_batch(std::span<const Key> keys, const BatchOptions& options) const {
    check_values(options, keys_.size());
    return BatchRunner::run(keys.size(), options, [&](std::size_t i, std::vector<RowId>& out, WorkCounters& c) {
        scan(keys[i], keys[i], out, c);
    });
}

LookupResultSet SortedArrayIndex::range_lookup_batch(std::span<const RangeLookup> ranges,
                                                     const BatchOptions& options) const {
    check_values(options, keys_.size());
    return BatchRunner::run(ranges.size(), options, [&](std::size_t i, std::vector<RowId>& out, WorkCounters& c) {
        if (ranges[i].lower <= ranges[i].upper) {
            scan(ranges[i].lower, ranges[i].upper, out, c);
        }
    });
}

} // namespace rx
