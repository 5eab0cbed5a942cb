// SPDX-License-Identifier: Apache-2.0
// Brute-force answers for the test suites: sort both sides and merge.

#pragma once

#include "rx/lookup.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace rx::testing {

using RowSets = std::vector<std::vector<RowId>>;

/// Row ids per range, each list sorted ascending. Ranges are processed in
/// ascending lower-bound order while a cursor walks the sorted column.
inline RowSets oracle_ranges(std::span<const Key> keys, std::span<const RangeLookup> ranges) {
    std::vector<RowId> by_key(keys.size());
    std::iota(by_key.begin(), by_key.end(), RowId{0});
    std::sort(by_key.begin(), by_key.end(), [&](RowId a, RowId b) { return keys[a] < keys[b] || (keys[a] == keys[b] && a < b); });
    std::vector<std::size_t> by_lower(ranges.size());
    std::iota(by_lower.begin(), by_lower.end(), std::size_t{0});
    std::sort(by_lower.begin(), by_lower.end(),
              [&](std::size_t a, std::size_t b) { return ranges[a].lower < ranges[b].lower; });

    RowSets out(ranges.size());
    std::size_t cursor = 0;
    for (std::size_t q : by_lower) {
        while (cursor < by_key.size() && keys[by_key[cursor]] < ranges[q].lower) {
            ++cursor;
        }
        for (std::size_t i = cursor; i < by_key.size() && keys[by_key[i]] <= ranges[q].upper; ++i) {
            out[q].push_back(by_key[i]);
        }
        std::sort(out[q].begin(), out[q].end());
    }
    return out;
}

inline RowSets oracle_points(std::span<const Key> keys, std::span<const Key> points) {
    std::vector<RangeLookup> ranges;
    ranges.reserve(points.size());
    for (Key k : points) {
        ranges.push_back({k, k});
    }
    return oracle_ranges(keys, ranges);
}

/// Sorted row ids of every query in a result set.
inline RowSets sorted_rows(const LookupResultSet& result) {
    RowSets out(result.size());
    for (std::size_t i = 0; i < result.size(); ++i) {
        const auto rows = result.rows(i);
        out[i].assign(rows.begin(), rows.end());
        std::sort(out[i].begin(), out[i].end());
    }
    return out;
}

} // namespace rx::testing
