// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rx/bvh.hpp"
#include "rx/types.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace rx {

/// Inclusive key range [lower, upper].
struct RangeLookup {
    Key lower = 0;
    Key upper = 0;

    friend constexpr bool operator==(const RangeLookup&, const RangeLookup&) = default;
};

/// Work counters shared by every index so that results can be compared
/// across structures. RX fills the traversal fields, the sorted array and
/// B+-tree count key comparisons, the hash table counts probed slots.
struct WorkCounters {
    std::uint64_t nodes_visited = 0;
    std::uint64_t aabb_tests = 0;
    std::uint64_t primitive_tests = 0;
    std::uint64_t hits_reported = 0;
    std::uint64_t probe_slots = 0;
    std::uint64_t comparisons = 0;

    WorkCounters& operator+=(const WorkCounters& o);
    WorkCounters& operator+=(const TraversalCounters& t);

    friend bool operator==(const WorkCounters&, const WorkCounters&) = default;
};

struct BatchOptions {
    /// Projected column; when non-empty every query also yields the sum of
    /// values[rowID] over its hits.
    std::span<const std::uint64_t> values;
    /// Keep the per-query row ids (disable for aggregation-only workloads).
    bool collect_rows = true;
    /// Worker threads; results do not depend on this.
    unsigned threads = 1;
};

/// Results of one batch in CSR layout. A query without hits holds a single
/// kMissRowId entry.
class LookupResultSet {
public:
    std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }

    /// Raw result slots of query `i` (the miss marker for empty results).
    std::span<const RowId> slots(std::size_t i) const;
    /// Row ids of query `i`; empty on a miss.
    std::span<const RowId> rows(std::size_t i) const;
    bool is_miss(std::size_t i) const { return hit_counts_[i] == 0; }
    std::uint64_t hit_count(std::size_t i) const { return hit_counts_[i]; }

    bool has_sums() const { return !sums_.empty(); }
    std::uint64_t sum(std::size_t i) const { return sums_[i]; }
    /// Wrapping sum of all per-query sums.
    std::uint64_t checksum() const;

    const WorkCounters& counters() const { return counters_; }

private:
    friend class BatchRunner;

    std::vector<std::uint64_t> offsets_;
    std::vector<RowId> rows_;
    std::vector<std::uint64_t> hit_counts_;
    std::vector<std::uint64_t> sums_;
    WorkCounters counters_;
};

/// Per-query callback: appends the hits of query `i` to `out` and accounts
/// its work in `counters`.
using QueryFn = std::function<void(std::size_t i, std::vector<RowId>& out, WorkCounters& counters)>;

/// Executes `count` independent queries, optionally across threads, and
/// assembles rows, miss markers and sums. Throws AggregateOverflow when a
/// per-query sum wraps.
class BatchRunner {
public:
    static LookupResultSet run(std::size_t count, const BatchOptions& options, const QueryFn& query);
};

/// Throws CountMismatch unless `options.values` is empty or has one entry per key.
void check_values(const BatchOptions& options, std::size_t key_count);

/// Interface shared by RX and the baselines.
class SecondaryIndex {
public:
    virtual ~SecondaryIndex() = default;

    virtual std::string_view name() const = 0;
    virtual bool supports_range() const { return true; }
    virtual std::size_t key_count() const = 0;
    virtual std::size_t footprint_bytes() const = 0;

    virtual LookupResultSet point_lookup_batch(std::span<const Key> keys, const BatchOptions& options = {}) const = 0;
    /// Throws Unsupported for indexes without range support.
    virtual LookupResultSet range_lookup_batch(std::span<const RangeLookup> ranges,
                                               const BatchOptions& options = {}) const = 0;
};

} // namespace rx
