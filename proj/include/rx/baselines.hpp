// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rx/lookup.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace rx {

/// Keys sorted ascending with their row ids; lookups binary search for the
/// lower bound and scan forward. Counts key comparisons.
class SortedArrayIndex final : public SecondaryIndex {
public:
    static SortedArrayIndex build(std::span<const Key> keys);

    std::string_view name() const override { return "sa"; }
    std::size_t key_count() const override { return keys_.size(); }
    std::size_t footprint_bytes() const override;

    LookupResultSet point_lookup_batch(std::span<const Key> keys, const BatchOptions& options = {}) const override;
    LookupResultSet range_lookup_batch(std::span<const RangeLookup> ranges,
                                       const BatchOptions& options = {}) const override;

    std::span<const Key> sorted_keys() const { return keys_; }
    std::span<const RowId> row_ids() const { return rows_; }

private:
    void scan(Key lower, Key upper, std::vector<RowId>& out, WorkCounters& counters) const;

    std::vector<Key> keys_;
    std::vector<RowId> rows_;
};

/// splitmix64 finalizer over the key xor a fixed seed.
std::uint64_t hash_key(Key k);

/// Open addressing with linear probing over aligned groups of eight slots.
/// Point lookups only. Counts inspected slots.
class HashTableIndex final : public SecondaryIndex {
public:
    static constexpr std::size_t kGroupSize = 8;
    static constexpr double kMaxLoadFactor = 0.8;

    /// Capacity is the smallest multiple of kGroupSize that keeps the load
    /// factor at or below kMaxLoadFactor. Throws CapacityExceeded if the
    /// table cannot be addressed.
    static HashTableIndex build(std::span<const Key> keys);
    static std::size_t capacity_for(std::size_t count);

    std::string_view name() const override { return "ht"; }
    bool supports_range() const override { return false; }
    std::size_t key_count() const override { return count_; }
    std::size_t footprint_bytes() const override;

    LookupResultSet point_lookup_batch(std::span<const Key> keys, const BatchOptions& options = {}) const override;
    /// Always throws Unsupported.
    LookupResultSet range_lookup_batch(std::span<const RangeLookup> ranges,
                                       const BatchOptions& options = {}) const override;

    std::size_t capacity() const { return slots_.size(); }
    double load_factor() const { return double(count_) / double(slots_.size()); }

private:
    struct Slot {
        Key key = 0;
        RowId row = kMissRowId; // kMissRowId marks an empty slot
    };

    void probe(Key k, std::vector<RowId>& out, WorkCounters& counters) const;

    std::vector<Slot> slots_;
    std::size_t count_ = 0;
};

/// Bulk-loaded B+-tree with linked leaves. Duplicate keys are allowed and may
/// span leaves; lookups descend to the first leaf that can hold the smallest
/// qualifying key and scan sideways. Counts key comparisons.
class BPlusTreeIndex final : public SecondaryIndex {
public:
    static constexpr std::uint32_t kDefaultFanout = 16;

    static BPlusTreeIndex build(std::span<const Key> keys, std::uint32_t fanout = kDefaultFanout);

    std::string_view name() const override { return "bplus"; }
    std::size_t key_count() const override { return count_; }
    std::size_t footprint_bytes() const override;

    LookupResultSet point_lookup_batch(std::span<const Key> keys, const BatchOptions& options = {}) const override;
    LookupResultSet range_lookup_batch(std::span<const RangeLookup> ranges,
                                       const BatchOptions& options = {}) const override;

    std::uint32_t height() const { return height_; }
    /// Checks ordering, equal leaf depth and leaf links.
    bool validate() const;

private:
    static constexpr std::uint32_t kNoLeaf = ~std::uint32_t{0};

    struct Leaf {
        std::vector<Key> keys;
        std::vector<RowId> rows;
        std::uint32_t next = kNoLeaf;
    };
    // Separator i is the smallest key stored below child i.
    struct Inner {
        std::vector<Key> separators;
        std::vector<std::uint32_t> children;
    };

    std::uint32_t find_leaf(Key k, WorkCounters& counters) const;
    void scan(Key lower, Key upper, std::vector<RowId>& out, WorkCounters& counters) const;

    std::vector<Leaf> leaves_;
    // levels_[0] sits directly above the leaves; the root is levels_.back()[0].
    std::vector<std::vector<Inner>> levels_;
    std::uint32_t fanout_ = kDefaultFanout;
    std::uint32_t height_ = 1;
    std::size_t count_ = 0;
};

} // namespace rx
