// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rx/geometry.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace rx {

/// Deterministic work done by one traversal. These stand in for the hardware
/// metrics of a raytracing core and are the performance observable of the
/// whole library.
struct TraversalCounters {
    std::uint64_t nodes_visited = 0;
    std::uint64_t aabb_tests = 0;
    std::uint64_t primitive_tests = 0;
    std::uint64_t hits_reported = 0;

    TraversalCounters& operator+=(const TraversalCounters& o) {
        nodes_visited += o.nodes_visited;
        aabb_tests += o.aabb_tests;
        primitive_tests += o.primitive_tests;
        hits_reported += o.hits_reported;
        return *this;
    }

    friend bool operator==(const TraversalCounters&, const TraversalCounters&) = default;
};

struct BvhBuildConfig {
    std::uint32_t max_leaf_size = 4;
    bool refittable = false;
};

/// Binary BVH node. Inner nodes have `count == 0` and their two children at
/// `first` and `first + 1`; leaves cover `count` entries of the primitive order
/// starting at `first`.
struct BvhNode {
    Aabb bounds;
    std::uint32_t first = 0;
    std::uint32_t count = 0;

    bool is_leaf() const { return count != 0; }
};

class Bvh {
public:
    static constexpr std::uint32_t kBlobVersion = 1;

    /// Top-down build: split the largest centroid extent at the object median.
    /// Throws EmptyInput.
    static Bvh build(std::span<const Aabb> bounds, BvhBuildConfig config = {});

    /// Depth-first relayout without build scratch. Throws RefittableNotCompactable.
    Bvh compact() const;

    /// Replaces primitive bounds keeping topology; internal bounds are
    /// recomputed bottom-up. Throws NotRefittable or CountMismatch.
    void refit(std::span<const Aabb> new_bounds);

    /// Calls `on_hit(primitive)` for every primitive where `test(primitive)`
    /// reports an intersection inside the ray window. Subtrees whose bounds
    /// the ray misses are skipped.
    template <typename Test, typename OnHit>
    TraversalCounters traverse_any_hit(const Ray& ray, Test&& test, OnHit&& on_hit) const;

    /// Bytes held by the structure, including capacity slack and scratch.
    std::size_t footprint_bytes() const;

    /// Full structural check: containment against `primitive_bounds`, leaf
    /// sizes, and that the primitive order is a permutation.
    bool validate(std::span<const Aabb> primitive_bounds) const;

    std::size_t primitive_count() const { return primitive_order_.size(); }
    bool refittable() const { return refittable_; }
    bool compacted() const { return compacted_; }
    std::uint32_t max_leaf_size() const { return max_leaf_size_; }
    std::span<const BvhNode> nodes() const { return nodes_; }
    std::span<const std::uint32_t> primitive_order() const { return primitive_order_; }
    const Aabb& root_bounds() const { return nodes_.front().bounds; }

    void serialize(std::ostream& out) const;
    /// Returns nullopt when the blob was written by a different layout version.
    /// Throws BadFormat on corrupt input.
    static std::optional<Bvh> deserialize(std::istream& in);

private:
    Bvh() = default;

    std::vector<BvhNode> nodes_;
    std::vector<std::uint32_t> primitive_order_;
    // Build-time scratch kept by uncompacted hierarchies.
    std::vector<Vertex3> centroids_;
    std::uint32_t max_leaf_size_ = 4;
    bool refittable_ = false;
    bool compacted_ = false;
};

template <typename Test, typename OnHit>
TraversalCounters Bvh::traverse_any_hit(const Ray& ray, Test&& test, OnHit&& on_hit) const {
    TraversalCounters counters;
    counters.nodes_visited = 1;
    counters.aabb_tests = 1;
    if (!overlaps(ray, nodes_.front().bounds)) {
        return counters;
    }
    // Median splits keep the depth below 64 for any 32-bit primitive count.
    std::array<std::uint32_t, 128> stack;
    std::size_t top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const BvhNode& node = nodes_[stack[--top]];
        if (node.is_leaf()) {
            for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
                const std::uint32_t prim = primitive_order_[i];
                ++counters.primitive_tests;
                if (test(prim)) {
                    ++counters.hits_reported;
                    on_hit(prim);
                }
            }
            continue;
        }
        for (std::uint32_t c = node.first + 2; c-- > node.first;) {
            ++counters.aabb_tests;
            if (overlaps(ray, nodes_[c].bounds)) {
                ++counters.nodes_visited;
                stack[top++] = c;
            }
        }
    }
    return counters;
}

} // namespace rx
