// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rx/bvh.hpp"
#include "rx/encoding.hpp"
#include "rx/geometry.hpp"
#include "rx/lookup.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace rx {

/// How range rays are parameterized along x.
enum class RangeOrigin : std::uint8_t {
    FromOffset, ///< origin at the lower gap, window (0, span)
    FromZero,   ///< origin at x = 0, window (lower gap, upper gap)
};

enum class UpdateStrategy : std::uint8_t { Refit, Rebuild };

std::string_view to_string(RangeOrigin origin);

inline constexpr std::size_t kDefaultRayFanCap = 4096;

struct RxConfig {
    EncodingMode mode = EncodingMode::three_d();
    PrimitiveKind primitive = PrimitiveKind::Triangle;
    bool compaction = true;
    /// Builds a refittable hierarchy. Like the hardware update flag, this
    /// disables compaction.
    bool update_flag = false;
    RangeOrigin range_origin = RangeOrigin::FromOffset;
    std::size_t ray_fan_cap = kDefaultRayFanCap;
    std::uint32_t max_leaf_size = 4;
};

/// Perpendicular point-lookup ray: origin (x, y, z - 0.5), direction +z,
/// window (0, 1). Throws KeyOutOfDomain.
Ray plan_point_ray(Key k, const EncodingMode& mode);

/// x-parallel rays covering [lower, upper]. One ray for the one-dimensional
/// modes; in ThreeD one ray per value of the non-x key bits, where only the
/// first and last rays are bounded by the range ends. Throws KeyOutOfDomain,
/// InvalidArgument (lower > upper) or RayFanTooLarge.
std::vector<Ray> plan_range_rays(RangeLookup q, const EncodingMode& mode, RangeOrigin origin,
                                 std::size_t ray_fan_cap = kDefaultRayFanCap);

/// The raytracing-based secondary index. Primitive i encodes the key at column
/// position i, so every reported primitive index is a row id.
class RxIndex final : public SecondaryIndex {
public:
    /// Throws KeyOutOfDomain, UnsupportedPrimitiveForMode or EmptyInput.
    static RxIndex build(std::span<const Key> keys, const RxConfig& config = {});

    std::string_view name() const override { return "rx"; }
    std::size_t key_count() const override { return keys_.size(); }
    std::size_t footprint_bytes() const override;

    LookupResultSet point_lookup_batch(std::span<const Key> keys, const BatchOptions& options = {}) const override;
    LookupResultSet range_lookup_batch(std::span<const RangeLookup> ranges,
                                       const BatchOptions& options = {}) const override;

    /// Casts one ray and appends every hit row id to `hits`.
    TraversalCounters trace(const Ray& ray, std::vector<RowId>& hits) const;

    /// Replaces the key column. Refit keeps the hierarchy's topology; Rebuild
    /// constructs it afresh. Throws NotRefittable, CountMismatch or KeyOutOfDomain.
    void update(std::span<const Key> new_keys, UpdateStrategy strategy);

    const RxConfig& config() const { return config_; }
    void set_range_origin(RangeOrigin origin) { config_.range_origin = origin; }
    void set_ray_fan_cap(std::size_t cap) { config_.ray_fan_cap = cap; }

    const Bvh& bvh() const { return bvh_; }
    std::span<const Key> keys() const { return keys_; }
    std::span<const Aabb> primitive_bounds() const { return bounds_; }

    /// Index file: "RXIDX1", mode tag, primitive tag, decomposition (3 bytes),
    /// key count (u64 LE), keys (u64 LE), hierarchy blob.
    void save(std::ostream& out) const;
    /// Rebuilds the hierarchy when the stored blob has another layout version.
    static RxIndex load(std::istream& in);

private:
    RxIndex(RxConfig config, Bvh bvh) : config_(std::move(config)), bvh_(std::move(bvh)) {}

    void make_primitives();
    bool test(std::uint32_t prim, const Ray& ray) const;
    void collect_point(Key k, std::vector<RowId>& out, WorkCounters& counters) const;
    void collect_range(RangeLookup q, std::vector<RowId>& out, WorkCounters& counters) const;

    RxConfig config_;
    Bvh bvh_;
    std::vector<Key> keys_;
    std::vector<Triangle> triangles_;
    std::vector<Sphere> spheres_;
    std::vector<Aabb> boxes_;
    std::vector<Aabb> bounds_;
};

} // namespace rx
