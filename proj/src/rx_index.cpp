// SPDX-License-Identifier: Apache-2.0

#include "rx/rx_index.hpp"

#include "binary_io.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace rx {

namespace {

constexpr std::string_view kIndexMagic = "RXIDX1";
constexpr std::uint64_t kExactLimit = std::uint64_t{1} << kMaxExactBits;

constexpr std::uint64_t low_mask(unsigned bits) {
    return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}
constexpr std::uint64_t shift_right(std::uint64_t v, unsigned bits) { return bits >= 64 ? 0 : v >> bits; }

// x-parallel ray through (y, z) whose window covers exactly (lo, hi) on x.
Ray x_ray(float y, float z, float lo, float hi, RangeOrigin origin) {
    Ray ray;
    ray.direction = {1.0f, 0.0f, 0.0f};
    if (origin == RangeOrigin::FromZero) {
        ray.origin = {0.0f, y, z};
        ray.t_min = lo;
        ray.t_max = hi;
    } else {
        ray.origin = {lo, y, z};
        ray.t_min = 0.0f;
        // Nearest float to the span: in Extended mode the exact span may not be
        // representable, and rounding to nearest keeps the window end at least
        // half a float step away from both neighbouring keys.
        ray.t_max = static_cast<float>(double(hi) - double(lo));
    }
    return ray;
}

// Plans the fan without domain checks on the bounds; values of the non-x bits
// whose coordinates are not encodable hold no keys and are skipped.
std::vector<Ray> plan_range_unchecked(RangeLookup q, const EncodingMode& mode, RangeOrigin origin,
                                      std::size_t cap) {
    if (q.lower > q.upper) {
        throw Error(ErrorCode::InvalidArgument, "range lower bound exceeds upper bound");
    }
    std::vector<Ray> rays;
    if (mode.kind() != ModeKind::ThreeD) {
        const Key limit = mode.kind() == ModeKind::Naive ? kNaiveKeyLimit : kExtendedKeyLimit;
        if (q.lower >= limit) {
            return rays;
        }
        const Key upper = std::min(q.upper, limit - 1);
        rays.push_back(x_ray(0.0f, 0.0f, gap_bounds(q.lower, mode).first, gap_bounds(upper, mode).second, origin));
        return rays;
    }

    const Decomposition& d = mode.decomposition();
    const std::uint64_t h_lo = shift_right(q.lower, d.bits_x);
    const std::uint64_t h_hi = shift_right(q.upper, d.bits_x);
    if (h_hi - h_lo >= cap) {
        throw Error(ErrorCode::RayFanTooLarge, "range needs more than " + std::to_string(cap) + " rays");
    }
    const float x_lo = static_cast<float>(q.lower & low_mask(d.bits_x));
    const float x_hi = static_cast<float>(q.upper & low_mask(d.bits_x));
    const float x_end = static_cast<float>(low_mask(d.bits_x)) + 0.5f;
    rays.reserve(h_hi - h_lo + 1);
    for (std::uint64_t h = h_lo;; ++h) {
        const std::uint64_t y = h & low_mask(d.bits_y);
        const std::uint64_t z = shift_right(h, d.bits_y);
        if (y < kExactLimit && z < kExactLimit) {
            const float lo = h == h_lo ? x_lo - 0.5f : -0.5f;
            const float hi = h == h_hi ? x_hi + 0.5f : x_end;
            rays.push_back(x_ray(static_cast<float>(y), static_cast<float>(z), lo, hi, origin));
        }
        if (h == h_hi) {
            break;
        }
    }
    return rays;
}

std::uint8_t mode_tag(ModeKind kind) { return static_cast<std::uint8_t>(kind); }

} // namespace

std::string_view to_string(RangeOrigin origin) {
    return origin == RangeOrigin::FromZero ? "from-zero" : "from-offset";
}

Ray plan_point_ray(Key k, const EncodingMode& mode) {
    const CoordTriple c = encode(k, mode);
    return {{c.x, c.y, c.z - 0.5f}, {0.0f, 0.0f, 1.0f}, 0.0f, 1.0f};
}

std::vector<Ray> plan_range_rays(RangeLookup q, const EncodingMode& mode, RangeOrigin origin,
                                 std::size_t ray_fan_cap) {
    for (Key k : {q.lower, q.upper}) {
        if (!mode.in_domain(k)) {
            throw Error(ErrorCode::KeyOutOfDomain, "range bound " + std::to_string(k) + " not encodable");
        }
    }
    return plan_range_unchecked(q, mode, origin, ray_fan_cap);
}

// ---------------------------------------------------------------------------

RxIndex RxIndex::build(std::span<const Key> keys, const RxConfig& config) {
    if (config.primitive == PrimitiveKind::Sphere && config.mode.kind() == ModeKind::Extended) {
        throw Error(ErrorCode::UnsupportedPrimitiveForMode, "spheres cannot separate Extended-mode keys");
    }
    if (keys.empty()) {
        throw Error(ErrorCode::EmptyInput, "cannot index an empty key column");
    }
    if (keys.size() >= kMissRowId) {
        throw Error(ErrorCode::InvalidArgument, "key column too large for 32-bit row ids");
    }
    RxConfig effective = config;
    if (effective.update_flag) {
        effective.compaction = false;
    }
    std::vector<Key> column(keys.begin(), keys.end());
    // Placeholder hierarchy; replaced below once the primitives exist.
    RxIndex index(effective, Bvh::build(std::vector<Aabb>{Aabb{}}));
    index.keys_ = std::move(column);
    index.make_primitives();
    Bvh bvh = Bvh::build(index.bounds_, {effective.max_leaf_size, effective.update_flag});
    index.bvh_ = effective.compaction ? bvh.compact() : std::move(bvh);
    return index;
}

void RxIndex::make_primitives() {
    const EncodingMode& mode = config_.mode;
    const bool extended = mode.kind() == ModeKind::Extended;
    triangles_.clear();
    spheres_.clear();
    boxes_.clear();
    bounds_.clear();
    bounds_.reserve(keys_.size());
    for (Key k : keys_) {
        const CoordTriple c = encode(k, mode);
        switch (config_.primitive) {
        case PrimitiveKind::Triangle: {
            Triangle tri = make_triangle(c);
            if (extended) {
                // +-0.5 would swallow whole runs of neighbouring keys.
                const auto [lo, hi] = gap_bounds(k, mode);
                tri = make_triangle(c, {lo, hi});
            }
            triangles_.push_back(tri);
            bounds_.push_back(bounds_of(tri));
            break;
        }
        case PrimitiveKind::Sphere:
            spheres_.push_back(make_sphere(c));
            bounds_.push_back(bounds_of(spheres_.back()));
            break;
        case PrimitiveKind::Aabb:
            // Extended gaps are a single float wide, so the box is flat in x.
            boxes_.push_back(make_aabb(c, extended ? 0.0f : kAabbHalfExtent));
            bounds_.push_back(boxes_.back());
            break;
        }
    }
}

bool RxIndex::test(std::uint32_t prim, const Ray& ray) const {
    switch (config_.primitive) {
    case PrimitiveKind::Triangle: return intersect(ray, triangles_[prim]).has_value();
    case PrimitiveKind::Sphere: return intersect(ray, spheres_[prim]).has_value();
    case PrimitiveKind::Aabb: return intersect(ray, boxes_[prim]).has_value();
    }
    return false;
}

TraversalCounters RxIndex::trace(const Ray& ray, std::vector<RowId>& hits) const {
    return bvh_.traverse_any_hit(
        ray, [&](std::uint32_t prim) { return test(prim, ray); }, [&](std::uint32_t prim) { hits.push_back(prim); });
}

void RxIndex::collect_point(Key k, std::vector<RowId>& out, WorkCounters& counters) const {
    if (!config_.mode.in_domain(k)) {
        return; // nothing stored can live there
    }
    counters += trace(plan_point_ray(k, config_.mode), out);
}

void RxIndex::collect_range(RangeLookup q, std::vector<RowId>& out, WorkCounters& counters) const {
    for (const Ray& ray : plan_range_unchecked(q, config_.mode, config_.range_origin, config_.ray_fan_cap)) {
        counters += trace(ray, out);
    }
}

LookupResultSet RxIndex::point_lookup_batch(std::span<const Key> keys, const BatchOptions& options) const {
    check_values(options, keys_.size());
    return BatchRunner::run(keys.size(), options, [&](std::size_t i, std::vector<RowId>& out, WorkCounters& c) {
        collect_point(keys[i], out, c);
    });
}

LookupResultSet RxIndex::range_lookup_batch(std::span<const RangeLookup> ranges, const BatchOptions& options) const {
    check_values(options, keys_.size());
    for (const RangeLookup& q : ranges) {
        if (q.lower > q.upper) {
            throw Error(ErrorCode::InvalidArgument, "range lower bound exceeds upper bound");
        }
    }
    return BatchRunner::run(ranges.size(), options, [&](std::size_t i, std::vector<RowId>& out, WorkCounters& c) {
        collect_range(ranges[i], out, c);
    });
}

void RxIndex::update(std::span<const Key> new_keys, UpdateStrategy strategy) {
    if (strategy == UpdateStrategy::Rebuild) {
        *this = build(new_keys, config_);
        return;
    }
    if (!bvh_.refittable()) {
        throw Error(ErrorCode::NotRefittable, "index was built without the update flag");
    }
    if (new_keys.size() != keys_.size()) {
        throw Error(ErrorCode::CountMismatch, "updates cannot add or remove keys");
    }
    for (Key k : new_keys) {
        if (!config_.mode.in_domain(k)) {
            throw Error(ErrorCode::KeyOutOfDomain, "key " + std::to_string(k) + " not encodable");
        }
    }
    keys_.assign(new_keys.begin(), new_keys.end());
    make_primitives();
    bvh_.refit(bounds_);
}

std::size_t RxIndex::footprint_bytes() const {
    return bvh_.footprint_bytes() + triangles_.capacity() * sizeof(Triangle) + spheres_.capacity() * sizeof(Sphere) +
           boxes_.capacity() * sizeof(Aabb);
}

void RxIndex::save(std::ostream& out) const {
    using detail::write_le;
    detail::write_magic(out, kIndexMagic);
    write_le<std::uint8_t>(out, mode_tag(config_.mode.kind()));
    write_le<std::uint8_t>(out, static_cast<std::uint8_t>(config_.primitive));
    const Decomposition& d = config_.mode.decomposition();
    write_le<std::uint8_t>(out, d.bits_x);
    write_le<std::uint8_t>(out, d.bits_y);
    write_le<std::uint8_t>(out, d.bits_z);
    write_le<std::uint64_t>(out, keys_.size());
    for (Key k : keys_) {
        write_le<std::uint64_t>(out, k);
    }
    bvh_.serialize(out);
}

RxIndex RxIndex::load(std::istream& in) {
    using detail::read_le;
    detail::expect_magic(in, kIndexMagic);
    const auto mode = read_le<std::uint8_t>(in);
    const auto primitive = read_le<std::uint8_t>(in);
    const auto bx = read_le<std::uint8_t>(in);
    const auto by = read_le<std::uint8_t>(in);
    const auto bz = read_le<std::uint8_t>(in);
    const auto count = read_le<std::uint64_t>(in);
    if (mode > 2 || primitive > 2 || count == 0 || count >= kMissRowId) {
        throw Error(ErrorCode::BadFormat, "invalid index header");
    }
    RxConfig config;
    switch (static_cast<ModeKind>(mode)) {
    case ModeKind::Naive: config.mode = EncodingMode::naive(); break;
    case ModeKind::Extended: config.mode = EncodingMode::extended(); break;
    case ModeKind::ThreeD: config.mode = EncodingMode::three_d(Decomposition::make(bx, by, bz)); break;
    }
    config.primitive = static_cast<PrimitiveKind>(primitive);
    std::vector<Key> keys(count);
    for (Key& k : keys) {
        k = read_le<std::uint64_t>(in);
    }
    std::optional<Bvh> bvh = Bvh::deserialize(in);
    if (!bvh) {
        return build(keys, config);
    }
    if (bvh->primitive_count() != count) {
        throw Error(ErrorCode::BadFormat, "hierarchy does not match the key column");
    }
    config.update_flag = bvh->refittable();
    config.compaction = bvh->compacted();
    config.max_leaf_size = bvh->max_leaf_size();
    RxIndex index(config, std::move(*bvh));
    index.keys_ = std::move(keys);
    index.make_primitives();
    if (!index.bvh_.validate(index.bounds_)) {
        throw Error(ErrorCode::BadFormat, "stored hierarchy does not enclose its primitives");
    }
    return index;
}

} // namespace rx
