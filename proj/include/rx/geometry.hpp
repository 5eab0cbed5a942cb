// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rx/encoding.hpp"
#include "rx/types.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

namespace rx {

/// Points on the ray are origin + t * direction; intersections count only for
/// t_min < t < t_max.
struct Ray {
    Vertex3 origin;
    Vertex3 direction;
    float t_min = 0.0f;
    float t_max = 0.0f;

    friend constexpr bool operator==(const Ray&, const Ray&) = default;
};

struct Aabb {
    Vertex3 min;
    Vertex3 max;

    static Aabb empty();
    void extend(const Aabb& other);
    void extend(const Vertex3& p);
    bool contains(const Aabb& other) const;
    bool is_empty() const { return min.x > max.x; }
    Vertex3 centroid() const;
    int largest_axis() const;

    friend constexpr bool operator==(const Aabb&, const Aabb&) = default;
};

struct Triangle {
    Vertex3 v0;
    Vertex3 v1;
    Vertex3 v2;

    friend constexpr bool operator==(const Triangle&, const Triangle&) = default;
};

struct Sphere {
    Vertex3 center;
    float radius = 0.0f;

    friend constexpr bool operator==(const Sphere&, const Sphere&) = default;
};

inline constexpr float kSphereRadius = 0.25f;
inline constexpr float kAabbHalfExtent = 0.25f;

enum class PrimitiveKind : std::uint8_t { Triangle = 0, Sphere = 1, Aabb = 2 };

std::string_view to_string(PrimitiveKind kind);

/// Extent of a key's primitive along x, strictly inside the key's gap.
struct XSpan {
    float lo = 0.0f;
    float hi = 0.0f;
};

/// Triangle with vertex offsets (0,-.5,-.5), (+.5,0,+.5), (-.5,+.5,0) around
/// `center`. The centroid is the key point itself, so both x-parallel and
/// z-parallel rays through it cross the interior.
Triangle make_triangle(const CoordTriple& center);

/// Same shape with the x offsets replaced by `span` (used when +-0.5 would
/// reach past the neighbouring keys).
Triangle make_triangle(const CoordTriple& center, XSpan span);

Sphere make_sphere(const CoordTriple& center);

/// Box of half-extent 0.25 around `center`; `half_x` overrides the x half-extent.
Aabb make_aabb(const CoordTriple& center, float half_x = kAabbHalfExtent);

Aabb bounds_of(const Triangle& tri);
Aabb bounds_of(const Sphere& sph);
inline const Aabb& bounds_of(const Aabb& box) { return box; }

/// Smallest t in the open ray window at which the ray meets the primitive
/// surface. A ray that starts inside a sphere or box reports the exit crossing.
/// Triangle containment is edge-inclusive.
std::optional<double> intersect(const Ray& ray, const Triangle& tri);
std::optional<double> intersect(const Ray& ray, const Sphere& sph);
std::optional<double> intersect(const Ray& ray, const Aabb& box);

/// Conservative closed-window slab test used for BVH node culling.
bool overlaps(const Ray& ray, const Aabb& box);

/// Axis index (0..2) when the direction is a unit axis vector, otherwise -1.
int axis_of(const Vertex3& direction);

} // namespace rx
