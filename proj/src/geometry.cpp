// SPDX-License-Identifier: Apache-2.0

#include "rx/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace rx {

namespace {

struct Vec3d {
    double x, y, z;

    double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
};

Vec3d sub(const Vertex3& a, const Vertex3& b) {
    return {double(a.x) - double(b.x), double(a.y) - double(b.y), double(a.z) - double(b.z)};
}
Vec3d to_d(const Vertex3& v) { return {v.x, v.y, v.z}; }
double dot(const Vec3d& a, const Vec3d& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3d cross(const Vec3d& a, const Vec3d& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

bool in_window(const Ray& ray, double t) { return double(ray.t_min) < t && t < double(ray.t_max); }

// First of two ordered crossings that lies in the open window.
std::optional<double> first_in_window(const Ray& ray, double t0, double t1) {
    if (t1 < t0) {
        std::swap(t0, t1);
    }
    if (in_window(ray, t0)) {
        return t0;
    }
    if (in_window(ray, t1)) {
        return t1;
    }
    return std::nullopt;
}

float round_down(double v) {
    auto f = static_cast<float>(v);
    return double(f) > v ? std::nextafter(f, -INFINITY) : f;
}

float round_up(double v) {
    auto f = static_cast<float>(v);
    return double(f) < v ? std::nextafter(f, INFINITY) : f;
}

// Transverse containment for an axis-parallel ray: exact float comparisons so
// that primitive and node tests agree.
bool transverse_inside(const Ray& ray, int axis, const Aabb& box) {
    for (int k = 1; k <= 2; ++k) {
        const int c = (axis + k) % 3;
        if (ray.origin[c] < box.min[c] || ray.origin[c] > box.max[c]) {
            return false;
        }
    }
    return true;
}

std::optional<double> intersect_triangle_axis(const Ray& ray, const Triangle& tri, int a) {
    const Aabb box = bounds_of(tri);
    if (!transverse_inside(ray, a, box)) {
        return std::nullopt;
    }
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    const std::array<const Vertex3*, 3> v = {&tri.v0, &tri.v1, &tri.v2};
    std::array<double, 3> u{}, w{}, h{};
    for (int i = 0; i < 3; ++i) {
        u[i] = double((*v[i])[b]) - double(ray.origin[b]);
        w[i] = double((*v[i])[c]) - double(ray.origin[c]);
        h[i] = double((*v[i])[a]) - double(ray.origin[a]);
    }
    // Edge functions, each proportional to the barycentric weight of the
    // opposite vertex.
    const double e0 = u[1] * w[2] - w[1] * u[2];
    const double e1 = u[2] * w[0] - w[2] * u[0];
    const double e2 = u[0] * w[1] - w[0] * u[1];
    const double area = e0 + e1 + e2;
    if (area == 0.0) {
        return std::nullopt; // triangle plane parallel to the ray
    }
    const bool all_pos = e0 >= 0.0 && e1 >= 0.0 && e2 >= 0.0;
    const bool all_neg = e0 <= 0.0 && e1 <= 0.0 && e2 <= 0.0;
    if (!all_pos && !all_neg) {
        return std::nullopt;
    }
    double along = (e0 * h[0] + e1 * h[1] + e2 * h[2]) / area;
    // Keep the crossing inside the triangle's extent so that node culling,
    // which uses the same subtractions, can never reject a reported hit.
    along = std::clamp(along, std::min({h[0], h[1], h[2]}), std::max({h[0], h[1], h[2]}));
    const double t = ray.direction[a] > 0.0f ? along : -along;
    if (!in_window(ray, t)) {
        return std::nullopt;
    }
    return t;
}

std::optional<double> intersect_sphere_axis(const Ray& ray, const Sphere& sph, int a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    const double db = double(sph.center[b]) - double(ray.origin[b]);
    const double dc = double(sph.center[c]) - double(ray.origin[c]);
    const double r2 = double(sph.radius) * double(sph.radius);
    const double q = db * db + dc * dc;
    if (q > r2) {
        return std::nullopt;
    }
    const double half = std::sqrt(r2 - q);
    const double mid = double(sph.center[a]) - double(ray.origin[a]);
    const double s = ray.direction[a] > 0.0f ? 1.0 : -1.0;
    return first_in_window(ray, s * (mid - half), s * (mid + half));
}

std::optional<double> intersect_aabb_axis(const Ray& ray, const Aabb& box, int a) {
    if (!transverse_inside(ray, a, box)) {
        return std::nullopt;
    }
    const double s = ray.direction[a] > 0.0f ? 1.0 : -1.0;
    const double t0 = s * (double(box.min[a]) - double(ray.origin[a]));
    const double t1 = s * (double(box.max[a]) - double(ray.origin[a]));
    return first_in_window(ray, t0, t1);
}

// Slab test returning the parametric interval of the ray inside the box.
bool slab_interval(const Ray& ray, const Aabb& box, double& t_enter, double& t_exit) {
    t_enter = -std::numeric_limits<double>::infinity();
    t_exit = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        const double o = ray.origin[k];
        const double d = ray.direction[k];
        const double lo = box.min[k];
        const double hi = box.max[k];
        if (d == 0.0) {
            if (o < lo || o > hi) {
                return false;
            }
            continue;
        }
        double t0 = (lo - o) / d;
        double t1 = (hi - o) / d;
        if (t1 < t0) {
            std::swap(t0, t1);
        }
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
        if (t_enter > t_exit) {
            return false;
        }
    }
    return true;
}

} // namespace

std::string_view to_string(PrimitiveKind kind) {
    switch (kind) {
    case PrimitiveKind::Triangle: return "triangle";
    case PrimitiveKind::Sphere: return "sphere";
    case PrimitiveKind::Aabb: return "aabb";
    }
    return "?";
}

Aabb Aabb::empty() {
    constexpr float inf = std::numeric_limits<float>::infinity();
    return {{inf, inf, inf}, {-inf, -inf, -inf}};
}

void Aabb::extend(const Aabb& other) {
    min = {std::min(min.x, other.min.x), std::min(min.y, other.min.y), std::min(min.z, other.min.z)};
    max = {std::max(max.x, other.max.x), std::max(max.y, other.max.y), std::max(max.z, other.max.z)};
}

void Aabb::extend(const Vertex3& p) { extend(Aabb{p, p}); }

bool Aabb::contains(const Aabb& other) const {
    return min.x <= other.min.x && min.y <= other.min.y && min.z <= other.min.z && max.x >= other.max.x &&
           max.y >= other.max.y && max.z >= other.max.z;
}

Vertex3 Aabb::centroid() const {
    return {0.5f * min.x + 0.5f * max.x, 0.5f * min.y + 0.5f * max.y, 0.5f * min.z + 0.5f * max.z};
}

int Aabb::largest_axis() const {
    const float dx = max.x - min.x;
    const float dy = max.y - min.y;
    const float dz = max.z - min.z;
    if (dx >= dy && dx >= dz) {
        return 0;
    }
    return dy >= dz ? 1 : 2;
}

Triangle make_triangle(const CoordTriple& c) { return make_triangle(c, {c.x - 0.5f, c.x + 0.5f}); }

Triangle make_triangle(const CoordTriple& c, XSpan span) {
    return {{c.x, c.y - 0.5f, c.z - 0.5f}, {span.hi, c.y, c.z + 0.5f}, {span.lo, c.y + 0.5f, c.z}};
}

Sphere make_sphere(const CoordTriple& c) { return {c.point(), kSphereRadius}; }

Aabb make_aabb(const CoordTriple& c, float half_x) {
    constexpr float h = kAabbHalfExtent;
    return {{c.x - half_x, c.y - h, c.z - h}, {c.x + half_x, c.y + h, c.z + h}};
}

Aabb bounds_of(const Triangle& tri) {
    Aabb box{tri.v0, tri.v0};
    box.extend(tri.v1);
    box.extend(tri.v2);
    return box;
}

Aabb bounds_of(const Sphere& sph) {
    const double r = sph.radius;
    Aabb box;
    for (int k = 0; k < 3; ++k) {
        box.min[k] = round_down(double(sph.center[k]) - r);
        box.max[k] = round_up(double(sph.center[k]) + r);
    }
    return box;
}

int axis_of(const Vertex3& d) {
    for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3;
        const int c = (a + 2) % 3;
        if ((d[a] == 1.0f || d[a] == -1.0f) && d[b] == 0.0f && d[c] == 0.0f) {
            return a;
        }
    }
    return -1;
}

std::optional<double> intersect(const Ray& ray, const Triangle& tri) {
    if (const int a = axis_of(ray.direction); a >= 0) {
        return intersect_triangle_axis(ray, tri, a);
    }
    // Moeller-Trumbore in double precision, edge-inclusive.
    const Vec3d e1 = sub(tri.v1, tri.v0);
    const Vec3d e2 = sub(tri.v2, tri.v0);
    const Vec3d d = to_d(ray.direction);
    const Vec3d p = cross(d, e2);
    const double det = dot(e1, p);
    if (det == 0.0) {
        return std::nullopt;
    }
    const double inv = 1.0 / det;
    const Vec3d s = sub(ray.origin, tri.v0);
    const double bu = dot(s, p) * inv;
    if (bu < 0.0 || bu > 1.0) {
        return std::nullopt;
    }
    const Vec3d q = cross(s, e1);
    const double bv = dot(d, q) * inv;
    if (bv < 0.0 || bu + bv > 1.0) {
        return std::nullopt;
    }
    const double t = dot(e2, q) * inv;
    if (!in_window(ray, t)) {
        return std::nullopt;
    }
    return t;
}

std::optional<double> intersect(const Ray& ray, const Sphere& sph) {
    if (const int a = axis_of(ray.direction); a >= 0) {
        return intersect_sphere_axis(ray, sph, a);
    }
    const Vec3d oc = sub(ray.origin, sph.center);
    const Vec3d d = to_d(ray.direction);
    const double qa = dot(d, d);
    const double qb = dot(oc, d);
    const double qc = dot(oc, oc) - double(sph.radius) * double(sph.radius);
    const double disc = qb * qb - qa * qc;
    if (qa == 0.0 || disc < 0.0) {
        return std::nullopt;
    }
    const double root = std::sqrt(disc);
    return first_in_window(ray, (-qb - root) / qa, (-qb + root) / qa);
}

std::optional<double> intersect(const Ray& ray, const Aabb& box) {
    if (const int a = axis_of(ray.direction); a >= 0) {
        return intersect_aabb_axis(ray, box, a);
    }
    double t_enter = 0.0;
    double t_exit = 0.0;
    if (!slab_interval(ray, box, t_enter, t_exit)) {
        return std::nullopt;
    }
    return first_in_window(ray, t_enter, t_exit);
}

bool overlaps(const Ray& ray, const Aabb& box) {
    if (const int a = axis_of(ray.direction); a >= 0) {
        if (!transverse_inside(ray, a, box)) {
            return false;
        }
        const double s = ray.direction[a] > 0.0f ? 1.0 : -1.0;
        double t0 = s * (double(box.min[a]) - double(ray.origin[a]));
        double t1 = s * (double(box.max[a]) - double(ray.origin[a]));
        if (t1 < t0) {
            std::swap(t0, t1);
        }
        return t0 <= double(ray.t_max) && t1 >= double(ray.t_min);
    }
    double t_enter = 0.0;
    double t_exit = 0.0;
    if (!slab_interval(ray, box, t_enter, t_exit)) {
        return false;
    }
    return t_enter <= double(ray.t_max) && t_exit >= double(ray.t_min);
}

} // namespace rx
