// SPDX-License-Identifier: Apache-2.0

#include "rx/geometry.hpp"
#include "rx/rx_index.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace rx;

namespace {

Ray z_ray(float x, float y, float z0, float t_min, float t_max) {
    return {{x, y, z0}, {0.0f, 0.0f, 1.0f}, t_min, t_max};
}

Ray x_ray(float x0, float t_max) { return {{x0, 0.0f, 0.0f}, {1.0f, 0.0f, 0.0f}, 0.0f, t_max}; }

struct D3 {
    double x, y, z;
};
D3 at(const Ray& r, double t) {
    return {r.origin.x + t * r.direction.x, r.origin.y + t * r.direction.y, r.origin.z + t * r.direction.z};
}
D3 sub(const Vertex3& a, const Vertex3& b) { return {double(a.x) - b.x, double(a.y) - b.y, double(a.z) - b.z}; }
D3 sub(const D3& a, const Vertex3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
D3 cross(const D3& a, const D3& b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
double dot(const D3& a, const D3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr double kStep = 1.0 / 4096.0;

// Sampling oracle result: the first crossing in the window, or none. `ambiguous`
// is set when a crossing sits within one step of a window end.
struct Sampled {
    bool hit = false;
    bool ambiguous = false;
    double t = 0.0;
};

template <typename F>
double bisect(F&& f, double lo, double hi) {
    const bool flo = f(lo);
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) == flo ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Sampled sample_volume(const Ray& ray, auto&& inside) {
    Sampled s;
    const double t0 = ray.t_min;
    const double t1 = ray.t_max;
    const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / kStep));
    // Extend one step past each end to detect crossings hugging the window.
    bool prev = inside(at(ray, t0 - kStep));
    for (std::size_t i = 0; i <= steps + 1; ++i) {
        const double t = std::min(t0 + double(i) * kStep, t1 + kStep);
        const bool cur = inside(at(ray, t));
        if (cur != prev) {
            const double lo = t - kStep;
            const double tc = bisect([&](double u) { return inside(at(ray, u)); }, lo, t);
            if (std::abs(tc - t0) < kStep || std::abs(tc - t1) < kStep) {
                s.ambiguous = true;
            }
            if (tc > t0 && tc < t1 && !s.hit) {
                s.hit = true;
                s.t = tc;
            }
        }
        prev = cur;
    }
    return s;
}

Sampled sample_triangle(const Ray& ray, const Triangle& tri) {
    const D3 n = cross(sub(tri.v1, tri.v0), sub(tri.v2, tri.v0));
    auto side = [&](double t) { return dot(n, sub(at(ray, t), tri.v0)) > 0.0; };
    Sampled s;
    const double t0 = ray.t_min;
    const double t1 = ray.t_max;
    bool prev = side(t0 - kStep);
    const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / kStep));
    for (std::size_t i = 0; i <= steps + 1; ++i) {
        const double t = std::min(t0 + double(i) * kStep, t1 + kStep);
        const bool cur = side(t);
        if (cur != prev) {
            const double tc = bisect(side, t - kStep, t);
            // Barycentric containment of the crossing point.
            const D3 p = at(ray, tc);
            const D3 c0 = cross(sub(tri.v1, tri.v0), sub(p, tri.v0));
            const D3 c1 = cross(sub(tri.v2, tri.v1), sub(p, tri.v1));
            const D3 c2 = cross(sub(tri.v0, tri.v2), sub(p, tri.v2));
            const bool in = dot(c0, n) >= -1e-9 && dot(c1, n) >= -1e-9 && dot(c2, n) >= -1e-9;
            if (in && (std::abs(tc - t0) < kStep || std::abs(tc - t1) < kStep)) {
                s.ambiguous = true;
            }
            if (in && tc > t0 && tc < t1) {
                s.hit = true;
                s.t = tc;
            }
            break;
        }
        prev = cur;
    }
    return s;
}

} // namespace

TEST_CASE("triangle layout around the key point") {
    const Triangle t = make_triangle({26.0f, 0.0f, 0.0f});
    CHECK(t.v0 == Vertex3{26.0f, -0.5f, -0.5f});
    CHECK(t.v1 == Vertex3{26.5f, 0.0f, 0.5f});
    CHECK(t.v2 == Vertex3{25.5f, 0.5f, 0.0f});
    const Aabb box = bounds_of(make_triangle({0.0f, 0.0f, 0.0f}));
    CHECK(box.min.x <= 0.0f);
    CHECK(box.max.x >= 0.0f);
    CHECK(box.min.y <= 0.0f);
    CHECK(box.max.z >= 0.0f);
    CHECK(make_triangle({7.0f, 1.0f, 2.0f}) == make_triangle({7.0f, 1.0f, 2.0f}));
}

TEST_CASE("sphere and box shapes") {
    const Sphere s = make_sphere({26.0f, 0.0f, 0.0f});
    CHECK(s.center == Vertex3{26.0f, 0.0f, 0.0f});
    CHECK(s.radius == 0.25f);
    const Aabb b = make_aabb({0.0f, 0.0f, 0.0f});
    CHECK(b.min == Vertex3{-0.25f, -0.25f, -0.25f});
    CHECK(b.max == Vertex3{0.25f, 0.25f, 0.25f});
    // Neighbouring keys leave a gap of at least 0.5 between volumes.
    const Aabb left = bounds_of(make_sphere({10.0f, 0.0f, 0.0f}));
    const Aabb right = bounds_of(make_sphere({11.0f, 0.0f, 0.0f}));
    CHECK(right.min.x - left.max.x >= 0.5f);
}

TEST_CASE("perpendicular ray crosses the triangle at its centre") {
    const Triangle tri = make_triangle({26.0f, 0.0f, 0.0f});
    const auto t = intersect(z_ray(26.0f, 0.0f, -0.5f, 0.0f, 1.0f), tri);
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(0.5));
    // The window is open: a crossing exactly at t_max does not count.
    CHECK_FALSE(intersect(z_ray(26.0f, 0.0f, -0.5f, 0.0f, 0.5f), tri).has_value());
    CHECK_FALSE(intersect(z_ray(26.0f, 0.0f, -0.5f, 0.5f, 1.0f), tri).has_value());
}

TEST_CASE("parallel ray hits the keys inside its window") {
    const Ray ray = x_ray(22.5f, 3.0f);
    for (PrimitiveKind kind : {PrimitiveKind::Triangle, PrimitiveKind::Sphere, PrimitiveKind::Aabb}) {
        auto hits = [&](float x) {
            const CoordTriple c{x, 0.0f, 0.0f};
            switch (kind) {
            case PrimitiveKind::Triangle: return intersect(ray, make_triangle(c)).has_value();
            case PrimitiveKind::Sphere: return intersect(ray, make_sphere(c)).has_value();
            case PrimitiveKind::Aabb: return intersect(ray, make_aabb(c)).has_value();
            }
            return false;
        };
        CHECK(hits(23.0f));
        CHECK(hits(25.0f));
        CHECK_FALSE(hits(26.0f));
        CHECK_FALSE(hits(22.0f));
    }
}

TEST_CASE("rays starting inside a volume report the exit") {
    const Ray ray = x_ray(0.0f, 1.0f);
    const auto ts = intersect(ray, make_sphere({0.0f, 0.0f, 0.0f}));
    REQUIRE(ts.has_value());
    CHECK(*ts == doctest::Approx(0.25));
    const auto tb = intersect(ray, make_aabb({0.0f, 0.0f, 0.0f}));
    REQUIRE(tb.has_value());
    CHECK(*tb == doctest::Approx(0.25));
}

TEST_CASE("oblique rays use the general path") {
    const Ray ray{{0.0f, -0.6f, -0.8f}, {0.0f, 0.6f, 0.8f}, 0.0f, 3.0f};
    CHECK(intersect(ray, make_triangle({0.0f, 0.0f, 0.0f})).has_value());
    CHECK(intersect(ray, make_sphere({0.0f, 0.0f, 0.0f})).has_value());
    CHECK(intersect(ray, make_aabb({0.0f, 0.0f, 0.0f})).has_value());
    CHECK_FALSE(intersect(ray, make_sphere({5.0f, 0.0f, 0.0f})).has_value());
}

TEST_CASE("intersections agree with a sampling oracle") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t checked = 0;
    std::size_t mismatched = 0;
    for (int i = 0; i < 100000; ++i) {
        const CoordTriple c{float(rng() % 16), float(rng() % 16), float(rng() % 16)};
        const int axis = int(rng() % 3);
        const float sign = rng() % 2 == 0 ? 1.0f : -1.0f;
        Ray ray;
        ray.direction = {0.0f, 0.0f, 0.0f};
        ray.direction[axis] = sign;
        Vertex3 o = c.point();
        for (int k = 0; k < 3; ++k) {
            o[k] += k == axis ? float(-sign * (0.2 + unit(rng))) : float(unit(rng) * 1.2 - 0.6);
        }
        ray.origin = o;
        ray.t_min = float(unit(rng) * 0.5);
        ray.t_max = ray.t_min + float(0.05 + unit(rng));
        Sampled expected;
        std::optional<double> got;
        switch (i % 3) {
        case 0: {
            const Triangle tri = make_triangle(c);
            expected = sample_triangle(ray, tri);
            got = intersect(ray, tri);
            break;
        }
        case 1: {
            const Sphere sph = make_sphere(c);
            expected = sample_volume(ray, [&](D3 p) {
                const D3 d = sub(p, sph.center);
                return dot(d, d) <= double(sph.radius) * sph.radius;
            });
            got = intersect(ray, sph);
            break;
        }
        default: {
            const Aabb box = make_aabb(c);
            expected = sample_volume(ray, [&](D3 p) {
                return p.x >= box.min.x && p.x <= box.max.x && p.y >= box.min.y && p.y <= box.max.y &&
                       p.z >= box.min.z && p.z <= box.max.z;
            });
            got = intersect(ray, box);
            break;
        }
        }
        if (expected.ambiguous) {
            continue;
        }
        ++checked;
        if (expected.hit != got.has_value() || (got && std::abs(*got - expected.t) > 2 * kStep)) {
            ++mismatched;
        }
    }
    CHECK(checked > 90000);
    CHECK(mismatched == 0);
}

TEST_CASE("point rays separate neighbouring keys in every mode") {
    std::mt19937_64 rng(5);
    const EncodingMode modes[] = {EncodingMode::naive(), EncodingMode::extended(), EncodingMode::three_d()};
    for (const auto& mode : modes) {
        const Key limit = mode.kind() == ModeKind::Naive ? kNaiveKeyLimit : kExtendedKeyLimit;
        for (int i = 0; i < 2000; ++i) {
            Key k = 1 + rng() % (limit - 2);
            if (i < 4) {
                k = std::array<Key, 4>{1, 2, limit / 2, limit - 2}[i];
            }
            const std::vector<Key> keys{k - 1, k, k + 1};
            for (PrimitiveKind p : {PrimitiveKind::Triangle, PrimitiveKind::Sphere, PrimitiveKind::Aabb}) {
                if (p == PrimitiveKind::Sphere && mode.kind() == ModeKind::Extended) {
                    continue;
                }
                const RxIndex index = RxIndex::build(keys, {mode, p});
                std::vector<RowId> hits;
                index.trace(plan_point_ray(k, mode), hits);
                CHECK_MESSAGE((hits == std::vector<RowId>{1}), mode.name() << " " << to_string(p) << " key " << k);
            }
        }
    }
}
