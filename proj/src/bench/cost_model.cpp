// SPDX-License-Identifier: Apache-2.0

#include "rx/bench/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace rx::bench {

namespace {

double squared_error(std::span<const CostObservation> obs, double a, double b) {
    double sum = 0.0;
    for (const CostObservation& o : obs) {
        const double r = o.cost - (a + o.hits * b);
        sum += r * r;
    }
    return sum;
}

} // namespace

CostFit fit_cost_model(std::span<const CostObservation> observations) {
    std::vector<double> distinct;
    for (const CostObservation& o : observations) {
        if (!(o.cost >= 0.0) || !std::isfinite(o.cost) || !std::isfinite(o.hits)) {
            throw Error(ErrorCode::InvalidArgument, "costs must be finite and non-negative");
        }
        distinct.push_back(o.hits);
    }
    std::sort(distinct.begin(), distinct.end());
    if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 2) {
        throw Error(ErrorCode::DegenerateSystem, "need at least two distinct hit counts");
    }

    const double n = double(observations.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const CostObservation& o : observations) {
        sx += o.hits;
        sy += o.cost;
        sxx += o.hits * o.hits;
        sxy += o.hits * o.cost;
    }

    // Two unknowns: the NNLS optimum is the best feasible point among the
    // unconstrained solution and the solutions with one or both coefficients
    // pinned at zero.
    struct Candidate {
        double a;
        double b;
    };
    std::vector<Candidate> candidates{{0.0, 0.0}, {sy / n, 0.0}};
    if (sxx > 0.0) {
        candidates.push_back({0.0, std::max(0.0, sxy / sxx)});
    }
    const double det = n * sxx - sx * sx;
    if (det > 0.0) {
        const double b = (n * sxy - sx * sy) / det;
        const double a = (sy - b * sx) / n;
        if (a >= 0.0 && b >= 0.0) {
            candidates.push_back({a, b});
        }
    }
    CostFit fit;
    double best = std::numeric_limits<double>::infinity();
    for (const Candidate& c : candidates) {
        const double err = squared_error(observations, c.a, c.b);
        if (err < best) {
            best = err;
            fit.traversal = c.a;
            fit.intersect = c.b;
        }
    }
    fit.residual = std::sqrt(best);
    double total = 0.0;
    for (const CostObservation& o : observations) {
        total += (o.cost - sy / n) * (o.cost - sy / n);
    }
    fit.r_squared = total > 0.0 ? 1.0 - best / total : (best == 0.0 ? 1.0 : 0.0);
    return fit;
}

double counter_cost(const WorkCounters& c, const CostWeights& w) {
    return w.nodes_visited * double(c.nodes_visited) + w.aabb_tests * double(c.aabb_tests) +
           w.primitive_tests * double(c.primitive_tests) + w.probe_slots * double(c.probe_slots) +
           w.comparisons * double(c.comparisons);
}

} // namespace rx::bench
