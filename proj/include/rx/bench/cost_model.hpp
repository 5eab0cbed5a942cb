// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rx/lookup.hpp"

#include <span>

namespace rx::bench {

struct CostObservation {
    double hits = 0.0; // qualifying entries per range
    double cost = 0.0;
};

/// Cost(s) = traversal + s * intersect.
struct CostFit {
    double traversal = 0.0;
    double intersect = 0.0;
    /// Euclidean norm of the residual vector.
    double residual = 0.0;
    double r_squared = 0.0;
};

/// Non-negative least squares over the two coefficients. Throws
/// DegenerateSystem with fewer than two distinct hit counts and
/// InvalidArgument for negative costs.
CostFit fit_cost_model(std::span<const CostObservation> observations);

/// Linear combination of counters used as the cost of a workload.
struct CostWeights {
    double nodes_visited = 1.0;
    double aabb_tests = 0.0;
    double primitive_tests = 1.0;
    double probe_slots = 0.0;
    double comparisons = 0.0;
};

double counter_cost(const WorkCounters& counters, const CostWeights& weights = {});

} // namespace rx::bench
