// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "rx/baselines.hpp"
#include "rx/bench/cost_model.hpp"
#include "rx/bench/harness.hpp"
#include "rx/bench/workload.hpp"
#include "rx/rx_index.hpp"

#include "support/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace rx;
using namespace rx::bench;
using rx::testing::oracle_points;
using rx::testing::oracle_ranges;
using rx::testing::RowSets;
using rx::testing::sorted_rows;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<EncodingMode> all_modes() {
    return {EncodingMode::naive(), EncodingMode::extended(), EncodingMode::three_d()};
}

bool supported(const EncodingMode& m, PrimitiveKind p) {
    return !(p == PrimitiveKind::Sphere && m.kind() == ModeKind::Extended);
}

constexpr PrimitiveKind kPrimitives[] = {PrimitiveKind::Triangle, PrimitiveKind::Sphere, PrimitiveKind::Aabb};

double mean_nodes(const LookupResultSet& r) { return double(r.counters().nodes_visited) / double(r.size()); }

// ---------------------------------------------------------------------------

Outcome category_column() {
    const auto start = Clock::now();
    const std::vector<Key> keys{26, 25, 29, 23, 29, 27};
    const std::vector<Key> points{27, 29, 24};
    const std::vector<RangeLookup> ranges{{23, 25}};
    const RowSets want_points{{5}, {2, 4}, {}};
    const RowSets want_ranges{{1, 3}};
    Outcome out;
    int configs = 0;
    for (const auto& mode : all_modes()) {
        for (PrimitiveKind p : kPrimitives) {
            if (!supported(mode, p)) {
                continue;
            }
            for (RangeOrigin o : {RangeOrigin::FromOffset, RangeOrigin::FromZero}) {
                RxConfig cfg{mode, p};
                cfg.range_origin = o;
                const RxIndex index = RxIndex::build(keys, cfg);
                const auto pr = index.point_lookup_batch(points);
                const bool ok = sorted_rows(pr) == want_points && pr.is_miss(2) && pr.slots(2)[0] == kMissRowId &&
                                sorted_rows(index.range_lookup_batch(ranges)) == want_ranges;
                if (!ok) {
                    out.pass = false;
                    out.detail += " wrong:" + mode.name() + "/" + std::string(to_string(p));
                }
                ++configs;
            }
        }
    }
    const double secs = seconds_since(start);
    out.pass = out.pass && secs < 1.0;
    out.detail = std::to_string(configs) + " configurations, " + std::to_string(secs) + " s" + out.detail;
    return out;
}

Outcome two_bit_fan() {
    const auto mode = EncodingMode::three_d(Decomposition::make(2, 62, 0));
    const std::vector<Key> keys{19, 17, 23, 14, 12, 15, 20};
    const auto rays = plan_range_rays({15, 21}, mode, RangeOrigin::FromOffset);
    const RxIndex index = RxIndex::build(keys, {mode});
    const std::vector<RangeLookup> q{{15, 21}};
    const RowSets rows = sorted_rows(index.range_lookup_batch(q));
    const bool pass = rays.size() == 3 && rows[0] == std::vector<RowId>{0, 1, 5, 6};
    std::ostringstream d;
    d << rays.size() << " rays, rows {";
    for (RowId r : rows[0]) {
        d << ' ' << r;
    }
    d << " }";
    return {pass, d.str()};
}

Outcome oracle_fuzz() {
    const auto start = Clock::now();
    std::mt19937_64 rng(20240601);
    Outcome out;
    std::size_t lookups_checked = 0;
    for (int cfg_i = 0; cfg_i < 100; ++cfg_i) {
        const EncodingMode mode = all_modes()[rng() % 3];
        PrimitiveKind prim = kPrimitives[rng() % 3];
        if (!supported(mode, prim)) {
            prim = PrimitiveKind::Triangle;
        }
        const RangeOrigin origin = rng() % 2 == 0 ? RangeOrigin::FromOffset : RangeOrigin::FromZero;
        const bool ranges = rng() % 2 == 0;

        KeySpec ks;
        ks.seed = rng();
        ks.multiplicity = std::uint32_t{1} << (rng() % 3);
        ks.count = (std::size_t{1} << (10 + rng() % 7)) / ks.multiplicity;
        ks.sorted = rng() % 4 == 0;
        ks.key_bits = mode.kind() == ModeKind::Naive ? 23 : (mode.kind() == ModeKind::Extended ? 29 : 64);
        const unsigned pattern = rng() % 4;
        ks.pattern = pattern == 0   ? KeyPattern::DenseShuffled
                     : pattern == 1 ? KeyPattern::Strided
                     : pattern == 2 ? KeyPattern::Uniform32
                                    : KeyPattern::Uniform64;
        ks.stride = 1 + rng() % 5;
        const KeyColumn col = gen_keys(ks);

        LookupSpec ls;
        ls.seed = rng();
        ls.count = std::size_t{1} << (10 + rng() % 5);
        ls.hit_rate = double(rng() % 5) / 4.0;
        ls.sorted = rng() % 2 == 0;
        const bool dense = ks.pattern == KeyPattern::DenseShuffled || (ks.pattern == KeyPattern::Strided && ks.stride == 1);
        ls.misses = dense || rng() % 2 == 0 ? MissPlacement::OutOfRange : MissPlacement::InDomainGaps;
        if (ranges) {
            ls.kind = LookupKind::Range;
            ls.range_hits = std::uint64_t{1} << (rng() % 7);
            ls.exact_range_hits = dense;
        }
        const LookupSet q = gen_lookups(ls, col.keys);

        RxConfig rc{mode, prim};
        rc.range_origin = origin;
        std::vector<std::unique_ptr<SecondaryIndex>> indexes;
        indexes.push_back(make_index(IndexKind::Rx, col.keys, rc));
        indexes.push_back(make_index(IndexKind::SortedArray, col.keys));
        indexes.push_back(make_index(IndexKind::BPlusTree, col.keys));
        if (!ranges) {
            indexes.push_back(make_index(IndexKind::HashTable, col.keys));
        }
        const RowSets expected = ranges ? oracle_ranges(col.keys, q.ranges) : oracle_points(col.keys, q.points);
        std::uint64_t expected_sum = 0;
        for (const auto& rows : expected) {
            for (RowId r : rows) {
                expected_sum += col.values[r];
            }
        }
        BatchOptions with_sums;
        with_sums.values = col.values;
        for (const auto& index : indexes) {
            const LookupResultSet r = ranges ? index->range_lookup_batch(q.ranges, with_sums)
                                             : index->point_lookup_batch(q.points, with_sums);
            if (sorted_rows(r) != expected || r.checksum() != expected_sum) {
                out.pass = false;
                std::ostringstream d;
                d << " config " << cfg_i << " (" << mode.name() << "/" << to_string(prim) << "/" << to_string(origin)
                  << (ranges ? "/range" : "/point") << ") " << index->name() << " mismatch;";
                out.detail += d.str();
            }
        }
        lookups_checked += q.size();
    }
    const double secs = seconds_since(start);
    out.pass = out.pass && secs < 300.0;
    out.detail = "100 configurations, " + std::to_string(lookups_checked) + " lookups, " + std::to_string(secs) +
                 " s" + out.detail;
    return out;
}

Outcome encoding_properties() {
    std::mt19937_64 rng(4242);
    const auto ext = EncodingMode::extended();
    std::size_t violations = 0;
    auto check_pair = [&](Key a, Key b) {
        if (a > b) {
            std::swap(a, b);
        }
        if (a != b && !(encode(a, ext).x < encode(b, ext).x)) {
            ++violations;
        }
    };
    for (int i = 0; i < 1000000; ++i) {
        check_pair(rng() % kExtendedKeyLimit, rng() % kExtendedKeyLimit);
    }
    const std::vector<Key> boundary{0, 1, 2, (Key{1} << 23) - 1, Key{1} << 23, (Key{1} << 24) - 1, Key{1} << 24,
                                    (Key{1} << 24) + 1, kExtendedKeyLimit - 2, kExtendedKeyLimit - 1};
    for (Key a : boundary) {
        for (Key b : boundary) {
            check_pair(a, b);
        }
    }
    // Exhaustive over each power-of-two boundary's neighbourhood.
    for (unsigned bit = 1; bit < 29; ++bit) {
        const Key centre = Key{1} << bit;
        for (Key k = centre - 4; k < std::min(centre + 4, kExtendedKeyLimit - 1); ++k) {
            check_pair(k, k + 1);
        }
    }
    const bool out_of_domain = !ext.in_domain(kExtendedKeyLimit);

    const auto three = EncodingMode::three_d();
    std::size_t roundtrip_failures = 0;
    for (int i = 0; i < 1000000; ++i) {
        const Key k = rng();
        roundtrip_failures += decode(encode(k, three), three) == k ? 0 : 1;
    }
    for (Key k : {Key{0}, ~Key{0}, Key{1} << 63, (Key{1} << 46) - 1}) {
        roundtrip_failures += decode(encode(k, three), three) == k ? 0 : 1;
    }
    const bool collapse = static_cast<float>(Key{1} << 24) == static_cast<float>((Key{1} << 24) + 1);
    std::ostringstream d;
    d << violations << " monotonicity violations, " << roundtrip_failures << " round-trip failures, float(2^24)"
      << (collapse ? "==" : "!=") << "float(2^24+1)";
    return {violations == 0 && roundtrip_failures == 0 && collapse && out_of_domain, d.str()};
}

Outcome update_direction() {
    const std::size_t n = std::size_t{1} << 16;
    KeySpec ks;
    ks.count = n;
    ks.seed = 61;
    const KeyColumn col = gen_keys(ks);
    LookupSpec ls;
    ls.count = std::size_t{1} << 14;
    ls.seed = 62;
    const LookupSet q = gen_lookups(ls, col.keys);

    RxConfig cfg;
    cfg.update_flag = true;
    std::mt19937_64 rng(63);

    auto measure = [&](const std::vector<Key>& updated, double& refit_nodes, double& fresh_nodes) {
        RxIndex index = RxIndex::build(col.keys, cfg);
        index.update(updated, UpdateStrategy::Refit);
        const auto refit = index.point_lookup_batch(q.points);
        const RxIndex fresh = RxIndex::build(updated, cfg);
        const auto rebuilt = fresh.point_lookup_batch(q.points);
        refit_nodes = mean_nodes(refit);
        fresh_nodes = mean_nodes(rebuilt);
        return sorted_rows(refit) == oracle_points(updated, q.points) && sorted_rows(rebuilt) == sorted_rows(refit);
    };

    // (a) swap the keys stored at adjacent buffer positions
    std::vector<Key> positions = col.keys;
    for (int s = 0; s < 1024; ++s) {
        const std::size_t i = rng() % (n - 1);
        std::swap(positions[i], positions[i + 1]);
    }
    // (b) swap the buffer positions of rank-adjacent keys
    std::vector<Key> ranks = col.keys;
    std::vector<std::size_t> where(n);
    for (std::size_t i = 0; i < n; ++i) {
        where[ranks[i]] = i;
    }
    for (int s = 0; s < 1024; ++s) {
        const Key k = rng() % (n - 1);
        std::swap(ranks[where[k]], ranks[where[k + 1]]);
        std::swap(where[k], where[k + 1]);
    }

    double a_refit = 0, a_fresh = 0, b_refit = 0, b_fresh = 0;
    const bool a_exact = measure(positions, a_refit, a_fresh);
    const bool b_exact = measure(ranks, b_refit, b_fresh);
    const bool a_ok = a_exact && a_refit >= 1.5 * a_fresh;
    const bool b_ok = b_exact && std::abs(b_refit - b_fresh) <= 0.10 * b_fresh;
    std::ostringstream d;
    d << "position swaps: " << a_refit << " vs fresh " << a_fresh << " nodes/lookup (" << a_refit / a_fresh
      << "x, exact=" << a_exact << "); key swaps: " << b_refit << " vs " << b_fresh << " ("
      << 100.0 * (b_refit - b_fresh) / b_fresh << "%, exact=" << b_exact << ")";
    return {a_ok && b_ok, d.str()};
}

Outcome early_abort() {
    KeySpec ks;
    ks.count = std::size_t{1} << 16;
    ks.seed = 71;
    const KeyColumn col = gen_keys(ks);
    const RxIndex index = RxIndex::build(col.keys);
    LookupSpec ls;
    ls.count = std::size_t{1} << 14;
    ls.seed = 72;
    ls.hit_rate = 1.0;
    const auto hits = index.point_lookup_batch(gen_lookups(ls, col.keys).points);
    ls.hit_rate = 0.0;
    ls.misses = MissPlacement::OutOfRange;
    const auto misses = index.point_lookup_batch(gen_lookups(ls, col.keys).points);
    std::vector<Key> extreme;
    for (Key k = 0; k < ls.count; ++k) {
        extreme.push_back((Key{1} << 40) + k * 977);
    }
    const auto far = index.point_lookup_batch(extreme);
    bool all_missed = true;
    for (std::size_t i = 0; i < misses.size(); ++i) {
        all_missed = all_missed && misses.is_miss(i);
    }
    for (std::size_t i = 0; i < far.size(); ++i) {
        all_missed = all_missed && far.is_miss(i);
    }
    std::ostringstream d;
    d << "hits " << mean_nodes(hits) << ", out-of-range misses " << mean_nodes(misses) << ", extreme "
      << mean_nodes(far) << " nodes/lookup";
    return {all_missed && mean_nodes(misses) < mean_nodes(hits) && mean_nodes(far) <= 2.0, d.str()};
}

Outcome cost_linearity() {
    KeySpec ks;
    ks.count = std::size_t{1} << 20;
    ks.seed = 81;
    const KeyColumn col = gen_keys(ks);
    const RxIndex index = RxIndex::build(col.keys);
    std::vector<CostObservation> obs;
    std::vector<double> prim_per_lookup;
    std::vector<double> hits;
    bool exact = true;
    for (unsigned n = 0; n <= 10; ++n) {
        LookupSpec ls;
        ls.kind = LookupKind::Range;
        ls.range_hits = std::uint64_t{1} << n;
        ls.count = 1024;
        ls.seed = 82 + n;
        const LookupSet q = gen_lookups(ls, col.keys);
        const auto r = index.range_lookup_batch(q.ranges);
        for (std::size_t i = 0; i < r.size(); ++i) {
            exact = exact && r.hit_count(i) == ls.range_hits;
        }
        const double lookups = double(r.size());
        obs.push_back({double(ls.range_hits), counter_cost(r.counters()) / lookups});
        prim_per_lookup.push_back(double(r.counters().primitive_tests) / lookups);
        hits.push_back(double(ls.range_hits));
    }
    const CostFit fit = fit_cost_model(obs);
    // Marginal primitive tests per additional hit, measured end to end.
    const double marginal = (prim_per_lookup.back() - prim_per_lookup.front()) / (hits.back() - hits.front());
    const double rel = std::abs(fit.intersect - marginal) / marginal;
    std::ostringstream d;
    d << "A=" << fit.traversal << " B=" << fit.intersect << " R^2=" << fit.r_squared
      << ", marginal primitive tests/hit=" << marginal << " (B off by " << 100.0 * rel << "%)";
    return {exact && fit.r_squared >= 0.99 && rel <= 0.20, d.str()};
}

Outcome compaction() {
    std::mt19937_64 rng(91);
    std::vector<Key> keys(std::size_t{1} << 14);
    for (Key& k : keys) {
        k = rng() % 40000;
    }
    RxConfig loose;
    loose.compaction = false;
    const RxIndex plain = RxIndex::build(keys, loose);
    const RxIndex compact = RxIndex::build(keys);
    std::size_t differing = 0;
    for (int i = 0; i < 10000; ++i) {
        Ray ray;
        if (i % 2 == 0) {
            ray = plan_point_ray(rng() % 41000, EncodingMode::three_d());
        } else {
            const Key l = rng() % 41000;
            ray = plan_range_rays({l, l + rng() % 200}, EncodingMode::three_d(), RangeOrigin::FromOffset)[0];
        }
        std::vector<RowId> a, b;
        plain.trace(ray, a);
        compact.trace(ray, b);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        differing += a == b ? 0 : 1;
    }
    std::ostringstream d;
    d << differing << " of 10000 rays differ; footprint " << plain.footprint_bytes() << " -> "
      << compact.footprint_bytes() << " bytes";
    return {differing == 0 && compact.footprint_bytes() <= plain.footprint_bytes(), d.str()};
}

Outcome multiplicity() {
    Outcome out;
    std::ostringstream d;
    for (std::uint32_t dup : {1u, 4u, 16u, 64u}) {
        KeySpec ks;
        ks.count = (std::size_t{1} << 16) / dup;
        ks.multiplicity = dup;
        ks.seed = 100 + dup;
        const KeyColumn col = gen_keys(ks);
        LookupSpec ls;
        ls.count = std::size_t{1} << 12;
        ls.hit_rate = 0.5;
        ls.seed = 200 + dup;
        const LookupSet q = gen_lookups(ls, col.keys);
        for (IndexKind k : {IndexKind::Rx, IndexKind::SortedArray, IndexKind::HashTable, IndexKind::BPlusTree}) {
            const auto index = make_index(k, col.keys);
            const auto r = index->point_lookup_batch(q.points);
            std::size_t bad = 0;
            std::size_t hit_queries = 0;
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (!r.is_miss(i)) {
                    ++hit_queries;
                    bad += r.hit_count(i) == dup ? 0 : 1;
                }
            }
            if (bad != 0 || hit_queries != ls.count / 2) {
                out.pass = false;
                d << " " << index->name() << "@d=" << dup << " wrong on " << bad << ";";
            }
        }
    }
    out.detail = "d in {1,4,16,64} on rx, sa, ht, bplus" + d.str();
    return out;
}

Outcome determinism() {
    std::vector<ExperimentConfig> cells;
    SweepScale scale;
    scale.keys = std::size_t{1} << 13;
    scale.lookups = std::size_t{1} << 12;
    scale.seed = 5;
    for (auto name : {"hit-rate", "batching", "selectivity", "zipf"}) {
        auto part = named_sweep(name, scale);
        cells.insert(cells.end(), part.begin(), part.end());
    }
    auto render = [&] {
        std::ostringstream out;
        write_csv_header(out);
        for (const auto& cell : cells) {
            auto c = cell;
            c.runs = 2;
            for (const auto& rec : run_experiment(c)) {
                std::ostringstream row;
                write_csv_row(row, rec);
                const std::string line = row.str();
                out << line.substr(0, line.rfind(',')) << '\n'; // drop wall_ms
            }
        }
        return out.str();
    };
    const std::string first = render();
    const std::string second = render();
    return {first == second, std::to_string(cells.size()) + " experiment cells, " + std::to_string(first.size()) +
                                 " CSV bytes compared"};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"category column end to end", category_column},
        {"two-bit decomposition ray fan", two_bit_fan},
        {"oracle fuzz over 100 configurations", oracle_fuzz},
        {"encoding properties", encoding_properties},
        {"refit degradation direction", update_direction},
        {"early abort for out-of-range misses", early_abort},
        {"linear range cost model", cost_linearity},
        {"compaction equivalence and footprint", compaction},
        {"key multiplicity", multiplicity},
        {"experiment determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": " << criteria[i].first << " -- "
                  << o.detail << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
