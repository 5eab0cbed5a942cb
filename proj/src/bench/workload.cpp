// SPDX-License-Identifier: Apache-2.0

#include "rx/bench/workload.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

namespace rx::bench {

namespace {

constexpr std::string_view kWorkloadMagic = "RXWKLD1";
// Out-of-range misses land a few keys above the largest stored key.
constexpr std::uint64_t kMissSpread = 16;

constexpr std::uint64_t kMax64 = std::numeric_limits<std::uint64_t>::max();

// Largest key representable in `bits` bits.
std::uint64_t max_key(unsigned bits) { return bits >= 64 ? kMax64 : (std::uint64_t{1} << bits) - 1; }

std::vector<Key> distinct_uniform(std::size_t count, unsigned bits, Rng& rng) {
    const std::uint64_t top = max_key(bits);
    if (top != kMax64 && count > top + 1) {
        throw Error(ErrorCode::DomainOverflow, std::to_string(count) + " distinct keys do not fit in " +
                                                   std::to_string(bits) + " bits");
    }
    std::vector<Key> keys;
    keys.reserve(count);
    std::unordered_set<Key> seen;
    seen.reserve(count * 2);
    while (keys.size() < count) {
        const Key k = top == kMax64 ? rng.next() : rng.below(top + 1);
        if (seen.insert(k).second) {
            keys.push_back(k);
        }
    }
    return keys;
}

} // namespace

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) {
        throw Error(ErrorCode::InvalidArgument, "empty draw range");
    }
    // Rejection keeps the draw exactly uniform.
    const std::uint64_t limit = kMax64 - (kMax64 % n + 1) % n;
    std::uint64_t x = next();
    while (x > limit) {
        x = next();
    }
    return x % n;
}

ZipfSampler::ZipfSampler(std::size_t n, double theta) : theta_(theta) {
    if (n == 0 || theta < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "zipf needs at least one rank and theta >= 0");
    }
    if (theta == 0.0) {
        cdf_.assign(n, 0.0); // only the size is used
        return;
    }
    cdf_.resize(n);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        total += std::pow(double(r + 1), -theta);
        cdf_[r] = total;
    }
    for (double& c : cdf_) {
        c /= total;
    }
}

std::size_t ZipfSampler::operator()(Rng& rng) const {
    if (theta_ == 0.0) {
        return rng.below(cdf_.size());
    }
    const double u = rng.unit();
    // First rank whose cumulative weight exceeds u; equal weights resolve to
    // the lower rank.
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1);
}

std::string_view to_string(KeyPattern p) {
    switch (p) {
    case KeyPattern::DenseShuffled: return "dense";
    case KeyPattern::Strided: return "strided";
    case KeyPattern::Uniform32: return "uniform32";
    case KeyPattern::Uniform64: return "uniform64";
    case KeyPattern::Zipf: return "zipf";
    }
    return "?";
}

KeyPattern key_pattern_from_string(std::string_view s) {
    for (KeyPattern p : {KeyPattern::DenseShuffled, KeyPattern::Strided, KeyPattern::Uniform32, KeyPattern::Uniform64,
                         KeyPattern::Zipf}) {
        if (to_string(p) == s) {
            return p;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown key pattern " + std::string(s));
}

std::string_view to_string(MissPlacement m) { return m == MissPlacement::InDomainGaps ? "gaps" : "out-of-range"; }

MissPlacement miss_placement_from_string(std::string_view s) {
    if (s == "gaps") {
        return MissPlacement::InDomainGaps;
    }
    if (s == "out-of-range") {
        return MissPlacement::OutOfRange;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown miss placement " + std::string(s));
}

KeyColumn gen_keys(const KeySpec& spec) {
    if (spec.multiplicity == 0 || spec.key_bits == 0 || spec.key_bits > 64) {
        throw Error(ErrorCode::InvalidArgument, "multiplicity and key_bits must be positive, key_bits <= 64");
    }
    Rng rng(spec.seed);
    const std::uint64_t top = max_key(spec.key_bits);
    std::vector<Key> distinct;
    switch (spec.pattern) {
    case KeyPattern::DenseShuffled:
        if (spec.count > 0 && spec.count - 1 > top) {
            throw Error(ErrorCode::DomainOverflow, "dense keys exceed key width");
        }
        distinct.resize(spec.count);
        for (std::size_t i = 0; i < spec.count; ++i) {
            distinct[i] = i;
        }
        rng.shuffle(distinct);
        break;
    case KeyPattern::Strided: {
        std::uint64_t largest = 0;
        if (spec.stride == 0 || __builtin_mul_overflow(spec.stride, spec.count, &largest) || largest > top) {
            throw Error(ErrorCode::DomainOverflow, "strided keys exceed key width");
        }
        distinct.resize(spec.count);
        for (std::size_t i = 0; i < spec.count; ++i) {
            distinct[i] = spec.stride * (i + 1);
        }
        rng.shuffle(distinct);
        break;
    }
    case KeyPattern::Uniform32: distinct = distinct_uniform(spec.count, std::min(32u, spec.key_bits), rng); break;
    case KeyPattern::Uniform64: distinct = distinct_uniform(spec.count, spec.key_bits, rng); break;
    case KeyPattern::Zipf: {
        if (spec.count > 0 && spec.count - 1 > top) {
            throw Error(ErrorCode::DomainOverflow, "zipf ranks exceed key width");
        }
        if (spec.count > 0) {
            const ZipfSampler zipf(spec.count, spec.zipf_theta);
            distinct.resize(spec.count);
            for (Key& k : distinct) {
                k = zipf(rng);
            }
        }
        break;
    }
    }

    KeyColumn column;
    column.keys.reserve(distinct.size() * spec.multiplicity);
    for (Key k : distinct) {
        column.keys.insert(column.keys.end(), spec.multiplicity, k);
    }
    if (spec.sorted) {
        std::sort(column.keys.begin(), column.keys.end());
    } else if (spec.multiplicity > 1) {
        rng.shuffle(column.keys);
    }
    column.values.resize(column.keys.size());
    for (std::size_t i = 0; i < column.values.size(); ++i) {
        column.values[i] = i;
    }
    return column;
}

LookupSet gen_lookups(const LookupSpec& spec, std::span<const Key> keys) {
    if (!(spec.hit_rate >= 0.0 && spec.hit_rate <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "hit rate must lie in [0, 1]");
    }
    if (keys.empty()) {
        throw Error(ErrorCode::EmptyInput, "lookups need a non-empty key column");
    }
    std::vector<Key> distinct(keys.begin(), keys.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const std::size_t m = distinct.size();
    const Key largest = distinct.back();
    const bool dense = largest - distinct.front() == m - 1;

    Rng rng(spec.seed);
    const auto hits = static_cast<std::size_t>(std::llround(spec.hit_rate * double(spec.count)));
    const std::size_t misses = spec.count - hits;

    auto out_of_range = [&](std::uint64_t span) {
        // span keys starting at the miss must stay representable.
        const std::uint64_t headroom = kMax64 - largest;
        if (headroom < span) {
            throw Error(ErrorCode::DomainOverflow, "no room above the largest key for misses");
        }
        return largest + 1 + rng.below(std::min(kMissSpread, headroom - span + 1));
    };

    LookupSet out;
    if (spec.kind == LookupKind::Point) {
        const ZipfSampler ranks(m, spec.zipf_theta);
        out.points.reserve(spec.count);
        for (std::size_t i = 0; i < hits; ++i) {
            out.points.push_back(distinct[ranks(rng)]);
        }
        if (misses > 0 && spec.misses == MissPlacement::InDomainGaps) {
            // Draw uniformly over all absent keys between the smallest and largest key.
            std::vector<std::uint64_t> gap_prefix(m);
            for (std::size_t i = 1; i < m; ++i) {
                gap_prefix[i] = gap_prefix[i - 1] + (distinct[i] - distinct[i - 1] - 1);
            }
            const std::uint64_t total = gap_prefix.back();
            if (total == 0) {
                throw Error(ErrorCode::InvalidArgument, "key column has no gaps to place misses in");
            }
            for (std::size_t i = 0; i < misses; ++i) {
                const std::uint64_t g = rng.below(total);
                // Gap i (between distinct[i-1] and distinct[i]) covers prefix[i-1] .. prefix[i]-1.
                const auto it = std::upper_bound(gap_prefix.begin(), gap_prefix.end(), g);
                const std::size_t idx = it - gap_prefix.begin();
                out.points.push_back(distinct[idx - 1] + 1 + (g - gap_prefix[idx - 1]));
            }
        } else {
            for (std::size_t i = 0; i < misses; ++i) {
                out.points.push_back(out_of_range(0));
            }
        }
        rng.shuffle(out.points);
        if (spec.sorted) {
            std::sort(out.points.begin(), out.points.end());
        }
        return out;
    }

    const std::uint64_t s = spec.range_hits;
    if (s == 0) {
        throw Error(ErrorCode::InvalidArgument, "range hit count must be positive");
    }
    if (spec.exact_range_hits && hits > 0) {
        if (!dense) {
            throw Error(ErrorCode::ExactHitCountNeedsDenseKeys, "exact range hit counts need a dense key column");
        }
        if (s > m) {
            throw Error(ErrorCode::InvalidArgument, "range hit count exceeds the number of distinct keys");
        }
    }
    const std::size_t lower_ranks = spec.exact_range_hits ? m - std::min<std::uint64_t>(s, m) + 1 : m;
    const ZipfSampler ranks(lower_ranks, spec.zipf_theta);
    out.ranges.reserve(spec.count);
    for (std::size_t i = 0; i < hits; ++i) {
        const Key l = distinct[ranks(rng)];
        const Key u = kMax64 - l < s - 1 ? kMax64 : l + (s - 1);
        out.ranges.push_back({l, u});
    }
    for (std::size_t i = 0; i < misses; ++i) {
        const Key l = out_of_range(s - 1);
        out.ranges.push_back({l, l + (s - 1)});
    }
    rng.shuffle(out.ranges);
    if (spec.sorted) {
        std::sort(out.ranges.begin(), out.ranges.end(),
                  [](const RangeLookup& a, const RangeLookup& b) { return a.lower < b.lower; });
    }
    return out;
}

void write_workload(std::ostream& out, RecordKind kind, std::span<const std::uint64_t> payload) {
    const std::size_t per_record = kind == RecordKind::Ranges ? 2 : 1;
    if (payload.size() % per_record != 0) {
        throw Error(ErrorCode::InvalidArgument, "range payload must hold lower, upper pairs");
    }
    detail::write_magic(out, kWorkloadMagic);
    detail::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(kind));
    detail::write_le<std::uint64_t>(out, payload.size() / per_record);
    for (std::uint64_t v : payload) {
        detail::write_le<std::uint64_t>(out, v);
    }
}

void write_ranges(std::ostream& out, std::span<const RangeLookup> ranges) {
    std::vector<std::uint64_t> payload;
    payload.reserve(ranges.size() * 2);
    for (const RangeLookup& r : ranges) {
        payload.push_back(r.lower);
        payload.push_back(r.upper);
    }
    write_workload(out, RecordKind::Ranges, payload);
}

WorkloadFile read_workload(std::istream& in) {
    detail::expect_magic(in, kWorkloadMagic);
    WorkloadFile file;
    const auto kind = detail::read_le<std::uint8_t>(in);
    if (kind > 2) {
        throw Error(ErrorCode::BadFormat, "unknown record kind " + std::to_string(kind));
    }
    file.kind = static_cast<RecordKind>(kind);
    const auto count = detail::read_le<std::uint64_t>(in);
    const std::uint64_t words = file.kind == RecordKind::Ranges ? 2 : 1;
    if (count > (std::uint64_t{1} << 40)) {
        throw Error(ErrorCode::BadFormat, "implausible record count");
    }
    file.payload.resize(count * words);
    for (std::uint64_t& v : file.payload) {
        v = detail::read_le<std::uint64_t>(in);
    }
    return file;
}

std::vector<RangeLookup> to_ranges(const WorkloadFile& file) {
    if (file.kind != RecordKind::Ranges) {
        throw Error(ErrorCode::BadFormat, "file does not hold ranges");
    }
    std::vector<RangeLookup> ranges(file.payload.size() / 2);
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        ranges[i] = {file.payload[2 * i], file.payload[2 * i + 1]};
    }
    return ranges;
}

} // namespace rx::bench
