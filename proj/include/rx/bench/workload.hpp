// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rx/lookup.hpp"
#include "rx/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace rx::bench {

/// Seeded generator with portable bounded draws and shuffles (the standard
/// distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n);
    /// Uniform in [0, 1) with 53 random bits.
    double unit() { return double(next() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// Rank sampler with P(r) proportional to 1 / (r + 1)^theta over [0, n).
/// theta = 0 is uniform.
class ZipfSampler {
public:
    ZipfSampler(std::size_t n, double theta);
    std::size_t operator()(Rng& rng) const;
    std::size_t size() const { return cdf_.size(); }

private:
    std::vector<double> cdf_;
    double theta_ = 0.0;
};

enum class KeyPattern : std::uint8_t { DenseShuffled, Strided, Uniform32, Uniform64, Zipf };

std::string_view to_string(KeyPattern p);
KeyPattern key_pattern_from_string(std::string_view s);

struct KeySpec {
    /// Distinct keys before multiplicity (draws for Zipf).
    std::size_t count = 1u << 16;
    KeyPattern pattern = KeyPattern::DenseShuffled;
    /// Strided: keys stride * 1 ... stride * count.
    std::uint64_t stride = 1;
    /// Zipf: skew of the key ranks drawn from [0, count).
    double zipf_theta = 0.0;
    std::uint32_t multiplicity = 1;
    bool sorted = false;
    std::uint64_t seed = 0;
    /// Every generated key must be below 2^key_bits.
    unsigned key_bits = 64;
};

struct KeyColumn {
    std::vector<Key> keys;
    /// values[i] = i, the projected column used for aggregation checksums.
    std::vector<std::uint64_t> values;
};

/// Throws DomainOverflow when the pattern does not fit in key_bits.
KeyColumn gen_keys(const KeySpec& spec);

enum class LookupKind : std::uint8_t { Point, Range };
enum class MissPlacement : std::uint8_t { InDomainGaps, OutOfRange };

std::string_view to_string(MissPlacement m);
MissPlacement miss_placement_from_string(std::string_view s);

struct LookupSpec {
    std::size_t count = 1u << 14;
    LookupKind kind = LookupKind::Point;
    /// Range(s): qualifying distinct keys per hitting range.
    std::uint64_t range_hits = 1;
    double hit_rate = 1.0;
    /// Skew of the key ranks chosen for hits; ranks follow ascending key order.
    double zipf_theta = 0.0;
    bool sorted = false;
    MissPlacement misses = MissPlacement::OutOfRange;
    /// Require dense keys so every hitting range has exactly range_hits keys.
    bool exact_range_hits = true;
    std::uint64_t seed = 0;
};

struct LookupSet {
    std::vector<Key> points;
    std::vector<RangeLookup> ranges;

    std::size_t size() const { return points.size() + ranges.size(); }
};

/// Exactly round(hit_rate * count) lookups hit. Range misses always lie above
/// the largest key. Throws ExactHitCountNeedsDenseKeys, DomainOverflow or
/// InvalidArgument.
LookupSet gen_lookups(const LookupSpec& spec, std::span<const Key> keys);

/// Workload file kinds.
enum class RecordKind : std::uint8_t { Keys = 0, Points = 1, Ranges = 2 };

struct WorkloadFile {
    RecordKind kind = RecordKind::Keys;
    /// Raw 64-bit payload; ranges are stored as lower, upper pairs.
    std::vector<std::uint64_t> payload;
};

/// "RXWKLD1", kind tag (u8), record count (u64 LE), payload (u64 LE each).
void write_workload(std::ostream& out, RecordKind kind, std::span<const std::uint64_t> payload);
void write_ranges(std::ostream& out, std::span<const RangeLookup> ranges);
/// Throws BadFormat.
WorkloadFile read_workload(std::istream& in);
std::vector<RangeLookup> to_ranges(const WorkloadFile& file);

} // namespace rx::bench
