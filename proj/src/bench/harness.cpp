// SPDX-License-Identifier: Apache-2.0

#include "rx/bench/harness.hpp"

#include "rx/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>
#include <sstream>

namespace rx::bench {

namespace {

// Sorted (key, row) column answering lookups by equal_range.
class SortedOracle {
public:
    explicit SortedOracle(std::span<const Key> keys) {
        pairs_.reserve(keys.size());
        for (std::size_t i = 0; i < keys.size(); ++i) {
            pairs_.emplace_back(keys[i], static_cast<RowId>(i));
        }
        std::sort(pairs_.begin(), pairs_.end());
    }

    std::vector<RowId> range(Key lower, Key upper) const {
        std::vector<RowId> rows;
        auto it = std::lower_bound(pairs_.begin(), pairs_.end(), std::pair<Key, RowId>{lower, 0});
        for (; it != pairs_.end() && it->first <= upper; ++it) {
            rows.push_back(it->second);
        }
        return rows;
    }

private:
    std::vector<std::pair<Key, RowId>> pairs_;
};

std::string mode_label(const ExperimentConfig& c) {
    return c.index == IndexKind::Rx ? c.rx.mode.name() : "-";
}

std::string primitive_label(const ExperimentConfig& c) {
    return c.index == IndexKind::Rx ? std::string(to_string(c.rx.primitive)) : "-";
}

LookupResultSet execute(const SecondaryIndex& index, const LookupSet& lookups, std::size_t begin, std::size_t end,
                        const BatchOptions& options) {
    if (!lookups.ranges.empty()) {
        return index.range_lookup_batch(std::span(lookups.ranges).subspan(begin, end - begin), options);
    }
    return index.point_lookup_batch(std::span(lookups.points).subspan(begin, end - begin), options);
}

void validate_warmup(const SecondaryIndex& index, std::span<const Key> keys, const LookupSet& lookups,
                     std::size_t sample, unsigned threads) {
    const std::size_t total = lookups.size();
    if (total == 0 || sample == 0) {
        return;
    }
    const std::size_t stride = std::max<std::size_t>(1, total / sample);
    LookupSet picked;
    for (std::size_t i = 0; i < total && picked.size() < sample; i += stride) {
        if (lookups.ranges.empty()) {
            picked.points.push_back(lookups.points[i]);
        } else {
            picked.ranges.push_back(lookups.ranges[i]);
        }
    }
    BatchOptions options;
    options.threads = threads;
    const LookupResultSet result = execute(index, picked, 0, picked.size(), options);
    const SortedOracle oracle(keys);
    for (std::size_t i = 0; i < picked.size(); ++i) {
        const RangeLookup q = picked.ranges.empty() ? RangeLookup{picked.points[i], picked.points[i]} : picked.ranges[i];
        std::vector<RowId> expected = oracle.range(q.lower, q.upper);
        std::sort(expected.begin(), expected.end());
        const auto rows = result.rows(i);
        std::vector<RowId> got(rows.begin(), rows.end());
        std::sort(got.begin(), got.end());
        if (got != expected) {
            std::ostringstream msg;
            msg << index.name() << " disagrees with the oracle on [" << q.lower << ", " << q.upper << "]: "
                << got.size() << " rows, expected " << expected.size();
            throw Error(ErrorCode::OracleMismatch, msg.str());
        }
    }
}

} // namespace

std::string_view to_string(IndexKind kind) {
    switch (kind) {
    case IndexKind::Rx: return "rx";
    case IndexKind::SortedArray: return "sa";
    case IndexKind::HashTable: return "ht";
    case IndexKind::BPlusTree: return "bplus";
    }
    return "?";
}

IndexKind index_kind_from_string(std::string_view s) {
    for (IndexKind k : {IndexKind::Rx, IndexKind::SortedArray, IndexKind::HashTable, IndexKind::BPlusTree}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown index " + std::string(s));
}

std::unique_ptr<SecondaryIndex> make_index(IndexKind kind, std::span<const Key> keys, const RxConfig& rx) {
    switch (kind) {
    case IndexKind::Rx: return std::make_unique<RxIndex>(RxIndex::build(keys, rx));
    case IndexKind::SortedArray: return std::make_unique<SortedArrayIndex>(SortedArrayIndex::build(keys));
    case IndexKind::HashTable: return std::make_unique<HashTableIndex>(HashTableIndex::build(keys));
    case IndexKind::BPlusTree: return std::make_unique<BPlusTreeIndex>(BPlusTreeIndex::build(keys));
    }
    throw Error(ErrorCode::InvalidArgument, "unknown index kind");
}

std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config) {
    if (config.batches == 0 || config.runs == 0) {
        throw Error(ErrorCode::InvalidArgument, "batches and runs must be positive");
    }
    const KeyColumn column = gen_keys(config.keys);
    const LookupSet lookups = gen_lookups(config.lookups, column.keys);
    const std::unique_ptr<SecondaryIndex> index = make_index(config.index, column.keys, config.rx);
    if (!lookups.ranges.empty() && !index->supports_range()) {
        throw Error(ErrorCode::Unsupported, std::string(index->name()) + " does not support range lookups");
    }
    validate_warmup(*index, column.keys, lookups, config.warmup_sample, config.threads);

    BatchOptions options;
    options.values = column.values;
    options.collect_rows = false;
    options.threads = config.threads;

    const std::size_t total = lookups.size();
    const std::size_t per_batch = (total + config.batches - 1) / config.batches;
    std::vector<ExperimentRecord> records;
    for (std::uint32_t run = 0; run < config.runs; ++run) {
        const std::size_t first_row = records.size();
        std::uint64_t checksum = 0;
        for (std::uint32_t b = 0; b < config.batches; ++b) {
            const std::size_t begin = std::min(total, std::size_t{b} * per_batch);
            const std::size_t end = std::min(total, begin + per_batch);
            const auto start = std::chrono::steady_clock::now();
            const LookupResultSet result = execute(*index, lookups, begin, end, options);
            const auto stop = std::chrono::steady_clock::now();

            std::size_t hits = 0;
            for (std::size_t i = 0; i < result.size(); ++i) {
                hits += result.is_miss(i) ? 0 : 1;
            }
            checksum += result.checksum();

            ExperimentRecord rec;
            rec.index = std::string(index->name());
            rec.mode = mode_label(config);
            rec.primitive = primitive_label(config);
            rec.experiment = config.experiment;
            rec.seed = config.keys.seed;
            rec.run = run;
            rec.batch = b;
            rec.keys = column.keys.size();
            rec.lookups = end - begin;
            rec.hit_rate = rec.lookups == 0 ? 0.0 : double(hits) / double(rec.lookups);
            rec.zipf = config.lookups.zipf_theta;
            rec.multiplicity = config.keys.multiplicity;
            rec.range_hits = config.lookups.kind == LookupKind::Range ? config.lookups.range_hits : 0;
            rec.counters = result.counters();
            rec.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
            records.push_back(std::move(rec));
        }
        for (std::size_t i = first_row; i < records.size(); ++i) {
            records[i].checksum = checksum;
        }
    }
    return records;
}

void write_csv_header(std::ostream& out) { out << kCsvHeader << '\n'; }

namespace {

// Quotes text fields that contain a separator or a quote.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) {
        return s;
    }
    std::string q = "\"";
    for (char c : s) {
        q += c;
        if (c == '"') {
            q += '"';
        }
    }
    return q + '"';
}

} // namespace

void write_csv_row(std::ostream& out, const ExperimentRecord& r) {
    std::ostringstream line;
    line.setf(std::ios::fixed);
    line.precision(6);
    line << csv_field(r.index) << ',' << csv_field(r.mode) << ',' << csv_field(r.primitive) << ','
         << csv_field(r.experiment) << ',' << r.seed << ',' << r.run
         << ',' << r.batch << ',' << r.keys << ',' << r.lookups << ',' << r.hit_rate << ',' << r.zipf << ','
         << r.multiplicity << ',' << r.range_hits << ',' << r.counters.nodes_visited << ',' << r.counters.aabb_tests
         << ',' << r.counters.primitive_tests << ',' << r.counters.probe_slots << ',' << r.counters.comparisons << ','
         << r.checksum << ',';
    line.precision(3);
    line << r.wall_ms << '\n';
    out << line.str();
}

// ---------------------------------------------------------------------------

namespace {

constexpr IndexKind kAllIndexes[] = {IndexKind::Rx, IndexKind::SortedArray, IndexKind::HashTable,
                                     IndexKind::BPlusTree};
constexpr IndexKind kRangeIndexes[] = {IndexKind::Rx, IndexKind::SortedArray, IndexKind::BPlusTree};

ExperimentConfig base_cell(std::string_view name, IndexKind index, const SweepScale& scale) {
    ExperimentConfig c;
    c.experiment = std::string(name);
    c.index = index;
    c.keys.count = scale.keys;
    c.keys.seed = scale.seed;
    c.lookups.count = scale.lookups;
    c.lookups.seed = scale.seed + 1;
    return c;
}

} // namespace

std::vector<std::string_view> sweep_names() {
    return {"hit-rate", "miss-placement", "batching", "multiplicity", "zipf", "selectivity",
            "primitives", "key-pattern", "lookup-order"};
}

std::vector<ExperimentConfig> named_sweep(std::string_view name, const SweepScale& scale) {
    std::vector<ExperimentConfig> cells;
    if (name == "hit-rate") {
        for (double h : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            for (IndexKind k : kAllIndexes) {
                auto c = base_cell(name, k, scale);
                c.lookups.hit_rate = h;
                cells.push_back(c);
            }
        }
    } else if (name == "miss-placement") {
        for (MissPlacement m : {MissPlacement::InDomainGaps, MissPlacement::OutOfRange}) {
            for (IndexKind k : kAllIndexes) {
                auto c = base_cell(name, k, scale);
                c.keys.pattern = KeyPattern::Strided;
                c.keys.stride = 2;
                c.lookups.hit_rate = 0.0;
                c.lookups.misses = m;
                cells.push_back(c);
            }
        }
    } else if (name == "batching") {
        for (std::uint32_t b : {1u, 4u, 16u, 64u}) {
            for (IndexKind k : kAllIndexes) {
                auto c = base_cell(name, k, scale);
                c.batches = b;
                cells.push_back(c);
            }
        }
    } else if (name == "multiplicity") {
        for (std::uint32_t d : {1u, 4u, 16u, 64u}) {
            for (IndexKind k : kAllIndexes) {
                auto c = base_cell(name, k, scale);
                c.keys.count = std::max<std::size_t>(1, scale.keys / d);
                c.keys.multiplicity = d;
                cells.push_back(c);
            }
        }
    } else if (name == "zipf") {
        for (double theta : {0.0, 0.5, 1.0, 1.5, 2.0}) {
            for (IndexKind k : kAllIndexes) {
                auto c = base_cell(name, k, scale);
                c.lookups.zipf_theta = theta;
                cells.push_back(c);
            }
        }
    } else if (name == "selectivity") {
        for (unsigned n = 0; n <= 10; ++n) {
            for (IndexKind k : kRangeIndexes) {
                auto c = base_cell(name, k, scale);
                c.lookups.kind = LookupKind::Range;
                c.lookups.range_hits = std::uint64_t{1} << n;
                cells.push_back(c);
            }
        }
    } else if (name == "primitives") {
        for (const EncodingMode& mode : {EncodingMode::naive(), EncodingMode::extended(), EncodingMode::three_d()}) {
            for (PrimitiveKind p : {PrimitiveKind::Triangle, PrimitiveKind::Sphere, PrimitiveKind::Aabb}) {
                if (p == PrimitiveKind::Sphere && mode.kind() == ModeKind::Extended) {
                    continue;
                }
                auto c = base_cell(name, IndexKind::Rx, scale);
                c.rx.mode = mode;
                c.rx.primitive = p;
                cells.push_back(c);
            }
        }
    } else if (name == "key-pattern") {
        for (KeyPattern p : {KeyPattern::DenseShuffled, KeyPattern::Strided, KeyPattern::Uniform32,
                             KeyPattern::Uniform64}) {
            for (IndexKind k : kAllIndexes) {
                auto c = base_cell(name, k, scale);
                c.keys.pattern = p;
                c.keys.stride = 3;
                cells.push_back(c);
            }
        }
    } else if (name == "lookup-order") {
        for (bool sorted : {false, true}) {
            for (IndexKind k : kAllIndexes) {
                auto c = base_cell(name, k, scale);
                c.lookups.sorted = sorted;
                cells.push_back(c);
            }
        }
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown sweep " + std::string(name));
    }
    return cells;
}

} // namespace rx::bench
