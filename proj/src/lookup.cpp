// SPDX-License-Identifier: Apache-2.0

#include "rx/lookup.hpp"

#include <algorithm>
#include <exception>
#include <thread>

namespace rx {

WorkCounters& WorkCounters::operator+=(const WorkCounters& o) {
    nodes_visited += o.nodes_visited;
    aabb_tests += o.aabb_tests;
    primitive_tests += o.primitive_tests;
    hits_reported += o.hits_reported;
    probe_slots += o.probe_slots;
    comparisons += o.comparisons;
    return *this;
}

WorkCounters& WorkCounters::operator+=(const TraversalCounters& t) {
    nodes_visited += t.nodes_visited;
    aabb_tests += t.aabb_tests;
    primitive_tests += t.primitive_tests;
    hits_reported += t.hits_reported;
    return *this;
}

std::span<const RowId> LookupResultSet::slots(std::size_t i) const {
    return std::span<const RowId>(rows_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

std::span<const RowId> LookupResultSet::rows(std::size_t i) const {
    return is_miss(i) ? std::span<const RowId>{} : slots(i);
}

std::uint64_t LookupResultSet::checksum() const {
    std::uint64_t total = 0;
    for (std::uint64_t s : sums_) {
        total += s;
    }
    return total;
}

void check_values(const BatchOptions& options, std::size_t key_count) {
    if (!options.values.empty() && options.values.size() != key_count) {
        throw Error(ErrorCode::CountMismatch, "value column must have one entry per indexed key");
    }
}

namespace {

struct Chunk {
    std::vector<std::uint64_t> sizes;
    std::vector<RowId> rows;
    std::vector<std::uint64_t> hit_counts;
    std::vector<std::uint64_t> sums;
    WorkCounters counters;
};

void run_chunk(std::size_t begin, std::size_t end, const BatchOptions& options, const QueryFn& query, Chunk& chunk) {
    std::vector<RowId> hits;
    const bool aggregate = !options.values.empty();
    for (std::size_t i = begin; i < end; ++i) {
        hits.clear();
        query(i, hits, chunk.counters);
        chunk.hit_counts.push_back(hits.size());
        if (aggregate) {
            std::uint64_t sum = 0;
            for (RowId r : hits) {
                if (__builtin_add_overflow(sum, options.values[r], &sum)) {
                    throw Error(ErrorCode::AggregateOverflow, "aggregate of query " + std::to_string(i) + " wraps");
                }
            }
            chunk.sums.push_back(sum);
        }
        if (!options.collect_rows) {
            continue;
        }
        if (hits.empty()) {
            chunk.rows.push_back(kMissRowId);
            chunk.sizes.push_back(1);
        } else {
            chunk.rows.insert(chunk.rows.end(), hits.begin(), hits.end());
            chunk.sizes.push_back(hits.size());
        }
    }
}

} // namespace

LookupResultSet BatchRunner::run(std::size_t count, const BatchOptions& options, const QueryFn& query) {
    const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(count, 1));
    std::vector<Chunk> chunks(workers);
    const std::size_t per = (count + workers - 1) / workers;
    if (workers == 1) {
        run_chunk(0, count, options, query, chunks[0]);
    } else {
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(count, w * per);
            const std::size_t end = std::min(count, begin + per);
            pool.emplace_back([&, w, begin, end] {
                try {
                    run_chunk(begin, end, options, query, chunks[w]);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
        for (auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    LookupResultSet out;
    out.offsets_.reserve(count + 1);
    out.offsets_.push_back(0);
    for (Chunk& c : chunks) {
        out.hit_counts_.insert(out.hit_counts_.end(), c.hit_counts.begin(), c.hit_counts.end());
        out.sums_.insert(out.sums_.end(), c.sums.begin(), c.sums.end());
        out.rows_.insert(out.rows_.end(), c.rows.begin(), c.rows.end());
        for (std::uint64_t s : c.sizes) {
            out.offsets_.push_back(out.offsets_.back() + s);
        }
        out.counters_ += c.counters;
    }
    if (!options.collect_rows) {
        // Keep offsets well-formed: every query then has an empty slot list.
        out.offsets_.assign(count + 1, 0);
    }
    return out;
}

} // namespace rx
