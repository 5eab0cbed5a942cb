// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rx/bench/workload.hpp"
#include "rx/rx_index.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace rx::bench {

enum class IndexKind : std::uint8_t { Rx, SortedArray, HashTable, BPlusTree };

std::string_view to_string(IndexKind kind);
IndexKind index_kind_from_string(std::string_view s);

std::unique_ptr<SecondaryIndex> make_index(IndexKind kind, std::span<const Key> keys, const RxConfig& rx = {});

struct ExperimentConfig {
    std::string experiment = "custom";
    IndexKind index = IndexKind::Rx;
    RxConfig rx;
    KeySpec keys;
    LookupSpec lookups;
    std::uint32_t batches = 1;
    std::uint32_t runs = 1;
    /// Lookups checked against the oracle during the warmup pass.
    std::size_t warmup_sample = 1024;
    unsigned threads = 1;
};

/// One CSV row: the counters of one batch in one run.
struct ExperimentRecord {
    std::string index;
    std::string mode;      // "-" for baselines
    std::string primitive; // "-" for baselines
    std::string experiment;
    std::uint64_t seed = 0;
    std::uint32_t run = 0;
    std::uint32_t batch = 0;
    std::size_t keys = 0;
    std::size_t lookups = 0;
    /// Realized fraction of lookups in this batch with at least one hit.
    double hit_rate = 0.0;
    double zipf = 0.0;
    std::uint32_t multiplicity = 1;
    std::uint64_t range_hits = 0; // 0 for point lookups
    WorkCounters counters;
    /// Sum of values[rowID] over every hit of the whole run.
    std::uint64_t checksum = 0;
    double wall_ms = 0.0;
};

/// Builds the index, validates a warmup subsample against a sorted-column
/// oracle, then runs `runs` passes over `batches` consecutive batches.
/// Throws OracleMismatch when the index disagrees with the oracle.
std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config);

inline constexpr std::string_view kCsvHeader =
    "index,mode,primitive,experiment,seed,run,batch,keys,lookups,hit_rate,zipf,multiplicity,range_hits,"
    "nodes_visited,aabb_tests,primitive_tests,probe_slots,comparisons,checksum,wall_ms";

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const ExperimentRecord& record);

/// Scale knobs shared by the named sweeps.
struct SweepScale {
    std::size_t keys = 1u << 20;
    std::size_t lookups = 1u << 20;
    std::uint64_t seed = 1;
};

/// Names of the predefined sweeps, one per evaluated dimension.
std::vector<std::string_view> sweep_names();
/// Every (index, workload) cell of a named sweep. Throws InvalidArgument for
/// unknown names.
std::vector<ExperimentConfig> named_sweep(std::string_view name, const SweepScale& scale);

} // namespace rx::bench
