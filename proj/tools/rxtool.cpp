// SPDX-License-Identifier: Apache-2.0
// rxtool: generate workloads, build and query indexes, run experiments.

#include "rx/baselines.hpp"
#include "rx/bench/cost_model.hpp"
#include "rx/bench/harness.hpp"
#include "rx/bench/workload.hpp"
#include "rx/rx_index.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace rx;
using namespace rx::bench;

namespace {

struct RxOptions {
    std::string mode = "3d";
    std::vector<unsigned> decomposition{23, 23, 18};
    std::string primitive = "triangle";
    std::string origin = "from-offset";
    bool no_compaction = false;
    bool update_flag = false;
    std::uint32_t leaf_size = 4;
    std::size_t fan_cap = kDefaultRayFanCap;

    void attach(CLI::App* app) {
        app->add_option("--mode", mode, "naive, extended or 3d")->check(CLI::IsMember({"naive", "extended", "3d"}));
        app->add_option("--decomposition", decomposition, "x,y,z bit widths for 3d")->delimiter(',')->expected(3);
        app->add_option("--primitive", primitive)->check(CLI::IsMember({"triangle", "sphere", "aabb"}));
        app->add_option("--origin", origin, "range ray origin")->check(CLI::IsMember({"from-offset", "from-zero"}));
        app->add_flag("--no-compaction", no_compaction);
        app->add_flag("--update-flag", update_flag, "build a refittable hierarchy");
        app->add_option("--leaf-size", leaf_size);
        app->add_option("--fan-cap", fan_cap, "maximum rays per range lookup");
    }

    RxConfig config() const {
        RxConfig c;
        if (mode == "naive") {
            c.mode = EncodingMode::naive();
        } else if (mode == "extended") {
            c.mode = EncodingMode::extended();
        } else {
            c.mode = EncodingMode::three_d(Decomposition::make(decomposition[0], decomposition[1], decomposition[2]));
        }
        c.primitive = primitive == "sphere"  ? PrimitiveKind::Sphere
                      : primitive == "aabb" ? PrimitiveKind::Aabb
                                            : PrimitiveKind::Triangle;
        c.range_origin = origin == "from-zero" ? RangeOrigin::FromZero : RangeOrigin::FromOffset;
        c.compaction = !no_compaction;
        c.update_flag = update_flag;
        c.max_leaf_size = leaf_size;
        c.ray_fan_cap = fan_cap;
        return c;
    }
};

struct KeyOptions {
    KeySpec spec;
    std::string pattern = "dense";

    void attach(CLI::App* app, bool seed_required) {
        app->add_option("--count", spec.count, "distinct keys");
        app->add_option("--pattern", pattern)
            ->check(CLI::IsMember({"dense", "strided", "uniform32", "uniform64", "zipf"}));
        app->add_option("--stride", spec.stride);
        app->add_option("--key-zipf", spec.zipf_theta, "skew of the zipf key pattern");
        app->add_option("--multiplicity", spec.multiplicity, "copies of every distinct key");
        app->add_flag("--sorted-keys", spec.sorted);
        app->add_option("--key-bits", spec.key_bits);
        auto* seed = app->add_option("--seed", spec.seed);
        if (seed_required) {
            seed->required();
        }
    }

    KeySpec resolved() const {
        KeySpec s = spec;
        s.pattern = key_pattern_from_string(pattern);
        return s;
    }
};

struct LookupOptions {
    LookupSpec spec;
    std::string kind = "point";
    std::string misses = "out-of-range";
    bool inexact = false;

    void attach(CLI::App* app, bool seed_required, const std::string& count_flag) {
        app->add_option("--kind", kind)->check(CLI::IsMember({"point", "range"}));
        app->add_option(count_flag, spec.count, "number of lookups");
        app->add_option("--range-hits", spec.range_hits, "qualifying keys per hitting range");
        app->add_option("--hit-rate", spec.hit_rate)->check(CLI::Range(0.0, 1.0));
        app->add_option("--zipf", spec.zipf_theta, "skew of the lookup key ranks");
        app->add_flag("--sorted-lookups", spec.sorted);
        app->add_option("--misses", misses)->check(CLI::IsMember({"gaps", "out-of-range"}));
        app->add_flag("--inexact-ranges", inexact, "allow sparse keys for range lookups");
        if (seed_required) {
            app->add_option("--seed", spec.seed)->required();
        }
    }

    LookupSpec resolved() const {
        LookupSpec s = spec;
        s.kind = kind == "range" ? LookupKind::Range : LookupKind::Point;
        s.misses = miss_placement_from_string(misses);
        s.exact_range_hits = !inexact;
        return s;
    }
};

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
    }
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
    }
    return out;
}

std::vector<Key> read_keys(const std::string& path) {
    auto in = open_in(path);
    WorkloadFile file = read_workload(in);
    if (file.kind != RecordKind::Keys) {
        throw Error(ErrorCode::BadFormat, path + " does not hold a key column");
    }
    return std::move(file.payload);
}

// Row ids of each query in ascending order, or "miss".
void print_result(std::ostream& out, const LookupResultSet& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
        out << i << ':';
        if (r.is_miss(i)) {
            out << " miss";
        }
        std::vector<RowId> rows(r.rows(i).begin(), r.rows(i).end());
        std::sort(rows.begin(), rows.end());
        for (RowId row : rows) {
            out << ' ' << row;
        }
        out << '\n';
    }
}

void print_counters(const WorkCounters& c) {
    std::cerr << "nodes_visited=" << c.nodes_visited << " aabb_tests=" << c.aabb_tests
              << " primitive_tests=" << c.primitive_tests << " hits_reported=" << c.hits_reported
              << " probe_slots=" << c.probe_slots << " comparisons=" << c.comparisons << '\n';
}

// Splits one CSV line, honouring double-quoted fields.
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    return fields;
}

// One observation per CSV row of the requested index with range_hits > 0;
// the cost is the weighted counter total divided by the batch size.
std::vector<CostObservation> observations_from_csv(std::istream& in, const std::string& index,
                                                   const CostWeights& weights) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::BadFormat, "empty CSV");
    }
    const auto header = split_csv(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        col[header[i]] = i;
    }
    for (const char* name : {"index", "lookups", "range_hits", "nodes_visited", "aabb_tests", "primitive_tests",
                             "probe_slots", "comparisons"}) {
        if (!col.count(name)) {
            throw Error(ErrorCode::BadFormat, std::string("CSV lacks column ") + name);
        }
    }
    std::vector<CostObservation> obs;
    while (std::getline(in, line)) {
        const auto f = split_csv(line);
        if (f.size() != header.size()) {
            throw Error(ErrorCode::BadFormat, "ragged CSV row: " + line);
        }
        if (f[col["index"]] != index || std::stoull(f[col["range_hits"]]) == 0) {
            continue;
        }
        WorkCounters c;
        c.nodes_visited = std::stoull(f[col["nodes_visited"]]);
        c.aabb_tests = std::stoull(f[col["aabb_tests"]]);
        c.primitive_tests = std::stoull(f[col["primitive_tests"]]);
        c.probe_slots = std::stoull(f[col["probe_slots"]]);
        c.comparisons = std::stoull(f[col["comparisons"]]);
        const double lookups = std::stod(f[col["lookups"]]);
        if (lookups > 0) {
            obs.push_back({std::stod(f[col["range_hits"]]), counter_cost(c, weights) / lookups});
        }
    }
    return obs;
}

void write_records(std::ostream& out, const std::vector<ExperimentRecord>& records) {
    for (const auto& r : records) {
        write_csv_row(out, r);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Secondary indexing by ray tracing: workloads, indexes and experiments"};
    app.require_subcommand(1);

    // gen-keys
    auto* gen_keys_cmd = app.add_subcommand("gen-keys", "generate a key column");
    KeyOptions gk;
    std::string gk_out;
    gk.attach(gen_keys_cmd, true);
    gen_keys_cmd->add_option("-o,--out", gk_out)->required();

    // gen-lookups
    auto* gen_lookups_cmd = app.add_subcommand("gen-lookups", "generate point or range lookups for a key column");
    LookupOptions gl;
    std::string gl_keys, gl_out;
    gl.attach(gen_lookups_cmd, true, "--count");
    gen_lookups_cmd->add_option("--keys", gl_keys, "key column file")->required();
    gen_lookups_cmd->add_option("-o,--out", gl_out)->required();

    // build
    auto* build_cmd = app.add_subcommand("build", "build an RX index and save it");
    RxOptions bo;
    std::string b_keys, b_out;
    bo.attach(build_cmd);
    build_cmd->add_option("--keys", b_keys)->required();
    build_cmd->add_option("-o,--out", b_out)->required();

    // lookup
    auto* lookup_cmd = app.add_subcommand("lookup", "answer a lookup file with a saved RX index or a baseline");
    RxOptions lo;
    std::string l_index, l_keys, l_kind = "rx", l_lookups;
    unsigned l_threads = 1;
    lo.attach(lookup_cmd);
    lookup_cmd->add_option("--index", l_index, "saved RX index");
    lookup_cmd->add_option("--keys", l_keys, "key column to build --index-kind from");
    lookup_cmd->add_option("--index-kind", l_kind)->check(CLI::IsMember({"rx", "sa", "ht", "bplus"}));
    lookup_cmd->add_option("--lookups", l_lookups)->required();
    lookup_cmd->add_option("--threads", l_threads);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "run one experiment or a named sweep and write CSV");
    RxOptions beo;
    KeyOptions bek;
    LookupOptions bel;
    std::string be_sweep, be_out, be_index = "rx", be_name = "custom";
    std::uint32_t be_batches = 1, be_runs = 1;
    std::size_t be_warmup = 1024, be_lookup_count = 0;
    unsigned be_threads = 1;
    const auto names = sweep_names();
    const std::vector<std::string> sweeps(names.begin(), names.end());
    beo.attach(bench_cmd);
    bek.attach(bench_cmd, true);
    bel.attach(bench_cmd, false, "--lookup-count");
    bench_cmd->add_option("--sweep", be_sweep, "named sweep instead of a single configuration")
        ->check(CLI::IsMember(sweeps));
    bench_cmd->add_option("--index-kind", be_index)->check(CLI::IsMember({"rx", "sa", "ht", "bplus"}));
    bench_cmd->add_option("--experiment", be_name, "label written to the experiment column");
    bench_cmd->add_option("--batches", be_batches);
    bench_cmd->add_option("--runs", be_runs);
    bench_cmd->add_option("--warmup-sample", be_warmup);
    bench_cmd->add_option("--threads", be_threads);
    bench_cmd->add_option("-o,--out", be_out, "CSV file (default stdout)");

    // fit-cost
    auto* fit_cmd = app.add_subcommand("fit-cost", "fit cost = A + hits * B to range experiments");
    std::string f_csv, f_index = "rx";
    CostWeights weights;
    std::size_t f_keys = std::size_t{1} << 20, f_lookups = 1024;
    std::uint64_t f_seed = 1;
    fit_cmd->add_option("--csv", f_csv, "bench CSV to fit; without it the selectivity sweep is run");
    fit_cmd->add_option("--index-kind", f_index)->check(CLI::IsMember({"rx", "sa", "bplus"}));
    fit_cmd->add_option("--w-nodes", weights.nodes_visited);
    fit_cmd->add_option("--w-aabb", weights.aabb_tests);
    fit_cmd->add_option("--w-prims", weights.primitive_tests);
    fit_cmd->add_option("--w-probes", weights.probe_slots);
    fit_cmd->add_option("--w-comparisons", weights.comparisons);
    fit_cmd->add_option("--key-count", f_keys);
    fit_cmd->add_option("--lookup-count", f_lookups);
    fit_cmd->add_option("--seed", f_seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen_keys_cmd) {
            const KeyColumn col = gen_keys(gk.resolved());
            auto out = open_out(gk_out);
            write_workload(out, RecordKind::Keys, col.keys);
        } else if (*gen_lookups_cmd) {
            const auto keys = read_keys(gl_keys);
            const LookupSet q = gen_lookups(gl.resolved(), keys);
            auto out = open_out(gl_out);
            if (q.ranges.empty() && gl.kind == "point") {
                write_workload(out, RecordKind::Points, q.points);
            } else {
                write_ranges(out, q.ranges);
            }
        } else if (*build_cmd) {
            const auto keys = read_keys(b_keys);
            const RxIndex index = RxIndex::build(keys, bo.config());
            auto out = open_out(b_out);
            index.save(out);
            std::cerr << keys.size() << " keys, " << index.footprint_bytes() << " bytes\n";
        } else if (*lookup_cmd) {
            std::unique_ptr<SecondaryIndex> index;
            if (!l_index.empty()) {
                auto in = open_in(l_index);
                index = std::make_unique<RxIndex>(RxIndex::load(in));
            } else if (!l_keys.empty()) {
                index = make_index(index_kind_from_string(l_kind), read_keys(l_keys), lo.config());
            } else {
                throw Error(ErrorCode::InvalidArgument, "lookup needs --index or --keys");
            }
            auto in = open_in(l_lookups);
            const WorkloadFile file = read_workload(in);
            BatchOptions options;
            options.threads = l_threads;
            LookupResultSet r;
            if (file.kind == RecordKind::Ranges) {
                r = index->range_lookup_batch(to_ranges(file), options);
            } else if (file.kind == RecordKind::Points) {
                r = index->point_lookup_batch(file.payload, options);
            } else {
                throw Error(ErrorCode::BadFormat, l_lookups + " holds keys, not lookups");
            }
            print_result(std::cout, r);
            print_counters(r.counters());
        } else if (*bench_cmd) {
            std::vector<ExperimentConfig> cells;
            if (!be_sweep.empty()) {
                SweepScale scale;
                scale.keys = bek.spec.count;
                scale.lookups = be_lookup_count != 0 ? be_lookup_count : bel.spec.count;
                scale.seed = bek.spec.seed;
                cells = named_sweep(be_sweep, scale);
            } else {
                ExperimentConfig c;
                c.experiment = be_name;
                c.index = index_kind_from_string(be_index);
                c.rx = beo.config();
                c.keys = bek.resolved();
                c.lookups = bel.resolved();
                if (be_lookup_count != 0) {
                    c.lookups.count = be_lookup_count;
                }
                c.lookups.seed = c.keys.seed + 1;
                c.batches = be_batches;
                c.runs = be_runs;
                c.warmup_sample = be_warmup;
                c.threads = be_threads;
                cells.push_back(c);
            }
            std::ofstream file;
            if (!be_out.empty()) {
                file = open_out(be_out);
            }
            std::ostream& out = be_out.empty() ? std::cout : file;
            write_csv_header(out);
            for (const auto& cell : cells) {
                write_records(out, run_experiment(cell));
            }
        } else if (*fit_cmd) {
            std::vector<CostObservation> obs;
            if (!f_csv.empty()) {
                auto in = open_in(f_csv);
                obs = observations_from_csv(in, f_index, weights);
            } else {
                SweepScale scale;
                scale.keys = f_keys;
                scale.lookups = f_lookups;
                scale.seed = f_seed;
                std::stringstream csv;
                write_csv_header(csv);
                for (const auto& cell : named_sweep("selectivity", scale)) {
                    if (to_string(cell.index) == f_index) {
                        write_records(csv, run_experiment(cell));
                    }
                }
                obs = observations_from_csv(csv, f_index, weights);
            }
            const CostFit fit = fit_cost_model(obs);
            std::printf("observations=%zu A=%.6f B=%.6f residual=%.6f r_squared=%.6f\n", obs.size(), fit.traversal,
                        fit.intersect, fit.residual, fit.r_squared);
        }
    } catch (const Error& e) {
        std::cerr << "rxtool: " << e.what() << '\n';
        return e.code() == ErrorCode::OracleMismatch ? 3 : 1;
    } catch (const std::exception& e) {
        std::cerr << "rxtool: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
