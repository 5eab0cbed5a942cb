// SPDX-License-Identifier: Apache-2.0

#include "rx/baselines.hpp"

#include <algorithm>
#include <numeric>

namespace rx {

BPlusTreeIndex BPlusTreeIndex::build(std::span<const Key> keys, std::uint32_t fanout) {
    if (fanout < 2) {
        throw Error(ErrorCode::InvalidArgument, "fanout must be at least 2");
    }
    if (keys.size() >= kMissRowId) {
        throw Error(ErrorCode::InvalidArgument, "key column too large for 32-bit row ids");
    }
    std::vector<RowId> order(keys.size());
    std::iota(order.begin(), order.end(), RowId{0});
    std::stable_sort(order.begin(), order.end(), [&](RowId a, RowId b) { return keys[a] < keys[b]; });

    BPlusTreeIndex tree;
    tree.fanout_ = fanout;
    tree.count_ = keys.size();
    for (std::size_t i = 0; i < order.size(); i += fanout) {
        Leaf leaf;
        const std::size_t end = std::min(order.size(), i + fanout);
        for (std::size_t j = i; j < end; ++j) {
            leaf.keys.push_back(keys[order[j]]);
            leaf.rows.push_back(order[j]);
        }
        tree.leaves_.push_back(std::move(leaf));
    }
    if (tree.leaves_.empty()) {
        tree.leaves_.emplace_back();
    }
    for (std::size_t i = 0; i + 1 < tree.leaves_.size(); ++i) {
        tree.leaves_[i].next = static_cast<std::uint32_t>(i + 1);
    }

    // Minimum key of every node on the level being grouped.
    std::vector<Key> mins;
    for (const Leaf& leaf : tree.leaves_) {
        mins.push_back(leaf.keys.empty() ? 0 : leaf.keys.front());
    }
    while (mins.size() > 1) {
        std::vector<Inner> level;
        std::vector<Key> next_mins;
        for (std::size_t i = 0; i < mins.size(); i += fanout) {
            Inner node;
            const std::size_t end = std::min(mins.size(), i + fanout);
            for (std::size_t j = i; j < end; ++j) {
                node.children.push_back(static_cast<std::uint32_t>(j));
                if (j > i) {
                    node.separators.push_back(mins[j]);
                }
            }
            next_mins.push_back(mins[i]);
            level.push_back(std::move(node));
        }
        tree.levels_.push_back(std::move(level));
        mins = std::move(next_mins);
    }
    tree.height_ = static_cast<std::uint32_t>(tree.levels_.size() + 1);
    return tree;
}

std::size_t BPlusTreeIndex::footprint_bytes() const {
    std::size_t bytes = sizeof(*this) + leaves_.capacity() * sizeof(Leaf);
    for (const Leaf& leaf : leaves_) {
        bytes += leaf.keys.capacity() * sizeof(Key) + leaf.rows.capacity() * sizeof(RowId);
    }
    for (const auto& level : levels_) {
        bytes += level.capacity() * sizeof(Inner);
        for (const Inner& node : level) {
            bytes += node.separators.capacity() * sizeof(Key) + node.children.capacity() * sizeof(std::uint32_t);
        }
    }
    return bytes;
}

std::uint32_t BPlusTreeIndex::find_leaf(Key k, WorkCounters& counters) const {
    std::uint32_t index = 0;
    for (std::size_t level = levels_.size(); level-- > 0;) {
        const Inner& node = levels_[level][index];
        // Duplicates of k may end the left neighbour of a child whose minimum
        // is k, so descend into the last child whose separator is below k.
        std::size_t child = 0;
        for (Key sep : node.separators) {
            ++counters.comparisons;
            if (sep >= k) {
                break;
            }
            ++child;
        }
        index = node.children[child];
    }
    return index;
}

void BPlusTreeIndex::scan(Key lower, Key upper, std::vector<RowId>& out, WorkCounters& counters) const {
    std::uint32_t leaf = find_leaf(lower, counters);
    bool started = false;
    while (leaf != kNoLeaf) {
        const Leaf& node = leaves_[leaf];
        std::size_t i = 0;
        if (!started) {
            while (i < node.keys.size()) {
                ++counters.comparisons;
                if (node.keys[i] >= lower) {
                    break;
                }
                ++i;
            }
            started = i < node.keys.size();
        }
        for (; i < node.keys.size(); ++i) {
            ++counters.comparisons;
            if (node.keys[i] > upper) {
                return;
            }
            out.push_back(node.rows[i]);
            ++counters.hits_reported;
        }
        leaf = node.next;
    }
}

LookupResultSet BPlusTreeIndex::point_lookup_batch(std::span<const Key> keys, const BatchOptions& options) const {
    check_values(options, count_);
    return BatchRunner::run(keys.size(), options, [&](std::size_t i, std::vector<RowId>& out, WorkCounters& c) {
        scan(keys[i], keys[i], out, c);
    });
}

LookupResultSet BPlusTreeIndex::range_lookup_batch(std::span<const RangeLookup> ranges,
                                                   const BatchOptions& options) const {
    check_values(options, count_);
    return BatchRunner::run(ranges.size(), options, [&](std::size_t i, std::vector<RowId>& out, WorkCounters& c) {
        if (ranges[i].lower <= ranges[i].upper) {
            scan(ranges[i].lower, ranges[i].upper, out, c);
        }
    });
}

bool BPlusTreeIndex::validate() const {
    // Leaves linked in order with globally ascending keys.
    std::size_t seen = 0;
    Key previous = 0;
    bool first = true;
    std::uint32_t leaf = 0;
    std::size_t visited = 0;
    while (leaf != kNoLeaf) {
        if (leaf >= leaves_.size() || ++visited > leaves_.size()) {
            return false;
        }
        const Leaf& node = leaves_[leaf];
        if (node.keys.size() != node.rows.size() || node.keys.size() > fanout_) {
            return false;
        }
        for (Key k : node.keys) {
            if (!first && k < previous) {
                return false;
            }
            previous = k;
            first = false;
        }
        seen += node.keys.size();
        leaf = node.next;
    }
    if (seen != count_ || visited != leaves_.size()) {
        return false;
    }
    // Every level partitions the one below it, so all leaves share one depth.
    std::size_t below = leaves_.size();
    for (const auto& level : levels_) {
        std::size_t children = 0;
        for (const Inner& node : level) {
            if (node.children.empty() || node.separators.size() + 1 != node.children.size() ||
                !std::is_sorted(node.separators.begin(), node.separators.end())) {
                return false;
            }
            for (std::uint32_t c : node.children) {
                if (c != children++) {
                    return false;
                }
            }
        }
        if (children != below) {
            return false;
        }
        below = level.size();
    }
    return below == 1;
}

} // namespace rx
