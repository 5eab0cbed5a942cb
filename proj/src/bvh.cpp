// SPDX-License-Identifier: Apache-2.0

#include "rx/bvh.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <numeric>

namespace rx {

namespace {

class Builder {
public:
    Builder(std::span<const Aabb> bounds, std::vector<Vertex3>& centroids, std::vector<BvhNode>& nodes,
            std::vector<std::uint32_t>& order, std::uint32_t max_leaf)
        : bounds_(bounds), centroids_(centroids), nodes_(nodes), order_(order), max_leaf_(max_leaf) {}

    void run() {
        nodes_.push_back({});
        build(0, 0, static_cast<std::uint32_t>(order_.size()));
    }

private:
    void build(std::uint32_t index, std::uint32_t begin, std::uint32_t end) {
        Aabb box = Aabb::empty();
        Aabb centroid_box = Aabb::empty();
        for (std::uint32_t i = begin; i < end; ++i) {
            box.extend(bounds_[order_[i]]);
            centroid_box.extend(centroids_[order_[i]]);
        }
        nodes_[index].bounds = box;
        if (end - begin <= max_leaf_) {
            nodes_[index].first = begin;
            nodes_[index].count = end - begin;
            return;
        }
        const int axis = centroid_box.largest_axis();
        const std::uint32_t mid = begin + (end - begin) / 2;
        // Ties are broken by primitive index so the split is unique.
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::uint32_t a, std::uint32_t b) {
                             const float ca = centroids_[a][axis];
                             const float cb = centroids_[b][axis];
                             return ca < cb || (ca == cb && a < b);
                         });
        const auto left = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back({});
        nodes_.push_back({});
        nodes_[index].first = left;
        nodes_[index].count = 0;
        build(left, begin, mid);
        build(left + 1, mid, end);
    }

    std::span<const Aabb> bounds_;
    std::vector<Vertex3>& centroids_;
    std::vector<BvhNode>& nodes_;
    std::vector<std::uint32_t>& order_;
    std::uint32_t max_leaf_;
};

void relayout(std::span<const BvhNode> from, std::uint32_t old_index, std::vector<BvhNode>& to,
              std::uint32_t new_index) {
    to[new_index] = from[old_index];
    if (from[old_index].is_leaf()) {
        return;
    }
    const auto pair = static_cast<std::uint32_t>(to.size());
    to.resize(to.size() + 2);
    to[new_index].first = pair;
    relayout(from, from[old_index].first, to, pair);
    relayout(from, from[old_index].first + 1, to, pair + 1);
}

} // namespace

Bvh Bvh::build(std::span<const Aabb> bounds, BvhBuildConfig config) {
    if (bounds.empty()) {
        throw Error(ErrorCode::EmptyInput, "cannot build a hierarchy over zero primitives");
    }
    if (bounds.size() >= kMissRowId) {
        throw Error(ErrorCode::InvalidArgument, "too many primitives");
    }
    if (config.max_leaf_size == 0) {
        throw Error(ErrorCode::InvalidArgument, "max_leaf_size must be positive");
    }
    Bvh bvh;
    bvh.max_leaf_size_ = config.max_leaf_size;
    bvh.refittable_ = config.refittable;
    bvh.primitive_order_.resize(bounds.size());
    std::iota(bvh.primitive_order_.begin(), bvh.primitive_order_.end(), 0u);
    bvh.centroids_.reserve(bounds.size());
    for (const Aabb& b : bounds) {
        bvh.centroids_.push_back(b.centroid());
    }
    // Worst case for a binary tree with single-primitive leaves.
    bvh.nodes_.reserve(2 * bounds.size() - 1);
    Builder(bounds, bvh.centroids_, bvh.nodes_, bvh.primitive_order_, config.max_leaf_size).run();
    return bvh;
}

Bvh Bvh::compact() const {
    if (refittable_) {
        throw Error(ErrorCode::RefittableNotCompactable, "hierarchy was built with the update flag");
    }
    Bvh out;
    out.max_leaf_size_ = max_leaf_size_;
    out.compacted_ = true;
    std::vector<BvhNode> nodes(1);
    nodes.reserve(nodes_.size());
    relayout(nodes_, 0, nodes, 0);
    out.nodes_ = std::move(nodes);
    out.primitive_order_.assign(primitive_order_.begin(), primitive_order_.end());
    return out;
}

void Bvh::refit(std::span<const Aabb> new_bounds) {
    if (!refittable_) {
        throw Error(ErrorCode::NotRefittable, "hierarchy was built without the update flag");
    }
    if (new_bounds.size() != primitive_order_.size()) {
        throw Error(ErrorCode::CountMismatch, "refit needs exactly one bound per original primitive");
    }
    // Children are always stored after their parent.
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        BvhNode& node = nodes_[i];
        Aabb box = Aabb::empty();
        if (node.is_leaf()) {
            for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
                box.extend(new_bounds[primitive_order_[k]]);
            }
        } else {
            box = nodes_[node.first].bounds;
            box.extend(nodes_[node.first + 1].bounds);
        }
        node.bounds = box;
    }
}

std::size_t Bvh::footprint_bytes() const {
    return sizeof(Bvh) + nodes_.capacity() * sizeof(BvhNode) + primitive_order_.capacity() * sizeof(std::uint32_t) +
           centroids_.capacity() * sizeof(Vertex3);
}

bool Bvh::validate(std::span<const Aabb> primitive_bounds) const {
    if (primitive_bounds.size() != primitive_order_.size() || nodes_.empty()) {
        return false;
    }
    std::vector<bool> seen(primitive_order_.size(), false);
    for (std::uint32_t p : primitive_order_) {
        if (p >= seen.size() || seen[p]) {
            return false;
        }
        seen[p] = true;
    }
    std::vector<std::uint32_t> referenced(primitive_order_.size(), 0);
    std::vector<std::uint32_t> stack{0};
    std::size_t reached = 0;
    while (!stack.empty()) {
        const std::uint32_t index = stack.back();
        stack.pop_back();
        if (index >= nodes_.size() || ++reached > nodes_.size()) {
            return false;
        }
        const BvhNode& node = nodes_[index];
        if (node.is_leaf()) {
            if (node.count > max_leaf_size_ || node.first + node.count > primitive_order_.size()) {
                return false;
            }
            for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
                ++referenced[k];
                if (!node.bounds.contains(primitive_bounds[primitive_order_[k]])) {
                    return false;
                }
            }
            continue;
        }
        if (node.first <= index || node.first + 1 >= nodes_.size()) {
            return false;
        }
        if (!node.bounds.contains(nodes_[node.first].bounds) || !node.bounds.contains(nodes_[node.first + 1].bounds)) {
            return false;
        }
        stack.push_back(node.first);
        stack.push_back(node.first + 1);
    }
    return std::all_of(referenced.begin(), referenced.end(), [](std::uint32_t n) { return n == 1; });
}

void Bvh::serialize(std::ostream& out) const {
    using detail::write_le;
    write_le<std::uint32_t>(out, kBlobVersion);
    write_le<std::uint8_t>(out, static_cast<std::uint8_t>((refittable_ ? 1u : 0u) | (compacted_ ? 2u : 0u)));
    write_le<std::uint32_t>(out, max_leaf_size_);
    write_le<std::uint64_t>(out, nodes_.size());
    for (const BvhNode& n : nodes_) {
        for (int k = 0; k < 3; ++k) {
            write_le<float>(out, n.bounds.min[k]);
        }
        for (int k = 0; k < 3; ++k) {
            write_le<float>(out, n.bounds.max[k]);
        }
        write_le<std::uint32_t>(out, n.first);
        write_le<std::uint32_t>(out, n.count);
    }
    write_le<std::uint64_t>(out, primitive_order_.size());
    for (std::uint32_t p : primitive_order_) {
        write_le<std::uint32_t>(out, p);
    }
}

std::optional<Bvh> Bvh::deserialize(std::istream& in) {
    using detail::read_le;
    if (read_le<std::uint32_t>(in) != kBlobVersion) {
        return std::nullopt;
    }
    Bvh bvh;
    const auto flags = read_le<std::uint8_t>(in);
    bvh.refittable_ = (flags & 1u) != 0;
    bvh.compacted_ = (flags & 2u) != 0;
    bvh.max_leaf_size_ = read_le<std::uint32_t>(in);
    const auto node_count = read_le<std::uint64_t>(in);
    if (node_count == 0 || node_count > (std::uint64_t{1} << 33)) {
        throw Error(ErrorCode::BadFormat, "implausible node count");
    }
    bvh.nodes_.resize(node_count);
    for (BvhNode& n : bvh.nodes_) {
        for (int k = 0; k < 3; ++k) {
            n.bounds.min[k] = read_le<float>(in);
        }
        for (int k = 0; k < 3; ++k) {
            n.bounds.max[k] = read_le<float>(in);
        }
        n.first = read_le<std::uint32_t>(in);
        n.count = read_le<std::uint32_t>(in);
    }
    const auto prim_count = read_le<std::uint64_t>(in);
    if (prim_count == 0 || prim_count >= kMissRowId) {
        throw Error(ErrorCode::BadFormat, "implausible primitive count");
    }
    bvh.primitive_order_.resize(prim_count);
    for (std::uint32_t& p : bvh.primitive_order_) {
        p = read_le<std::uint32_t>(in);
    }
    return bvh;
}

} // namespace rx
