#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ldof/dataset.hpp"

namespace ldof {

enum class Backend { brute_force, kd_tree };

inline std::string_view to_string(Backend b) {
    return b == Backend::brute_force ? "brute_force" : "kd_tree";
}

namespace detail {

// Bounded worst-out selection over (squared distance, id). The candidate
// ordering is lexicographic, which fixes the tie-break: equal distances
// resolve to the smaller id. Both backends funnel through this, so their
// results are identical down to the last bit.
class NearestSet {
public:
    NearestSet(std::size_t capacity) : cap_(capacity) { heap_.reserve(capacity); }

    bool full() const { return heap_.size() == cap_; }

    // Worst accepted squared distance; only meaningful when full().
    double worst_d2() const { return heap_.front().first; }

    void offer(double d2, std::size_t id) {
        const std::pair<double, std::size_t> entry{d2, id};
        if (!full()) {
            heap_.push_back(entry);
            std::push_heap(heap_.begin(), heap_.end());
        } else if (entry < heap_.front()) {
            std::pop_heap(heap_.begin(), heap_.end());
            heap_.back() = entry;
            std::push_heap(heap_.begin(), heap_.end());
        }
    }

    // True when a subtree whose squared distance lower bound is `d2`
    // could still contribute: at equality a smaller id can win.
    bool may_improve(double d2) const { return !full() || d2 <= worst_d2(); }

    std::vector<std::pair<double, std::size_t>> take_sorted() {
        std::sort(heap_.begin(), heap_.end());
        return std::move(heap_);
    }

private:
    std::size_t cap_;
    std::vector<std::pair<double, std::size_t>> heap_;
};

}  // namespace detail

/// k-nearest-neighbor queries over an immutable dataset.
///
/// The kd_tree backend is a median-split tree (widest-spread axis, leaf
/// bucket 16). Above kKdTreeMaxDim dimensions it answers queries by linear
/// scan instead; the results contract is identical either way, only the
/// asymptotics change. Queries are const and safe to run concurrently.
class NeighborIndex {
public:
    static constexpr std::size_t kLeafSize = 16;
    static constexpr std::size_t kKdTreeMaxDim = 16;

    NeighborIndex(const Dataset& dataset, Metric metric, Backend backend)
        : dataset_(&dataset), metric_(metric), backend_(backend) {
        if (dataset.size() < 2)
            throw data_error("build_index: need at least 2 records, got " +
                             std::to_string(dataset.size()));
        if (backend_ == Backend::kd_tree && dataset.dimension() <= kKdTreeMaxDim) {
            order_.resize(dataset.size());
            std::iota(order_.begin(), order_.end(), std::size_t{0});
            nodes_.reserve(2 * dataset.size() / kLeafSize + 2);
            build(0, dataset.size());
        }
    }

    const Dataset& dataset() const { return *dataset_; }
    Metric metric() const { return metric_; }
    Backend backend() const { return backend_; }

    /// The min(k, N-1) nearest records to `query_id`, excluding the query
    /// itself; ascending by (distance, id).
    NeighborSet k_nearest(std::size_t query_id, std::size_t k) const {
        if (query_id >= dataset_->size())
            throw std::invalid_argument("k_nearest: unknown record id " + std::to_string(query_id));
        if (k < 1) throw std::invalid_argument("k_nearest: k must be >= 1");
        const std::size_t m = std::min(k, dataset_->size() - 1);
        detail::NearestSet best(m);
        const std::span<const double> q = dataset_->features(query_id);
        if (nodes_.empty()) {
            for (std::size_t id = 0; id < dataset_->size(); ++id) {
                if (id == query_id) continue;
                best.offer(squared_distance(q, dataset_->features(id)), id);
            }
        } else {
            search(0, q, query_id, best);
        }
        NeighborSet out;
        out.query_id = query_id;
        out.k = k;
        auto sorted = best.take_sorted();
        out.neighbors.reserve(sorted.size());
        for (const auto& [d2, id] : sorted)
            out.neighbors.push_back({id, metric_ == Metric::euclidean ? std::sqrt(d2) : d2});
        return out;
    }

private:
    struct Node {
        // leaf: [begin, end) into order_; internal: axis/split and children.
        std::uint32_t begin = 0, end = 0;
        std::int32_t left = -1, right = -1;
        std::uint32_t axis = 0;
        double split = 0.0;
        bool leaf() const { return left < 0; }
    };

    std::size_t build(std::size_t lo, std::size_t hi) {
        const std::size_t node_id = nodes_.size();
        nodes_.emplace_back();
        if (hi - lo <= kLeafSize) {
            nodes_[node_id].begin = static_cast<std::uint32_t>(lo);
            nodes_[node_id].end = static_cast<std::uint32_t>(hi);
            return node_id;
        }
        const std::size_t d = dataset_->dimension();
        std::vector<double> mn(d, std::numeric_limits<double>::infinity());
        std::vector<double> mx(d, -std::numeric_limits<double>::infinity());
        for (std::size_t i = lo; i < hi; ++i) {
            const auto f = dataset_->features(order_[i]);
            for (std::size_t a = 0; a < d; ++a) {
                mn[a] = std::min(mn[a], f[a]);
                mx[a] = std::max(mx[a], f[a]);
            }
        }
        std::size_t axis = 0;
        for (std::size_t a = 1; a < d; ++a)
            if (mx[a] - mn[a] > mx[axis] - mn[axis]) axis = a;

        const std::size_t mid = (lo + hi) / 2;
        auto key = [&](std::size_t id) {
            return std::pair<double, std::size_t>(dataset_->features(id)[axis], id);
        };
        std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                         [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
        const double split = dataset_->features(order_[mid])[axis];

        const std::size_t left = build(lo, mid);
        const std::size_t right = build(mid, hi);
        Node& n = nodes_[node_id];
        n.axis = static_cast<std::uint32_t>(axis);
        n.split = split;
        n.left = static_cast<std::int32_t>(left);
        n.right = static_cast<std::int32_t>(right);
        return node_id;
    }

    void search(std::size_t node_id, std::span<const double> q, std::size_t query_id,
                detail::NearestSet& best) const {
        const Node& n = nodes_[node_id];
        if (n.leaf()) {
            for (std::size_t i = n.begin; i < n.end; ++i) {
                const std::size_t id = order_[i];
                if (id == query_id) continue;
                best.offer(squared_distance(q, dataset_->features(id)), id);
            }
            return;
        }
        const double delta = q[n.axis] - n.split;
        const std::size_t near = delta <= 0.0 ? n.left : n.right;
        const std::size_t far = delta <= 0.0 ? n.right : n.left;
        search(near, q, query_id, best);
        if (best.may_improve(delta * delta)) search(far, q, query_id, best);
    }

    const Dataset* dataset_;
    Metric metric_;
    Backend backend_;
    std::vector<std::size_t> order_;  // permutation; leaves own slices of it
    std::vector<Node> nodes_;         // empty => linear scan
};

inline NeighborIndex build_index(const Dataset& dataset, Metric metric, Backend backend) {
    return NeighborIndex(dataset, metric, backend);
}

}  // namespace ldof
