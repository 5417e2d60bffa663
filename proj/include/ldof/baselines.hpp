#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "ldof/dataset.hpp"
#include "ldof/knn.hpp"
#include "ldof/ldof.hpp"
#include "ldof/parallel.hpp"

namespace ldof {

/// Distance to the k-th nearest neighbor. Requires k <= N-1.
inline double k_distance(const NeighborIndex& index, std::size_t record_id, std::size_t k) {
    if (k + 1 > index.dataset().size())
        throw data_error("k_distance: k = " + std::to_string(k) + " exceeds N-1 = " +
                         std::to_string(index.dataset().size() - 1));
    return index.k_nearest(record_id, k).neighbors.back().distance;
}

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Standard LOF over materialized neighbor lists (each list sorted
// ascending, at least one entry, list i belonging to record i):
//   reach_dist(p,o) = max(k_distance(o), dist(p,o))
//   lrd(p)          = 1 / mean reach_dist(p, o in N(p)),  +inf if the mean is 0
//   LOF(p)          = mean of lrd(o)/lrd(p)
// Duplicate clusters make lrd infinite; inf/inf counts as 1 and
// finite/inf as 0, so an all-duplicate neighborhood scores exactly 1.
inline std::vector<double> lof_from_neighbor_lists(
    const std::vector<std::span<const Neighbor>>& lists, unsigned threads = 0) {
    const std::size_t n = lists.size();
    std::vector<double> kdist(n), lrd(n), lof(n);
    for (std::size_t i = 0; i < n; ++i) kdist[i] = lists[i].back().distance;
    parallel_for(n, threads, [&](std::size_t i) {
        double sum = 0.0;
        for (const Neighbor& nb : lists[i]) sum += std::max(kdist[nb.id], nb.distance);
        const double mean = sum / static_cast<double>(lists[i].size());
        lrd[i] = mean == 0.0 ? kInf : 1.0 / mean;
    });
    parallel_for(n, threads, [&](std::size_t i) {
        double sum = 0.0;
        if (lrd[i] == kInf) {
            for (const Neighbor& nb : lists[i]) sum += lrd[nb.id] == kInf ? 1.0 : 0.0;
        } else {
            for (const Neighbor& nb : lists[i]) sum += lrd[nb.id] / lrd[i];
        }
        lof[i] = sum / static_cast<double>(lists[i].size());
    });
    return lof;
}

inline void check_min_pts(const NeighborIndex& index, std::size_t min_pts, const char* who) {
    if (min_pts < 1) throw std::invalid_argument(std::string(who) + ": min_pts must be >= 1");
    if (index.dataset().size() <= min_pts)
        throw data_error(std::string(who) + ": dataset has " +
                         std::to_string(index.dataset().size()) + " records but min_pts = " +
                         std::to_string(min_pts) + " requires N >= min_pts+1; choose a smaller value");
}

inline std::vector<NeighborSet> all_neighbor_sets(const NeighborIndex& index, std::size_t k,
                                                  unsigned threads) {
    std::vector<NeighborSet> sets(index.dataset().size());
    parallel_for(sets.size(), threads, [&](std::size_t id) { sets[id] = index.k_nearest(id, k); });
    return sets;
}

}  // namespace detail

/// LOF of every record, exactly min_pts neighbors per record (ties broken
/// as in k_nearest). Ordered by record id.
inline std::vector<double> lof_scores(const NeighborIndex& index, std::size_t min_pts,
                                      unsigned threads = 0) {
    detail::check_min_pts(index, min_pts, "lof");
    const auto sets = detail::all_neighbor_sets(index, min_pts, threads);
    std::vector<std::span<const Neighbor>> lists(sets.size());
    for (std::size_t i = 0; i < sets.size(); ++i) lists[i] = sets[i].neighbors;
    return detail::lof_from_neighbor_lists(lists, threads);
}

/// LOF of a single record.
inline double lof_score(const NeighborIndex& index, std::size_t record_id, std::size_t min_pts) {
    detail::check_min_pts(index, min_pts, "lof_score");
    if (record_id >= index.dataset().size())
        throw std::invalid_argument("lof_score: unknown record id " + std::to_string(record_id));

    // Two-hop neighborhood only; memoize sets so the closure stays small.
    std::unordered_map<std::size_t, NeighborSet> sets;
    auto set_of = [&](std::size_t id) -> const NeighborSet& {
        auto it = sets.find(id);
        if (it == sets.end()) it = sets.emplace(id, index.k_nearest(id, min_pts)).first;
        return it->second;
    };
    auto lrd_of = [&](std::size_t id) {
        const NeighborSet& ns = set_of(id);
        double sum = 0.0;
        for (const Neighbor& nb : ns.neighbors)
            sum += std::max(set_of(nb.id).neighbors.back().distance, nb.distance);
        const double mean = sum / static_cast<double>(ns.size());
        return mean == 0.0 ? detail::kInf : 1.0 / mean;
    };

    const NeighborSet& ns = set_of(record_id);
    const double own = lrd_of(record_id);
    double sum = 0.0;
    for (const Neighbor& nb : ns.neighbors) {
        const double other = lrd_of(nb.id);
        if (own == detail::kInf)
            sum += other == detail::kInf ? 1.0 : 0.0;
        else
            sum += other / own;
    }
    return sum / static_cast<double>(ns.size());
}

/// Top-n by k-distance. No pruning; d-bar/D-bar fields stay NaN.
inline Ranking top_n_knn(const NeighborIndex& index, std::size_t n, std::size_t k,
                         unsigned threads = 0) {
    if (k + 1 > index.dataset().size())
        throw data_error("top_n_knn: k = " + std::to_string(k) + " exceeds N-1 = " +
                         std::to_string(index.dataset().size() - 1) + "; choose a smaller k");
    const auto sets = detail::all_neighbor_sets(index, k, threads);
    std::vector<OutlierScore> scores(sets.size());
    for (std::size_t id = 0; id < sets.size(); ++id) {
        scores[id].id = id;
        scores[id].score = sets[id].neighbors.back().distance;
    }
    return detail::make_ranking(Method::knn, n, std::move(scores), false);
}

inline Ranking top_n_knn(const Dataset& dataset, std::size_t n, std::size_t k,
                         Metric metric = Metric::euclidean, Backend backend = Backend::kd_tree,
                         unsigned threads = 0) {
    const NeighborIndex index(dataset, metric, backend);
    return top_n_knn(index, n, k, threads);
}

/// Top-n by LOF with MinPts = min_pts. No pruning.
inline Ranking top_n_lof(const NeighborIndex& index, std::size_t n, std::size_t min_pts,
                         unsigned threads = 0) {
    const std::vector<double> lof = lof_scores(index, min_pts, threads);
    std::vector<OutlierScore> scores(lof.size());
    for (std::size_t id = 0; id < lof.size(); ++id) {
        scores[id].id = id;
        scores[id].score = lof[id];
    }
    return detail::make_ranking(Method::lof, n, std::move(scores), false);
}

inline Ranking top_n_lof(const Dataset& dataset, std::size_t n, std::size_t min_pts,
                         Metric metric = Metric::euclidean, Backend backend = Backend::kd_tree,
                         unsigned threads = 0) {
    const NeighborIndex index(dataset, metric, backend);
    return top_n_lof(index, n, min_pts, threads);
}

}  // namespace ldof
