#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "ldof/dataset.hpp"
#include "ldof/knn.hpp"
#include "ldof/parallel.hpp"

namespace ldof {

/// The asymptotic LDOF of an interior point of a locally uniform cloud;
/// scores below it mark definite non-outliers and are pruned from top-n
/// rankings.
inline constexpr double kLdofLowerBound = 0.5;

/// Mean distance from the query record to its neighbors.
/// Throws std::invalid_argument on an empty neighbor set.
inline double knn_distance(const Dataset& dataset, const NeighborSet& neighbors, Metric metric) {
    if (neighbors.size() == 0)
        throw std::invalid_argument("knn_distance: empty neighbor set");
    const auto q = dataset.features(neighbors.query_id);
    double sum = 0.0;
    for (const Neighbor& nb : neighbors.neighbors)
        sum += distance(metric, dataset.features(nb.id), q);
    return sum / static_cast<double>(neighbors.size());
}

/// Mean distance among the neighbors themselves: the sum over ordered
/// pairs divided by m(m-1). Throws std::invalid_argument when fewer than
/// two neighbors exist (the mean is undefined).
///
/// The unordered pairs are accumulated with the larger index outermost,
/// so the partial sum over the first j neighbors is a prefix of the full
/// sum; the sweep machinery in eval relies on reproducing this order.
inline double knn_inner_distance(const Dataset& dataset, const NeighborSet& neighbors, Metric metric) {
    const std::size_t m = neighbors.size();
    if (m < 2)
        throw std::invalid_argument("knn_inner_distance: need at least 2 neighbors, got " +
                                    std::to_string(m));
    double sum = 0.0;
    for (std::size_t j = 1; j < m; ++j) {
        const auto fj = dataset.features(neighbors.neighbors[j].id);
        for (std::size_t i = 0; i < j; ++i)
            sum += distance(metric, dataset.features(neighbors.neighbors[i].id), fj);
    }
    return 2.0 * sum / (static_cast<double>(m) * static_cast<double>(m - 1));
}

namespace detail {

// d-bar / D-bar with the degenerate cases pinned: a coincident neighbor
// cloud distinct from the query is maximally outlying (+inf), a query
// coinciding with its coincident neighbors is an inlier (0).
inline double ldof_ratio(double knn_dist, double knn_inner_dist) {
    if (knn_inner_dist > 0.0) return knn_dist / knn_inner_dist;
    if (knn_dist > 0.0) return std::numeric_limits<double>::infinity();
    return 0.0;
}

}  // namespace detail

/// LDOF of one record given a prebuilt index. Requires k >= 2 so the
/// inner distance exists.
inline OutlierScore ldof_score(const NeighborIndex& index, std::size_t record_id, std::size_t k) {
    if (k < 2) throw std::invalid_argument("ldof_score: k must be >= 2");
    const NeighborSet neighbors = index.k_nearest(record_id, k);
    OutlierScore s;
    s.id = record_id;
    s.knn_dist = knn_distance(index.dataset(), neighbors, index.metric());
    s.knn_inner_dist = knn_inner_distance(index.dataset(), neighbors, index.metric());
    s.score = detail::ldof_ratio(s.knn_dist, s.knn_inner_dist);
    s.pruned = s.score < kLdofLowerBound;
    return s;
}

/// LDOF for every record; entries ordered by record id.
inline std::vector<OutlierScore> ldof_scores(const NeighborIndex& index, std::size_t k,
                                             unsigned threads = 0) {
    const std::size_t n_records = index.dataset().size();
    if (n_records <= k)
        throw data_error("ldof: dataset has " + std::to_string(n_records) +
                         " records but k = " + std::to_string(k) +
                         " requires N >= k+1; choose a smaller k");
    std::vector<OutlierScore> scores(n_records);
    parallel_for(n_records, threads, [&](std::size_t id) { scores[id] = ldof_score(index, id, k); });
    return scores;
}

namespace detail {

// Shared by all three methods: sort survivors descending and keep the
// first n. Scores marked pruned are dropped before the sort.
inline Ranking make_ranking(Method method, std::size_t n, std::vector<OutlierScore> scores,
                            bool prune) {
    if (n < 1) throw std::invalid_argument("top-n ranking: n must be >= 1");
    std::vector<OutlierScore> survivors;
    survivors.reserve(scores.size());
    for (const OutlierScore& s : scores)
        if (!prune || !s.pruned) survivors.push_back(s);
    std::sort(survivors.begin(), survivors.end(), score_before);
    if (survivors.size() > n) survivors.resize(n);
    return Ranking{method, n, std::move(survivors)};
}

}  // namespace detail

/// Top-n LDOF over a prebuilt index. Records with LDOF < 1/2 are discarded
/// before ranking; the result may therefore be shorter than n. Passing
/// prune = false keeps them, as a reference for pruning-soundness checks.
inline Ranking top_n_ldof(const NeighborIndex& index, std::size_t n, std::size_t k,
                          unsigned threads = 0, bool prune = true) {
    return detail::make_ranking(Method::ldof, n, ldof_scores(index, k, threads), prune);
}

/// Convenience overload that builds the index.
inline Ranking top_n_ldof(const Dataset& dataset, std::size_t n, std::size_t k,
                          Metric metric = Metric::euclidean, Backend backend = Backend::kd_tree,
                          unsigned threads = 0) {
    if (k < 2) throw std::invalid_argument("top_n_ldof: k must be >= 2");
    const NeighborIndex index(dataset, metric, backend);
    return top_n_ldof(index, n, k, threads);
}

}  // namespace ldof
