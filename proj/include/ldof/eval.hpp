#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ldof/baselines.hpp"
#include "ldof/dataset.hpp"
#include "ldof/datagen.hpp"
#include "ldof/knn.hpp"
#include "ldof/ldof.hpp"
#include "ldof/parallel.hpp"
#include "ldof/rng.hpp"
#include "ldof/theory.hpp"

namespace ldof::eval {

/// Fraction of true outliers among the requested top-n slots. A ranking
/// shorter than n (pruning) counts the missing slots as misses.
inline double precision(const Ranking& ranking, const std::unordered_set<std::size_t>& truth) {
    if (ranking.n < 1) throw std::invalid_argument("precision: n must be >= 1");
    if (truth.empty()) throw data_error("precision: empty truth set, metric undefined");
    std::size_t hits = 0;
    for (const OutlierScore& s : ranking.entries) hits += truth.count(s.id);
    return static_cast<double>(hits) / static_cast<double>(ranking.n);
}

struct TrialSpec {
    std::vector<Method> methods{Method::ldof, Method::knn, Method::lof};
    std::size_t k_min = 2;
    std::size_t k_max = 50;
    std::size_t n = 0;
    std::size_t runs = 1;
    std::uint64_t seed = 0;
    std::size_t outlier_count = 0;  // used by the resampling protocols only
};

struct SweepCell {
    Method method;
    std::size_t k;
    std::size_t run;
    std::uint64_t seed;
    double precision;
};

struct SweepAggregate {
    Method method;
    std::size_t k;
    double mean;
    double stddev;  // population form (divide by run count)
    std::size_t runs;
};

struct SweepReport {
    std::string dataset_id;
    std::size_t n = 0;
    std::uint64_t base_seed = 0;
    std::vector<SweepCell> cells;
    std::vector<SweepAggregate> aggregates;
    std::vector<std::string> issues;  // cells that could not be computed, with reasons
};

namespace detail {

inline std::uint64_t method_tag(Method m) { return static_cast<std::uint64_t>(m) + 1; }

// Scores of every method at every k in [k_min, k_max], from one pass over
// neighbor lists of length k_max. Prefix identities keep the arithmetic
// bit-identical to the one-shot top_n_* paths: a length-k neighbor list is
// a prefix of the length-k_max list, d-bar partial sums extend by one term,
// and the pair sum extends by the (larger-index outermost) column order
// that knn_inner_distance uses.
class SweepScores {
public:
    SweepScores(const NeighborIndex& index, std::size_t k_min, std::size_t k_max, unsigned threads)
        : index_(index), k_min_(k_min), k_max_(k_max), threads_(threads),
          sets_(ldof::detail::all_neighbor_sets(index, k_max, threads)) {}

    std::vector<OutlierScore> ldof_at(std::size_t k) const {
        ensure_ldof();
        return ldof_by_k_.at(k);
    }

    std::vector<OutlierScore> knn_at(std::size_t k) const {
        std::vector<OutlierScore> out(sets_.size());
        for (std::size_t id = 0; id < sets_.size(); ++id) {
            out[id].id = id;
            out[id].score = sets_[id].neighbors[k - 1].distance;
        }
        return out;
    }

    std::vector<OutlierScore> lof_at(std::size_t k) const {
        std::vector<std::span<const Neighbor>> lists(sets_.size());
        for (std::size_t i = 0; i < sets_.size(); ++i)
            lists[i] = std::span<const Neighbor>(sets_[i].neighbors.data(), k);
        const std::vector<double> lof = ldof::detail::lof_from_neighbor_lists(lists, threads_);
        std::vector<OutlierScore> out(sets_.size());
        for (std::size_t id = 0; id < sets_.size(); ++id) {
            out[id].id = id;
            out[id].score = lof[id];
        }
        return out;
    }

    std::vector<OutlierScore> at(Method m, std::size_t k) const {
        switch (m) {
            case Method::ldof: return ldof_at(k);
            case Method::knn: return knn_at(k);
            default: return lof_at(k);
        }
    }

private:
    void ensure_ldof() const {
        if (!ldof_by_k_.empty()) return;
        const Dataset& ds = index_.dataset();
        const std::size_t n_records = ds.size();
        // Pre-size every row so the map structure stays frozen while the
        // parallel loop writes disjoint slots.
        for (std::size_t k = k_min_; k <= k_max_; ++k)
            ldof_by_k_[k].resize(n_records);
        parallel_for(n_records, threads_, [&](std::size_t id) {
            const auto& nbrs = sets_[id].neighbors;
            const auto q = ds.features(id);
            double dist_sum = 0.0;
            double pair_sum = 0.0;
            for (std::size_t j = 0; j < k_max_; ++j) {
                const auto fj = ds.features(nbrs[j].id);
                dist_sum += distance(index_.metric(), fj, q);
                for (std::size_t i = 0; i < j; ++i)
                    pair_sum += distance(index_.metric(), ds.features(nbrs[i].id), fj);
                const std::size_t m = j + 1;
                if (m < k_min_ || m < 2) continue;
                OutlierScore s;
                s.id = id;
                s.knn_dist = dist_sum / static_cast<double>(m);
                s.knn_inner_dist =
                    2.0 * pair_sum / (static_cast<double>(m) * static_cast<double>(m - 1));
                s.score = ldof::detail::ldof_ratio(s.knn_dist, s.knn_inner_dist);
                s.pruned = s.score < kLdofLowerBound;
                ldof_by_k_.at(m)[id] = s;
            }
        });
    }

    const NeighborIndex& index_;
    std::size_t k_min_, k_max_;
    unsigned threads_;
    std::vector<NeighborSet> sets_;
    mutable std::map<std::size_t, std::vector<OutlierScore>> ldof_by_k_;
};

inline void validate_k_range(const TrialSpec& trial, std::size_t n_records) {
    if (trial.k_min < 2 || trial.k_min > trial.k_max)
        throw data_error("sweep: k range [" + std::to_string(trial.k_min) + ", " +
                         std::to_string(trial.k_max) + "] is empty or starts below 2");
    if (trial.k_max + 1 > n_records)
        throw data_error("sweep: k_max = " + std::to_string(trial.k_max) +
                         " exceeds N-1 = " + std::to_string(n_records - 1) +
                         "; choose a smaller k range");
    if (trial.n < 1) throw data_error("sweep: n must be >= 1");
    if (trial.runs < 1) throw data_error("sweep: runs must be >= 1");
}

// One dataset, all (method, k) cells for one run index.
inline void sweep_into(SweepReport& report, const Dataset& ds,
                       const std::unordered_set<std::size_t>& truth, const TrialSpec& trial,
                       std::size_t run, Metric metric, Backend backend, unsigned threads) {
    const NeighborIndex index(ds, metric, backend);
    const SweepScores scores(index, trial.k_min, trial.k_max, threads);
    for (Method m : trial.methods) {
        for (std::size_t k = trial.k_min; k <= trial.k_max; ++k) {
            const std::uint64_t cell_seed = derive_seed(trial.seed, {method_tag(m), k, run});
            try {
                const bool prune = m == Method::ldof;
                Ranking r = ldof::detail::make_ranking(m, trial.n, scores.at(m, k), prune);
                report.cells.push_back({m, k, run, cell_seed, precision(r, truth)});
            } catch (const std::exception& e) {
                report.issues.push_back("method=" + std::string(to_string(m)) +
                                        " k=" + std::to_string(k) + " run=" + std::to_string(run) +
                                        ": " + e.what());
            }
        }
    }
}

inline void aggregate(SweepReport& report) {
    std::map<std::pair<int, std::size_t>, std::vector<double>> groups;
    for (const SweepCell& c : report.cells)
        groups[{static_cast<int>(c.method), c.k}].push_back(c.precision);
    report.aggregates.clear();
    for (const auto& [key, values] : groups) {
        const double mean =
            std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(values.size());
        report.aggregates.push_back({static_cast<Method>(key.first), key.second, mean,
                                     std::sqrt(var), values.size()});
    }
}

}  // namespace detail

/// Precision of each method at each k on a fixed dataset with known truth.
/// The methods are deterministic, so all runs of a cell coincide; scores
/// are computed once per (method, k) and the per-run cells replicated.
inline SweepReport sweep_k(const Dataset& dataset, const std::unordered_set<std::size_t>& truth,
                           const TrialSpec& trial, Metric metric = Metric::euclidean,
                           Backend backend = Backend::kd_tree, unsigned threads = 0,
                           std::string dataset_id = {}) {
    detail::validate_k_range(trial, dataset.size());
    SweepReport report;
    report.dataset_id = std::move(dataset_id);
    report.n = trial.n;
    report.base_seed = trial.seed;
    SweepReport one;
    detail::sweep_into(one, dataset, truth, trial, 0, metric, backend, threads);
    report.issues = one.issues;
    for (std::size_t run = 0; run < trial.runs; ++run)
        for (SweepCell c : one.cells) {
            c.run = run;
            c.seed = derive_seed(trial.seed, {detail::method_tag(c.method), c.k, run});
            report.cells.push_back(c);
        }
    detail::aggregate(report);
    return report;
}

enum class MixMode { first, random };

struct MixResult {
    Dataset data;
    std::unordered_set<std::size_t> truth;
};

namespace detail {

inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, Rng& rng) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i)
        std::swap(pool[i], pool[i + rng.below(n - i)]);
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

inline void append_rows(Dataset& out, const Dataset& src, const std::vector<std::size_t>& rows) {
    for (std::size_t r : rows) out.add(src.features(r), src.label(r), src.source_id(r));
}

}  // namespace detail

/// Concatenates `count` records drawn from the outlier pool onto the normal
/// dataset (fresh sequential ids) and reports the injected ids as truth.
/// mode = first takes the pool's leading records; mode = random samples
/// without replacement, deterministically for a given seed.
inline MixResult mix_outliers(const Dataset& normal, const Dataset& outlier_pool, std::size_t count,
                              MixMode mode, std::uint64_t seed = 0) {
    if (normal.dimension() != outlier_pool.dimension())
        throw data_error("mix_outliers: dimension mismatch between normal data and outlier pool");
    if (count > outlier_pool.size())
        throw data_error("mix_outliers: requested " + std::to_string(count) +
                         " outliers but the pool holds " + std::to_string(outlier_pool.size()));
    std::vector<std::size_t> picks;
    if (mode == MixMode::first) {
        picks.resize(count);
        std::iota(picks.begin(), picks.end(), std::size_t{0});
    } else {
        Rng rng(seed);
        picks = detail::sample_indices(outlier_pool.size(), count, rng);
    }
    MixResult result{Dataset(normal.dimension()), {}};
    std::vector<std::size_t> all_normals(normal.size());
    std::iota(all_normals.begin(), all_normals.end(), std::size_t{0});
    detail::append_rows(result.data, normal, all_normals);
    detail::append_rows(result.data, outlier_pool, picks);
    for (std::size_t i = normal.size(); i < result.data.size(); ++i) result.truth.insert(i);
    return result;
}

/// Uniform sample of `count` records without replacement, original order
/// preserved, fresh sequential ids.
inline Dataset subsample_normals(const Dataset& dataset, std::size_t count, std::uint64_t seed) {
    if (count > dataset.size())
        throw data_error("subsample_normals: requested " + std::to_string(count) +
                         " of " + std::to_string(dataset.size()) + " records");
    Rng rng(seed);
    const auto rows = detail::sample_indices(dataset.size(), count, rng);
    Dataset out(dataset.dimension());
    detail::append_rows(out, dataset, rows);
    return out;
}

/// The repeated-mixing protocol behind the real-data experiments: each run
/// optionally subsamples the normals, mixes trial.outlier_count records
/// from the pool, and sweeps every method over the k range. Run r derives
/// its subsample seed as derive_seed(seed, {r, 0}) and its mix seed as
/// derive_seed(seed, {r, 1}).
inline SweepReport sweep_k_protocol(const Dataset& normals, const Dataset& outlier_pool,
                                    const TrialSpec& trial, MixMode mode,
                                    std::size_t normal_sample = 0,
                                    Metric metric = Metric::euclidean,
                                    Backend backend = Backend::kd_tree, unsigned threads = 0,
                                    std::string dataset_id = {}) {
    if (trial.outlier_count < 1)
        throw data_error("sweep protocol: outlier_count must be >= 1");
    SweepReport report;
    report.dataset_id = std::move(dataset_id);
    report.n = trial.n;
    report.base_seed = trial.seed;
    for (std::size_t run = 0; run < trial.runs; ++run) {
        const Dataset* base = &normals;
        Dataset sampled;
        if (normal_sample != 0 && normal_sample < normals.size()) {
            sampled = subsample_normals(normals, normal_sample, derive_seed(trial.seed, {run, 0}));
            base = &sampled;
        }
        MixResult mix = mix_outliers(*base, outlier_pool, trial.outlier_count, mode,
                                     derive_seed(trial.seed, {run, 1}));
        detail::validate_k_range(trial, mix.data.size());
        detail::sweep_into(report, mix.data, mix.truth, trial, run, metric, backend, threads);
    }
    detail::aggregate(report);
    return report;
}

/// Mean precision of a method pooled over every (k, run) cell.
inline double pooled_mean(const SweepReport& report, Method method) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const SweepCell& c : report.cells)
        if (c.method == method) {
            sum += c.precision;
            ++count;
        }
    if (count == 0) throw std::invalid_argument("pooled_mean: no cells for method");
    return sum / static_cast<double>(count);
}

/// Paired t statistic, t = mean(a-b) / (sd(a-b)/sqrt(n)), sample sd.
inline double paired_t_statistic(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("paired_t_statistic: length mismatch");
    const std::size_t n = a.size();
    if (n < 2) throw std::invalid_argument("paired_t_statistic: need at least 2 pairs");
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(n - 1);
    return mean / std::sqrt(var / static_cast<double>(n));
}

struct Theorem1Report {
    std::size_t d, k, samples, trials;
    std::uint64_t seed;
    double mean_ldof;
    double deviation;  // |mean - 1/2|
    std::vector<double> per_trial;
};

/// Monte-Carlo check of the interior-point limit: in each trial, `samples`
/// points are drawn uniform in the unit d-ball, a query is planted at the
/// center, and its LDOF over the k nearest is computed. Scores use
/// squared_euclidean, the regime in which the limit is 1/2.
inline Theorem1Report verify_theorem1(std::size_t d, std::size_t k, std::size_t samples,
                                      std::size_t trials, std::uint64_t seed,
                                      unsigned threads = 0) {
    if (k < 2) throw std::invalid_argument("verify_theorem1: k must be >= 2");
    if (k > samples) throw std::invalid_argument("verify_theorem1: k must not exceed samples");
    if (trials < 1) throw std::invalid_argument("verify_theorem1: trials must be >= 1");
    Theorem1Report report{d, k, samples, trials, seed, 0.0, 0.0, std::vector<double>(trials)};
    parallel_for(trials, threads, [&](std::size_t t) {
        const Dataset ball =
            datagen::sample_uniform_ball(d, 1.0, samples, derive_seed(seed, {1, t}));
        Dataset ds(d);
        ds.add(std::vector<double>(d, 0.0));
        for (std::size_t i = 0; i < ball.size(); ++i) ds.add(ball.features(i));
        const NeighborIndex index(ds, Metric::squared_euclidean, Backend::brute_force);
        report.per_trial[t] = ldof_score(index, 0, k).score;
    });
    report.mean_ldof = std::accumulate(report.per_trial.begin(), report.per_trial.end(), 0.0) /
                       static_cast<double>(trials);
    report.deviation = std::abs(report.mean_ldof - theory::ldof_lower_bound());
    return report;
}

struct Theorem2Report {
    std::size_t d, k, trials;
    double c;
    std::uint64_t seed;
    std::size_t exceed_count;
    double frequency;
    double bound;
    bool violated;
};

/// Monte-Carlo check of the false-detection bound: each trial plants the
/// query at the center of a uniform unit-ball neighborhood of exactly k
/// points and tests whether its LDOF (squared_euclidean) exceeds c. The
/// observed frequency is compared against exp(-alpha (k-2)).
inline Theorem2Report verify_theorem2(std::size_t d, std::size_t k, double c, std::size_t trials,
                                      std::uint64_t seed, unsigned threads = 0) {
    if (k < 3) throw std::invalid_argument("verify_theorem2: k must be >= 3");
    if (trials < 1) throw std::invalid_argument("verify_theorem2: trials must be >= 1");
    const double bound = theory::false_detection_bound(k, d, c);  // validates c
    std::vector<unsigned char> exceeded(trials, 0);
    parallel_for(trials, threads, [&](std::size_t t) {
        const Dataset ball = datagen::sample_uniform_ball(d, 1.0, k, derive_seed(seed, {2, t}));
        Dataset ds(d);
        ds.add(std::vector<double>(d, 0.0));
        for (std::size_t i = 0; i < ball.size(); ++i) ds.add(ball.features(i));
        const NeighborIndex index(ds, Metric::squared_euclidean, Backend::brute_force);
        exceeded[t] = ldof_score(index, 0, k).score > c ? 1 : 0;
    });
    Theorem2Report report{d, k, trials, c, seed, 0, 0.0, bound, false};
    for (unsigned char e : exceeded) report.exceed_count += e;
    report.frequency = static_cast<double>(report.exceed_count) / static_cast<double>(trials);
    report.violated = report.frequency > report.bound;
    return report;
}

}  // namespace ldof::eval
