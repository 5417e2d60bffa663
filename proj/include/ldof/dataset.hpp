#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ldof {

/// Error in input data (malformed files, impossible parameters for the
/// given dataset). Distinct from std::invalid_argument, which flags
/// caller bugs / bad usage.
class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Metric { euclidean, squared_euclidean };

inline std::string_view to_string(Metric m) {
    return m == Metric::euclidean ? "euclidean" : "squared_euclidean";
}

/// Immutable view of one dataset row. `id` is the row's index; `source_id`
/// carries an external identifier (e.g. a CSV id column), empty if none.
struct Record {
    std::size_t id;
    std::span<const double> features;
    std::string_view label;
    std::string_view source_id;
};

/// Fixed-dimension feature matrix with optional per-row labels and source
/// ids. Record ids are row indices, 0..size()-1. Immutable once built:
/// queries and scoring never mutate a dataset, so concurrent reads are safe.
class Dataset {
public:
    Dataset() = default;

    explicit Dataset(std::size_t dimension) : dim_(dimension) {
        if (dimension == 0) throw std::invalid_argument("Dataset: dimension must be >= 1");
    }

    void add(std::span<const double> features, std::string label = {}, std::string source_id = {}) {
        if (features.size() != dim_)
            throw data_error("Dataset: row of length " + std::to_string(features.size()) +
                             " does not match dimension " + std::to_string(dim_));
        for (double v : features)
            if (!std::isfinite(v)) throw data_error("Dataset: non-finite feature value");
        data_.insert(data_.end(), features.begin(), features.end());
        labels_.push_back(std::move(label));
        source_ids_.push_back(std::move(source_id));
    }

    static Dataset from_rows(const std::vector<std::vector<double>>& rows,
                             std::vector<std::string> labels = {}) {
        if (rows.empty()) throw data_error("Dataset: no rows");
        Dataset ds(rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            ds.add(rows[i], labels.empty() ? std::string{} : labels.at(i));
        return ds;
    }

    std::size_t size() const { return labels_.size(); }
    std::size_t dimension() const { return dim_; }

    std::span<const double> features(std::size_t id) const {
        check_id(id);
        return {data_.data() + id * dim_, dim_};
    }

    const std::string& label(std::size_t id) const {
        check_id(id);
        return labels_[id];
    }

    const std::string& source_id(std::size_t id) const {
        check_id(id);
        return source_ids_[id];
    }

    Record record(std::size_t id) const {
        return {id, features(id), label(id), source_id(id)};
    }

    bool has_labels() const {
        for (const auto& l : labels_)
            if (!l.empty()) return true;
        return false;
    }

private:
    void check_id(std::size_t id) const {
        if (id >= size()) throw std::invalid_argument("Dataset: unknown record id " + std::to_string(id));
    }

    std::size_t dim_ = 0;
    std::vector<double> data_;
    std::vector<std::string> labels_;
    std::vector<std::string> source_ids_;
};

inline double squared_distance(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

/// dist(x, y) under the given metric. Throws std::invalid_argument on
/// dimension mismatch.
inline double distance(Metric metric, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("distance: dimension mismatch (" + std::to_string(x.size()) +
                                    " vs " + std::to_string(y.size()) + ")");
    const double s = squared_distance(x, y);
    return metric == Metric::euclidean ? std::sqrt(s) : s;
}

struct Neighbor {
    std::size_t id;
    double distance;
};

/// The k nearest neighbors of one record, query excluded, sorted ascending
/// by (distance, id). Holds min(k, N-1) entries.
struct NeighborSet {
    std::size_t query_id = 0;
    std::size_t k = 0;  // requested neighborhood size
    std::vector<Neighbor> neighbors;

    std::size_t size() const { return neighbors.size(); }
};

/// Per-record score. knn_dist / knn_inner_dist are the LDOF numerator
/// and denominator; NaN for the baselines, which only fill `score`.
struct OutlierScore {
    std::size_t id = 0;
    double knn_dist = std::numeric_limits<double>::quiet_NaN();
    double knn_inner_dist = std::numeric_limits<double>::quiet_NaN();
    double score = 0.0;
    bool pruned = false;
};

enum class Method { ldof, knn, lof };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::ldof: return "ldof";
        case Method::knn: return "knn";
        default: return "lof";
    }
}

/// Top-n slice: entries sorted by score descending, ties by ascending id.
struct Ranking {
    Method method = Method::ldof;
    std::size_t n = 0;  // requested size; entries.size() <= n
    std::vector<OutlierScore> entries;
};

/// Descending score, ascending id. +inf scores sort first among themselves
/// by id; scores are never NaN by construction.
inline bool score_before(const OutlierScore& a, const OutlierScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

}  // namespace ldof
