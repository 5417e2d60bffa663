#pragma once

#include <random>
#include <vector>

#include "ldof/dataset.hpp"

namespace test_helpers {

// Test-local generator, independent of the library's Rng on purpose: the
// oracles must not share the code paths they check.
inline ldof::Dataset random_dataset(std::mt19937& rng, std::size_t n, std::size_t d,
                                    double lo = -10.0, double hi = 10.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    ldof::Dataset ds(d);
    std::vector<double> row(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : row) v = u(rng);
        ds.add(row);
    }
    return ds;
}

inline std::vector<double> random_point(std::mt19937& rng, std::size_t d, double lo = -10.0,
                                        double hi = 10.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> p(d);
    for (auto& v : p) v = u(rng);
    return p;
}

}  // namespace test_helpers
