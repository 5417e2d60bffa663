#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "ldof/dataset.hpp"

using namespace ldof;

TEST_CASE("distance matches the hand examples", "[core]") {
    const std::vector<double> a{0.0, 0.0}, b{3.0, 4.0};
    CHECK(distance(Metric::euclidean, a, b) == 5.0);
    CHECK(distance(Metric::squared_euclidean, a, b) == 25.0);
    CHECK(distance(Metric::euclidean, b, b) == 0.0);
}

TEST_CASE("distance rejects dimension mismatch", "[core]") {
    const std::vector<double> a{1.0}, b{1.0, 2.0};
    CHECK_THROWS_AS(distance(Metric::euclidean, a, b), std::invalid_argument);
}

TEST_CASE("metric axioms on random pairs", "[core]") {
    std::mt19937 rng(42);
    for (int i = 0; i < 1000; ++i) {
        const auto x = test_helpers::random_point(rng, 5);
        const auto y = test_helpers::random_point(rng, 5);
        const auto z = test_helpers::random_point(rng, 5);
        for (Metric m : {Metric::euclidean, Metric::squared_euclidean}) {
            CHECK(distance(m, x, y) == distance(m, y, x));
            CHECK(distance(m, x, y) >= 0.0);
            CHECK(distance(m, x, x) == 0.0);
        }
        // triangle inequality, euclidean only
        const double xy = distance(Metric::euclidean, x, y);
        const double xz = distance(Metric::euclidean, x, z);
        const double zy = distance(Metric::euclidean, z, y);
        CHECK(xy <= (xz + zy) * (1.0 + 1e-12));
    }
}

TEST_CASE("squared euclidean is the square of euclidean", "[core]") {
    std::mt19937 rng(7);
    for (int i = 0; i < 100; ++i) {
        const auto x = test_helpers::random_point(rng, 3);
        const auto y = test_helpers::random_point(rng, 3);
        const double e = distance(Metric::euclidean, x, y);
        const double s = distance(Metric::squared_euclidean, x, y);
        CHECK(s == Catch::Approx(e * e).epsilon(1e-12));
    }
}

TEST_CASE("dataset construction validates rows", "[core]") {
    Dataset ds(2);
    ds.add(std::vector<double>{1.0, 2.0}, "a");
    CHECK_THROWS_AS(ds.add(std::vector<double>{1.0}), data_error);  // ragged
    CHECK_THROWS_AS(ds.add(std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN()}),
                    data_error);
    CHECK_THROWS_AS(ds.add(std::vector<double>{std::numeric_limits<double>::infinity(), 0.0}),
                    data_error);
    CHECK(ds.size() == 1);
    CHECK(ds.dimension() == 2);
    CHECK(ds.label(0) == "a");
    CHECK(ds.record(0).id == 0);
    CHECK_THROWS_AS(ds.features(1), std::invalid_argument);
}

TEST_CASE("record ids are their positions", "[core]") {
    std::mt19937 rng(3);
    const auto ds = test_helpers::random_dataset(rng, 20, 3);
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(ds.record(i).id == i);
}

TEST_CASE("score ordering is score-desc then id-asc", "[core]") {
    const double inf = std::numeric_limits<double>::infinity();
    OutlierScore a{3, inf, 0, inf, false}, b{1, inf, 0, inf, false}, c{2, 0, 0, 1.5, false};
    CHECK(score_before(b, a));   // equal inf scores: smaller id first
    CHECK(score_before(a, c));   // inf before finite
    CHECK(!score_before(c, a));
}
