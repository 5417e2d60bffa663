#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "ldof/baselines.hpp"
#include "ldof/datagen.hpp"
#include "ldof/eval.hpp"
#include "ldof/io.hpp"

using namespace ldof;
using eval::MixMode;
using eval::TrialSpec;

namespace {

Ranking fake_ranking(std::size_t n, std::initializer_list<std::size_t> ids) {
    Ranking r;
    r.method = Method::ldof;
    r.n = n;
    double score = 100.0;
    for (std::size_t id : ids) r.entries.push_back({id, 0, 0, score -= 1.0, false});
    return r;
}

}  // namespace

TEST_CASE("precision fixtures", "[eval]") {
    CHECK(eval::precision(fake_ranking(4, {1, 2, 3, 4}), {1, 2, 3, 4}) == 1.0);
    CHECK(eval::precision(fake_ranking(4, {5, 6, 7, 8}), {1, 2, 3, 4}) == 0.0);
    CHECK(eval::precision(fake_ranking(10, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}),
                          {0, 1, 2, 3, 4, 5, 6, 7, 90, 91}) == 0.8);
    // shorter ranking: missing slots are misses
    CHECK(eval::precision(fake_ranking(4, {1, 2}), {1, 2, 3, 4}) == 0.5);
    CHECK_THROWS_AS(eval::precision(fake_ranking(4, {1}), {}), data_error);
}

TEST_CASE("precision ignores order within the slice", "[eval]") {
    const auto a = fake_ranking(4, {1, 2, 3, 4});
    auto b = a;
    std::reverse(b.entries.begin(), b.entries.end());
    const std::unordered_set<std::size_t> truth{2, 4};
    CHECK(eval::precision(a, truth) == eval::precision(b, truth));
}

TEST_CASE("sweep is deterministic and matches the direct rankings", "[eval]") {
    const auto ds = datagen::generate_scene(datagen::paper_scene());
    std::unordered_set<std::size_t> truth{210, 211, 212, 213};
    TrialSpec trial;
    trial.k_min = 5;
    trial.k_max = 25;
    trial.n = 4;
    trial.seed = 99;
    const auto r1 = eval::sweep_k(ds, truth, trial);
    const auto r2 = eval::sweep_k(ds, truth, trial);
    REQUIRE(r1.cells.size() == r2.cells.size());
    for (std::size_t i = 0; i < r1.cells.size(); ++i) {
        CHECK(r1.cells[i].precision == r2.cells[i].precision);
        CHECK(r1.cells[i].seed == r2.cells[i].seed);
    }
    CHECK(r1.issues.empty());

    for (const auto& cell : r1.cells) {
        Ranking direct;
        switch (cell.method) {
            case Method::ldof: direct = top_n_ldof(ds, trial.n, cell.k); break;
            case Method::knn: direct = top_n_knn(ds, trial.n, cell.k); break;
            case Method::lof: direct = top_n_lof(ds, trial.n, cell.k); break;
        }
        CHECK(cell.precision == eval::precision(direct, truth));
    }
}

TEST_CASE("prefix-computed sweep scores equal the direct scores bitwise", "[eval]") {
    std::mt19937 rng(914);
    const auto ds = test_helpers::random_dataset(rng, 120, 3);
    for (Metric metric : {Metric::euclidean, Metric::squared_euclidean}) {
        const NeighborIndex index(ds, metric, Backend::kd_tree);
        const eval::detail::SweepScores sweep(index, 2, 24, 0);
        for (std::size_t k : {std::size_t{2}, std::size_t{3}, std::size_t{11}, std::size_t{24}}) {
            const auto direct_ldof = ldof_scores(index, k);
            const auto sweep_ldof = sweep.ldof_at(k);
            const auto direct_lof = lof_scores(index, k);
            const auto sweep_lof = sweep.lof_at(k);
            const auto sweep_knn = sweep.knn_at(k);
            for (std::size_t i = 0; i < ds.size(); ++i) {
                CHECK(sweep_ldof[i].score == direct_ldof[i].score);
                CHECK(sweep_ldof[i].knn_dist == direct_ldof[i].knn_dist);
                CHECK(sweep_ldof[i].knn_inner_dist == direct_ldof[i].knn_inner_dist);
                CHECK(sweep_ldof[i].pruned == direct_ldof[i].pruned);
                CHECK(sweep_lof[i].score == direct_lof[i]);
                CHECK(sweep_knn[i].score == k_distance(index, i, k));
            }
        }
    }
}

TEST_CASE("single-method sweep equals that method's column", "[eval]") {
    const auto ds = datagen::generate_scene(datagen::paper_scene());
    std::unordered_set<std::size_t> truth{210, 211, 212, 213};
    TrialSpec all;
    all.k_min = 10;
    all.k_max = 20;
    all.n = 4;
    TrialSpec only = all;
    only.methods = {Method::lof};
    const auto full = eval::sweep_k(ds, truth, all);
    const auto single = eval::sweep_k(ds, truth, only);
    for (const auto& cell : single.cells) {
        const auto match = std::find_if(full.cells.begin(), full.cells.end(), [&](const auto& c) {
            return c.method == cell.method && c.k == cell.k && c.run == cell.run;
        });
        REQUIRE(match != full.cells.end());
        CHECK(match->precision == cell.precision);
    }
}

TEST_CASE("sweep aggregates stay within the metric's range", "[eval]") {
    const auto ds = datagen::generate_scene(datagen::paper_scene());
    std::unordered_set<std::size_t> truth{210, 211, 212, 213};
    TrialSpec trial;
    trial.k_min = 2;
    trial.k_max = 30;
    trial.n = 4;
    trial.runs = 3;
    const auto report = eval::sweep_k(ds, truth, trial);
    for (const auto& a : report.aggregates) {
        CHECK(a.mean >= 0.0);
        CHECK(a.mean <= 1.0);
        CHECK(a.stddev >= 0.0);
        CHECK(a.stddev <= 0.5);
        CHECK(a.runs == 3);
    }
}

TEST_CASE("sweep validates its k range", "[eval]") {
    const auto ds = datagen::generate_scene(datagen::paper_scene());
    std::unordered_set<std::size_t> truth{210};
    TrialSpec trial;
    trial.k_min = 10;
    trial.k_max = 5;
    trial.n = 4;
    CHECK_THROWS_AS(eval::sweep_k(ds, truth, trial), data_error);
    trial.k_min = 2;
    trial.k_max = 500;
    CHECK_THROWS_AS(eval::sweep_k(ds, truth, trial), data_error);
}

TEST_CASE("mix_outliers contracts", "[eval]") {
    std::mt19937 rng(3);
    const auto normal = test_helpers::random_dataset(rng, 20, 2);
    const auto pool = test_helpers::random_dataset(rng, 15, 2);

    const auto first = eval::mix_outliers(normal, pool, 5, MixMode::first);
    REQUIRE(first.data.size() == 25);
    CHECK(first.truth == std::unordered_set<std::size_t>{20, 21, 22, 23, 24});
    for (std::size_t i = 0; i < 5; ++i) {
        const auto injected = first.data.features(20 + i);
        const auto original = pool.features(i);
        for (std::size_t a = 0; a < 2; ++a) CHECK(injected[a] == original[a]);
    }

    const auto none = eval::mix_outliers(normal, pool, 0, MixMode::first);
    CHECK(none.data.size() == 20);
    CHECK(none.truth.empty());

    CHECK_THROWS_AS(eval::mix_outliers(normal, pool, 16, MixMode::first), data_error);

    const auto r1 = eval::mix_outliers(normal, pool, 5, MixMode::random, 1);
    const auto r2 = eval::mix_outliers(normal, pool, 5, MixMode::random, 2);
    CHECK(r1.truth.size() == 5);
    CHECK(r2.truth.size() == 5);
    bool differs = false;
    for (std::size_t i = 20; i < 25 && !differs; ++i)
        differs = r1.data.features(i)[0] != r2.data.features(i)[0];
    CHECK(differs);

    const auto r1again = eval::mix_outliers(normal, pool, 5, MixMode::random, 1);
    for (std::size_t i = 20; i < 25; ++i)
        CHECK(r1.data.features(i)[0] == r1again.data.features(i)[0]);
}

TEST_CASE("wdbc mix: all benign plus the first ten malignant", "[eval]") {
    const auto wdbc = io::load_csv(std::filesystem::path(LDOF_DATA_DIR) / "wdbc.csv",
                                   io::wdbc_schema());
    const auto benign = io::filter_by_label(wdbc, [](const std::string& l) { return l == "B"; });
    const auto malignant = io::filter_by_label(wdbc, [](const std::string& l) { return l == "M"; });
    const auto mix = eval::mix_outliers(benign, malignant, 10, MixMode::first);
    CHECK(mix.data.size() == 367);
    CHECK(mix.truth.size() == 10);
    for (std::size_t id : mix.truth) CHECK(mix.data.label(id) == "M");
}

TEST_CASE("subsample_normals contracts", "[eval]") {
    std::mt19937 rng(4);
    const auto ds = test_helpers::random_dataset(rng, 50, 3);
    const auto a = eval::subsample_normals(ds, 10, 7);
    const auto b = eval::subsample_normals(ds, 10, 7);
    REQUIRE(a.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(a.features(i)[0] == b.features(i)[0]);
    const auto c = eval::subsample_normals(ds, 10, 8);
    bool differs = false;
    for (std::size_t i = 0; i < 10 && !differs; ++i) differs = a.features(i)[0] != c.features(i)[0];
    CHECK(differs);
    CHECK_THROWS_AS(eval::subsample_normals(ds, 51, 1), data_error);
    CHECK(eval::subsample_normals(ds, 50, 1).size() == 50);
}

TEST_CASE("protocol sweep runs the mixing per run", "[eval]") {
    std::mt19937 rng(5);
    const auto normal = test_helpers::random_dataset(rng, 60, 2, -1.0, 1.0);
    // pool points on a wide circle: far from the normals and from each
    // other, so every method must rank any injected subset on top
    Dataset pool(2);
    for (int i = 0; i < 12; ++i) {
        const double angle = 2.0 * 3.14159265358979323846 * i / 12.0;
        pool.add(std::vector<double>{200.0 * std::cos(angle), 200.0 * std::sin(angle)});
    }
    TrialSpec trial;
    trial.k_min = 5;
    trial.k_max = 10;
    trial.n = 3;
    trial.runs = 4;
    trial.seed = 11;
    trial.outlier_count = 3;
    const auto report = eval::sweep_k_protocol(normal, pool, trial, MixMode::random);
    // 3 methods x 6 k values x 4 runs
    CHECK(report.cells.size() == 3 * 6 * 4);
    // far-away injected points are found by every method here
    for (const auto& cell : report.cells) CHECK(cell.precision == 1.0);
    const auto rerun = eval::sweep_k_protocol(normal, pool, trial, MixMode::random);
    for (std::size_t i = 0; i < report.cells.size(); ++i)
        CHECK(report.cells[i].precision == rerun.cells[i].precision);
}

TEST_CASE("pooled mean averages all cells of one method", "[eval]") {
    eval::SweepReport report;
    report.cells.push_back({Method::ldof, 2, 0, 0, 1.0});
    report.cells.push_back({Method::ldof, 3, 0, 0, 0.5});
    report.cells.push_back({Method::knn, 2, 0, 0, 0.0});
    CHECK(eval::pooled_mean(report, Method::ldof) == 0.75);
    CHECK(eval::pooled_mean(report, Method::knn) == 0.0);
    CHECK_THROWS_AS(eval::pooled_mean(report, Method::lof), std::invalid_argument);
}

TEST_CASE("paired t statistic on a hand example", "[eval]") {
    const std::vector<double> a{0.5, 0.6, 0.7}, b{0.4, 0.5, 0.5};
    CHECK(eval::paired_t_statistic(a, b) == Catch::Approx(4.0).epsilon(1e-12));
    CHECK_THROWS_AS(eval::paired_t_statistic(a, std::vector<double>{1.0}),
                    std::invalid_argument);
}

TEST_CASE("theorem 1 verification smoke", "[eval]") {
    const auto light = eval::verify_theorem1(3, 50, 800, 10, 123);
    CHECK(light.mean_ldof > 0.4);
    CHECK(light.mean_ldof < 0.6);
    CHECK(light.per_trial.size() == 10);

    // degenerate smoke case: finite value, no crash
    const auto tiny = eval::verify_theorem1(2, 2, 3, 2, 5);
    for (double v : tiny.per_trial) CHECK(std::isfinite(v));

    CHECK_THROWS_AS(eval::verify_theorem1(3, 100, 50, 1, 1), std::invalid_argument);
}

TEST_CASE("theorem 1 verification is threading invariant", "[eval]") {
    const auto serial = eval::verify_theorem1(2, 30, 300, 8, 77, 1);
    const auto threaded = eval::verify_theorem1(2, 30, 300, 8, 77, 4);
    CHECK(serial.mean_ldof == threaded.mean_ldof);
}

TEST_CASE("theorem 2 verification smoke", "[eval]") {
    const auto r = eval::verify_theorem2(5, 60, 1.0, 500, 321);
    CHECK(r.frequency <= r.bound);
    CHECK(r.bound == theory::false_detection_bound(60, 5, 1.0));
    CHECK_FALSE(r.violated);

    const auto extreme = eval::verify_theorem2(3, 12, 3.0, 300, 9);
    CHECK(extreme.frequency == 0.0);

    CHECK_THROWS_AS(eval::verify_theorem2(3, 12, 0.4, 10, 1), std::domain_error);
    CHECK_THROWS_AS(eval::verify_theorem2(3, 2, 1.0, 10, 1), std::invalid_argument);
}
