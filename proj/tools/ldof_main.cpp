// Command-line front end: outlier detection (ldof / knn / lof), scene
// generation, precision sweeps and theorem verification.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ldof/baselines.hpp"
#include "ldof/datagen.hpp"
#include "ldof/eval.hpp"
#include "ldof/io.hpp"
#include "ldof/ldof.hpp"

namespace fs = std::filesystem;
using namespace ldof;

namespace {

fs::path out_dir() {
    const char* dir = std::getenv("LDOF_OUT_DIR");
    return dir == nullptr ? fs::path{"."} : fs::path{dir};
}

fs::path resolve_out(const std::string& given, const std::string& fallback) {
    if (!given.empty()) return given;
    return out_dir() / fallback;
}

std::uint64_t pick_seed(std::optional<std::uint64_t> given) {
    if (given) return *given;
    std::random_device rd;
    const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cout << "seed: " << seed << " (pass --seed " << seed << " to reproduce)\n";
    return seed;
}

Metric parse_metric(const std::string& name) {
    if (name == "euclidean") return Metric::euclidean;
    if (name == "squared_euclidean" || name == "squared") return Metric::squared_euclidean;
    throw std::invalid_argument("unknown metric: " + name);
}

Backend parse_backend(const std::string& name) {
    if (name == "tree") return Backend::kd_tree;
    if (name == "brute") return Backend::brute_force;
    throw std::invalid_argument("unknown backend: " + name);
}

Method parse_method(const std::string& name) {
    if (name == "ldof") return Method::ldof;
    if (name == "knn") return Method::knn;
    if (name == "lof") return Method::lof;
    throw std::invalid_argument("unknown method: " + name);
}

struct InputOptions {
    std::string path;
    std::string schema = "generic";  // generic | canonical | wdbc | shuttle | file.json
    bool standardize = false;
    std::string scale = "none";  // none | zscore | minmax
};

void add_input_flags(CLI::App* cmd, InputOptions& in, bool required = true) {
    auto* opt = cmd->add_option("-i,--input", in.path, "input dataset file");
    if (required) opt->required();
    cmd->add_option("--schema", in.schema,
                    "column layout: generic, canonical, wdbc, shuttle, or a schema JSON file");
    cmd->add_flag("--standardize", in.standardize, "z-score features over the loaded file");
    cmd->add_option("--scale", in.scale,
                    "feature scaling applied after load: none, zscore, minmax");
}

Dataset load_input(const InputOptions& in) {
    io::CsvSchema schema;
    if (in.schema == "generic") schema = io::CsvSchema{};
    else if (in.schema == "canonical") schema = io::canonical_schema();
    else if (in.schema == "wdbc") schema = io::wdbc_schema();
    else if (in.schema == "shuttle") schema = io::shuttle_schema();
    else schema = io::load_schema(in.schema);
    schema.standardize = schema.standardize || in.standardize;
    Dataset ds = io::load_csv(in.path, schema);
    if (in.scale == "zscore") ds = io::standardize(ds);
    else if (in.scale == "minmax") ds = io::scale_unit_range(ds);
    else if (in.scale != "none") throw std::invalid_argument("unknown --scale: " + in.scale);
    return ds;
}

// Neighborhood-size default per the manifold heuristic: at least m+1
// points are needed to surround a point on an m-manifold, with the
// feature dimension as the observable upper bound for m.
std::size_t default_k(const Dataset& ds) {
    return std::max<std::size_t>(ds.dimension() + 1, 10);
}

int cmd_detect(const InputOptions& in, const std::string& method_name, std::size_t n,
               std::optional<std::size_t> k_opt, const std::string& metric_name,
               const std::string& backend_name, unsigned threads, const std::string& out) {
    const Dataset ds = load_input(in);
    const Method method = parse_method(method_name);
    const std::size_t k = k_opt.value_or(default_k(ds));
    if (!k_opt)
        std::cout << "k not given; using k = max(d+1, 10) = " << k << "\n";
    const NeighborIndex index(ds, parse_metric(metric_name), parse_backend(backend_name));
    Ranking ranking;
    switch (method) {
        case Method::ldof: ranking = top_n_ldof(index, n, k, threads); break;
        case Method::knn: ranking = top_n_knn(index, n, k, threads); break;
        case Method::lof: ranking = top_n_lof(index, n, k, threads); break;
    }
    const fs::path out_path = resolve_out(out, "ranking.csv");
    io::write_ranking_csv(out_path, ranking, ds);

    std::cout << "top-" << n << " by " << to_string(method) << " (k = " << k << ", N = "
              << ds.size() << ", d = " << ds.dimension() << ")\n";
    std::cout << "rank  id      score\n";
    for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
        const auto& e = ranking.entries[i];
        std::printf("%4zu  %-6zu  %.6g", i + 1, e.id, e.score);
        if (!ds.label(e.id).empty()) std::printf("  label=%s", ds.label(e.id).c_str());
        if (!ds.source_id(e.id).empty()) std::printf("  source=%s", ds.source_id(e.id).c_str());
        std::printf("\n");
    }
    if (ranking.entries.size() < n)
        std::cout << "(only " << ranking.entries.size()
                  << " records survived the LDOF >= 1/2 pruning)\n";
    std::cout << "ranking written to " << out_path.string() << "\n";
    return 0;
}

int cmd_gen(bool paper, const std::string& scene_path, std::optional<std::uint64_t> seed,
            const std::string& out) {
    datagen::SceneSpec spec;
    if (paper) {
        spec = datagen::paper_scene();
    } else if (!scene_path.empty()) {
        spec = io::load_scene(scene_path);
    } else {
        throw std::invalid_argument("gen: pass --paper-scene or --scene <config.json>");
    }
    if (seed) spec.seed = *seed;
    std::cout << "seed: " << spec.seed << " (pass --seed to change)\n";
    const Dataset ds = datagen::generate_scene(spec);
    const fs::path out_path = resolve_out(out, "scene.csv");
    io::save_csv(out_path, ds);
    std::cout << "wrote " << ds.size() << " records (" << spec.outliers.size()
              << " planted outliers) to " << out_path.string() << "\n";
    return 0;
}

int cmd_sweep(bool paper, const InputOptions& in, const std::vector<std::string>& method_names,
              std::size_t k_min, std::size_t k_max, std::size_t n, std::size_t runs,
              std::optional<std::uint64_t> seed_opt, const std::string& truth_label,
              const std::string& outlier_label, const std::string& normal_label,
              std::size_t outlier_count, const std::string& mix_mode_name,
              std::size_t normal_sample, const std::string& metric_name,
              const std::string& backend_name, unsigned threads, const std::string& out) {
    eval::TrialSpec trial;
    trial.methods.clear();
    for (const auto& m : method_names) trial.methods.push_back(parse_method(m));
    trial.k_min = k_min;
    trial.k_max = k_max;
    trial.n = n;
    trial.runs = runs;
    trial.outlier_count = outlier_count;

    const Metric metric = parse_metric(metric_name);
    const Backend backend = parse_backend(backend_name);

    Dataset ds(1);
    std::string dataset_id;
    if (paper) {
        ds = datagen::generate_scene(datagen::paper_scene());
        dataset_id = "paper-scene";
    } else {
        if (in.path.empty())
            throw std::invalid_argument("sweep: pass --input or --paper-scene");
        ds = load_input(in);
        dataset_id = in.path;
    }

    eval::SweepReport report;
    if (!outlier_label.empty()) {
        // resampling protocol: split by label, then mix per run
        trial.seed = pick_seed(seed_opt);
        const Dataset pool =
            io::filter_by_label(ds, [&](const std::string& l) { return l == outlier_label; });
        const Dataset normals = io::filter_by_label(ds, [&](const std::string& l) {
            return normal_label.empty() ? l != outlier_label : l == normal_label;
        });
        if (trial.outlier_count == 0) trial.outlier_count = pool.size();
        eval::MixMode mode;
        if (mix_mode_name == "first") mode = eval::MixMode::first;
        else if (mix_mode_name == "random") mode = eval::MixMode::random;
        else throw std::invalid_argument("unknown --mix-mode: " + mix_mode_name);
        report = eval::sweep_k_protocol(normals, pool, trial, mode, normal_sample, metric,
                                        backend, threads, dataset_id);
    } else {
        trial.seed = seed_opt.value_or(0);
        std::unordered_set<std::size_t> truth;
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (ds.label(i) == truth_label) truth.insert(i);
        if (truth.empty())
            throw data_error("sweep: no records labeled '" + truth_label +
                             "'; pass --truth-label or the protocol flags");
        report = eval::sweep_k(ds, truth, trial, metric, backend, threads, dataset_id);
    }

    const fs::path prefix = resolve_out(out, "sweep");
    io::write_sweep_cells_csv(prefix.string() + "_cells.csv", report);
    io::write_sweep_aggregates_csv(prefix.string() + "_aggregates.csv", report);
    io::write_sweep_json(prefix.string() + ".json", report);

    std::cout << "sweep over k in [" << k_min << ", " << k_max << "], n = " << n << ", runs = "
              << runs << "\n";
    for (const Method m : trial.methods)
        std::cout << "  " << to_string(m) << " pooled mean precision: "
                  << eval::pooled_mean(report, m) << "\n";
    for (const auto& issue : report.issues) std::cout << "  issue: " << issue << "\n";
    std::cout << "wrote " << prefix.string() << "_cells.csv, _aggregates.csv, .json\n";
    return 0;
}

int cmd_verify(int theorem, std::size_t d, std::size_t k, double c, std::size_t samples,
               std::size_t trials, std::optional<std::uint64_t> seed_opt, unsigned threads,
               const std::string& out) {
    const std::uint64_t seed = pick_seed(seed_opt);
    nlohmann::json j;
    bool pass = false;
    if (theorem == 1) {
        const auto r = eval::verify_theorem1(d, k, samples, trials, seed, threads);
        pass = r.mean_ldof >= 0.45 && r.mean_ldof <= 0.55;
        std::cout << "theorem 1: mean LDOF of a uniform-ball center = " << r.mean_ldof
                  << " (limit 0.5, deviation " << r.deviation << ")\n"
                  << "  d = " << d << ", k = " << k << ", samples = " << samples
                  << ", trials = " << trials << "\n"
                  << (pass ? "PASS" : "FLAG") << ": mean within [0.45, 0.55] expected\n";
        j = {{"theorem", 1}, {"d", d}, {"k", k}, {"samples", samples}, {"trials", trials},
             {"seed", seed}, {"mean_ldof", r.mean_ldof}, {"deviation", r.deviation},
             {"verdict", pass ? "PASS" : "FLAG"}};
    } else if (theorem == 2) {
        const auto r = eval::verify_theorem2(d, k, c, trials, seed, threads);
        pass = !r.violated;
        std::cout << "theorem 2: empirical P[LDOF > " << c << "] = " << r.frequency << " ("
                  << r.exceed_count << "/" << trials << "), bound exp(-alpha(k-2)) = " << r.bound
                  << "\n  d = " << d << ", k = " << k << ", trials = " << trials << "\n"
                  << (pass ? "PASS" : "FLAG") << ": empirical frequency must not exceed the bound\n";
        j = {{"theorem", 2}, {"d", d}, {"k", k}, {"c", c}, {"trials", trials}, {"seed", seed},
             {"frequency", r.frequency}, {"exceed_count", r.exceed_count}, {"bound", r.bound},
             {"verdict", pass ? "PASS" : "FLAG"}};
    } else {
        throw std::invalid_argument("verify: --theorem must be 1 or 2");
    }
    if (!out.empty()) {
        std::ofstream f(out);
        if (!f) throw data_error("cannot write " + out);
        f << j.dump(2) << '\n';
        std::cout << "report written to " << out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"local distance-based outlier detection (top-n LDOF, KNN and LOF baselines)"};
    app.require_subcommand(1);

    // detect
    auto* detect = app.add_subcommand("detect", "rank the top-n outlier candidates of a dataset");
    InputOptions detect_in;
    add_input_flags(detect, detect_in);
    std::string method = "ldof";
    std::size_t n = 0;
    std::optional<std::size_t> k_opt;
    std::string metric = "euclidean", backend = "tree", output;
    unsigned threads = 0;
    detect->add_option("--method", method, "ldof, knn or lof")->capture_default_str();
    detect->add_option("-n,--top", n, "how many candidates to report")->required();
    std::size_t k_raw = 0;
    auto* k_flag = detect->add_option("-k", k_raw, "neighborhood size (default max(d+1, 10))");
    detect->add_option("--metric", metric, "euclidean or squared_euclidean")->capture_default_str();
    detect->add_option("--backend", backend, "tree or brute")->capture_default_str();
    detect->add_option("--threads", threads, "worker threads (0 = all cores)");
    detect->add_option("-o,--output", output, "ranking CSV path (default $LDOF_OUT_DIR/ranking.csv)");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic scattered-cluster dataset");
    bool paper_scene = false;
    std::string scene_path, gen_output;
    std::optional<std::uint64_t> gen_seed;
    std::uint64_t gen_seed_raw = 0;
    gen->add_flag("--paper-scene", paper_scene, "use the committed demonstration scene");
    gen->add_option("--scene", scene_path, "scene config JSON");
    auto* gen_seed_flag = gen->add_option("--seed", gen_seed_raw, "generator seed");
    gen->add_option("-o,--output", gen_output, "dataset CSV path (default $LDOF_OUT_DIR/scene.csv)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "precision of each method across a k range");
    InputOptions sweep_in;
    bool sweep_paper = false;
    sweep->add_flag("--paper-scene", sweep_paper, "sweep the committed demonstration scene");
    add_input_flags(sweep, sweep_in, /*required=*/false);
    std::vector<std::string> methods{"ldof", "knn", "lof"};
    std::size_t k_min = 2, k_max = 50, sweep_n = 0, runs = 1, outlier_count = 0, normal_sample = 0;
    std::string truth_label = "outlier", outlier_label, normal_label, mix_mode = "random";
    std::string sweep_metric = "euclidean", sweep_backend = "tree", sweep_output;
    unsigned sweep_threads = 0;
    std::optional<std::uint64_t> sweep_seed;
    std::uint64_t sweep_seed_raw = 0;
    sweep->add_option("--methods", methods, "subset of: ldof knn lof")->delimiter(',');
    sweep->add_option("--k-min", k_min, "first neighborhood size")->capture_default_str();
    sweep->add_option("--k-max", k_max, "last neighborhood size")->capture_default_str();
    sweep->add_option("-n,--top", sweep_n, "top-n size (the number of true outliers)")->required();
    sweep->add_option("--runs", runs, "independent repetitions")->capture_default_str();
    auto* sweep_seed_flag = sweep->add_option("--seed", sweep_seed_raw, "base seed");
    sweep->add_option("--truth-label", truth_label,
                      "label marking true outliers (fixed-dataset mode)")->capture_default_str();
    sweep->add_option("--outlier-label", outlier_label,
                      "label of the outlier pool (enables the mixing protocol)");
    sweep->add_option("--normal-label", normal_label,
                      "label of normal records (default: everything else)");
    sweep->add_option("--outlier-count", outlier_count,
                      "outliers mixed in per run (default: whole pool)");
    sweep->add_option("--mix-mode", mix_mode, "first or random")->capture_default_str();
    sweep->add_option("--normal-sample", normal_sample,
                      "subsample this many normals per run (0 = all)");
    sweep->add_option("--metric", sweep_metric)->capture_default_str();
    sweep->add_option("--backend", sweep_backend)->capture_default_str();
    sweep->add_option("--threads", sweep_threads, "worker threads (0 = all cores)");
    sweep->add_option("-o,--output", sweep_output,
                      "output prefix (default $LDOF_OUT_DIR/sweep)");

    // verify
    auto* verify = app.add_subcommand("verify", "Monte-Carlo checks of the LDOF theorems");
    int theorem = 0;
    std::size_t vd = 3, vk = 100, samples = 5000, trials = 1000;
    double c = 1.0;
    std::string verify_output;
    unsigned verify_threads = 0;
    std::optional<std::uint64_t> verify_seed;
    std::uint64_t verify_seed_raw = 0;
    verify->add_option("--theorem", theorem, "1 (lower bound) or 2 (false-detection bound)")
        ->required();
    verify->add_option("-d", vd, "dimension")->capture_default_str();
    verify->add_option("-k", vk, "neighborhood size")->capture_default_str();
    verify->add_option("-c", c, "LDOF threshold (theorem 2)")->capture_default_str();
    verify->add_option("--samples", samples, "ball sample size (theorem 1)")->capture_default_str();
    verify->add_option("--trials", trials, "Monte-Carlo repetitions")->capture_default_str();
    auto* verify_seed_flag = verify->add_option("--seed", verify_seed_raw, "seed");
    verify->add_option("--threads", verify_threads, "worker threads (0 = all cores)");
    verify->add_option("-o,--output", verify_output, "JSON report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (*k_flag) k_opt = k_raw;
    if (*gen_seed_flag) gen_seed = gen_seed_raw;
    if (*sweep_seed_flag) sweep_seed = sweep_seed_raw;
    if (*verify_seed_flag) verify_seed = verify_seed_raw;

    try {
        if (*detect)
            return cmd_detect(detect_in, method, n, k_opt, metric, backend, threads, output);
        if (*gen) return cmd_gen(paper_scene, scene_path, gen_seed, gen_output);
        if (*sweep)
            return cmd_sweep(sweep_paper, sweep_in, methods, k_min, k_max, sweep_n, runs,
                             sweep_seed, truth_label, outlier_label, normal_label, outlier_count,
                             mix_mode, normal_sample, sweep_metric, sweep_backend, sweep_threads,
                             sweep_output);
        if (*verify)
            return cmd_verify(theorem, vd, vk, c, samples, trials, verify_seed, verify_threads,
                              verify_output);
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
