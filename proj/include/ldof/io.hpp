#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ldof/dataset.hpp"
#include "ldof/datagen.hpp"
#include "ldof/eval.hpp"

namespace ldof::io {

/// Column layout of a delimited text file. A delimiter of ' ' means any
/// run of whitespace (the Shuttle layout). feature_columns empty means
/// "every column not used as id or label". kLastColumn selects the final
/// column without knowing the width up front.
struct CsvSchema {
    static constexpr std::size_t kLastColumn = static_cast<std::size_t>(-1);

    char delimiter = ',';
    bool has_header = false;
    std::optional<std::size_t> id_column;
    std::optional<std::size_t> label_column;
    std::vector<std::size_t> feature_columns;
    bool standardize = false;  // z-score each feature over the loaded rows
};

/// WDBC layout: id, diagnosis (B/M), 30 features.
inline CsvSchema wdbc_schema() {
    CsvSchema s;
    s.id_column = 0;
    s.label_column = 1;
    return s;
}

/// Statlog Shuttle layout: 9 integer features, class label last,
/// whitespace-separated.
inline CsvSchema shuttle_schema() {
    CsvSchema s;
    s.delimiter = ' ';
    s.label_column = CsvSchema::kLastColumn;
    return s;
}

/// Canonical layout written by save_csv: header, id, features, label last.
inline CsvSchema canonical_schema() {
    CsvSchema s;
    s.has_header = true;
    s.id_column = 0;
    s.label_column = CsvSchema::kLastColumn;
    return s;
}

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    if (delimiter == ' ') {
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) fields.push_back(tok);
        return fields;
    }
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delimiter, start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

inline double parse_double(const std::string& field, std::size_t line_no) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw data_error("line " + std::to_string(line_no) + ": not a number: '" + field + "'");
    return value;
}

// 17 significant digits round-trip any IEEE double.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline Dataset standardize(const Dataset& ds);

/// Loads a delimited text file per the schema. Errors carry 1-based line
/// numbers. An id column, when present, is kept as each record's source_id;
/// record ids are always the 0-based row positions.
inline Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {}) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path.string());

    std::string line;
    std::size_t line_no = 0;
    if (schema.has_header) {
        if (!std::getline(in, line)) throw data_error(path.string() + ": empty file");
        ++line_no;
    }

    std::vector<std::vector<std::string>> rows;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = detail::split_line(line, schema.delimiter);
        if (width == 0) {
            width = fields.size();
        } else if (fields.size() != width) {
            throw data_error(path.string() + ": line " + std::to_string(line_no) + ": ragged row (" +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(width) + ")");
        }
        rows.push_back(std::move(fields));
    }
    if (rows.empty()) throw data_error(path.string() + ": no data rows");

    auto resolve = [&](std::size_t col) {
        return col == CsvSchema::kLastColumn ? width - 1 : col;
    };
    const std::optional<std::size_t> id_col =
        schema.id_column ? std::optional{resolve(*schema.id_column)} : std::nullopt;
    const std::optional<std::size_t> label_col =
        schema.label_column ? std::optional{resolve(*schema.label_column)} : std::nullopt;

    std::vector<std::size_t> feat_cols;
    if (schema.feature_columns.empty()) {
        for (std::size_t c = 0; c < width; ++c)
            if (c != id_col.value_or(width) && c != label_col.value_or(width))
                feat_cols.push_back(c);
    } else {
        for (std::size_t c : schema.feature_columns) {
            const std::size_t rc = resolve(c);
            if (rc >= width)
                throw data_error(path.string() + ": feature column " + std::to_string(rc) +
                                 " out of range (width " + std::to_string(width) + ")");
            if (rc == id_col.value_or(width) || rc == label_col.value_or(width))
                throw data_error(path.string() + ": feature column " + std::to_string(rc) +
                                 " overlaps the id/label column");
            feat_cols.push_back(rc);
        }
    }
    if (feat_cols.empty()) throw data_error(path.string() + ": no feature columns");
    for (auto col : {id_col, label_col})
        if (col && *col >= width)
            throw data_error(path.string() + ": column " + std::to_string(*col) +
                             " out of range (width " + std::to_string(width) + ")");

    Dataset ds(feat_cols.size());
    std::vector<double> features(feat_cols.size());
    const std::size_t first_data_line = schema.has_header ? 2 : 1;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        for (std::size_t i = 0; i < feat_cols.size(); ++i)
            features[i] = detail::parse_double(row[feat_cols[i]], first_data_line + r);
        ds.add(features, label_col ? row[*label_col] : std::string{},
               id_col ? row[*id_col] : std::string{});
    }
    return schema.standardize ? standardize(ds) : ds;
}

/// z-scores each feature over the dataset. Constant features become all
/// zeros (reported on stderr).
inline Dataset standardize(const Dataset& ds) {
    const std::size_t n = ds.size(), d = ds.dimension();
    std::vector<double> mean(d, 0.0), var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto f = ds.features(i);
        for (std::size_t a = 0; a < d; ++a) mean[a] += f[a];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto f = ds.features(i);
        for (std::size_t a = 0; a < d; ++a) var[a] += (f[a] - mean[a]) * (f[a] - mean[a]);
    }
    for (double& v : var) v /= static_cast<double>(n);
    for (std::size_t a = 0; a < d; ++a)
        if (var[a] == 0.0)
            std::cerr << "standardize: feature " << a << " is constant, mapped to 0\n";
    Dataset out(d);
    std::vector<double> row(d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto f = ds.features(i);
        for (std::size_t a = 0; a < d; ++a)
            row[a] = var[a] == 0.0 ? 0.0 : (f[a] - mean[a]) / std::sqrt(var[a]);
        out.add(row, ds.label(i), ds.source_id(i));
    }
    return out;
}

/// Rescales each feature to [0, 1] over the dataset (unit range). Constant
/// features become all zeros.
inline Dataset scale_unit_range(const Dataset& ds) {
    const std::size_t n = ds.size(), d = ds.dimension();
    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        const auto f = ds.features(i);
        for (std::size_t a = 0; a < d; ++a) {
            lo[a] = std::min(lo[a], f[a]);
            hi[a] = std::max(hi[a], f[a]);
        }
    }
    Dataset out(d);
    std::vector<double> row(d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto f = ds.features(i);
        for (std::size_t a = 0; a < d; ++a)
            row[a] = hi[a] == lo[a] ? 0.0 : (f[a] - lo[a]) / (hi[a] - lo[a]);
        out.add(row, ds.label(i), ds.source_id(i));
    }
    return out;
}

/// Subset of records whose label satisfies the predicate, reindexed from 0.
/// Each kept record's source_id maps back to the original: the existing
/// source_id if present, else the original row index.
inline Dataset filter_by_label(const Dataset& ds,
                               const std::function<bool(const std::string&)>& keep) {
    Dataset out(ds.dimension());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (!keep(ds.label(i))) continue;
        const std::string& src = ds.source_id(i);
        out.add(ds.features(i), ds.label(i), src.empty() ? std::to_string(i) : src);
    }
    if (out.size() == 0) throw data_error("filter_by_label: no records match");
    return out;
}

/// Writes the canonical layout: id,f0..f{d-1},label; 17-digit floats so a
/// reload reproduces the dataset bit for bit.
inline void save_csv(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path.string());
    out << "id";
    for (std::size_t a = 0; a < ds.dimension(); ++a) out << ",f" << a;
    out << ",label\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const std::string& src = ds.source_id(i);
        out << (src.empty() ? std::to_string(i) : src);
        for (double v : ds.features(i)) out << ',' << detail::format_double(v);
        out << ',' << ds.label(i) << '\n';
    }
    if (!out) throw data_error("write failed: " + path.string());
}

/// rank,id,source_id,label,score,knn_dist,knn_inner_dist — the last two
/// are empty for the baselines.
inline void write_ranking_csv(const std::filesystem::path& path, const Ranking& ranking,
                              const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path.string());
    out << "rank,id,source_id,label,score,knn_dist,knn_inner_dist\n";
    for (std::size_t r = 0; r < ranking.entries.size(); ++r) {
        const OutlierScore& s = ranking.entries[r];
        out << (r + 1) << ',' << s.id << ',' << ds.source_id(s.id) << ',' << ds.label(s.id) << ','
            << detail::format_double(s.score) << ',';
        if (!std::isnan(s.knn_dist)) out << detail::format_double(s.knn_dist);
        out << ',';
        if (!std::isnan(s.knn_inner_dist)) out << detail::format_double(s.knn_inner_dist);
        out << '\n';
    }
    if (!out) throw data_error("write failed: " + path.string());
}

inline void write_sweep_cells_csv(const std::filesystem::path& path,
                                  const eval::SweepReport& report) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path.string());
    out << "method,k,run,seed,precision\n";
    for (const auto& c : report.cells)
        out << to_string(c.method) << ',' << c.k << ',' << c.run << ',' << c.seed << ','
            << detail::format_double(c.precision) << '\n';
    if (!out) throw data_error("write failed: " + path.string());
}

inline void write_sweep_aggregates_csv(const std::filesystem::path& path,
                                       const eval::SweepReport& report) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path.string());
    out << "method,k,mean,stddev,runs\n";
    for (const auto& a : report.aggregates)
        out << to_string(a.method) << ',' << a.k << ',' << detail::format_double(a.mean) << ','
            << detail::format_double(a.stddev) << ',' << a.runs << '\n';
    if (!out) throw data_error("write failed: " + path.string());
}

namespace detail {

// Per-(k, run) precision vectors of one method, ordered by (k, run), for
// paired comparisons. Cells are appended in that order, but sort anyway.
inline std::vector<double> method_vector(const eval::SweepReport& report, Method m) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> rows;
    for (const auto& c : report.cells)
        if (c.method == m) rows.emplace_back(c.k, c.run, c.precision);
    std::sort(rows.begin(), rows.end());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& [k, run, p] : rows) out.push_back(p);
    return out;
}

}  // namespace detail

/// JSON report: metadata, every cell, aggregates, and (when both methods
/// are present) paired t statistics of LDOF against each baseline over the
/// (k, run) cells; null when degenerate (zero variance of differences).
inline void write_sweep_json(const std::filesystem::path& path, const eval::SweepReport& report) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["dataset_id"] = report.dataset_id;
    j["n"] = report.n;
    j["base_seed"] = report.base_seed;
    j["stddev_definition"] = "population";
    j["cells"] = nlohmann::json::array();
    for (const auto& c : report.cells)
        j["cells"].push_back({{"method", to_string(c.method)},
                              {"k", c.k},
                              {"run", c.run},
                              {"seed", c.seed},
                              {"precision", c.precision}});
    j["aggregates"] = nlohmann::json::array();
    for (const auto& a : report.aggregates)
        j["aggregates"].push_back({{"method", to_string(a.method)},
                                   {"k", a.k},
                                   {"mean", a.mean},
                                   {"stddev", a.stddev},
                                   {"runs", a.runs}});
    const auto ldof_vec = detail::method_vector(report, Method::ldof);
    for (Method other : {Method::lof, Method::knn}) {
        const auto key = "paired_t_ldof_vs_" + std::string(to_string(other));
        const auto other_vec = detail::method_vector(report, other);
        if (!ldof_vec.empty() && ldof_vec.size() == other_vec.size() && ldof_vec.size() >= 2) {
            const double t = eval::paired_t_statistic(ldof_vec, other_vec);
            j[key] = std::isfinite(t) ? nlohmann::json(t) : nlohmann::json(nullptr);
        }
    }
    if (!report.issues.empty()) j["issues"] = report.issues;
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw data_error("write failed: " + path.string());
}

/// Scene config format:
/// {"dimension": 2, "seed": 1, "clusters": [{"center": [...], "count": n,
///  "spread": s}, ...], "outliers": [[...], ...]}
inline datagen::SceneSpec load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw data_error(path.string() + ": " + e.what());
    }
    try {
        datagen::SceneSpec spec;
        spec.dimension = j.at("dimension").get<std::size_t>();
        spec.seed = j.value("seed", std::uint64_t{0});
        for (const auto& c : j.at("clusters"))
            spec.clusters.push_back({c.at("center").get<std::vector<double>>(),
                                     c.at("count").get<std::size_t>(), c.at("spread").get<double>()});
        if (j.contains("outliers"))
            spec.outliers = j.at("outliers").get<std::vector<std::vector<double>>>();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw data_error(path.string() + ": bad scene config: " + e.what());
    }
}

inline void save_scene(const std::filesystem::path& path, const datagen::SceneSpec& spec) {
    nlohmann::json j;
    j["dimension"] = spec.dimension;
    j["seed"] = spec.seed;
    j["clusters"] = nlohmann::json::array();
    for (const auto& c : spec.clusters)
        j["clusters"].push_back({{"center", c.center}, {"count", c.count}, {"spread", c.spread}});
    j["outliers"] = spec.outliers;
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

/// Schema config format mirrors CsvSchema; "last" selects the final column.
inline CsvSchema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw data_error(path.string() + ": " + e.what());
    }
    auto column = [&](const char* key) -> std::optional<std::size_t> {
        if (!j.contains(key)) return std::nullopt;
        if (j[key].is_string() && j[key] == "last") return CsvSchema::kLastColumn;
        return j[key].get<std::size_t>();
    };
    try {
        CsvSchema s;
        if (j.contains("delimiter")) {
            const std::string d = j["delimiter"].get<std::string>();
            if (d.size() != 1) throw data_error(path.string() + ": delimiter must be one character");
            s.delimiter = d[0];
        }
        s.has_header = j.value("has_header", false);
        s.id_column = column("id_column");
        s.label_column = column("label_column");
        if (j.contains("feature_columns"))
            s.feature_columns = j["feature_columns"].get<std::vector<std::size_t>>();
        s.standardize = j.value("standardize", false);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw data_error(path.string() + ": bad schema config: " + e.what());
    }
}

}  // namespace ldof::io
