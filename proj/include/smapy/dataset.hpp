#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "smapy/geometry.hpp"
#include "smapy/rng.hpp"

namespace smapy {

struct Dataset {
    std::vector<std::string> feature_names;
    std::string label_name;
    std::vector<Point> X;            // n rows of p features
    std::vector<std::string> y;      // n labels
    std::size_t dropped_rows = 0;    // rows discarded during ingestion

    std::size_t n() const { return X.size(); }
    std::size_t p() const { return feature_names.size(); }

    std::vector<std::string> class_labels() const {
        std::vector<std::string> out(y);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
};

namespace detail {

// Comma splitter with double-quote support; no embedded newlines.
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

inline bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && std::isfinite(out);
}

}  // namespace detail

/// Load the named feature and label columns from a CSV file with a header
/// row.  Rows whose selected values are missing or non-finite are dropped
/// (counted in dropped_rows).
inline Dataset load_csv(const std::string& path, const std::vector<std::string>& feature_cols,
                        const std::string& label_col) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("load_csv: empty file " + path);

    std::vector<std::string> cols = detail::split_csv_line(header);
    for (auto& c : cols) c = detail::trim(c);

    auto col_index = [&](const std::string& name) -> std::size_t {
        auto it = std::find(cols.begin(), cols.end(), name);
        if (it == cols.end())
            throw std::runtime_error("load_csv: column '" + name + "' not found in " + path);
        return static_cast<std::size_t>(it - cols.begin());
    };

    std::vector<std::size_t> fidx;
    for (const auto& f : feature_cols) fidx.push_back(col_index(f));
    std::size_t lidx = col_index(label_col);

    Dataset ds;
    ds.feature_names = feature_cols;
    ds.label_name = label_col;

    std::string line;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        std::vector<std::string> fields = detail::split_csv_line(line);
        bool ok = fields.size() >= cols.size();
        Point row(fidx.size());
        for (std::size_t j = 0; ok && j < fidx.size(); ++j)
            ok = detail::parse_double(fields[fidx[j]], row[j]);
        std::string label = ok ? detail::trim(fields[lidx]) : "";
        if (!ok || label.empty()) {
            ++ds.dropped_rows;
            continue;
        }
        ds.X.push_back(std::move(row));
        ds.y.push_back(std::move(label));
    }
    if (ds.X.empty()) throw std::runtime_error("load_csv: no usable rows in " + path);
    return ds;
}

/// Canonical CSV text of a dataset (17 significant digits, byte-stable).
inline std::string dataset_to_csv(const Dataset& ds) {
    std::ostringstream os;
    for (std::size_t j = 0; j < ds.p(); ++j) os << ds.feature_names[j] << ',';
    os << ds.label_name << '\n';
    char buf[40];
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t j = 0; j < ds.p(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.X[i][j]);
            os << buf << ',';
        }
        os << ds.y[i] << '\n';
    }
    return os.str();
}

/// FNV-1a 64-bit digest, hex text.
inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string dataset_digest(const Dataset& ds) { return fnv1a_hex(dataset_to_csv(ds)); }

/// Two-feature synthetic generators ("xor", "moons", "circles", "blobs"),
/// deterministic in the seed.  Feature columns are x1, x2; label column y.
inline Dataset make_synthetic(const std::string& kind, std::size_t n, double noise,
                              std::uint64_t seed) {
    if (n < 8) throw std::invalid_argument("make_synthetic: n must be >= 8");
    if (!(noise >= 0.0)) throw std::invalid_argument("make_synthetic: noise must be >= 0");

    Dataset ds;
    ds.feature_names = {"x1", "x2"};
    ds.label_name = "y";
    ds.X.reserve(n);
    ds.y.reserve(n);
    SplitRng rng(seed, rng_stream::kSynth);

    if (kind == "xor") {
        // Four Gaussian blobs at (+-1, +-1); label A on the main diagonal.
        for (std::size_t i = 0; i < n; ++i) {
            double sx = rng.next_below(2) ? 1.0 : -1.0;
            double sy = rng.next_below(2) ? 1.0 : -1.0;
            ds.X.push_back({sx + noise * rng.next_normal(), sy + noise * rng.next_normal()});
            ds.y.push_back(sx * sy > 0.0 ? "A" : "B");
        }
    } else if (kind == "blobs") {
        // Two well-separated Gaussians: the linear sanity case.
        for (std::size_t i = 0; i < n; ++i) {
            bool a = rng.next_below(2) == 0;
            double cx = a ? -2.0 : 2.0;
            ds.X.push_back({cx + noise * rng.next_normal(), cx + noise * rng.next_normal()});
            ds.y.push_back(a ? "A" : "B");
        }
    } else if (kind == "moons") {
        for (std::size_t i = 0; i < n; ++i) {
            bool a = rng.next_below(2) == 0;
            double t = std::numbers::pi * rng.next_double();
            double x1 = a ? std::cos(t) : 1.0 - std::cos(t);
            double x2 = a ? std::sin(t) : 0.5 - std::sin(t);
            ds.X.push_back({x1 + noise * rng.next_normal(), x2 + noise * rng.next_normal()});
            ds.y.push_back(a ? "A" : "B");
        }
    } else if (kind == "circles") {
        for (std::size_t i = 0; i < n; ++i) {
            bool a = rng.next_below(2) == 0;
            double r = a ? 1.0 : 0.5;
            double t = 2.0 * std::numbers::pi * rng.next_double();
            ds.X.push_back({r * std::cos(t) + noise * rng.next_normal(),
                            r * std::sin(t) + noise * rng.next_normal()});
            ds.y.push_back(a ? "A" : "B");
        }
    } else {
        throw std::invalid_argument("make_synthetic: unknown kind '" + kind + "'");
    }
    return ds;
}

struct FoldSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Stratified k-fold split: per-class counts across test folds differ by at
/// most one; folds are disjoint and cover every row.
inline std::vector<FoldSplit> stratified_kfold(const Dataset& ds, std::size_t k,
                                               std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("stratified_kfold: k must be >= 2");
    std::map<std::string, std::vector<std::size_t>> per_class;
    for (std::size_t i = 0; i < ds.n(); ++i) per_class[ds.y[i]].push_back(i);

    for (const auto& [label, idx] : per_class)
        if (idx.size() < k)
            throw std::runtime_error("stratified_kfold: class '" + label + "' has only " +
                                     std::to_string(idx.size()) + " rows (< k)");

    std::vector<std::vector<std::size_t>> folds(k);
    SplitRng rng(seed, rng_stream::kFolds);
    for (auto& [label, idx] : per_class) {  // map order: ascending label
        rng.shuffle(idx);
        for (std::size_t i = 0; i < idx.size(); ++i) folds[i % k].push_back(idx[i]);
    }

    std::vector<FoldSplit> out(k);
    for (std::size_t f = 0; f < k; ++f) {
        std::sort(folds[f].begin(), folds[f].end());
        out[f].test = folds[f];
        for (std::size_t g = 0; g < k; ++g)
            if (g != f) out[f].train.insert(out[f].train.end(), folds[g].begin(), folds[g].end());
        std::sort(out[f].train.begin(), out[f].train.end());
    }
    return out;
}

/// Fraction of exact label matches.
inline double accuracy(const std::vector<std::string>& truth,
                       const std::vector<std::string>& predicted) {
    if (truth.size() != predicted.size())
        throw std::invalid_argument("accuracy: length mismatch");
    if (truth.empty()) throw std::invalid_argument("accuracy: empty inputs");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (truth[i] == predicted[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace smapy
