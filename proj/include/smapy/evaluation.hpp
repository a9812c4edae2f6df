#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "smapy/dataset.hpp"
#include "smapy/engine.hpp"

namespace smapy {

// ---------------------------------------------------------------------------
// Standalone baselines

struct StandaloneModel {
    PerceptState percept;
    OnlineLinearModel model;
};

/// Train a standalone learner: min-max pre-pass over the training rows, then
/// `epochs` shuffled online passes.  Pass e uses the same shuffled order the
/// engine would use for its pass e under the same seed.
inline StandaloneModel standalone_fit(const LearnerConfig& config, const std::vector<Point>& X,
                                      const std::vector<std::string>& y, std::size_t epochs,
                                      std::uint64_t seed) {
    if (X.empty()) throw std::invalid_argument("standalone_fit: empty dataset");
    if (X.size() != y.size())
        throw std::invalid_argument("standalone_fit: feature/label size mismatch");
    if (epochs < 1) throw std::invalid_argument("standalone_fit: epochs must be >= 1");

    StandaloneModel sm{PerceptState(X[0].size()), OnlineLinearModel(config, X[0].size())};
    for (const auto& row : X) sm.percept.observe(row);
    for (std::size_t e = 0; e < epochs; ++e)
        for (std::size_t i : shuffled_indices(X.size(), seed, e))
            sm.model.partial_fit(sm.percept.normalize(X[i]), y[i]);
    return sm;
}

inline std::string standalone_predict(const StandaloneModel& sm, const Point& raw) {
    return sm.model.predict(sm.percept.normalize(raw));
}

// ---------------------------------------------------------------------------
// Grids

/// Ordered parameter grid; the first axis varies slowest during enumeration.
struct GridSpec {
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;

    std::size_t combo_count() const {
        std::size_t n = 1;
        for (const auto& [name, values] : axes) {
            if (values.empty()) throw std::invalid_argument("GridSpec: axis '" + name + "' is empty");
            n *= values.size();
        }
        return n;
    }

    /// Combo `index` as (name, value) pairs, odometer order.
    std::vector<std::pair<std::string, std::string>> combo(std::size_t index) const {
        std::vector<std::pair<std::string, std::string>> out(axes.size());
        std::size_t radix = combo_count();
        for (std::size_t a = 0; a < axes.size(); ++a) {
            radix /= axes[a].second.size();
            out[a] = {axes[a].first, axes[a].second[(index / radix) % axes[a].second.size()]};
        }
        return out;
    }
};

/// Model parameter grid (per learner kind): alpha_reg x penalty for the SGD
/// learners, C for the passive-aggressive pair.
inline GridSpec default_model_grid(LearnerKind kind) {
    GridSpec g;
    if (kind == LearnerKind::logistic || kind == LearnerKind::linear_svm) {
        g.axes = {{"alpha_reg", {"0.0001", "0.001", "0.01"}},
                  {"penalty", {"l1", "l2", "elastic_net"}}};
    } else {
        g.axes = {{"C", {"0.5", "1.0", "2.0"}}};
    }
    return g;
}

/// System parameter grid: 3*2*2*1*3*1*3 = 108 combinations.
inline GridSpec default_system_grid() {
    GridSpec g;
    g.axes = {{"R", {"0.1", "0.2", "0.5"}},
              {"O", {"0.2", "0.5"}},
              {"E", {"false", "true"}},
              {"N_c", {"sigmoid"}},
              {"alpha", {"0.0", "0.1", "0.2"}},
              {"F_plus", {"1.0"}},
              {"F_minus", {"0.5", "1.0", "2.0"}}};
    return g;
}

namespace detail {

inline double parse_param_double(const std::string& key, const std::string& value) {
    double out;
    if (!parse_double(value, out))
        throw std::invalid_argument("grid: bad numeric value '" + value + "' for " + key);
    return out;
}

inline bool parse_param_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("grid: bad boolean value '" + value + "' for " + key);
}

}  // namespace detail

/// Apply textual (name, value) pairs onto a learner config.
inline LearnerConfig apply_model_params(LearnerConfig base,
                                        const std::vector<std::pair<std::string, std::string>>& params) {
    for (const auto& [key, value] : params) {
        if (key == "alpha_reg")
            base.alpha_reg = detail::parse_param_double(key, value);
        else if (key == "penalty")
            base.penalty = penalty_from_string(value);
        else if (key == "l1_ratio")
            base.l1_ratio = detail::parse_param_double(key, value);
        else if (key == "eta0")
            base.eta0 = detail::parse_param_double(key, value);
        else if (key == "C")
            base.aggressiveness = detail::parse_param_double(key, value);
        else
            throw std::invalid_argument("grid: unknown model parameter '" + key + "'");
    }
    base.validate();
    return base;
}

/// Apply textual (name, value) pairs onto system parameters.  O accepts
/// "none" to disable the absorption threshold.
inline SystemParams apply_system_params(SystemParams base,
                                        const std::vector<std::pair<std::string, std::string>>& params) {
    for (const auto& [key, value] : params) {
        if (key == "R")
            base.R = detail::parse_param_double(key, value);
        else if (key == "O")
            base.O = (value == "none") ? std::nullopt
                                       : std::optional<double>(detail::parse_param_double(key, value));
        else if (key == "E")
            base.E = detail::parse_param_bool(key, value);
        else if (key == "N_c")
            base.score_norm = score_norm_from_string(value);
        else if (key == "alpha")
            base.alpha = detail::parse_param_double(key, value);
        else if (key == "F_plus")
            base.F_plus = detail::parse_param_double(key, value);
        else if (key == "F_minus")
            base.F_minus = detail::parse_param_double(key, value);
        else
            throw std::invalid_argument("grid: unknown system parameter '" + key + "'");
    }
    base.validate();
    return base;
}

// ---------------------------------------------------------------------------
// Grid search

enum class GridStage { linear, mas };

inline std::string to_string(GridStage s) { return s == GridStage::linear ? "linear" : "mas"; }

struct GridSearchOptions {
    GridStage stage = GridStage::linear;
    LearnerKind learner = LearnerKind::pa1;
    GridSpec model_grid;    // used when stage == linear
    GridSpec system_grid;   // used when stage == mas
    std::vector<std::pair<std::string, std::string>> fixed_model_params;  // stage == mas
    std::size_t k = 5;
    std::uint64_t seed = 0;
    std::size_t epochs = 5;   // standalone baseline passes (stage == linear)
    std::size_t threads = 1;  // combination-level worker pool
};

struct ComboResult {
    std::vector<std::pair<std::string, std::string>> params;
    std::vector<double> fold_acc;
    double mean_acc = 0.0;
    double std_acc = 0.0;
    std::vector<std::vector<std::vector<std::uint64_t>>> fold_confusion;  // [fold][truth][pred]
    double wall_ms = 0.0;
};

struct EvalReport {
    std::string stage;
    std::string learner;
    std::size_t k = 0;
    std::size_t epochs = 0;
    std::uint64_t seed = 0;
    std::string dataset_digest;
    std::vector<std::string> class_labels;
    std::vector<std::pair<std::string, std::string>> fixed_model_params;
    std::vector<ComboResult> combos;
    std::size_t best_index = 0;

    const ComboResult& best() const { return combos.at(best_index); }
};

namespace detail {

/// Per-fold training seed: a named stream of the run seed, independent of the
/// parameter combination so that accuracy differences are attributable to
/// parameters only.
inline std::uint64_t fold_train_seed(std::uint64_t seed, std::size_t fold) {
    return SplitRng(seed, rng_stream::kTrainSeedBase + fold).next_u64();
}

inline std::size_t class_index(const std::vector<std::string>& labels, const std::string& y) {
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == y) return i;
    return labels.size();
}

struct FoldEval {
    double acc = 0.0;
    std::vector<std::vector<std::uint64_t>> confusion;
};

template <typename Predict>
FoldEval eval_fold(const Dataset& ds, const std::vector<std::size_t>& test_idx,
                   const std::vector<std::string>& labels, Predict&& predict) {
    FoldEval fe;
    fe.confusion.assign(labels.size(), std::vector<std::uint64_t>(labels.size(), 0));
    std::size_t hits = 0;
    for (std::size_t i : test_idx) {
        std::string pred = predict(ds.X[i]);
        if (pred == ds.y[i]) ++hits;
        std::size_t t = class_index(labels, ds.y[i]);
        std::size_t p = class_index(labels, pred);
        if (t < labels.size() && p < labels.size()) ++fe.confusion[t][p];
    }
    fe.acc = static_cast<double>(hits) / static_cast<double>(test_idx.size());
    return fe;
}

inline void finish_combo(ComboResult& cr) {
    double mean = 0.0;
    for (double a : cr.fold_acc) mean += a;
    mean /= static_cast<double>(cr.fold_acc.size());
    double var = 0.0;
    for (double a : cr.fold_acc) var += (a - mean) * (a - mean);
    var /= static_cast<double>(cr.fold_acc.size());
    cr.mean_acc = mean;
    cr.std_acc = std::sqrt(var);
}

}  // namespace detail

/// Exhaustive cross-validated search over the stage's grid.  Fold assignments
/// are computed once per call, so every combination sees identical splits.
inline EvalReport grid_search(const Dataset& ds, const GridSearchOptions& opt) {
    if (ds.class_labels().size() < 2)
        throw std::invalid_argument("grid_search: need at least two classes");

    const GridSpec& grid = (opt.stage == GridStage::linear) ? opt.model_grid : opt.system_grid;
    const std::size_t n_combos = grid.combo_count();
    const std::vector<FoldSplit> folds = stratified_kfold(ds, opt.k, opt.seed);
    const std::vector<std::string> labels = ds.class_labels();

    LearnerConfig base_config;
    base_config.kind = opt.learner;
    const LearnerConfig fixed_config = (opt.stage == GridStage::mas)
                                           ? apply_model_params(base_config, opt.fixed_model_params)
                                           : base_config;

    EvalReport report;
    report.stage = to_string(opt.stage);
    report.learner = to_string(opt.learner);
    report.k = opt.k;
    report.epochs = opt.epochs;
    report.seed = opt.seed;
    report.dataset_digest = dataset_digest(ds);
    report.class_labels = labels;
    report.fixed_model_params = opt.fixed_model_params;
    report.combos.resize(n_combos);

    auto run_combo = [&](std::size_t ci) {
        auto t0 = std::chrono::steady_clock::now();
        ComboResult& cr = report.combos[ci];
        cr.params = grid.combo(ci);

        for (std::size_t f = 0; f < folds.size(); ++f) {
            const auto& split = folds[f];
            std::vector<Point> Xtr;
            std::vector<std::string> ytr;
            Xtr.reserve(split.train.size());
            ytr.reserve(split.train.size());
            for (std::size_t i : split.train) {
                Xtr.push_back(ds.X[i]);
                ytr.push_back(ds.y[i]);
            }
            std::uint64_t train_seed = detail::fold_train_seed(opt.seed, f);

            detail::FoldEval fe;
            if (opt.stage == GridStage::linear) {
                LearnerConfig cfg = apply_model_params(base_config, cr.params);
                StandaloneModel sm = standalone_fit(cfg, Xtr, ytr, opt.epochs, train_seed);
                fe = detail::eval_fold(ds, split.test, labels,
                                       [&](const Point& x) { return standalone_predict(sm, x); });
            } else {
                SystemParams sys = apply_system_params(SystemParams{}, cr.params);
                SystemState st(sys, fixed_config, ds.p());
                fit(st, Xtr, ytr, train_seed);
                fe = detail::eval_fold(ds, split.test, labels,
                                       [&](const Point& x) { return exploit_step(st, x); });
            }
            cr.fold_acc.push_back(fe.acc);
            cr.fold_confusion.push_back(std::move(fe.confusion));
        }
        detail::finish_combo(cr);
        cr.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                         .count();
    };

    if (opt.threads <= 1) {
        for (std::size_t ci = 0; ci < n_combos; ++ci) run_combo(ci);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        std::size_t n_workers = std::min(opt.threads, n_combos);
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t ci = next.fetch_add(1); ci < n_combos; ci = next.fetch_add(1))
                    run_combo(ci);
            });
        }
        for (auto& t : pool) t.join();
    }

    report.best_index = 0;
    for (std::size_t ci = 1; ci < n_combos; ++ci)
        if (report.combos[ci].mean_acc > report.combos[report.best_index].mean_acc)
            report.best_index = ci;
    return report;
}

// ---------------------------------------------------------------------------
// Report text format

inline std::string format_params(const std::vector<std::pair<std::string, std::string>>& params) {
    std::string out;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) out += ',';
        out += params[i].first + '=' + params[i].second;
    }
    return out;
}

inline std::vector<std::pair<std::string, std::string>> parse_params(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (item.empty()) continue;
        std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("parse_params: expected name=value, got '" + item + "'");
        out.emplace_back(detail::trim(item.substr(0, eq)), detail::trim(item.substr(eq + 1)));
    }
    return out;
}

namespace detail {
inline std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}
}  // namespace detail

/// Serialize a report.  Tab-separated combo table; wall_ms is the last column
/// and the only non-deterministic content in the file.
inline std::string report_to_text(const EvalReport& r) {
    std::ostringstream os;
    os << "smapy-report v1\n";
    os << "stage: " << r.stage << '\n';
    os << "learner: " << r.learner << '\n';
    os << "k: " << r.k << '\n';
    os << "epochs: " << r.epochs << '\n';
    os << "seed: " << r.seed << '\n';
    os << "dataset_digest: " << r.dataset_digest << '\n';
    os << "classes: ";
    for (std::size_t i = 0; i < r.class_labels.size(); ++i)
        os << (i ? "," : "") << r.class_labels[i];
    os << '\n';
    if (!r.fixed_model_params.empty())
        os << "fixed_model_params: " << format_params(r.fixed_model_params) << '\n';
    os << "combos: " << r.combos.size() << '\n';
    os << "columns: combo_id\tparams\tfold_accs\tmean_acc\tstd_acc\twall_ms\n";
    for (std::size_t ci = 0; ci < r.combos.size(); ++ci) {
        const ComboResult& c = r.combos[ci];
        os << ci << '\t' << format_params(c.params) << '\t';
        for (std::size_t f = 0; f < c.fold_acc.size(); ++f)
            os << (f ? "," : "") << detail::fmt6(c.fold_acc[f]);
        char wall[32];
        std::snprintf(wall, sizeof(wall), "%.3f", c.wall_ms);
        os << '\t' << detail::fmt6(c.mean_acc) << '\t' << detail::fmt6(c.std_acc) << '\t' << wall
           << '\n';
    }
    os << "best_combo: " << r.best_index << '\n';
    os << "best_params: " << format_params(r.best().params) << '\n';
    os << "best_mean_acc: " << detail::fmt6(r.best().mean_acc) << '\n';
    for (std::size_t f = 0; f < r.best().fold_confusion.size(); ++f) {
        os << "best_confusion fold=" << f << ": ";
        const auto& m = r.best().fold_confusion[f];
        for (std::size_t t = 0; t < m.size(); ++t) {
            if (t) os << ';';
            for (std::size_t p = 0; p < m[t].size(); ++p) os << (p ? "," : "") << m[t][p];
        }
        os << '\n';
    }
    return os.str();
}

struct ReportSummary {
    std::string stage;
    std::string learner;
    std::size_t combos = 0;
    std::size_t best_combo = 0;
    std::vector<std::pair<std::string, std::string>> best_params;
    double best_mean_acc = 0.0;
};

/// Extract the header and best-combination facts from report text.
inline ReportSummary parse_report_summary(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "smapy-report v1")
        throw std::runtime_error("parse_report_summary: not a smapy-report v1 document");
    ReportSummary out;
    bool have_best = false;
    while (std::getline(is, line)) {
        auto starts = [&](const char* prefix) { return line.rfind(prefix, 0) == 0; };
        if (starts("stage: "))
            out.stage = line.substr(7);
        else if (starts("learner: "))
            out.learner = line.substr(9);
        else if (starts("combos: "))
            out.combos = std::stoul(line.substr(8));
        else if (starts("best_combo: "))
            out.best_combo = std::stoul(line.substr(12));
        else if (starts("best_params: ")) {
            out.best_params = parse_params(line.substr(13));
            have_best = true;
        } else if (starts("best_mean_acc: "))
            out.best_mean_acc = std::stod(line.substr(15));
    }
    if (!have_best) throw std::runtime_error("parse_report_summary: missing best_params line");
    return out;
}

// ---------------------------------------------------------------------------
// Decision-boundary raster

struct RasterCell {
    double x;
    double y;
    std::string label;
};

struct Raster {
    std::size_t resolution = 0;
    double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
    std::vector<RasterCell> cells;  // row-major: y rows outer, x inner

    std::string to_csv() const {
        std::ostringstream os;
        os << "x,y,label\n";
        char buf[64];
        for (const auto& c : cells) {
            std::snprintf(buf, sizeof(buf), "%.10g,%.10g,", c.x, c.y);
            os << buf << c.label << '\n';
        }
        return os.str();
    }
};

/// Predicted label at every cell center of a resolution x resolution grid
/// over the given ranges.  The predictor works in raw (data) coordinates.
inline Raster boundary_raster(const std::function<std::string(double, double)>& predict,
                              std::pair<double, double> x_range, std::pair<double, double> y_range,
                              std::size_t resolution) {
    if (resolution < 2) throw std::invalid_argument("boundary_raster: resolution must be >= 2");
    if (!(x_range.first < x_range.second) || !(y_range.first < y_range.second))
        throw std::invalid_argument("boundary_raster: empty range");
    Raster r;
    r.resolution = resolution;
    r.x_min = x_range.first;
    r.x_max = x_range.second;
    r.y_min = y_range.first;
    r.y_max = y_range.second;
    const double dx = (r.x_max - r.x_min) / static_cast<double>(resolution);
    const double dy = (r.y_max - r.y_min) / static_cast<double>(resolution);
    r.cells.reserve(resolution * resolution);
    for (std::size_t i = 0; i < resolution; ++i) {
        double cy = r.y_min + (static_cast<double>(i) + 0.5) * dy;
        for (std::size_t j = 0; j < resolution; ++j) {
            double cx = r.x_min + (static_cast<double>(j) + 0.5) * dx;
            r.cells.push_back({cx, cy, predict(cx, cy)});
        }
    }
    return r;
}

/// Raster range for one axis: observed extrema expanded by 5% per side.
inline std::pair<double, double> default_raster_range(double lo, double hi) {
    double span = hi - lo;
    if (span <= 0.0) span = 1.0;
    return {lo - 0.05 * span, hi + 0.05 * span};
}

}  // namespace smapy
