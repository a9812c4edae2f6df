#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smapy/geometry.hpp"

namespace smapy {

inline double stable_sigmoid(double z) {
    if (z >= 0.0) {
        double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

enum class LearnerKind { logistic, linear_svm, pa1, pa2 };
enum class Penalty { l1, l2, elastic_net };

inline std::string to_string(LearnerKind k) {
    switch (k) {
        case LearnerKind::logistic: return "logistic";
        case LearnerKind::linear_svm: return "linear_svm";
        case LearnerKind::pa1: return "pa1";
        case LearnerKind::pa2: return "pa2";
    }
    throw std::logic_error("unknown LearnerKind");
}

inline LearnerKind learner_kind_from_string(const std::string& s) {
    if (s == "logistic") return LearnerKind::logistic;
    if (s == "linear_svm") return LearnerKind::linear_svm;
    if (s == "pa1") return LearnerKind::pa1;
    if (s == "pa2") return LearnerKind::pa2;
    throw std::invalid_argument("unknown learner kind: " + s);
}

inline std::string to_string(Penalty p) {
    switch (p) {
        case Penalty::l1: return "l1";
        case Penalty::l2: return "l2";
        case Penalty::elastic_net: return "elastic_net";
    }
    throw std::logic_error("unknown Penalty");
}

inline Penalty penalty_from_string(const std::string& s) {
    if (s == "l1") return Penalty::l1;
    if (s == "l2") return Penalty::l2;
    if (s == "elastic_net") return Penalty::elastic_net;
    throw std::invalid_argument("unknown penalty: " + s);
}

/// Configuration for one of the four online learners.  Fields that do not
/// apply to the chosen kind must stay unset; validate() rejects them.
struct LearnerConfig {
    LearnerKind kind = LearnerKind::pa1;

    std::optional<double> alpha_reg;       // SGD regularization strength (logistic / linear_svm)
    std::optional<Penalty> penalty;        // logistic / linear_svm
    std::optional<double> l1_ratio;        // elastic_net mixing, in [0,1]
    std::optional<double> eta0;            // SGD initial learning rate
    std::optional<double> aggressiveness;  // C (pa1 / pa2)

    static constexpr double kDefaultAlphaReg = 1e-4;
    static constexpr double kDefaultL1Ratio = 0.5;
    static constexpr double kDefaultEta0 = 1.0;
    static constexpr double kDefaultC = 1.0;

    bool is_sgd() const { return kind == LearnerKind::logistic || kind == LearnerKind::linear_svm; }
    bool is_pa() const { return !is_sgd(); }

    void validate() const {
        if (is_pa()) {
            if (alpha_reg || penalty || l1_ratio || eta0)
                throw std::invalid_argument("LearnerConfig: SGD fields are not valid for " + to_string(kind));
            if (aggressiveness && !(*aggressiveness > 0.0))
                throw std::invalid_argument("LearnerConfig: C must be > 0");
        } else {
            if (aggressiveness)
                throw std::invalid_argument("LearnerConfig: C is not valid for " + to_string(kind));
            if (alpha_reg && !(*alpha_reg > 0.0))
                throw std::invalid_argument("LearnerConfig: alpha_reg must be > 0");
            if (l1_ratio) {
                if (effective_penalty() != Penalty::elastic_net)
                    throw std::invalid_argument("LearnerConfig: l1_ratio applies to elastic_net only");
                if (!(*l1_ratio >= 0.0 && *l1_ratio <= 1.0))
                    throw std::invalid_argument("LearnerConfig: l1_ratio must be in [0,1]");
            }
            if (eta0 && !(*eta0 > 0.0))
                throw std::invalid_argument("LearnerConfig: eta0 must be > 0");
        }
    }

    double effective_alpha_reg() const { return alpha_reg.value_or(kDefaultAlphaReg); }
    Penalty effective_penalty() const { return penalty.value_or(Penalty::l2); }
    double effective_l1_ratio() const { return l1_ratio.value_or(kDefaultL1Ratio); }
    double effective_eta0() const { return eta0.value_or(kDefaultEta0); }
    double effective_c() const { return aggressiveness.value_or(kDefaultC); }
};

/// Per-class coefficient block: p weights followed by the bias.
struct ClassCoefficients {
    std::string label;
    std::vector<double> coef;
};

/// One-versus-rest linear classifier with incremental updates.
///
/// All four kinds share the decision rule argmax_c (w_c . x + b_c), ties
/// going to the lexicographically lowest label.  The bias is carried as an
/// implicit always-1 feature, which keeps the PA closed forms exact.
class OnlineLinearModel {
public:
    OnlineLinearModel() = default;

    OnlineLinearModel(LearnerConfig config, std::size_t dim,
                      const std::vector<std::string>& classes = {})
        : config_(config), dim_(dim) {
        if (dim_ < 1) throw std::invalid_argument("OnlineLinearModel: dim must be >= 1");
        config_.validate();
        for (const auto& c : classes) ensure_class(c);
    }

    const LearnerConfig& config() const { return config_; }
    std::size_t dim() const { return dim_; }
    std::uint64_t update_count() const { return updates_; }

    std::vector<std::string> classes() const {
        std::vector<std::string> out;
        out.reserve(rows_.size());
        for (const auto& r : rows_) out.push_back(r.label);
        return out;
    }

    std::size_t n_classes() const { return rows_.size(); }

    /// One online update with observation (x, y); y is added to the class set
    /// on first sight with zero weights.
    void partial_fit(const Point& x, const std::string& y) {
        check_input(x);
        ensure_class(y);
        switch (config_.kind) {
            case LearnerKind::pa1:
            case LearnerKind::pa2: pa_update(x, y); break;
            case LearnerKind::logistic:
            case LearnerKind::linear_svm: sgd_update(x, y); break;
        }
        ++updates_;
    }

    /// Argmax of per-class decision values; lowest label wins ties.
    std::string predict(const Point& x) const {
        check_input(x);
        if (rows_.empty()) throw std::runtime_error("OnlineLinearModel: no classes seen yet");
        std::size_t best = 0;
        double best_val = decision(rows_[0], x);
        for (std::size_t i = 1; i < rows_.size(); ++i) {
            double v = decision(rows_[i], x);
            if (v > best_val) {
                best_val = v;
                best = i;
            }
        }
        return rows_[best].label;
    }

    /// Decision values aligned with classes().
    std::vector<double> decision_values(const Point& x) const {
        check_input(x);
        std::vector<double> out;
        out.reserve(rows_.size());
        for (const auto& r : rows_) out.push_back(decision(r, x));
        return out;
    }

    std::vector<ClassCoefficients> export_coefficients() const {
        std::vector<ClassCoefficients> out;
        out.reserve(rows_.size());
        for (const auto& r : rows_) {
            ClassCoefficients cc{r.label, r.w};
            cc.coef.push_back(r.b);
            out.push_back(std::move(cc));
        }
        return out;
    }

    /// Replace all per-class coefficients (p weights + bias per class).
    void import_coefficients(const std::vector<ClassCoefficients>& coefs) {
        std::vector<Row> rows;
        for (const auto& cc : coefs) {
            if (cc.coef.size() != dim_ + 1)
                throw std::invalid_argument("import_coefficients: expected " +
                                            std::to_string(dim_ + 1) + " values per class");
            Row r;
            r.label = cc.label;
            r.w.assign(cc.coef.begin(), cc.coef.end() - 1);
            r.b = cc.coef.back();
            rows.push_back(std::move(r));
        }
        std::sort(rows.begin(), rows.end(),
                  [](const Row& a, const Row& b) { return a.label < b.label; });
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (rows[i].label == rows[i - 1].label)
                throw std::invalid_argument("import_coefficients: duplicate class label");
        rows_ = std::move(rows);
    }

    void set_update_count(std::uint64_t t) { updates_ = t; }

private:
    struct Row {
        std::string label;
        std::vector<double> w;
        double b = 0.0;
    };

    void check_input(const Point& x) const {
        if (x.size() != dim_) throw std::invalid_argument("OnlineLinearModel: dimension mismatch");
        if (!all_finite(x)) throw std::invalid_argument("OnlineLinearModel: non-finite input");
    }

    void ensure_class(const std::string& label) {
        auto it = std::lower_bound(rows_.begin(), rows_.end(), label,
                                   [](const Row& r, const std::string& l) { return r.label < l; });
        if (it != rows_.end() && it->label == label) return;
        Row r;
        r.label = label;
        r.w.assign(dim_, 0.0);
        rows_.insert(it, std::move(r));
    }

    static double dot(const std::vector<double>& w, const Point& x) {
        double s = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
        return s;
    }

    static double decision(const Row& r, const Point& x) { return dot(r.w, x) + r.b; }

    void pa_update(const Point& x, const std::string& y) {
        const double c = config_.effective_c();
        double norm2 = dot(x, x) + 1.0;  // bias as constant feature
        for (auto& r : rows_) {
            double s = (r.label == y) ? 1.0 : -1.0;
            double loss = 1.0 - s * decision(r, x);
            if (loss <= 0.0) continue;  // passive: margin already >= 1
            double tau;
            if (config_.kind == LearnerKind::pa1)
                tau = std::min(c, loss / norm2);
            else
                tau = loss / (norm2 + 1.0 / (2.0 * c));
            for (std::size_t j = 0; j < dim_; ++j) r.w[j] += tau * s * x[j];
            r.b += tau * s;
        }
    }

    double penalty_subgradient(double w) const {
        switch (config_.effective_penalty()) {
            case Penalty::l2: return w;
            case Penalty::l1: return w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
            case Penalty::elastic_net: {
                double r = config_.effective_l1_ratio();
                double sgn = w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
                return r * sgn + (1.0 - r) * w;
            }
        }
        throw std::logic_error("unknown Penalty");
    }

    // One SGD step on (loss + alpha * penalty) per one-vs-rest subproblem,
    // with the inverse-scaling schedule eta_t = eta0 / (1 + eta0 * alpha * t).
    void sgd_update(const Point& x, const std::string& y) {
        const double alpha = config_.effective_alpha_reg();
        const double eta0 = config_.effective_eta0();
        const double eta = eta0 / (1.0 + eta0 * alpha * static_cast<double>(updates_));
        for (auto& r : rows_) {
            double s = (r.label == y) ? 1.0 : -1.0;
            double z = decision(r, x);
            double gz;  // d(loss)/dz
            if (config_.kind == LearnerKind::logistic) {
                gz = stable_sigmoid(z) - (s > 0.0 ? 1.0 : 0.0);
            } else {
                gz = (s * z < 1.0) ? -s : 0.0;
            }
            for (std::size_t j = 0; j < dim_; ++j)
                r.w[j] -= eta * (gz * x[j] + alpha * penalty_subgradient(r.w[j]));
            r.b -= eta * gz;  // bias is not penalized
        }
    }

    LearnerConfig config_;
    std::size_t dim_ = 0;
    std::uint64_t updates_ = 0;
    std::vector<Row> rows_;  // sorted by label
};

}  // namespace smapy
