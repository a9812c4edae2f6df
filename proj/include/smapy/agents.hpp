#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smapy/geometry.hpp"
#include "smapy/learners.hpp"

namespace smapy {

/// Per-feature running extrema; the normalization frame of the system.
struct PerceptState {
    std::vector<double> mins;
    std::vector<double> maxs;
    std::uint64_t observations = 0;

    PerceptState() = default;
    explicit PerceptState(std::size_t dim) : mins(dim), maxs(dim) {}

    std::size_t dim() const { return mins.size(); }

    void observe(const Point& raw) {
        detail::require_same_dim(dim(), raw.size(), "PerceptState::observe");
        if (!all_finite(raw)) throw std::invalid_argument("PerceptState: non-finite observation");
        if (observations == 0) {
            mins = raw;
            maxs = raw;
        } else {
            for (std::size_t j = 0; j < dim(); ++j) {
                mins[j] = std::min(mins[j], raw[j]);
                maxs[j] = std::max(maxs[j], raw[j]);
            }
        }
        ++observations;
    }

    /// Min-max normalization to [0,1], clamped; zero-range axes map to 0.5.
    Point normalize(const Point& raw) const {
        detail::require_same_dim(dim(), raw.size(), "PerceptState::normalize");
        if (observations == 0)
            throw std::runtime_error("PerceptState: normalize called before any observation");
        Point x(dim());
        for (std::size_t j = 0; j < dim(); ++j) {
            double range = maxs[j] - mins[j];
            if (range <= 0.0) {
                x[j] = 0.5;
            } else {
                x[j] = std::clamp((raw[j] - mins[j]) / range, 0.0, 1.0);
            }
        }
        return x;
    }
};

enum class ScoreNorm { sigmoid };

inline std::string to_string(ScoreNorm n) {
    switch (n) {
        case ScoreNorm::sigmoid: return "sigmoid";
    }
    throw std::logic_error("unknown ScoreNorm");
}

inline ScoreNorm score_norm_from_string(const std::string& s) {
    if (s == "sigmoid") return ScoreNorm::sigmoid;
    throw std::invalid_argument("unknown score normalization: " + s);
}

/// External parameters of the system (the tuning surface of the grid search).
struct SystemParams {
    double R = 0.2;                  // initial half-width of new agents, normalized units
    std::optional<double> O;         // overlap threshold enabling absorption
    bool E = false;                  // point exclusion on wrong predictions
    ScoreNorm score_norm = ScoreNorm::sigmoid;
    double alpha = 0.1;              // expansion / retraction volume factor
    double F_plus = 1.0;             // positive feedback weight
    double F_minus = 1.0;            // negative feedback weight

    void validate() const {
        if (!(R > 0.0)) throw std::invalid_argument("SystemParams: R must be > 0");
        if (O && !(*O > 0.0 && *O <= 1.0))
            throw std::invalid_argument("SystemParams: O must be in (0,1]");
        if (!(alpha >= 0.0 && alpha < 1.0))
            throw std::invalid_argument("SystemParams: alpha must be in [0,1)");
        if (!(F_plus > 0.0) || !(F_minus > 0.0))
            throw std::invalid_argument("SystemParams: F_plus and F_minus must be > 0");
    }
};

/// A Context agent: activation zone, confidence track record, local model.
struct ContextAgent {
    std::uint64_t id = 0;
    Hypercube zone;
    double confidence = 0.0;
    std::uint64_t correct_count = 0;
    std::uint64_t wrong_count = 0;
    OnlineLinearModel model;
};

/// Score of an agent: the confidence pushed through the normalization
/// function (sigmoid), a strictly increasing map into (0,1).
inline double context_score(const ContextAgent& agent, const SystemParams& params) {
    switch (params.score_norm) {
        case ScoreNorm::sigmoid: return stable_sigmoid(agent.confidence);
    }
    throw std::logic_error("unknown ScoreNorm");
}

/// Class proposal of an activated agent.
inline std::string context_propose(const ContextAgent& agent, const Point& x) {
    if (!contains(agent.zone, x))
        throw std::invalid_argument("context_propose: point outside the agent's zone");
    return agent.model.predict(x);
}

struct Proposal {
    std::uint64_t agent_id = 0;
    std::string label;
    double score = 0.0;
};

/// Head selection: the proposal with the highest score wins; exact score ties
/// go to a majority vote among the tied proposals, and a tied vote goes to
/// the lowest label.
inline std::string head_select(const std::vector<Proposal>& proposals) {
    if (proposals.empty()) throw std::invalid_argument("head_select: no proposals");
    double best_score = proposals[0].score;
    for (const auto& p : proposals) best_score = std::max(best_score, p.score);

    std::map<std::string, std::size_t> votes;
    for (const auto& p : proposals)
        if (p.score == best_score) ++votes[p.label];

    std::size_t best_votes = 0;
    const std::string* winner = nullptr;
    for (const auto& [label, count] : votes) {
        if (count > best_votes) {  // map iterates labels in ascending order
            best_votes = count;
            winner = &label;
        }
    }
    return *winner;
}

/// Feedback outcome for one activated agent.
enum class FeedbackResult { kept, destroyed };

/// Apply the Head's feedback to an activated agent for observation (x, truth)
/// given the label the agent proposed this cycle.
///
/// Correct proposal: confidence += F+, zone expands by factor (1+alpha),
/// model reinforced with (x, truth).  Wrong proposal with exclusion enabled:
/// confidence -= F-, the point is carved out of the zone, the model is left
/// untouched.  Wrong without exclusion: confidence -= F-, model fine-tuned
/// with (x, truth), zone retracts by factor (1-alpha).
inline FeedbackResult context_apply_feedback(ContextAgent& agent, const Point& x,
                                             const std::string& truth, const std::string& proposed,
                                             const SystemParams& params) {
    if (proposed == truth) {
        agent.confidence += params.F_plus;
        ++agent.correct_count;
        agent.zone = scale(agent.zone, 1.0 + params.alpha);
        agent.model.partial_fit(x, truth);
        return FeedbackResult::kept;
    }
    agent.confidence -= params.F_minus;
    ++agent.wrong_count;
    if (params.E) {
        auto carved = exclude_point(agent.zone, x);
        if (!carved) return FeedbackResult::destroyed;
        agent.zone = *carved;
        return FeedbackResult::kept;
    }
    agent.model.partial_fit(x, truth);
    agent.zone = scale(agent.zone, 1.0 - params.alpha);
    return FeedbackResult::kept;
}

}  // namespace smapy
