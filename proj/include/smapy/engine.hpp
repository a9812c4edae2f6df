#pragma once

#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "smapy/agents.hpp"
#include "smapy/geometry.hpp"
#include "smapy/learners.hpp"
#include "smapy/rng.hpp"

namespace smapy {

/// Whole-system state: one strictly sequential writer per instance.
struct SystemState {
    SystemParams params;
    LearnerConfig learner_template;
    PerceptState percept;
    std::vector<ContextAgent> agents;  // ascending id order
    std::uint64_t next_agent_id = 0;
    std::uint64_t cycle = 0;

    SystemState() = default;
    SystemState(SystemParams p, LearnerConfig learner, std::size_t dim)
        : params(p), learner_template(learner), percept(dim) {
        params.validate();
        learner_template.validate();
        if (dim < 1) throw std::invalid_argument("SystemState: dim must be >= 1");
    }

    std::size_t dim() const { return percept.dim(); }

    ContextAgent* find_agent(std::uint64_t id) {
        for (auto& a : agents)
            if (a.id == id) return &a;
        return nullptr;
    }
    const ContextAgent* find_agent(std::uint64_t id) const {
        for (const auto& a : agents)
            if (a.id == id) return &a;
        return nullptr;
    }

    void remove_agent(std::uint64_t id) {
        for (auto it = agents.begin(); it != agents.end(); ++it) {
            if (it->id == id) {
                agents.erase(it);
                return;
            }
        }
    }
};

/// What one exploration cycle did.
struct StepOutcome {
    std::optional<std::string> prediction;  // head selection; absent on incompetence
    bool incompetence = false;
    std::uint32_t competitions = 0;
    std::uint32_t conflicts = 0;
};

enum class PairOutcome { pushed, pushed_destroyed, absorbed };

namespace detail {

/// Winner of an NCS pair: higher score, ties to the lower id.
inline std::uint64_t ncs_winner(const SystemState& s, std::uint64_t a, std::uint64_t b) {
    const ContextAgent* A = s.find_agent(a);
    const ContextAgent* B = s.find_agent(b);
    double sa = context_score(*A, s.params);
    double sb = context_score(*B, s.params);
    if (sa != sb) return sa > sb ? a : b;
    return std::min(a, b);
}

}  // namespace detail

/// Competition: both agents proposed the same class over a positive-volume
/// overlap.  With an overlap threshold O set and exceeded, the winner absorbs
/// the loser (bounding union, loser removed, winner's knowledge unchanged);
/// otherwise the winner pushes the loser out of the intersection.
inline PairOutcome resolve_competition(SystemState& s, std::uint64_t a, std::uint64_t b) {
    std::uint64_t w = detail::ncs_winner(s, a, b);
    std::uint64_t l = (w == a) ? b : a;
    ContextAgent* winner = s.find_agent(w);
    ContextAgent* loser = s.find_agent(l);
    if (s.params.O && overlap_index(winner->zone, loser->zone) > *s.params.O) {
        winner->zone = bounding_union(winner->zone, loser->zone);
        s.remove_agent(l);
        return PairOutcome::absorbed;
    }
    auto pushed = push(winner->zone, loser->zone);
    if (!pushed) {
        s.remove_agent(l);
        return PairOutcome::pushed_destroyed;
    }
    loser->zone = *pushed;
    return PairOutcome::pushed;
}

/// Conflict: different proposed classes over a positive-volume overlap.  The
/// higher-score agent pushes the other.
inline PairOutcome resolve_conflict(SystemState& s, std::uint64_t a, std::uint64_t b) {
    std::uint64_t w = detail::ncs_winner(s, a, b);
    std::uint64_t l = (w == a) ? b : a;
    ContextAgent* winner = s.find_agent(w);
    ContextAgent* loser = s.find_agent(l);
    auto pushed = push(winner->zone, loser->zone);
    if (!pushed) {
        s.remove_agent(l);
        return PairOutcome::pushed_destroyed;
    }
    loser->zone = *pushed;
    return PairOutcome::pushed;
}

namespace detail {

// Re-resolve pairs until no two live members of `ids` overlap with positive
// volume.  Pairs are enumerated ascending by (id, id) and the intersection is
// re-checked before each resolution; absorption can re-create overlap with an
// already-separated partner, hence the outer fixpoint loop.  Absorptions
// remove an agent and pushes only shrink, so the loop terminates.
template <typename ClassOf>
inline void resolve_pairs_fixpoint(SystemState& s, const std::vector<std::uint64_t>& ids,
                                   ClassOf&& label_of, StepOutcome& out) {
    bool dirty = true;
    while (dirty) {
        dirty = false;
        for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
            for (std::size_t j = i + 1; j < ids.size(); ++j) {
                ContextAgent* A = s.find_agent(ids[i]);
                if (!A) break;
                ContextAgent* B = s.find_agent(ids[j]);
                if (!B) continue;
                if (intersection_volume(A->zone, B->zone) <= 0.0) continue;
                if (label_of(ids[i]) == label_of(ids[j])) {
                    resolve_competition(s, ids[i], ids[j]);
                    ++out.competitions;
                } else {
                    resolve_conflict(s, ids[i], ids[j]);
                    ++out.conflicts;
                }
                dirty = true;
            }
        }
    }
}

}  // namespace detail

/// Incompetence during exploration: create a fresh agent of half-width R
/// around x, seed its model with (x, y), then resolve every NCS the new zone
/// generates against the existing population.
inline void resolve_incompetence_explore(SystemState& s, const Point& x, const std::string& y,
                                         StepOutcome& out) {
    std::vector<double> lo(s.dim()), hi(s.dim());
    for (std::size_t j = 0; j < s.dim(); ++j) {
        lo[j] = x[j] - s.params.R;
        hi[j] = x[j] + s.params.R;
    }
    ContextAgent agent;
    agent.id = s.next_agent_id++;
    agent.zone = Hypercube(std::move(lo), std::move(hi));
    agent.model = OnlineLinearModel(s.learner_template, s.dim());
    agent.model.partial_fit(x, y);
    const std::uint64_t new_id = agent.id;
    s.agents.push_back(std::move(agent));

    bool dirty = true;
    while (dirty) {
        dirty = false;
        ContextAgent* fresh = s.find_agent(new_id);
        if (!fresh) return;  // destroyed by an earlier resolution
        std::vector<std::uint64_t> others;
        for (const auto& a : s.agents)
            if (a.id != new_id) others.push_back(a.id);
        for (std::uint64_t other_id : others) {
            fresh = s.find_agent(new_id);
            if (!fresh) return;
            ContextAgent* other = s.find_agent(other_id);
            if (!other) continue;
            if (intersection_volume(fresh->zone, other->zone) <= 0.0) continue;
            bool same = fresh->model.predict(x) == other->model.predict(x);
            if (same) {
                resolve_competition(s, new_id, other_id);
                ++out.competitions;
            } else {
                resolve_conflict(s, new_id, other_id);
                ++out.conflicts;
            }
            dirty = true;
        }
    }
}

/// One exploration cycle: normalize, activate, propose/select/feedback, then
/// resolve the NCS among the agents activated this cycle.
inline StepOutcome explore_step(SystemState& s, const Point& raw, const std::string& y) {
    if (raw.size() != s.dim()) throw std::invalid_argument("explore_step: dimension mismatch");
    if (!all_finite(raw)) throw std::invalid_argument("explore_step: non-finite input");

    s.percept.observe(raw);
    const Point x = s.percept.normalize(raw);

    std::vector<std::uint64_t> activated;
    for (const auto& a : s.agents)
        if (contains(a.zone, x)) activated.push_back(a.id);

    StepOutcome out;
    if (activated.empty()) {
        out.incompetence = true;
        resolve_incompetence_explore(s, x, y, out);
    } else {
        std::vector<Proposal> proposals;
        std::map<std::uint64_t, std::string> proposed;
        for (std::uint64_t id : activated) {
            const ContextAgent* a = s.find_agent(id);
            std::string label = context_propose(*a, x);
            proposals.push_back({id, label, context_score(*a, s.params)});
            proposed[id] = label;
        }
        out.prediction = head_select(proposals);

        // Every activated agent gets feedback on its own proposal.
        for (std::uint64_t id : activated) {
            ContextAgent* a = s.find_agent(id);
            if (context_apply_feedback(*a, x, y, proposed[id], s.params) == FeedbackResult::destroyed)
                s.remove_agent(id);
        }

        // Post-feedback scores drive the reorganization.
        detail::resolve_pairs_fixpoint(
            s, activated, [&](std::uint64_t id) -> const std::string& { return proposed[id]; }, out);
    }
    ++s.cycle;
    return out;
}

/// Prediction without any state mutation.  Activated agents go through the
/// Head; with no activation the agent nearest to x (boundary distance, ties
/// by higher score then lower id) answers.
inline std::string exploit_step(const SystemState& s, const Point& raw) {
    if (s.agents.empty()) throw std::runtime_error("exploit_step: system has no agents");
    const Point x = s.percept.normalize(raw);

    std::vector<Proposal> proposals;
    for (const auto& a : s.agents)
        if (contains(a.zone, x))
            proposals.push_back({a.id, a.model.predict(x), context_score(a, s.params)});
    if (!proposals.empty()) return head_select(proposals);

    const ContextAgent* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    double best_score = -1.0;
    for (const auto& a : s.agents) {
        double d = distance_to_point(a.zone, x);
        double sc = context_score(a, s.params);
        if (d < best_d || (d == best_d && sc > best_score)) {
            best = &a;
            best_d = d;
            best_score = sc;
        }
    }
    return best->model.predict(x);
}

/// One row of the training log.
struct CycleRecord {
    std::uint64_t cycle = 0;
    std::size_t n_agents = 0;
    std::uint64_t ncs_incompetence = 0;  // cumulative within the fit call
    std::uint64_t ncs_competition = 0;
    std::uint64_t ncs_conflict = 0;
    double running_accuracy = 0.0;
};

struct TrainLog {
    std::vector<CycleRecord> records;

    std::string to_csv() const {
        std::ostringstream os;
        os << "cycle,n_agents,ncs_incompetence,ncs_competition,ncs_conflict,running_accuracy\n";
        for (const auto& r : records) {
            char acc[32];
            std::snprintf(acc, sizeof(acc), "%.6f", r.running_accuracy);
            os << r.cycle << ',' << r.n_agents << ',' << r.ncs_incompetence << ','
               << r.ncs_competition << ',' << r.ncs_conflict << ',' << acc << '\n';
        }
        return os.str();
    }
};

/// Batch exploration: extrema pre-pass over the whole set, then one online
/// pass in an order shuffled from `shuffle_seed`.  Cycles where the system
/// had no prediction (incompetence) count as misses in the running accuracy.
inline TrainLog fit(SystemState& s, const std::vector<Point>& X,
                    const std::vector<std::string>& y, std::uint64_t shuffle_seed) {
    if (X.empty()) throw std::invalid_argument("fit: empty dataset");
    if (X.size() != y.size()) throw std::invalid_argument("fit: feature/label size mismatch");

    for (const auto& row : X) s.percept.observe(row);

    TrainLog log;
    log.records.reserve(X.size());
    std::uint64_t n_inc = 0, n_comp = 0, n_conf = 0, n_correct = 0, n_seen = 0;
    for (std::size_t i : shuffled_indices(X.size(), shuffle_seed)) {
        StepOutcome out = explore_step(s, X[i], y[i]);
        n_inc += out.incompetence ? 1 : 0;
        n_comp += out.competitions;
        n_conf += out.conflicts;
        ++n_seen;
        if (out.prediction && *out.prediction == y[i]) ++n_correct;
        log.records.push_back({s.cycle, s.agents.size(), n_inc, n_comp, n_conf,
                               static_cast<double>(n_correct) / static_cast<double>(n_seen)});
    }
    return log;
}

}  // namespace smapy
