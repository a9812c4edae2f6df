#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace smapy {

/// A point in the normalized feature space (nominally [0,1] per axis).
using Point = std::vector<double>;

inline bool all_finite(const Point& x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

/// Margin used by exclude_point when carving an observation out of a zone.
inline constexpr double kExclusionMargin = 1e-6;

/// Axis-aligned box with strictly positive width on every axis.  Activation
/// intervals are closed on both ends.
struct Hypercube {
    std::vector<double> lower;
    std::vector<double> upper;

    Hypercube() = default;
    Hypercube(std::vector<double> lo, std::vector<double> hi)
        : lower(std::move(lo)), upper(std::move(hi)) {
        validate();
    }

    std::size_t dim() const { return lower.size(); }

    void validate() const {
        if (lower.size() != upper.size() || lower.empty())
            throw std::invalid_argument("Hypercube: bound arrays must be non-empty and equal-sized");
        for (std::size_t j = 0; j < lower.size(); ++j) {
            if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]))
                throw std::invalid_argument("Hypercube: non-finite bound");
            if (!(lower[j] < upper[j]))
                throw std::invalid_argument("Hypercube: lower must be strictly below upper on axis " +
                                            std::to_string(j));
        }
    }

    Point center() const {
        Point c(dim());
        for (std::size_t j = 0; j < dim(); ++j) c[j] = 0.5 * (lower[j] + upper[j]);
        return c;
    }
};

namespace detail {
inline void require_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}
}  // namespace detail

/// Product of side lengths; strictly positive for a valid box.
inline double volume(const Hypercube& h) {
    double v = 1.0;
    for (std::size_t j = 0; j < h.dim(); ++j) v *= h.upper[j] - h.lower[j];
    return v;
}

/// Closed-interval membership on every axis.
inline bool contains(const Hypercube& h, const Point& x) {
    detail::require_same_dim(h.dim(), x.size(), "contains");
    for (std::size_t j = 0; j < h.dim(); ++j)
        if (x[j] < h.lower[j] || x[j] > h.upper[j]) return false;
    return true;
}

/// Volume of a ∩ b; zero when disjoint or merely touching.
inline double intersection_volume(const Hypercube& a, const Hypercube& b) {
    detail::require_same_dim(a.dim(), b.dim(), "intersection_volume");
    double v = 1.0;
    for (std::size_t j = 0; j < a.dim(); ++j) {
        double w = std::min(a.upper[j], b.upper[j]) - std::max(a.lower[j], b.lower[j]);
        if (w <= 0.0) return 0.0;
        v *= w;
    }
    return v;
}

/// Intersection volume over the smaller box's volume.  Symmetric, in [0,1],
/// and 1 exactly when one box contains the other.
inline double overlap_index(const Hypercube& a, const Hypercube& b) {
    detail::require_same_dim(a.dim(), b.dim(), "overlap_index");
    double inter = intersection_volume(a, b);
    if (inter <= 0.0) return 0.0;
    double o = inter / std::min(volume(a), volume(b));
    return std::min(o, 1.0);
}

/// New box with the same center and volume multiplied by `factor` (side
/// lengths scale by factor^(1/p) about the center).
inline Hypercube scale(const Hypercube& h, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor))
        throw std::invalid_argument("scale: factor must be positive and finite");
    if (factor == 1.0) return h;
    const double g = std::pow(factor, 1.0 / static_cast<double>(h.dim()));
    Hypercube out = h;
    for (std::size_t j = 0; j < h.dim(); ++j) {
        double c = 0.5 * (h.lower[j] + h.upper[j]);
        double half = 0.5 * (h.upper[j] - h.lower[j]) * g;
        out.lower[j] = c - half;
        out.upper[j] = c + half;
    }
    return out;
}

/// Smallest box containing both inputs.
inline Hypercube bounding_union(const Hypercube& a, const Hypercube& b) {
    detail::require_same_dim(a.dim(), b.dim(), "bounding_union");
    Hypercube out = a;
    for (std::size_t j = 0; j < a.dim(); ++j) {
        out.lower[j] = std::min(a.lower[j], b.lower[j]);
        out.upper[j] = std::max(a.upper[j], b.upper[j]);
    }
    return out;
}

/// Euclidean distance from x to the box; 0 for points inside.
inline double distance_to_point(const Hypercube& h, const Point& x) {
    detail::require_same_dim(h.dim(), x.size(), "distance_to_point");
    double s = 0.0;
    for (std::size_t j = 0; j < h.dim(); ++j) {
        double gap = std::max({0.0, h.lower[j] - x[j], x[j] - h.upper[j]});
        s += gap * gap;
    }
    return std::sqrt(s);
}

namespace detail {

// One single-face cut candidate: move face `side` (0 = lower, 1 = upper) of
// axis `axis` to `new_bound`, discarding `removed` volume.
struct FaceCut {
    std::size_t axis = 0;
    int side = 0;
    double new_bound = 0.0;
    double removed = 0.0;
    bool feasible = false;
};

// Candidates compare by removed volume; near-ties (1e-12 relative) fall back
// to lowest axis, lower side first, so float noise cannot flip the choice.
inline bool cut_less(const FaceCut& a, const FaceCut& b) {
    double tol = 1e-12 * std::max({1.0, std::abs(a.removed), std::abs(b.removed)});
    if (std::abs(a.removed - b.removed) > tol) return a.removed < b.removed;
    if (a.axis != b.axis) return a.axis < b.axis;
    return a.side < b.side;
}

inline Hypercube apply_cut(const Hypercube& h, const FaceCut& cut) {
    Hypercube out = h;
    if (cut.side == 0)
        out.lower[cut.axis] = cut.new_bound;
    else
        out.upper[cut.axis] = cut.new_bound;
    return out;
}

}  // namespace detail

/// Retract `loser` out of its intersection with `winner` by moving the single
/// face whose cut removes the least volume.  Returns nullopt when no
/// single-face cut leaves positive width (loser covered by winner on every
/// axis), i.e. the loser is destroyed.
inline std::optional<Hypercube> push(const Hypercube& winner, const Hypercube& loser) {
    detail::require_same_dim(winner.dim(), loser.dim(), "push");
    if (intersection_volume(winner, loser) <= 0.0)
        throw std::invalid_argument("push: boxes do not overlap");

    std::optional<detail::FaceCut> best;
    for (std::size_t j = 0; j < loser.dim(); ++j) {
        double rest = 1.0;
        for (std::size_t k = 0; k < loser.dim(); ++k)
            if (k != j) rest *= loser.upper[k] - loser.lower[k];

        // Raise the lower face above the winner.
        if (winner.upper[j] < loser.upper[j]) {
            detail::FaceCut c{j, 0, winner.upper[j], (winner.upper[j] - loser.lower[j]) * rest, true};
            if (!best || detail::cut_less(c, *best)) best = c;
        }
        // Drop the upper face below the winner.
        if (winner.lower[j] > loser.lower[j]) {
            detail::FaceCut c{j, 1, winner.lower[j], (loser.upper[j] - winner.lower[j]) * rest, true};
            if (!best || detail::cut_less(c, *best)) best = c;
        }
    }
    if (!best) return std::nullopt;
    return detail::apply_cut(loser, *best);
}

/// Retract `h` so it no longer contains `x`, moving one face to x[j] -/+ the
/// exclusion margin; the (axis, side) pair with minimal removed volume wins.
/// Returns nullopt when every cut would collapse the box.
inline std::optional<Hypercube> exclude_point(const Hypercube& h, const Point& x) {
    if (!contains(h, x)) throw std::invalid_argument("exclude_point: point is outside the box");

    std::optional<detail::FaceCut> best;
    for (std::size_t j = 0; j < h.dim(); ++j) {
        double rest = 1.0;
        for (std::size_t k = 0; k < h.dim(); ++k)
            if (k != j) rest *= h.upper[k] - h.lower[k];

        double lo_bound = x[j] + kExclusionMargin;  // lower face moves up past x
        if (lo_bound < h.upper[j]) {
            detail::FaceCut c{j, 0, lo_bound, (lo_bound - h.lower[j]) * rest, true};
            if (!best || detail::cut_less(c, *best)) best = c;
        }
        double hi_bound = x[j] - kExclusionMargin;  // upper face moves down past x
        if (hi_bound > h.lower[j]) {
            detail::FaceCut c{j, 1, hi_bound, (h.upper[j] - hi_bound) * rest, true};
            if (!best || detail::cut_less(c, *best)) best = c;
        }
    }
    if (!best) return std::nullopt;
    return detail::apply_cut(h, *best);
}

}  // namespace smapy
