#pragma once

// Line slices K_t = K ∩ pi^{-1}{t} represented by certified interval covers,
// and packing / covering estimates computed from those covers.

#include "fracslice/errors.hpp"
#include "fracslice/geometry.hpp"
#include "fracslice/ifs.hpp"
#include "fracslice/projection.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <vector>

namespace fracslice {

/// Cover of a slice in fiber coordinates (the component along dir.normal()).
///
/// Built from the Delta_r cylinders whose projected extent contains t; the
/// union of `intervals` contains the slice.
struct SliceCover {
    double t = 0.0;
    Direction direction;
    double resolution = 0.0;
    std::vector<Interval> intervals; // sorted, pairwise disjoint
    std::vector<Word> words;         // source cylinders, lexicographic
    double cell_height = 0.0;        // largest single-cylinder fiber extent
    Rect frame_box;                  // attractor box in (projection, fiber) coordinates

    bool empty() const { return intervals.empty(); }
    std::size_t components() const { return intervals.size(); }
};

inline SliceCover slice_cover(const IFS& ifs, const Direction& dir, double t, double r,
                              std::size_t cap = kDefaultCylinderCap)
{
    const IFS frame = rotate_to_frame(ifs, dir);
    SliceCover cover;
    cover.t = t;
    cover.direction = dir;
    cover.resolution = r;
    cover.frame_box = attractor_bbox(frame);
    const double eps = 1e-12 * std::max(1.0, std::abs(t));
    std::vector<Interval> parts;
    walk_stopping(
        frame, r,
        [&](const Cylinder& c) {
            const Rect b = c.bbox(cover.frame_box);
            return b.x0 - eps <= t && t <= b.x1 + eps;
        },
        [&](const Cylinder& c) {
            const Rect b = c.bbox(cover.frame_box);
            parts.push_back(b.y_range());
            cover.words.push_back(c.word);
            cover.cell_height = std::max(cover.cell_height, b.height());
        },
        cap);
    cover.intervals = merge_intervals(std::move(parts));
    return cover;
}

struct PackingItem {
    double center = 0.0;
    double diameter = 0.0;
};

struct Packing {
    std::vector<PackingItem> items; // sorted by center
    double delta = 0.0;
    double exponent = 0.0;
    double value = 0.0;
    std::vector<double> rungs;              // diameters tried, largest first
    std::vector<std::size_t> rung_counts;   // items per rung in the returned packing
};

namespace detail {

// Maximum of sum d^e over packings whose centers are a subset of `centers`
// (sorted) and whose diameters come from `rungs`. Dynamic program over
// (last chosen center, its rung); returns the chosen (center, diameter) list.
inline std::vector<PackingItem> best_rung_packing(const std::vector<double>& centers, const std::vector<double>& rungs,
                                                  double e)
{
    const std::size_t m = centers.size(), nr = rungs.size();
    if (m == 0)
        return {};
    std::vector<double> gain(nr);
    for (std::size_t k = 0; k < nr; ++k)
        gain[k] = std::pow(rungs[k], e);
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    // value[i][k]: best packing whose rightmost item is centers[i] at rungs[k]
    std::vector<double> value(m * nr, 0.0), prefix(m * nr, 0.0);
    std::vector<std::size_t> from(m * nr, none), prefix_at(m * nr, none);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < nr; ++k) {
            double add = 0.0;
            std::size_t arg = none;
            for (std::size_t k2 = 0; k2 < nr; ++k2) {
                const double need = 0.5 * (rungs[k] + rungs[k2]);
                auto cnt = static_cast<std::size_t>(
                    std::lower_bound(centers.begin(), centers.begin() + static_cast<std::ptrdiff_t>(i), centers[i] - need) -
                    centers.begin());
                while (cnt > 0 && !(centers[i] - centers[cnt - 1] > need))
                    --cnt;
                if (cnt > 0 && prefix[(cnt - 1) * nr + k2] > add) {
                    add = prefix[(cnt - 1) * nr + k2];
                    arg = prefix_at[(cnt - 1) * nr + k2] * nr + k2;
                }
            }
            const std::size_t at = i * nr + k;
            value[at] = gain[k] + add;
            from[at] = arg;
            const bool carry = i > 0 && prefix[(i - 1) * nr + k] >= value[at];
            prefix[at] = carry ? prefix[(i - 1) * nr + k] : value[at];
            prefix_at[at] = carry ? prefix_at[(i - 1) * nr + k] : i;
        }
    }
    std::size_t best = 0;
    for (std::size_t at = 0; at < m * nr; ++at)
        if (value[at] > value[best])
            best = at;
    std::vector<PackingItem> items;
    for (std::size_t at = best; at != none; at = from[at])
        items.push_back({centers[at / nr], rungs[at % nr]});
    std::ranges::reverse(items);
    return items;
}

} // namespace detail

/// Lower-bound packing of the cover at exponent s - 1.
///
/// Centers are cover-component midpoints and diameters run over the dyadic
/// ladder delta, delta/2, ... down to four times the cover cell height. The
/// best packing over that family is found exactly. The ladder of 2*delta
/// contains the ladder of delta, so the value is non-decreasing along dyadic
/// multiples of delta for a fixed cover.
inline Packing pack_premeasure(const SliceCover& cover, double delta, double s)
{
    if (!(delta > 0.0))
        throw ValidationError(ErrorCode::InvalidArgument, "delta must be positive");
    const double e = s - 1.0;
    if (!(e > 0.0))
        throw ValidationError(ErrorCode::InvalidArgument, "packing exponent s - 1 must be positive");
    Packing out;
    out.delta = delta;
    out.exponent = e;
    const double cutoff = 4.0 * cover.cell_height;
    out.rungs.push_back(delta);
    while (out.rungs.size() < 64 && out.rungs.back() * 0.5 >= cutoff)
        out.rungs.push_back(out.rungs.back() * 0.5);
    out.rung_counts.assign(out.rungs.size(), 0);

    std::vector<double> centers;
    for (const auto& iv : cover.intervals)
        centers.push_back(iv.mid());
    out.items = detail::best_rung_packing(centers, out.rungs, e);
    for (const auto& it : out.items) {
        out.value += std::pow(it.diameter, e);
        for (std::size_t k = 0; k < out.rungs.size(); ++k)
            if (out.rungs[k] == it.diameter)
                ++out.rung_counts[k];
    }
    return out;
}

/// Checks disjointness, the delta bound and centers-in-cover for a packing.
inline bool packing_is_valid(const Packing& p, const SliceCover& cover)
{
    for (std::size_t i = 0; i < p.items.size(); ++i) {
        const auto& it = p.items[i];
        if (!(it.diameter > 0.0) || it.diameter > p.delta)
            return false;
        if (i > 0) {
            const auto& prev = p.items[i - 1];
            if (!(it.center - prev.center > 0.5 * (it.diameter + prev.diameter)))
                return false;
        }
        if (std::ranges::none_of(cover.intervals, [&](const Interval& iv) { return iv.contains(it.center); }))
            return false;
    }
    return true;
}

struct SliceDimension {
    double slope = 0.0;
    double residual = 0.0;
    std::vector<double> rs;
    std::vector<std::size_t> counts;
};

/// Least-squares slope of log(component count) against log(1/r).
inline SliceDimension box_dimension_slice(const IFS& ifs, const Direction& dir, double t,
                                          const std::vector<double>& r_ladder, std::size_t cap = kDefaultCylinderCap)
{
    if (r_ladder.size() < 4)
        throw ValidationError(ErrorCode::InvalidArgument, "slice dimension ladder needs at least 4 rungs");
    for (std::size_t i = 0; i < r_ladder.size(); ++i) {
        if (!(r_ladder[i] > 0.0 && r_ladder[i] < 1.0))
            throw ValidationError(ErrorCode::OutOfRange, "ladder rungs must lie in (0,1)");
        if (i > 0 && !(r_ladder[i] < r_ladder[i - 1]))
            throw ValidationError(ErrorCode::InvalidArgument, "ladder must be strictly decreasing");
    }
    SliceDimension out;
    out.rs = r_ladder;
    std::vector<double> xs, ys;
    for (double r : r_ladder) {
        const auto n = slice_cover(ifs, dir, t, r, cap).components();
        out.counts.push_back(n);
        if (n > 0) {
            xs.push_back(std::log(1.0 / r));
            ys.push_back(std::log(static_cast<double>(n)));
        }
    }
    if (xs.size() < 2)
        return out;
    const double m = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = m * sxx - sx * sx;
    out.slope = (m * sxy - sx * sy) / denom;
    const double icept = (sy - out.slope * sx) / m;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double res = ys[i] - (icept + out.slope * xs[i]);
        ss += res * res;
    }
    out.residual = std::sqrt(ss / m);
    return out;
}

/// Sum of component lengths to the power e: an upper bound for the
/// e-dimensional Hausdorff content of the slice at this resolution.
inline double hausdorff_content_slice(const SliceCover& cover, double e)
{
    if (!(e > 0.0))
        throw ValidationError(ErrorCode::InvalidArgument, "exponent must be positive");
    double sum = 0.0;
    for (const auto& iv : cover.intervals)
        sum += std::pow(iv.length(), e);
    return sum;
}

} // namespace fracslice
