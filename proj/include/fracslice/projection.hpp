#pragma once

// Orthogonal projection of a planar IFS onto a line: the projected line IFS,
// its attractor extent, fixed-point coincidence checks, exact overlaps and
// histogram diagnostics of the projected natural measure.

#include "fracslice/errors.hpp"
#include "fracslice/geometry.hpp"
#include "fracslice/ifs.hpp"
#include "fracslice/rational.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fracslice {

inline constexpr double kDefaultTolerance = 1e-10;

struct Direction {
    double theta = 0.0;
    Vec2 unit{1.0, 0.0};
    // Rational vector parallel to `unit`, when the direction is known exactly.
    std::optional<std::array<Rational, 2>> exact;

    static Direction from_angle(double theta)
    {
        Direction d;
        d.theta = theta;
        d.unit = {std::cos(theta), std::sin(theta)};
        constexpr double half_pi = std::numbers::pi / 2;
        const std::array<std::pair<double, std::array<int, 2>>, 4> axes{
            {{0.0, {1, 0}}, {half_pi, {0, 1}}, {std::numbers::pi, {-1, 0}}, {-half_pi, {0, -1}}}};
        for (const auto& [angle, v] : axes) {
            if (theta == angle) {
                d.unit = {static_cast<double>(v[0]), static_cast<double>(v[1])};
                d.exact = std::array<Rational, 2>{Rational(v[0]), Rational(v[1])};
            }
        }
        return d;
    }

    static Direction from_vector(double x, double y)
    {
        const double n = std::hypot(x, y);
        if (!(n > 0.0) || !std::isfinite(n))
            throw ValidationError(ErrorCode::InvalidArgument, "direction vector must be non-zero and finite");
        Direction d;
        d.theta = std::atan2(y, x);
        d.unit = {x / n, y / n};
        return d;
    }

    static Direction from_exact_vector(const Rational& x, const Rational& y)
    {
        Direction d = from_vector(to_double(x), to_double(y));
        d.exact = std::array<Rational, 2>{x, y};
        return d;
    }

    /// Unit normal; together with `unit` a positively oriented frame.
    Vec2 normal() const { return {-unit.y, unit.x}; }
};

struct LineMap {
    double ratio = 0.5;
    double offset = 0.0;

    constexpr double apply(double t) const { return ratio * t + offset; }
    constexpr double fixed_point() const { return offset / (1.0 - ratio); }
};

struct ExactLineMap {
    Rational ratio;
    Rational offset;

    Rational fixed_point() const { return offset / (1 - ratio); }
};

/// Line IFS t -> ratio_j * t + offset_j with weights p_j.
///
/// When built from a planar system the weights are ratio_j^s. The exact
/// companion, when present, holds offsets <w_j, v> for an unnormalized
/// rational direction v; fixed-point and map coincidences are invariant
/// under that common rescaling.
struct ProjectedIFS {
    std::vector<LineMap> maps;
    std::vector<double> weights;
    double dimension = 0.0;
    std::optional<std::vector<ExactLineMap>> exact;

    std::size_t size() const { return maps.size(); }

    static ProjectedIFS line(std::vector<double> ratios, std::vector<double> offsets)
    {
        if (ratios.size() != offsets.size() || ratios.empty())
            throw ValidationError(ErrorCode::InvalidArgument, "line IFS needs matching non-empty ratio/offset lists");
        ProjectedIFS p;
        p.dimension = ratios.size() >= 2 ? solve_moran(ratios) : 0.0;
        for (std::size_t j = 0; j < ratios.size(); ++j) {
            if (!(ratios[j] > 0.0 && ratios[j] < 1.0))
                throw ValidationError(ErrorCode::OutOfRange, "contraction ratio must lie in (0,1)");
            p.maps.push_back({ratios[j], offsets[j]});
            p.weights.push_back(ratios.size() >= 2 ? std::pow(ratios[j], p.dimension) : 1.0);
        }
        return p;
    }

    static ProjectedIFS line_exact(const std::vector<Rational>& ratios, const std::vector<Rational>& offsets)
    {
        std::vector<double> r, o;
        for (const auto& x : ratios)
            r.push_back(to_double(x));
        for (const auto& x : offsets)
            o.push_back(to_double(x));
        ProjectedIFS p = line(r, o);
        p.exact.emplace();
        for (std::size_t j = 0; j < ratios.size(); ++j)
            p.exact->push_back({ratios[j], offsets[j]});
        return p;
    }
};

inline ProjectedIFS project_ifs(const IFS& ifs, const Direction& dir)
{
    ProjectedIFS p;
    p.dimension = ifs.dimension();
    for (const auto& m : ifs.maps()) {
        p.maps.push_back({m.ratio, dot(m.translation, dir.unit)});
        p.weights.push_back(std::pow(m.ratio, ifs.dimension()));
    }
    if (dir.exact && ifs.is_exact()) {
        const auto& [vx, vy] = *dir.exact;
        p.exact.emplace();
        for (const auto& m : ifs.maps())
            p.exact->push_back({m.exact->ratio, m.exact->tx * vx + m.exact->ty * vy});
    }
    return p;
}

/// Extent [min pi(K), max pi(K)]. Each line map is increasing, so min pi(K)
/// solves a = min_j (rho_j a + c_j), i.e. it is the smallest fixed point;
/// symmetrically for the maximum.
inline Interval attractor_extent(const ProjectedIFS& p)
{
    Interval out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& m : p.maps) {
        out.lo = std::min(out.lo, m.fixed_point());
        out.hi = std::max(out.hi, m.fixed_point());
    }
    return out;
}

struct CoincidenceReport {
    bool coincidence = false;
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // 1-based, i < j
    bool exact = false;
};

/// Condition (B): no two generating maps share a fixed point. Compares
/// exactly when rational data is available, otherwise within `tol`.
inline CoincidenceReport check_condition_B(const ProjectedIFS& p, double tol = kDefaultTolerance)
{
    if (tol < 0.0)
        throw ValidationError(ErrorCode::InvalidArgument, "tolerance must be >= 0");
    CoincidenceReport rep;
    rep.exact = p.exact.has_value();
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = i + 1; j < p.size(); ++j) {
            const bool same = rep.exact
                                  ? (*p.exact)[i].fixed_point() == (*p.exact)[j].fixed_point()
                                  : std::abs(p.maps[i].fixed_point() - p.maps[j].fixed_point()) <= tol;
            if (same)
                rep.pairs.emplace_back(i + 1, j + 1);
        }
    }
    rep.coincidence = !rep.pairs.empty();
    return rep;
}

enum class Side { Left, Right };

inline const char* to_string(Side s) { return s == Side::Left ? "left" : "right"; }

struct BPrimeReport {
    bool holds = false;
    Side side = Side::Left;             // preferred side when both hold
    std::vector<std::size_t> left_pieces;  // maps whose fixed point is min pi(K)
    std::vector<std::size_t> right_pieces; // maps whose fixed point is max pi(K)
    bool left_unique() const { return left_pieces.size() == 1; }
    bool right_unique() const { return right_pieces.size() == 1; }
    std::size_t letter() const { return side == Side::Left ? left_pieces.front() : right_pieces.front(); }
};

/// Condition (B'): an endpoint fiber of the projection meets exactly one
/// first-generation piece. psi_j(K) meets pi^{-1}{a} iff min psi'_j(pi K) = a
/// iff psi'_j(a) = a, so the pieces touching the left fiber are exactly the
/// maps whose fixed point is the minimal one.
inline BPrimeReport check_condition_B_prime(const ProjectedIFS& p, double tol = kDefaultTolerance)
{
    if (tol < 0.0)
        throw ValidationError(ErrorCode::InvalidArgument, "tolerance must be >= 0");
    BPrimeReport rep;
    if (p.exact) {
        const auto& ex = *p.exact;
        Rational lo = ex[0].fixed_point(), hi = lo;
        for (const auto& m : ex) {
            const Rational f = m.fixed_point();
            if (f < lo)
                lo = f;
            if (f > hi)
                hi = f;
        }
        for (std::size_t j = 0; j < ex.size(); ++j) {
            const Rational f = ex[j].fixed_point();
            if (f == lo)
                rep.left_pieces.push_back(j + 1);
            if (f == hi)
                rep.right_pieces.push_back(j + 1);
        }
    } else {
        const Interval ext = attractor_extent(p);
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double f = p.maps[j].fixed_point();
            if (f - ext.lo <= tol)
                rep.left_pieces.push_back(j + 1);
            if (ext.hi - f <= tol)
                rep.right_pieces.push_back(j + 1);
        }
    }
    rep.holds = rep.left_unique() || rep.right_unique();
    rep.side = rep.left_unique() ? Side::Left : Side::Right;
    return rep;
}

struct LineCylinder {
    Word word;
    double ratio = 1.0;
    double offset = 0.0;
    double weight = 1.0;

    constexpr double apply(double t) const { return ratio * t + offset; }
    Interval image(const Interval& ext) const { return {apply(ext.lo), apply(ext.hi)}; }
};

inline LineCylinder compose(const LineCylinder& parent, std::size_t letter, const ProjectedIFS& p)
{
    if (letter < 1 || letter > p.size())
        throw ValidationError(ErrorCode::LetterOutOfRange, "letter out of range");
    const auto& m = p.maps[letter - 1];
    LineCylinder out;
    out.word = parent.word;
    out.word.letters.push_back(static_cast<std::uint16_t>(letter));
    out.ratio = parent.ratio * m.ratio;
    out.offset = parent.offset + parent.ratio * m.offset;
    out.weight = parent.weight * p.weights[letter - 1];
    return out;
}

/// Delta_r walk over the projected system (ratios match the planar one).
template <class Visit>
void walk_stopping(const ProjectedIFS& p, double r, Visit&& visit, std::size_t cap = kDefaultCylinderCap)
{
    if (!(r > 0.0 && r < 1.0))
        throw ValidationError(ErrorCode::OutOfRange, "stopping threshold r must lie in (0,1)");
    const double threshold = r * (1.0 + kStoppingSlack);
    std::size_t count = 0;
    auto rec = [&](auto& self, const LineCylinder& parent) -> void {
        for (std::size_t letter = 1; letter <= p.size(); ++letter) {
            LineCylinder child = compose(parent, letter, p);
            if (child.ratio <= threshold) {
                if (++count > cap)
                    throw BudgetExceeded(cap, "projected stopping partition");
                visit(std::as_const(child));
            } else {
                self(self, child);
            }
        }
    };
    rec(rec, LineCylinder{});
}

/// Irreducible exact overlaps among words of length <= depth.
///
/// Two distinct words overlap when their composed line maps agree. A pair is
/// reported only when no pair of proper non-empty prefixes already agrees;
/// otherwise it is a concatenation of a shorter coincidence (or a common
/// prefix) with a tail whose maps must then agree as well.
inline std::vector<std::pair<Word, Word>> detect_exact_overlaps(const ProjectedIFS& p, std::size_t depth,
                                                                double tol = kDefaultTolerance,
                                                                std::size_t cap = kDefaultCylinderCap)
{
    if (depth < 1)
        throw ValidationError(ErrorCode::InvalidArgument, "overlap depth must be >= 1");
    const std::size_t q = p.size();
    {
        double total = 0.0, level = 1.0;
        for (std::size_t k = 1; k <= depth; ++k)
            total += (level *= static_cast<double>(q));
        if (total > static_cast<double>(cap))
            throw BudgetExceeded(cap, "exact-overlap enumeration");
    }

    struct Entry {
        Word word;
        double ratio;
        double offset;
        Rational eratio;
        Rational eoffset;
    };
    const bool use_exact = p.exact.has_value();
    std::vector<Entry> words;
    std::vector<std::size_t> frontier;
    auto extend = [&](const Entry& parent, std::size_t letter) {
        Entry e;
        e.word = parent.word;
        e.word.letters.push_back(static_cast<std::uint16_t>(letter));
        e.ratio = parent.ratio * p.maps[letter - 1].ratio;
        e.offset = parent.offset + parent.ratio * p.maps[letter - 1].offset;
        if (use_exact) {
            e.eratio = parent.eratio * (*p.exact)[letter - 1].ratio;
            e.eoffset = parent.eoffset + parent.eratio * (*p.exact)[letter - 1].offset;
        }
        return e;
    };
    Entry root{Word{}, 1.0, 0.0, Rational(1), Rational(0)};
    std::vector<Entry> level{root};
    for (std::size_t k = 1; k <= depth; ++k) {
        std::vector<Entry> next;
        for (const auto& e : level)
            for (std::size_t l = 1; l <= q; ++l)
                next.push_back(extend(e, l));
        words.insert(words.end(), next.begin(), next.end());
        level = std::move(next);
    }

    auto agree = [&](const Entry& a, const Entry& b) {
        if (use_exact)
            return a.eratio == b.eratio && a.eoffset == b.eoffset;
        return std::abs(a.ratio - b.ratio) <= tol && std::abs(a.offset - b.offset) <= tol;
    };
    auto prefixes = [&](const Word& w) {
        std::vector<Entry> out;
        Entry cur = root;
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            cur = extend(cur, w[i]);
            out.push_back(cur);
        }
        return out;
    };
    auto irreducible = [&](const Word& u, const Word& v) {
        if (!u.empty() && !v.empty() && u[0] == v[0])
            return false;
        const auto pu = prefixes(u);
        const auto pv = prefixes(v);
        for (const auto& a : pu)
            for (const auto& b : pv)
                if (agree(a, b))
                    return false;
        return true;
    };

    std::vector<std::pair<Word, Word>> out;
    auto consider = [&](const Entry& a, const Entry& b) {
        const Word& u = std::min(a.word, b.word);
        const Word& v = std::max(a.word, b.word);
        if (irreducible(u, v))
            out.emplace_back(u, v);
    };

    if (use_exact) {
        std::map<std::pair<Rational, Rational>, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < words.size(); ++i)
            groups[{words[i].eratio, words[i].eoffset}].push_back(i);
        for (const auto& [key, idx] : groups)
            for (std::size_t x = 0; x < idx.size(); ++x)
                for (std::size_t y = x + 1; y < idx.size(); ++y)
                    consider(words[idx[x]], words[idx[y]]);
    } else {
        std::vector<std::size_t> order(words.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        std::ranges::sort(order, [&](std::size_t a, std::size_t b) {
            return std::pair(words[a].ratio, words[a].offset) < std::pair(words[b].ratio, words[b].offset);
        });
        for (std::size_t x = 0; x < order.size(); ++x) {
            const Entry& a = words[order[x]];
            for (std::size_t y = x + 1; y < order.size() && words[order[y]].ratio - a.ratio <= tol; ++y) {
                const Entry& b = words[order[y]];
                if (std::abs(b.offset - a.offset) <= tol)
                    consider(a, b);
            }
        }
    }
    std::ranges::sort(out);
    return out;
}

/// Removes maps that coincide with an earlier one; weights of merged maps add.
inline ProjectedIFS deduplicate(const ProjectedIFS& p, double tol = kDefaultTolerance)
{
    ProjectedIFS out;
    out.dimension = p.dimension;
    std::vector<ExactLineMap> ex;
    for (std::size_t j = 0; j < p.size(); ++j) {
        bool dup = false;
        for (std::size_t k = 0; k < out.maps.size() && !dup; ++k) {
            const bool same = p.exact ? ((*p.exact)[j].ratio == ex[k].ratio && (*p.exact)[j].offset == ex[k].offset)
                                      : (std::abs(p.maps[j].ratio - out.maps[k].ratio) <= tol &&
                                         std::abs(p.maps[j].offset - out.maps[k].offset) <= tol);
            if (same) {
                out.weights[k] += p.weights[j];
                dup = true;
            }
        }
        if (!dup) {
            out.maps.push_back(p.maps[j]);
            out.weights.push_back(p.weights[j]);
            if (p.exact)
                ex.push_back((*p.exact)[j]);
        }
    }
    if (p.exact)
        out.exact = std::move(ex);
    return out;
}

/// Similarity dimension of the line maps alone (0 for a single map).
inline double line_similarity_dimension(const ProjectedIFS& p)
{
    if (p.size() < 2)
        return 0.0;
    std::vector<double> r;
    for (const auto& m : p.maps)
        r.push_back(m.ratio);
    return solve_moran(r);
}

struct DensityHistogram {
    double bin_width = 0.0;
    double origin = 0.0;
    std::vector<double> masses;
    double resolution = 0.0;

    Interval bin(std::size_t i) const
    {
        return {origin + static_cast<double>(i) * bin_width, origin + static_cast<double>(i + 1) * bin_width};
    }
    double sup_density() const { return std::ranges::max(masses) / bin_width; }
    double support_length() const
    {
        return bin_width * static_cast<double>(std::ranges::count_if(masses, [](double m) { return m > 0.0; }));
    }
};

/// Histogram of the projected natural measure at stopping scale r. Each
/// cylinder's weight is spread uniformly over its projected extent.
inline DensityHistogram pushforward_density(const ProjectedIFS& p, double r, std::size_t bins,
                                            std::size_t cap = kDefaultCylinderCap)
{
    if (bins < 8)
        throw ValidationError(ErrorCode::InvalidArgument, "need at least 8 bins");
    const Interval ext = attractor_extent(p);
    DensityHistogram h;
    h.resolution = r;
    h.masses.assign(bins, 0.0);
    if (ext.length() > 0.0) {
        h.origin = ext.lo;
        h.bin_width = ext.length() / static_cast<double>(bins);
    } else {
        h.bin_width = 1.0 / static_cast<double>(bins);
        h.origin = ext.lo - 0.5 * h.bin_width;
    }
    const auto last = static_cast<double>(bins - 1);
    auto index = [&](double x) {
        return static_cast<std::size_t>(std::clamp(std::floor((x - h.origin) / h.bin_width), 0.0, last));
    };
    auto deposit = [&](const LineCylinder& c) {
        const Interval img = c.image(ext);
        const std::size_t i0 = index(img.lo), i1 = index(img.hi);
        if (i0 == i1 || img.length() <= 0.0) {
            h.masses[i0] += c.weight;
            return;
        }
        for (std::size_t i = i0; i <= i1; ++i) {
            const Interval b = h.bin(i);
            const double lo = i == i0 ? img.lo : std::max(img.lo, b.lo);
            const double hi = i == i1 ? img.hi : std::min(img.hi, b.hi);
            h.masses[i] += c.weight * std::max(0.0, hi - lo) / img.length();
        }
    };
    if (p.size() == 1) {
        h.masses[index(ext.lo)] = 1.0;
        return h;
    }
    walk_stopping(p, r, deposit, cap);
    double total = 0.0;
    for (double m : h.masses)
        total += m;
    for (auto& m : h.masses)
        m /= total;
    return h;
}

enum class DensityVerdict { BoundedSuggested, UnboundedSuggested, SingularSuggested };

inline const char* to_string(DensityVerdict v)
{
    switch (v) {
    case DensityVerdict::BoundedSuggested: return "BoundedSuggested";
    case DensityVerdict::UnboundedSuggested: return "UnboundedSuggested";
    case DensityVerdict::SingularSuggested: return "SingularSuggested";
    }
    return "?";
}

struct DensityRung {
    double r = 0.0;
    std::size_t bins = 0;
    double bin_width = 0.0;
    double sup_density = 0.0;
    double support_length = 0.0;
};

struct DensityDiagnostic {
    std::vector<DensityRung> rungs;
    DensityVerdict verdict = DensityVerdict::BoundedSuggested;
    double stability_factor = 1.2; // window used for the "stable" test
};

/// Heuristic trend read of sup-density across a decreasing r ladder.
///
/// Stable (within a factor 1.2 over the last three rungs) suggests a bounded
/// density; growth with a shrinking support suggests a singular projection;
/// growth on a stable support suggests an unbounded density. This never
/// decides absolute continuity.
inline DensityDiagnostic density_boundedness_diagnostic(const ProjectedIFS& p, const std::vector<double>& r_ladder,
                                                        std::size_t cap = kDefaultCylinderCap)
{
    if (r_ladder.size() < 3)
        throw ValidationError(ErrorCode::InvalidArgument, "density ladder needs at least 3 rungs");
    for (std::size_t i = 1; i < r_ladder.size(); ++i)
        if (!(r_ladder[i] < r_ladder[i - 1]))
            throw ValidationError(ErrorCode::InvalidArgument, "density ladder must be strictly decreasing");
    DensityDiagnostic diag;
    const Interval ext = attractor_extent(p);
    for (double r : r_ladder) {
        const auto bins = static_cast<std::size_t>(std::clamp(std::round(1.0 / r), 8.0, double(1 << 24)));
        const DensityHistogram h = pushforward_density(p, r, bins, cap);
        diag.rungs.push_back({r, bins, h.bin_width, h.sup_density(), h.support_length()});
    }
    if (ext.length() <= 0.0) {
        diag.verdict = DensityVerdict::SingularSuggested;
        return diag;
    }
    const std::size_t n = diag.rungs.size();
    double lo = diag.rungs[n - 3].sup_density, hi = lo;
    for (std::size_t i = n - 3; i < n; ++i) {
        lo = std::min(lo, diag.rungs[i].sup_density);
        hi = std::max(hi, diag.rungs[i].sup_density);
    }
    if (hi <= diag.stability_factor * lo) {
        diag.verdict = DensityVerdict::BoundedSuggested;
        return diag;
    }
    const double first = diag.rungs.front().support_length, last = diag.rungs.back().support_length;
    diag.verdict = (last * diag.stability_factor <= first && last < ext.length())
                       ? DensityVerdict::SingularSuggested
                       : DensityVerdict::UnboundedSuggested;
    return diag;
}

/// Length of the union of projected Delta_r cylinder extents: an upper bound
/// for the length of pi(K), non-increasing as r decreases.
inline double estimate_projection_length(const ProjectedIFS& p, double r, std::size_t cap = kDefaultCylinderCap)
{
    const Interval ext = attractor_extent(p);
    if (p.size() == 1 || ext.length() <= 0.0)
        return 0.0;
    std::vector<Interval> parts;
    walk_stopping(p, r, [&](const LineCylinder& c) { parts.push_back(c.image(ext)); }, cap);
    return union_length(std::move(parts));
}

/// Planar system expressed in the frame (unit, normal): the first coordinate
/// of every point becomes its projection, the second its fiber coordinate.
inline IFS rotate_to_frame(const IFS& ifs, const Direction& dir)
{
    std::vector<Similitude> maps;
    for (const auto& m : ifs.maps())
        maps.emplace_back(m.ratio, Vec2{dot(m.translation, dir.unit), dot(m.translation, dir.normal())});
    return IFS(std::move(maps));
}

} // namespace fracslice
