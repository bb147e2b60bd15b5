#pragma once

// Concentric rectangle pairs R1 ⊂ R2 around points of K: tall, narrow
// rectangles whose intersection with K sits near the midline. All geometry is
// in the frame of `rotate_to_frame`: x is the projection, y the fiber.

#include "fracslice/errors.hpp"
#include "fracslice/geometry.hpp"
#include "fracslice/ifs.hpp"
#include "fracslice/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace fracslice {

inline constexpr double kKappaShrink = 0.875;

struct LemmaConstants {
    Side side = Side::Left;
    std::size_t letter = 1;   // the unique first-generation piece meeting the endpoint fiber
    double kappa = 0.0;       // the tube of width kappa at the endpoint meets only that piece
    std::size_t N = 1;        // K_{l^N} projects into that tube
    double c = 0.0;           // half-height of R2 is c * rho_omega
    double A = 1.0;           // height of R1 is A * rho_omega * rho_l^k
    double eta = 0.0;         // estimated projection-length fraction
    double tau = 0.0;         // estimated length of pi(K) used for eta
    double tau_resolution = 0.0;
    double gap = 0.0;         // certified first-generation separation
    Interval extent;          // [a, b] = pi(K)
    Rect frame_box;           // attractor box in frame coordinates
    double ratio_l = 0.5;
};

/// Constants of the rectangle construction for direction `dir`.
///
/// Requires condition (B') and a certified strong separation; otherwise
/// throws ConditionBPrimeFails / NotSeparated.
inline LemmaConstants find_constants(const IFS& ifs, const Direction& dir, double tol = kDefaultTolerance,
                                     std::size_t ssc_depth = 8, std::size_t cap = kDefaultCylinderCap)
{
    const ProjectedIFS pifs = project_ifs(ifs, dir);
    const BPrimeReport bp = check_condition_B_prime(pifs, tol);
    if (!bp.holds)
        throw ValidationError(ErrorCode::ConditionBPrimeFails,
                              "both endpoint fibers of the projection meet more than one first-generation piece");
    const SeparationReport sep = check_strong_separation(ifs, ssc_depth);
    if (!sep.separated)
        throw ValidationError(ErrorCode::NotSeparated,
                              "strong separation not certified up to depth " + std::to_string(sep.depth));

    LemmaConstants k;
    k.side = bp.side;
    k.letter = bp.letter();
    k.gap = sep.gap;
    k.extent = attractor_extent(pifs);
    k.frame_box = attractor_bbox(rotate_to_frame(ifs, dir));
    k.ratio_l = pifs.maps[k.letter - 1].ratio;
    const double a = k.extent.lo, b = k.extent.hi, len = k.extent.length();

    k.kappa = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j <= pifs.size(); ++j) {
        if (j == k.letter)
            continue;
        const auto& m = pifs.maps[j - 1];
        k.kappa = std::min(k.kappa, k.side == Side::Left ? m.apply(a) - a : b - m.apply(b));
    }
    // at the full gap the closed tube still touches the neighbouring piece
    k.kappa *= kKappaShrink;

    const double rl = k.ratio_l;
    k.N = 1;
    while (std::pow(rl, static_cast<double>(k.N)) * len > k.kappa)
        ++k.N;

    k.c = sep.gap / 20.0;
    k.A = std::max(1.0, 2.0 * k.frame_box.height());

    const double rl_n = std::pow(rl, static_cast<double>(k.N));
    k.tau_resolution = std::min(0.5, k.kappa / (128.0 * rl_n));
    k.tau = estimate_projection_length(pifs, k.tau_resolution, cap);
    k.eta = std::min(rl_n * k.tau / k.kappa, 1.0 - 1e-12);
    return k;
}

struct RectPair {
    Rect r1;
    Rect r2;
    Word word;
    std::size_t k = 1;
    double C = 1.0;
    Vec2 anchor; // frame coordinates
};

/// Smallest k with aspect h(R2)/w(R2) >= C and R1 ⊆ R2.
inline std::size_t minimal_k(const LemmaConstants& lc, double C, std::size_t max_k = 200)
{
    for (std::size_t k = 1; k <= max_k; ++k) {
        const double rl_km1 = std::pow(lc.ratio_l, static_cast<double>(k - 1));
        const bool aspect = 2.0 * lc.c >= C * rl_km1 * lc.kappa;
        const bool nested = lc.A * rl_km1 * lc.ratio_l <= 2.0 * lc.c;
        if (aspect && nested)
            return k;
    }
    throw ValidationError(ErrorCode::AspectUnreachable, "no k <= " + std::to_string(max_k) + " reaches aspect C");
}

/// Rectangle pair around the fixed point of psi_omega o psi_l^(N+k-1).
/// Pass k = 0 to use minimal_k.
inline RectPair build_rect_pair(const IFS& ifs, const Direction& dir, const Word& omega, std::size_t k,
                                const LemmaConstants& lc, double C)
{
    if (!(C >= 1.0))
        throw ValidationError(ErrorCode::InvalidArgument, "aspect C must be >= 1");
    for (auto letter : omega.letters)
        if (letter < 1 || letter > ifs.size())
            throw ValidationError(ErrorCode::LetterOutOfRange, "word letter out of range");
    const std::size_t k_min = minimal_k(lc, C);
    if (k == 0)
        k = k_min;
    if (k < k_min)
        throw ValidationError(ErrorCode::InvalidArgument,
                              "k = " + std::to_string(k) + " is below the minimal " + std::to_string(k_min));
    if (k > 200)
        throw ValidationError(ErrorCode::AspectUnreachable, "k exceeds the depth budget");

    const IFS frame = rotate_to_frame(ifs, dir);
    const Cylinder cw = cylinder_of(omega, frame);
    const Cylinder anchor_cyl = cylinder_of(omega + Word::repeat(static_cast<std::uint16_t>(lc.letter), lc.N + k - 1), frame);

    RectPair p;
    p.word = omega;
    p.k = k;
    p.C = C;
    p.anchor = anchor_cyl.fixed_point();

    const double rl = lc.ratio_l;
    const double width = cw.ratio * std::pow(rl, static_cast<double>(k - 1)) * lc.kappa;
    const double half2 = lc.c * cw.ratio;
    const double half1 = 0.5 * lc.A * cw.ratio * std::pow(rl, static_cast<double>(k));
    double x0 = 0.0;
    if (lc.side == Side::Left)
        x0 = cw.translation.x + cw.ratio * lc.extent.lo;
    else
        x0 = cw.translation.x + cw.ratio * lc.extent.hi - width;
    const double y = p.anchor.y;
    p.r2 = {x0, x0 + width, y - half2, y + half2};
    p.r1 = {x0, x0 + width, y - half1, y + half1};
    return p;
}

struct RectReport {
    bool i = false;   // anchor in R1, R1 ⊆ R2
    bool ii = false;  // concentric, equal widths, aspect >= C
    bool iii = false; // K ∩ R2 ⊆ R1 (up to r * diam of the attractor box)
    double iv_ratio = 0.0;
    bool iv = false;  // iv_ratio >= eta
    double v_ratio = 0.0; // mu(R2) lower estimate / w(R2)^s
    double mu_lower = 0.0;
    double mu_upper = 0.0;
    bool prefix_ok = false; // every Delta_r cylinder meeting R2 extends omega l^k
    std::size_t cylinders_meeting = 0;

    bool passes_i_to_iv() const { return i && ii && iii && iv; }
};

inline RectReport verify_rect_pair(const IFS& ifs, const Direction& dir, const LemmaConstants& lc, const RectPair& pair,
                                   double r, std::size_t cap = kDefaultCylinderCap)
{
    const double w = pair.r2.width();
    if (!(r > 0.0) || r > w / 16.0)
        throw ValidationError(ErrorCode::InvalidArgument, "verification needs 0 < r <= w(R2)/16");
    const IFS frame = rotate_to_frame(ifs, dir);
    const Rect box = attractor_bbox(frame);
    const double s = ifs.dimension();
    const Word stem = pair.word + Word::repeat(static_cast<std::uint16_t>(lc.letter), pair.k);
    const Rect r1_loose = pair.r1.inflated(r * box.diameter());

    RectReport rep;
    rep.i = pair.r1.contains(pair.anchor) && pair.r2.contains(pair.r1);
    const double tol = 1e-12 * std::max(1.0, pair.r2.diameter());
    rep.ii = std::abs(pair.r1.width() - w) <= tol && std::abs(pair.r1.center().x - pair.r2.center().x) <= tol &&
             std::abs(pair.r1.center().y - pair.r2.center().y) <= tol &&
             pair.r2.height() >= pair.C * w * (1.0 - 1e-12);

    bool inside_r1 = true;
    bool prefix_ok = true;
    std::vector<Interval> proj;
    walk_stopping(
        frame, r, [&](const Cylinder& c) { return c.bbox(box).intersects(pair.r2); },
        [&](const Cylinder& c) {
            const Rect b = c.bbox(box);
            ++rep.cylinders_meeting;
            inside_r1 = inside_r1 && r1_loose.contains(b);
            prefix_ok = prefix_ok && stem.is_prefix_of(c.word);
            const double mass = std::pow(c.ratio, s);
            rep.mu_upper += mass;
            if (pair.r2.contains(b)) {
                rep.mu_lower += mass;
                proj.push_back(b.x_range());
            }
        },
        cap);
    rep.iii = inside_r1;
    rep.prefix_ok = prefix_ok;
    rep.iv_ratio = union_length(std::move(proj)) / w;
    // both sides can agree exactly (same cylinders at matching scales); allow rounding
    rep.iv = rep.iv_ratio >= lc.eta * (1.0 - 1e-9);
    rep.v_ratio = rep.mu_lower / std::pow(w, s);
    return rep;
}

/// Greedy disjoint selection, widest R2 first (ties keep input order).
inline std::vector<RectPair> vitali_select(const std::vector<RectPair>& pairs)
{
    std::vector<std::size_t> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return pairs[a].r2.width() > pairs[b].r2.width(); });
    std::vector<RectPair> kept;
    for (std::size_t idx : order) {
        const Rect& cand = pairs[idx].r2;
        if (std::ranges::none_of(kept, [&](const RectPair& k) { return k.r2.intersects(cand); }))
            kept.push_back(pairs[idx]);
    }
    return kept;
}

/// min over distinct Delta_r cylinders of dist(bbox, bbox) / r, in the frame of `ifs`.
inline double measure_separation_constant(const IFS& ifs, double r, std::size_t cap = kDefaultCylinderCap)
{
    const Rect box = attractor_bbox(ifs);
    std::vector<Rect> boxes;
    for (const auto& c : stopping_partition(ifs, r, cap))
        boxes.push_back(c.bbox(box));
    std::ranges::sort(boxes, {}, &Rect::x0);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < boxes.size(); ++i)
        for (std::size_t j = i + 1; j < boxes.size() && boxes[j].x0 - boxes[i].x1 < best; ++j)
            best = std::min(best, distance(boxes[i], boxes[j]));
    return best / r;
}

} // namespace fracslice
