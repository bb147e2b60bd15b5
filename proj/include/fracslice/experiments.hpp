#pragma once

// Scenario harness: premeasure trends over a t-grid and a delta ladder,
// slice dimension statistics and direction sweeps.

#include "fracslice/errors.hpp"
#include "fracslice/ifs.hpp"
#include "fracslice/projection.hpp"
#include "fracslice/slicing.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace fracslice {

enum class GridWeighting { Pushforward, Uniform };

inline const char* to_string(GridWeighting w) { return w == GridWeighting::Pushforward ? "pushforward" : "uniform"; }

struct Scenario {
    IFS ifs = IFS({{0.5, {0.0, 0.0}}, {0.5, {0.5, 0.0}}});
    std::string ifs_source = "inline";
    Direction direction = Direction::from_angle(0.0);
    std::size_t t_count = 64;
    GridWeighting weighting = GridWeighting::Pushforward;
    std::uint64_t seed = 1;
    std::vector<double> deltas;          // strictly decreasing
    double r_divisor = 32.0;             // cover resolution r = min(delta) / r_divisor
    std::vector<double> dimension_ladder{1e-1, 3.1622776601683794e-2, 1e-2, 3.1622776601683794e-3,
                                         1e-3, 3.1622776601683795e-4, 1e-4};
    std::size_t threads = 0;             // 0 = hardware concurrency
    std::size_t cylinder_cap = kDefaultCylinderCap;

    void validate() const
    {
        if (deltas.size() < 4)
            throw ValidationError(ErrorCode::InvalidArgument, "delta ladder needs at least 4 rungs");
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            if (!(deltas[i] > 0.0))
                throw ValidationError(ErrorCode::InvalidArgument, "delta rungs must be positive");
            if (i > 0 && !(deltas[i] < deltas[i - 1]))
                throw ValidationError(ErrorCode::InvalidArgument, "delta ladder must be strictly decreasing");
        }
        if (t_count < 16)
            throw ValidationError(ErrorCode::InvalidArgument, "t-grid needs at least 16 points");
        if (!(r_divisor >= 1.0))
            throw ValidationError(ErrorCode::InvalidArgument, "r_divisor must be >= 1");
        if (!(deltas.back() / r_divisor < 1.0))
            throw ValidationError(ErrorCode::InvalidArgument, "cover resolution must be < 1");
    }

    double cover_resolution() const { return deltas.back() / r_divisor; }
};

/// Runs f(0..n-1) on up to `threads` workers; results come back in index order.
template <class F>
auto parallel_map(std::size_t n, std::size_t threads, F&& f) -> std::vector<decltype(f(std::size_t{}))>
{
    using R = decltype(f(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(f(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(n, 1));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < threads; ++w)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots)
        out.push_back(std::move(*s));
    return out;
}

inline std::vector<double> t_grid(const Scenario& sc)
{
    std::vector<double> ts;
    if (sc.weighting == GridWeighting::Pushforward) {
        for (const Vec2& x : sample_natural_measure(sc.ifs, sc.t_count, sc.seed))
            ts.push_back(dot(x, sc.direction.unit));
    } else {
        const Interval ext = attractor_extent(project_ifs(sc.ifs, sc.direction));
        for (std::size_t i = 0; i < sc.t_count; ++i)
            ts.push_back(ext.lo + (static_cast<double>(i) + 0.5) * ext.length() / static_cast<double>(sc.t_count));
    }
    std::ranges::sort(ts);
    return ts;
}

struct Quartiles {
    double mean = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0;
};

/// Linear-interpolated quantiles (type 7).
inline double quantile(std::vector<double> v, double p)
{
    if (v.empty())
        return 0.0;
    std::ranges::sort(v);
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline Quartiles summarize(const std::vector<double>& v)
{
    Quartiles q;
    if (v.empty())
        return q;
    for (double x : v)
        q.mean += x;
    q.mean /= static_cast<double>(v.size());
    q.q1 = quantile(v, 0.25);
    q.median = quantile(v, 0.5);
    q.q3 = quantile(v, 0.75);
    return q;
}

struct ConditionSummary {
    bool b_holds = false;
    bool b_prime_holds = false;
    bool ssc_certified = false;
    double ssc_gap = 0.0;
    std::vector<std::string> warnings;
};

inline ConditionSummary check_conditions(const IFS& ifs, const Direction& dir)
{
    ConditionSummary c;
    const ProjectedIFS p = project_ifs(ifs, dir);
    c.b_holds = !check_condition_B(p).coincidence;
    c.b_prime_holds = check_condition_B_prime(p).holds;
    const SeparationReport sep = check_strong_separation(ifs, 8);
    c.ssc_certified = sep.separated;
    c.ssc_gap = sep.gap;
    if (!c.b_prime_holds)
        c.warnings.emplace_back("condition B' fails for this direction");
    if (!c.ssc_certified)
        c.warnings.emplace_back("strong separation not certified");
    if (ifs.dimension() <= 1.0)
        c.warnings.emplace_back("similarity dimension <= 1: packing exponent s-1 is not positive");
    return c;
}

struct PremeasureRow {
    double t = 0.0;
    double delta = 0.0;
    double premeasure = 0.0;
    std::size_t items = 0;
};

enum class TrendVerdict { Growing, NotGrowing };

inline const char* to_string(TrendVerdict v) { return v == TrendVerdict::Growing ? "Growing" : "NotGrowing"; }

struct TrendReport {
    std::vector<double> ts;
    std::vector<double> deltas;          // as in the scenario (decreasing)
    std::vector<PremeasureRow> rows;     // ordered by (t, delta ladder position)
    std::vector<Quartiles> per_delta;    // aligned with `deltas`
    std::size_t monotone_points = 0;     // t's whose values are non-decreasing in delta
    double growth_factor = 0.0;          // median at largest delta / median at smallest delta
    bool medians_monotone = false;
    TrendVerdict verdict = TrendVerdict::NotGrowing;
    double cover_resolution = 0.0;
    ConditionSummary conditions;
    double dimension = 0.0;
    std::string budget_error; // non-empty: some t's hit the cylinder cap, rows are partial

    bool partial() const { return !budget_error.empty(); }
};

inline constexpr double kGrowthThreshold = 1.1;

/// Premeasure estimates P_delta^{s-1}(K_t) over the t-grid and delta ladder.
///
/// Each t uses one cover at r = min(delta) / r_divisor, so per-t values are
/// exactly non-decreasing in delta. The trend is read with delta increasing:
/// medians must never drop and must grow by at least kGrowthThreshold from
/// the smallest to the largest delta. A growth verdict is a finite-resolution
/// trend only.
inline TrendReport divergence_study(const Scenario& sc)
{
    sc.validate();
    TrendReport rep;
    rep.conditions = check_conditions(sc.ifs, sc.direction);
    rep.dimension = sc.ifs.dimension();
    rep.deltas = sc.deltas;
    rep.ts = t_grid(sc);
    rep.cover_resolution = sc.cover_resolution();
    const double s = sc.ifs.dimension();

    const auto per_t = parallel_map(rep.ts.size(), sc.threads, [&](std::size_t i) {
        std::vector<PremeasureRow> rows;
        std::string error;
        try {
            const SliceCover cover =
                slice_cover(sc.ifs, sc.direction, rep.ts[i], rep.cover_resolution, sc.cylinder_cap);
            for (double delta : sc.deltas) {
                const Packing p = pack_premeasure(cover, delta, s);
                rows.push_back({rep.ts[i], delta, p.value, p.items.size()});
            }
        } catch (const BudgetExceeded& e) {
            rows.clear();
            error = e.what();
        }
        return std::pair{std::move(rows), std::move(error)};
    });

    std::vector<std::vector<double>> by_delta(sc.deltas.size());
    for (const auto& [rows, error] : per_t) {
        if (!error.empty()) {
            if (rep.budget_error.empty())
                rep.budget_error = error;
            continue;
        }
        bool mono = true;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            by_delta[k].push_back(rows[k].premeasure);
            if (k > 0 && rows[k].premeasure > rows[k - 1].premeasure)
                mono = false;
        }
        rep.monotone_points += mono ? 1 : 0;
        rep.rows.insert(rep.rows.end(), rows.begin(), rows.end());
    }
    for (const auto& v : by_delta)
        rep.per_delta.push_back(summarize(v));

    rep.medians_monotone = true;
    for (std::size_t k = 1; k < rep.per_delta.size(); ++k)
        if (rep.per_delta[k].median > rep.per_delta[k - 1].median)
            rep.medians_monotone = false;
    if (rep.partial())
        return rep;
    const double smallest = rep.per_delta.back().median;
    rep.growth_factor = smallest > 0.0 ? rep.per_delta.front().median / smallest : 0.0;
    rep.verdict = rep.medians_monotone && rep.growth_factor >= kGrowthThreshold ? TrendVerdict::Growing
                                                                                : TrendVerdict::NotGrowing;
    return rep;
}

struct SliceDimRow {
    double t = 0.0;
    double slope = 0.0;
    double residual = 0.0;
    bool empty = false;
};

struct SliceDimReport {
    std::vector<SliceDimRow> rows;
    std::size_t empty_slices = 0;
    double median_slope = 0.0;
    double q1 = 0.0, q3 = 0.0;
    double target = 0.0; // s - 1
    double band = 0.15;
    bool within_band = false;
};

inline SliceDimReport slice_dimension_study(const Scenario& sc)
{
    sc.validate();
    SliceDimReport rep;
    rep.target = sc.ifs.dimension() - 1.0;
    const auto ts = t_grid(sc);
    rep.rows = parallel_map(ts.size(), sc.threads, [&](std::size_t i) {
        const SliceDimension d = box_dimension_slice(sc.ifs, sc.direction, ts[i], sc.dimension_ladder, sc.cylinder_cap);
        const bool empty = std::ranges::all_of(d.counts, [](std::size_t c) { return c == 0; });
        return SliceDimRow{ts[i], d.slope, d.residual, empty};
    });
    std::vector<double> slopes;
    for (const auto& r : rep.rows) {
        if (r.empty)
            ++rep.empty_slices;
        else
            slopes.push_back(r.slope);
    }
    rep.median_slope = quantile(slopes, 0.5);
    rep.q1 = quantile(slopes, 0.25);
    rep.q3 = quantile(slopes, 0.75);
    rep.within_band = !slopes.empty() && std::abs(rep.median_slope - rep.target) <= rep.band;
    return rep;
}

struct AngleSummary {
    double theta = 0.0;
    std::vector<std::pair<Word, Word>> overlaps;
    bool b_coincidence = false;
    bool b_prime_holds = false;
    DensityVerdict density = DensityVerdict::BoundedSuggested;
    Interval extent;
    bool exceptional = false; // overlap or fixed-point coincidence found
    bool eligible = false;    // B' holds and strong separation certified
};

struct SweepReport {
    std::vector<AngleSummary> angles;
    std::size_t exceptional = 0;
    std::size_t eligible = 0;
};

inline SweepReport angle_sweep(const IFS& ifs, const std::vector<double>& angles, std::size_t depth,
                               double tol = kDefaultTolerance,
                               const std::vector<double>& density_ladder = {1.0 / 16, 1.0 / 64, 1.0 / 256},
                               std::size_t threads = 0, std::size_t cap = kDefaultCylinderCap)
{
    const bool ssc = check_strong_separation(ifs, 8).separated;
    SweepReport rep;
    rep.angles = parallel_map(angles.size(), threads, [&](std::size_t i) {
        AngleSummary a;
        a.theta = angles[i];
        const ProjectedIFS p = project_ifs(ifs, Direction::from_angle(angles[i]));
        a.overlaps = detect_exact_overlaps(p, depth, tol, cap);
        a.b_coincidence = check_condition_B(p, tol).coincidence;
        a.b_prime_holds = check_condition_B_prime(p, tol).holds;
        a.density = density_boundedness_diagnostic(p, density_ladder, cap).verdict;
        a.extent = attractor_extent(p);
        a.exceptional = !a.overlaps.empty() || a.b_coincidence;
        a.eligible = a.b_prime_holds && ssc;
        return a;
    });
    for (const auto& a : rep.angles) {
        rep.exceptional += a.exceptional ? 1 : 0;
        rep.eligible += a.eligible ? 1 : 0;
    }
    return rep;
}

inline std::vector<double> random_angles(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(unit_draw(rng) * std::numbers::pi);
    return out;
}

} // namespace fracslice
