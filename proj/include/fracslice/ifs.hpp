#pragma once

// Planar rotation- and reflection-free iterated function systems: maps
// x -> ratio * x + translation, symbolic cylinders and the stopping-time
// partitions built from them.

#include "fracslice/errors.hpp"
#include "fracslice/geometry.hpp"
#include "fracslice/rational.hpp"

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fracslice {

// Exact companion of a Similitude when every scalar was given as a rational.
struct ExactSimilitude {
    Rational ratio;
    Rational tx;
    Rational ty;

    friend bool operator==(const ExactSimilitude&, const ExactSimilitude&) = default;
};

struct Similitude {
    double ratio = 0.5;
    Vec2 translation{};
    std::optional<ExactSimilitude> exact;

    Similitude() = default;
    Similitude(double r, Vec2 w) : ratio(r), translation(w) {}

    static Similitude from_exact(Rational r, Rational tx, Rational ty)
    {
        Similitude s(to_double(r), {to_double(tx), to_double(ty)});
        s.exact = ExactSimilitude{std::move(r), std::move(tx), std::move(ty)};
        return s;
    }

    constexpr Vec2 apply(Vec2 p) const { return ratio * p + translation; }
    constexpr Vec2 fixed_point() const { return (1.0 / (1.0 - ratio)) * translation; }

    friend bool operator==(const Similitude&, const Similitude&) = default;
};

/// Similarity dimension: the unique s > 0 with sum_j ratios[j]^s = 1.
///
/// Bisection on [0, 2 log q / log(1 / max ratio)]; s -> sum ratio^s is
/// strictly decreasing so the bracket always holds the root.
inline double solve_moran(std::span<const double> ratios)
{
    if (ratios.size() < 2)
        throw ValidationError(ErrorCode::EmptyOrSingleton, "Moran equation needs at least two ratios");
    double rmax = 0.0;
    for (double r : ratios) {
        if (!(r > 0.0 && r < 1.0))
            throw ValidationError(ErrorCode::OutOfRange, "contraction ratio must lie in (0,1), got " + std::to_string(r));
        rmax = std::max(rmax, r);
    }
    auto moran = [&](double s) {
        double sum = 0.0;
        for (double r : ratios)
            sum += std::pow(r, s);
        return sum - 1.0;
    };
    double lo = 0.0;
    double hi = 2.0 * std::log(static_cast<double>(ratios.size())) / std::log(1.0 / rmax);
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        (moran(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

class IFS {
public:
    explicit IFS(std::vector<Similitude> maps) : maps_(std::move(maps))
    {
        if (maps_.size() < 2)
            throw ValidationError(ErrorCode::EmptyOrSingleton, "an IFS needs at least two maps");
        std::vector<double> ratios;
        for (const auto& m : maps_) {
            if (!std::isfinite(m.translation.x) || !std::isfinite(m.translation.y))
                throw ValidationError(ErrorCode::OutOfRange, "translation must be finite");
            ratios.push_back(m.ratio);
        }
        dimension_ = solve_moran(ratios);
    }

    const std::vector<Similitude>& maps() const { return maps_; }
    std::size_t size() const { return maps_.size(); }
    double dimension() const { return dimension_; }

    /// 1-based letter access.
    const Similitude& map(std::size_t letter) const
    {
        if (letter < 1 || letter > maps_.size())
            throw ValidationError(ErrorCode::LetterOutOfRange,
                                  "letter " + std::to_string(letter) + " not in [1," + std::to_string(maps_.size()) + "]");
        return maps_[letter - 1];
    }

    std::vector<double> ratios() const
    {
        std::vector<double> out;
        for (const auto& m : maps_)
            out.push_back(m.ratio);
        return out;
    }

    double min_ratio() const
    {
        return std::ranges::min(maps_, {}, &Similitude::ratio).ratio;
    }
    double max_ratio() const
    {
        return std::ranges::max(maps_, {}, &Similitude::ratio).ratio;
    }

    bool is_exact() const
    {
        return std::ranges::all_of(maps_, [](const Similitude& m) { return m.exact.has_value(); });
    }

    double moran_residual() const
    {
        double sum = 0.0;
        for (const auto& m : maps_)
            sum += std::pow(m.ratio, dimension_);
        return sum - 1.0;
    }

    friend bool operator==(const IFS& a, const IFS& b) { return a.maps_ == b.maps_; }

private:
    std::vector<Similitude> maps_;
    double dimension_ = 0.0;
};

// Finite word over {1..q}; letters are 1-based.
struct Word {
    std::vector<std::uint16_t> letters;

    Word() = default;
    Word(std::initializer_list<std::uint16_t> l) : letters(l) {}
    explicit Word(std::vector<std::uint16_t> l) : letters(std::move(l)) {}

    std::size_t size() const { return letters.size(); }
    bool empty() const { return letters.empty(); }
    std::uint16_t operator[](std::size_t i) const { return letters[i]; }

    bool is_prefix_of(const Word& other) const
    {
        return letters.size() <= other.letters.size() &&
               std::equal(letters.begin(), letters.end(), other.letters.begin());
    }

    Word prefix(std::size_t n) const
    {
        return Word(std::vector<std::uint16_t>(letters.begin(), letters.begin() + static_cast<std::ptrdiff_t>(n)));
    }

    Word operator+(const Word& tail) const
    {
        Word out = *this;
        out.letters.insert(out.letters.end(), tail.letters.begin(), tail.letters.end());
        return out;
    }

    static Word repeat(std::uint16_t letter, std::size_t n)
    {
        return Word(std::vector<std::uint16_t>(n, letter));
    }

    friend auto operator<=>(const Word&, const Word&) = default;
    friend bool operator==(const Word&, const Word&) = default;
};

inline std::string to_string(const Word& w)
{
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < w.size(); ++i)
        os << (i ? "," : "") << w[i];
    os << ')';
    return os.str();
}

/// Parses "1,3,2", "(1,3,2)" or "" / "()" for the empty word.
inline Word parse_word(std::string text, std::size_t q)
{
    std::erase_if(text, [](char c) { return c == '(' || c == ')' || c == ' '; });
    Word w;
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (tok.empty())
            continue;
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(tok, &used);
        } catch (const std::exception&) {
            throw ValidationError(ErrorCode::Parse, "bad letter '" + tok + "'");
        }
        if (used != tok.size())
            throw ValidationError(ErrorCode::Parse, "bad letter '" + tok + "'");
        if (v < 1 || static_cast<std::size_t>(v) > q)
            throw ValidationError(ErrorCode::LetterOutOfRange, "letter " + tok + " not in [1," + std::to_string(q) + "]");
        w.letters.push_back(static_cast<std::uint16_t>(v));
    }
    return w;
}

// The composed map x -> ratio * x + translation of psi_{w1} o ... o psi_{wm}.
struct Cylinder {
    Word word;
    double ratio = 1.0;
    Vec2 translation{};

    constexpr Vec2 apply(Vec2 p) const { return ratio * p + translation; }
    constexpr Rect bbox(const Rect& attractor) const { return attractor.scaled(ratio, translation); }
    constexpr Vec2 fixed_point() const { return (1.0 / (1.0 - ratio)) * translation; }
};

inline Cylinder compose(const Cylinder& parent, std::size_t letter, const IFS& ifs)
{
    const Similitude& m = ifs.map(letter);
    Cylinder out;
    out.word = parent.word;
    out.word.letters.push_back(static_cast<std::uint16_t>(letter));
    out.ratio = parent.ratio * m.ratio;
    out.translation = parent.translation + parent.ratio * m.translation;
    return out;
}

inline Cylinder cylinder_of(const Word& w, const IFS& ifs)
{
    Cylinder c;
    for (auto letter : w.letters)
        c = compose(c, letter, ifs);
    return c;
}

/// Smallest axis-parallel box containing the attractor. Every coordinate map
/// is increasing, so each extreme is the fixed point of a single map.
inline Rect attractor_bbox(const IFS& ifs)
{
    Rect box{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& m : ifs.maps()) {
        const Vec2 fp = m.fixed_point();
        box.x0 = std::min(box.x0, fp.x);
        box.x1 = std::max(box.x1, fp.x);
        box.y0 = std::min(box.y0, fp.y);
        box.y1 = std::max(box.y1, fp.y);
    }
    return box;
}

struct SeparationReport {
    bool separated = false;
    double gap = 0.0;        // certified lower bound on first-generation distances (if separated)
    std::size_t depth = 0;   // depth of the box covers used
    std::size_t witness_i = 0, witness_j = 0; // closest pair of first-generation pieces (1-based)
    double witness_distance = 0.0;
};

/// Certifies the strong separation condition with nested box covers.
///
/// At depth n each first-generation piece psi_i(K) is covered by the boxes of
/// its q^(n-1) descendants of word length n. If all pairwise cover distances
/// are positive the minimum is a true lower bound on the gap. A negative
/// result only says the covers still touch at the deepest depth tried.
inline SeparationReport check_strong_separation(const IFS& ifs, std::size_t max_depth,
                                                std::size_t max_boxes_per_piece = 4096)
{
    if (max_depth < 1)
        throw ValidationError(ErrorCode::InvalidArgument, "max_depth must be >= 1");
    const Rect kbox = attractor_bbox(ifs);
    const std::size_t q = ifs.size();
    SeparationReport report;

    std::vector<std::vector<Cylinder>> level(q);
    for (std::size_t i = 1; i <= q; ++i)
        level[i - 1].push_back(compose(Cylinder{}, i, ifs));

    for (std::size_t depth = 1; depth <= max_depth; ++depth) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 1, bj = 2;
        for (std::size_t i = 0; i < q; ++i) {
            for (std::size_t j = i + 1; j < q; ++j) {
                double d = std::numeric_limits<double>::infinity();
                for (const auto& a : level[i]) {
                    const Rect ra = a.bbox(kbox);
                    for (const auto& b : level[j]) {
                        d = std::min(d, distance(ra, b.bbox(kbox)));
                        if (d == 0.0)
                            break;
                    }
                    if (d == 0.0)
                        break;
                }
                if (d < best) {
                    best = d;
                    bi = i + 1;
                    bj = j + 1;
                }
            }
        }
        report.depth = depth;
        report.witness_i = bi;
        report.witness_j = bj;
        report.witness_distance = best;
        if (best > 0.0) {
            report.separated = true;
            report.gap = best;
            return report;
        }
        if (depth == max_depth || level[0].size() * q > max_boxes_per_piece)
            break;
        for (auto& piece : level) {
            std::vector<Cylinder> next;
            next.reserve(piece.size() * q);
            for (const auto& c : piece)
                for (std::size_t l = 1; l <= q; ++l)
                    next.push_back(compose(c, l, ifs));
            piece = std::move(next);
        }
    }
    return report;
}

// Relative slack on the stopping test so that r = rho^n computed by pow()
// and the product of n ratios land on the same side of the threshold.
inline constexpr double kStoppingSlack = 1e-12;

/// Depth-first walk over Delta_r in lexicographic word order.
///
/// `keep(cyl)` prunes subtrees: a cylinder it rejects is neither visited nor
/// refined. `visit(cyl)` receives every kept member of Delta_r.
template <class Keep, class Visit>
void walk_stopping(const IFS& ifs, double r, Keep&& keep, Visit&& visit, std::size_t cap = kDefaultCylinderCap)
{
    if (!(r > 0.0 && r < 1.0))
        throw ValidationError(ErrorCode::OutOfRange, "stopping threshold r must lie in (0,1)");
    const double threshold = r * (1.0 + kStoppingSlack);
    std::size_t count = 0;
    auto rec = [&](auto& self, const Cylinder& parent) -> void {
        for (std::size_t letter = 1; letter <= ifs.size(); ++letter) {
            Cylinder child = compose(parent, letter, ifs);
            if (!keep(std::as_const(child)))
                continue;
            if (child.ratio <= threshold) {
                if (++count > cap)
                    throw BudgetExceeded(cap, "stopping partition");
                visit(std::as_const(child));
            } else {
                self(self, child);
            }
        }
    };
    rec(rec, Cylinder{});
}

/// The stopping partition Delta_r: words with ratio <= r whose parent has ratio > r.
inline std::vector<Cylinder> stopping_partition(const IFS& ifs, double r, std::size_t cap = kDefaultCylinderCap)
{
    std::vector<Cylinder> out;
    walk_stopping(
        ifs, r, [](const Cylinder&) { return true; }, [&](const Cylinder& c) { out.push_back(c); }, cap);
    return out;
}

/// Maps a 64-bit draw to [0,1) with 53 random bits.
inline double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::size_t draw_letter(std::span<const double> cumulative, std::mt19937_64& rng)
{
    const double u = unit_draw(rng);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1) + 1;
}

inline std::vector<double> natural_weights(const IFS& ifs)
{
    std::vector<double> p;
    for (const auto& m : ifs.maps())
        p.push_back(std::pow(m.ratio, ifs.dimension()));
    return p;
}

inline std::vector<double> cumulative_weights(std::span<const double> weights)
{
    std::vector<double> cum(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        cum[i] = (acc += weights[i]);
    for (auto& c : cum)
        c /= acc;
    return cum;
}

/// Chaos-game samples of the natural self-similar measure, started at the
/// fixed point of map 1 with 64 discarded burn-in steps.
inline std::vector<Vec2> sample_natural_measure(const IFS& ifs, std::size_t n, std::uint64_t seed)
{
    if (n < 1)
        throw ValidationError(ErrorCode::InvalidArgument, "sample count must be >= 1");
    const auto cum = cumulative_weights(natural_weights(ifs));
    std::mt19937_64 rng(seed);
    Vec2 x = ifs.map(1).fixed_point();
    for (int i = 0; i < 64; ++i)
        x = ifs.map(draw_letter(cum, rng)).apply(x);
    std::vector<Vec2> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        x = ifs.map(draw_letter(cum, rng)).apply(x);
        out.push_back(x);
    }
    return out;
}

/// Random word whose letters are drawn from the natural weights.
inline Word random_word(const IFS& ifs, std::size_t length, std::mt19937_64& rng)
{
    const auto cum = cumulative_weights(natural_weights(ifs));
    Word w;
    for (std::size_t i = 0; i < length; ++i)
        w.letters.push_back(static_cast<std::uint16_t>(draw_letter(cum, rng)));
    return w;
}

} // namespace fracslice
