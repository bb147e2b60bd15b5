#pragma once

// Independent reference computations used only by the tests. They share no
// code paths with the library beyond its plain data types.

#include "fracslice/geometry.hpp"
#include "fracslice/ifs.hpp"
#include "fracslice/projection.hpp"
#include "fracslice/rational.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using fracslice::IFS;
using fracslice::Rational;
using fracslice::Rect;
using fracslice::Similitude;
using fracslice::Vec2;
using fracslice::Word;
using quad = boost::multiprecision::cpp_bin_float_quad;

// 113-bit bisection of sum r^s = 1 on [0, 64].
inline double moran(const std::vector<double>& ratios)
{
    quad lo = 0, hi = 64;
    for (int i = 0; i < 300; ++i) {
        const quad mid = (lo + hi) / 2;
        quad sum = 0;
        for (double r : ratios)
            sum += boost::multiprecision::pow(quad(r), mid);
        (sum > 1 ? lo : hi) = mid;
    }
    return static_cast<double>((lo + hi) / 2);
}

struct WordRatio {
    Word word;
    double ratio;
};

// Delta_r by breadth-first expansion of every word; same stopping slack as
// the library so boundary ties resolve identically.
inline std::vector<Word> partition_bfs(const IFS& ifs, double r)
{
    const double thr = r * (1.0 + 1e-12);
    std::vector<WordRatio> open{{Word{}, 1.0}};
    std::vector<Word> done;
    while (!open.empty()) {
        std::vector<WordRatio> next;
        for (const auto& [w, rho] : open) {
            for (std::size_t l = 1; l <= ifs.size(); ++l) {
                Word c = w + Word{static_cast<std::uint16_t>(l)};
                const double cr = rho * ifs.maps()[l - 1].ratio;
                if (cr <= thr)
                    done.push_back(std::move(c));
                else
                    next.push_back({std::move(c), cr});
            }
        }
        open = std::move(next);
    }
    std::ranges::sort(done);
    return done;
}

// Attractor box by iterating the hull operator from a large square.
inline Rect hull_bbox(const IFS& ifs, int iterations = 200)
{
    double big = 1.0;
    for (const auto& m : ifs.maps())
        big = std::max(big, (std::abs(m.translation.x) + std::abs(m.translation.y)) / (1.0 - m.ratio));
    Rect box{-big, big, -big, big};
    for (int it = 0; it < iterations; ++it) {
        Rect nb{1e300, -1e300, 1e300, -1e300};
        for (const auto& m : ifs.maps()) {
            const Rect img = box.scaled(m.ratio, m.translation);
            nb.x0 = std::min(nb.x0, img.x0);
            nb.x1 = std::max(nb.x1, img.x1);
            nb.y0 = std::min(nb.y0, img.y0);
            nb.y1 = std::max(nb.y1, img.y1);
        }
        box = nb;
    }
    return box;
}

// Random system whose first-generation images of the hull box are pairwise
// disjoint (hence strongly separated).
inline IFS random_ssc_ifs(std::mt19937_64& rng, std::size_t q_min = 2, std::size_t q_max = 5)
{
    std::uniform_int_distribution<std::size_t> qd(q_min, q_max);
    std::uniform_real_distribution<double> rd(0.1, 0.35), td(0.0, 1.0);
    for (;;) {
        const std::size_t q = qd(rng);
        std::vector<Similitude> maps;
        for (std::size_t j = 0; j < q; ++j)
            maps.emplace_back(rd(rng), Vec2{td(rng), td(rng)});
        IFS ifs(maps);
        const Rect box = hull_bbox(ifs);
        bool ok = true;
        for (std::size_t i = 0; i < q && ok; ++i)
            for (std::size_t j = i + 1; j < q && ok; ++j) {
                const Rect a = box.scaled(maps[i].ratio, maps[i].translation);
                const Rect b = box.scaled(maps[j].ratio, maps[j].translation);
                ok = fracslice::distance(a, b) > 1e-6;
            }
        if (ok)
            return ifs;
    }
}

struct RationalLineIFS {
    std::vector<Rational> ratios;
    std::vector<Rational> offsets;
};

// Fixed points drawn from a small grid so that shared endpoints are common.
inline RationalLineIFS random_rational_line(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> qd(2, 4), num(1, 4), fp(0, 4);
    RationalLineIFS out;
    const int q = qd(rng);
    for (int j = 0; j < q; ++j) {
        const Rational rho(num(rng), 9);
        const Rational f(fp(rng), 4);
        out.ratios.push_back(rho);
        out.offsets.push_back(f * (1 - rho));
    }
    return out;
}

struct EndpointPieces {
    std::vector<std::size_t> left, right;
};

// For each first-generation piece, decide whether its depth-`depth` interval
// cover reaches the extent endpoints. Subtrees whose interval already stays
// away from the endpoint are pruned (descendant intervals nest inside).
inline EndpointPieces endpoint_pieces(const RationalLineIFS& sys, int depth = 10)
{
    const std::size_t q = sys.ratios.size();
    // increasing maps: the extent endpoints are the extreme fixed points
    std::vector<Rational> fps;
    for (std::size_t j = 0; j < q; ++j)
        fps.push_back(sys.offsets[j] / (1 - sys.ratios[j]));
    const Rational a = *std::ranges::min_element(fps);
    const Rational b = *std::ranges::max_element(fps);

    auto reaches = [&](std::size_t first, bool left) {
        struct Node {
            Rational ratio, offset;
            int level;
        };
        std::vector<Node> stack{{sys.ratios[first], sys.offsets[first], 1}};
        const Rational target = left ? a : b;
        while (!stack.empty()) {
            const Node n = stack.back();
            stack.pop_back();
            const Rational lo = n.ratio * a + n.offset, hi = n.ratio * b + n.offset;
            if (left ? lo > target : hi < target)
                continue;
            if (n.level == depth)
                return true;
            for (std::size_t l = 0; l < q; ++l)
                stack.push_back({n.ratio * sys.ratios[l], n.ratio * sys.offsets[l] + n.offset, n.level + 1});
        }
        return false;
    };
    EndpointPieces out;
    for (std::size_t j = 0; j < q; ++j) {
        if (reaches(j, true))
            out.left.push_back(j + 1);
        if (reaches(j, false))
            out.right.push_back(j + 1);
    }
    return out;
}

// All pairs of distinct words of length <= depth with equal exact maps, then
// filtered to those with no agreeing pair of proper non-empty prefixes and
// distinct first letters.
inline std::set<std::pair<Word, Word>> overlap_pairs(const RationalLineIFS& sys, std::size_t depth)
{
    struct Item {
        Word w;
        Rational ratio, offset;
    };
    std::vector<Item> all;
    std::vector<Item> level{{Word{}, Rational(1), Rational(0)}};
    for (std::size_t k = 0; k < depth; ++k) {
        std::vector<Item> next;
        for (const auto& it : level)
            for (std::size_t l = 0; l < sys.ratios.size(); ++l)
                next.push_back({it.w + Word{static_cast<std::uint16_t>(l + 1)}, it.ratio * sys.ratios[l],
                                it.offset + it.ratio * sys.offsets[l]});
        all.insert(all.end(), next.begin(), next.end());
        level = std::move(next);
    }
    auto map_of = [&](const Word& w) {
        Rational r = 1, o = 0;
        for (auto l : w.letters) {
            o += r * sys.offsets[l - 1];
            r *= sys.ratios[l - 1];
        }
        return std::pair{r, o};
    };
    std::set<std::pair<Word, Word>> out;
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            if (all[i].ratio != all[j].ratio || all[i].offset != all[j].offset)
                continue;
            const Word& u = std::min(all[i].w, all[j].w);
            const Word& v = std::max(all[i].w, all[j].w);
            if (u[0] == v[0])
                continue;
            bool reducible = false;
            for (std::size_t m = 1; m < u.size() && !reducible; ++m)
                for (std::size_t n = 1; n < v.size() && !reducible; ++n)
                    reducible = map_of(u.prefix(m)) == map_of(v.prefix(n));
            if (!reducible)
                out.insert({u, v});
        }
    }
    return out;
}

// Components of the middle-type Cantor set {rho t, rho t + (1 - rho)} at
// level n: 2^n intervals of length rho^n.
inline std::vector<fracslice::Interval> cantor_level(double rho, int n)
{
    std::vector<fracslice::Interval> iv{{0.0, 1.0}};
    for (int k = 0; k < n; ++k) {
        std::vector<fracslice::Interval> next;
        for (const auto& i : iv) {
            const double len = i.length() * rho;
            next.push_back({i.lo, i.lo + len});
            next.push_back({i.hi - len, i.hi});
        }
        iv = std::move(next);
    }
    return iv;
}

// Maximum of sum d^e over packings by centers (sorted) and diameters from
// `rungs`, by exhaustive search. Only for tiny inputs.
inline double best_packing_brute(const std::vector<double>& centers, const std::vector<double>& rungs, double e)
{
    const std::size_t m = centers.size(), nr = rungs.size();
    double best = 0.0;
    std::vector<int> choice(m, -1);
    auto rec = [&](auto& self, std::size_t i, double acc) -> void {
        if (i == m) {
            best = std::max(best, acc);
            return;
        }
        choice[i] = -1;
        self(self, i + 1, acc);
        for (std::size_t k = 0; k < nr; ++k) {
            bool ok = true;
            for (std::size_t j = 0; j < i && ok; ++j)
                if (choice[j] >= 0)
                    ok = centers[i] - centers[j] > 0.5 * (rungs[k] + rungs[static_cast<std::size_t>(choice[j])]);
            if (!ok)
                continue;
            choice[i] = static_cast<int>(k);
            self(self, i + 1, acc + std::pow(rungs[k], e));
            choice[i] = -1;
        }
    };
    rec(rec, 0, 0.0);
    return best;
}

} // namespace oracle
