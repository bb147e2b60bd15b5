#pragma once

#include "fracslice/ifs.hpp"

namespace fracslice::presets {

/// Four maps of ratio rho anchored at the corners of the unit square.
/// Strongly separated for rho < 1/2.
inline IFS four_corner(double rho)
{
    const double o = 1.0 - rho;
    return IFS({{rho, {0.0, 0.0}}, {rho, {o, 0.0}}, {rho, {0.0, o}}, {rho, {o, o}}});
}

inline IFS four_corner(const Rational& rho)
{
    const Rational o = 1 - rho;
    return IFS({Similitude::from_exact(rho, 0, 0), Similitude::from_exact(rho, o, 0), Similitude::from_exact(rho, 0, o),
                Similitude::from_exact(rho, o, o)});
}

/// C x C where C is the middle Cantor set with maps rho*t and rho*t + offset.
inline IFS product_cantor(double rho = 0.4, double offset = 0.6)
{
    return IFS({{rho, {0.0, 0.0}}, {rho, {offset, 0.0}}, {rho, {0.0, offset}}, {rho, {offset, offset}}});
}

/// Two maps of ratio rho on the diagonal: translations (0,0) and (1-rho,1-rho).
inline IFS diagonal_pair(double rho = 0.4)
{
    return IFS({{rho, {0.0, 0.0}}, {rho, {1.0 - rho, 1.0 - rho}}});
}

/// The unit square as four half-size copies (s = 2, every projection absolutely continuous).
inline IFS unit_square() { return four_corner(make_rational(1, 2)); }

} // namespace fracslice::presets
