#pragma once

#include "relsteg/errors.hpp"

#include <cmath>
#include <string>

namespace relsteg {

/// Bracketed bisection on a continuous scalar function.
///
/// Halves [lo, hi] until the midpoint is no longer representable strictly
/// inside the interval or `max_iter` halvings were done, whichever comes
/// first; this is at least as tight as a 1e-13 width stop on [0,1]. Returns
/// the endpoint with the smaller |f|. Throws BracketError if f(lo) and f(hi)
/// share a strict sign.
template <class F>
double bisect(F&& f, double lo, double hi, int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi)) {
        throw BracketError("bisect: no sign change on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "], f = " + std::to_string(flo) + ", " +
                           std::to_string(fhi));
    }
    for (int i = 0; i < max_iter; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

} // namespace relsteg
