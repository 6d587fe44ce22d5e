// ---------------------------------------------------------------------------
// rootfind.hpp -- bisection and golden-section search on scalar functions
// ---------------------------------------------------------------------------
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace disclosure::num {

/// Bisection for a root of f on [lo, hi].  Requires f(lo) and f(hi) to have
/// opposite (non-strict) signs; converges to interval width xtol.
template <typename F>
double bisect(F&& f, double lo, double hi, double xtol = 1e-12,
              int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::invalid_argument("bisect: endpoints do not bracket a root");
    for (int it = 0; it < max_iter && (hi - lo) > xtol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Bisection on a monotone boolean predicate: pred(lo) is false, pred(hi) is
/// true; returns the switch point to within xtol.
template <typename P>
double bisect_pred(P&& pred, double lo, double hi, double xtol = 1e-12,
                   int max_iter = 200) {
    for (int it = 0; it < max_iter && (hi - lo) > xtol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (pred(mid))
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// Golden-section maximization of f on [lo, hi]; returns the abscissa of the
/// interior maximum (assumes unimodality on the bracket).
template <typename F>
double golden_max(F&& f, double lo, double hi, double xtol = 1e-10) {
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > xtol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

/// Inverts a nondecreasing function: smallest x in [lo, hi] with f(x) >= y,
/// assuming f(lo) <= y <= f(hi).
template <typename F>
double invert_nondecreasing(F&& f, double y, double lo, double hi,
                            double xtol = 1e-12) {
    return bisect_pred([&](double x) { return f(x) >= y; }, lo, hi, xtol);
}

}  // namespace disclosure::num
