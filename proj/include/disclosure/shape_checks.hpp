// ---------------------------------------------------------------------------
// shape_checks.hpp -- distribution-shape certificates: quasiconcavity of the
// weighted score (1-alpha) F + alpha f, and log-concavity of the density
// ---------------------------------------------------------------------------
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "disclosure/model.hpp"

namespace disclosure::certify {

using model::CanonicalInstance;

struct QuasiconcavityReport {
    bool quasiconcave = true;
    bool strict = true;           // no flat stretch on either side of the peak
    double peak_lo = 0.0;         // grid hull of the maximizer set
    double peak_hi = 0.0;
    double max_violation = 0.0;   // worst wrong-direction step
    double violation_at = 0.0;
    int grid = 0;
};

/// Grid test that h(theta) = (1-alpha) F(theta) + alpha f(theta) rises to a
/// peak and falls afterwards (single sign change of discrete differences,
/// tolerance 1e-10 relative to the value scale).
inline QuasiconcavityReport quasiconcavity_check(const CanonicalInstance& inst, double alpha,
                                                 int grid = 801) {
    QuasiconcavityReport rep;
    rep.grid = grid;
    if (inst.degenerate) {
        rep.peak_lo = rep.peak_hi = inst.type_lower;
        return rep;
    }
    const double lo = inst.type_lower, hi = inst.type_upper;
    std::vector<double> h(grid);
    double scale = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double th = lo + (hi - lo) * double(i) / double(grid - 1);
        h[i] = (1.0 - alpha) * inst.cdf(th) + alpha * inst.pdf(th);
        scale = std::max(scale, std::abs(h[i]));
    }
    const double tol = 1e-10 * std::max(1.0, scale);

    int peak = 0;
    for (int i = 1; i < grid; ++i)
        if (h[i] > h[peak]) peak = i;

    double worst = 0.0;
    double worst_at = lo;
    auto note = [&](int i, double v) {
        if (v > worst) {
            worst = v;
            worst_at = lo + (hi - lo) * double(i) / double(grid - 1);
        }
    };
    for (int i = 1; i <= peak; ++i) {
        const double d = h[i] - h[i - 1];
        if (d < -tol) note(i, -d);
        if (d <= tol) rep.strict = false;
    }
    for (int i = peak + 1; i < grid; ++i) {
        const double d = h[i] - h[i - 1];
        if (d > tol) note(i, d);
        if (d >= -tol) rep.strict = false;
    }
    rep.max_violation = worst;
    rep.violation_at = worst_at;
    rep.quasiconcave = (worst <= tol);

    // Hull of grid points within tolerance of the maximum.
    const double peak_tol = 1e-10 * std::max(1.0, scale);
    int a = peak, b = peak;
    while (a > 0 && h[a - 1] >= h[peak] - peak_tol) --a;
    while (b + 1 < grid && h[b + 1] >= h[peak] - peak_tol) ++b;
    rep.peak_lo = lo + (hi - lo) * double(a) / double(grid - 1);
    rep.peak_hi = lo + (hi - lo) * double(b) / double(grid - 1);
    return rep;
}

struct LogConcavityReport {
    bool log_concave = true;
    bool strict = false;
    bool analytic = true;         // closed-form (ln f)'' was available
    double max_value = 0.0;       // largest (ln f)'' encountered
    double at_theta = 0.0;
};

/// Checks (ln f)'' <= 0; closed-form for the built-in densities, second
/// central differences (step = support/400) for tables.
inline LogConcavityReport log_concavity_check(const CanonicalInstance& inst, int grid = 401) {
    LogConcavityReport rep;
    if (inst.degenerate) return rep;
    const auto& d = inst.density();
    rep.analytic = d.analytic_log_second();
    const double lo = inst.type_lower, hi = inst.type_upper;
    const double step = (hi - lo) / double(grid - 1);
    double worst = -std::numeric_limits<double>::infinity();
    double worst_at = lo;
    for (int i = 1; i + 1 < grid; ++i) {
        const double th = lo + step * double(i);
        const double v = d.log_pdf_second(th, step);
        if (v > worst) {
            worst = v;
            worst_at = th;
        }
    }
    rep.max_value = worst;
    rep.at_theta = worst_at;
    const double tol = rep.analytic ? 0.0 : 1e-9;
    rep.log_concave = (worst <= tol);
    rep.strict = (worst < -tol - 1e-12);
    return rep;
}

}  // namespace disclosure::certify
