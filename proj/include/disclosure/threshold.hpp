// ---------------------------------------------------------------------------
// threshold.hpp -- threshold policies: boundary types, scalarized welfare,
// one-sided derivatives, first-order cases, and the welfare optimizer
// ---------------------------------------------------------------------------
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "disclosure/model.hpp"
#include "disclosure/policy.hpp"
#include "disclosure/quadrature.hpp"
#include "disclosure/rootfind.hpp"
#include "disclosure/shape_checks.hpp"

namespace disclosure::threshold {

using model::CanonicalInstance;

// ---------------------------------------------------------------------------
// boundary types of a threshold policy
// ---------------------------------------------------------------------------

enum class BoundaryCase { ClampedLow, Interior, ClampedHigh };

/// theta_hat: first type whose unconstrained peak exceeds the threshold.
/// theta_star: first type preferring the cap over the threshold.
struct ThresholdBoundaries {
    double e_star = 0.0;
    double theta_hat = 0.0;
    double theta_star = 0.0;
    BoundaryCase hat_case = BoundaryCase::Interior;
    BoundaryCase star_case = BoundaryCase::Interior;
};

inline ThresholdBoundaries boundaries(const CanonicalInstance& inst, double e_star) {
    const double cap = inst.emission_cap;
    if (!(e_star > 0.0) || e_star > cap + 1e-12)
        throw std::domain_error("boundaries: threshold must lie in (0, cap]");
    ThresholdBoundaries b;
    b.e_star = std::min(e_star, cap);
    const double lo = inst.type_lower, hi = inst.type_upper;
    if (inst.degenerate) {
        const double ehat = model::peak_emission(inst, lo);
        const double efloor = model::participation_floor(inst, lo);
        b.theta_hat = b.theta_star = lo;
        b.hat_case = e_star < ehat ? BoundaryCase::ClampedLow
                                   : (e_star > ehat ? BoundaryCase::ClampedHigh
                                                    : BoundaryCase::Interior);
        b.star_case = e_star < efloor ? BoundaryCase::ClampedLow
                                      : (e_star > efloor ? BoundaryCase::ClampedHigh
                                                         : BoundaryCase::Interior);
        return b;
    }
    // Near-ulp inversion accuracy: the participation integrand jumps by
    // cap - e_star at theta_star, so boundary error enters emissions and
    // welfare at first order and must sit well below quadrature noise.
    const double xtol = 1e-15 * std::max(1.0, hi - lo);

    // Snap thresholds within rounding distance of a support endpoint's peak
    // or floor onto the clamp: the inversion would otherwise manufacture a
    // spurious near-zero-width segment at the edge of the scheme.
    const double snap = 1e-9 * std::max(1.0, cap);

    const double peak_lo = model::peak_emission(inst, lo);
    const double peak_hi = model::peak_emission(inst, hi);
    if (e_star < peak_lo + snap) {
        b.theta_hat = lo;
        b.hat_case = BoundaryCase::ClampedLow;
    } else if (e_star > peak_hi - snap) {
        b.theta_hat = hi;
        b.hat_case = BoundaryCase::ClampedHigh;
    } else {
        b.theta_hat = num::invert_nondecreasing(
            [&](double th) { return model::peak_emission(inst, th); }, e_star, lo, hi, xtol);
        b.hat_case = BoundaryCase::Interior;
    }

    const double floor_lo = model::participation_floor(inst, lo);
    const double floor_hi = model::participation_floor(inst, hi);
    if (e_star < floor_lo + snap) {
        b.theta_star = lo;
        b.star_case = BoundaryCase::ClampedLow;
    } else if (e_star > floor_hi - snap) {
        b.theta_star = hi;
        b.star_case = BoundaryCase::ClampedHigh;
    } else {
        b.theta_star = num::invert_nondecreasing(
            [&](double th) { return model::participation_floor(inst, th); }, e_star, lo, hi,
            xtol);
        b.star_case = BoundaryCase::Interior;
    }
    return b;
}

// ---------------------------------------------------------------------------
// induced scheme and scalarized welfare
// ---------------------------------------------------------------------------

/// Equilibrium map of the threshold policy: follow the peak up to theta_hat,
/// bunch at the threshold up to theta_star, jump to the cap above.
inline policy::EmissionScheme threshold_scheme(const CanonicalInstance& inst, double e_star) {
    if (inst.degenerate)
        return policy::equilibrium_scheme(
            inst, policy::DisclosurePolicy::threshold(inst.emission_cap, e_star));
    const ThresholdBoundaries b = boundaries(inst, e_star);
    const double lo = inst.type_lower, hi = inst.type_upper, cap = inst.emission_cap;
    policy::EmissionScheme s;
    auto push = [&](double a, double z, policy::SegmentRule rule, double value) {
        if (z <= a) return;
        if (!s.segments.empty()) {
            auto& back = s.segments.back();
            if (back.rule == rule &&
                (rule == policy::SegmentRule::FollowPeak ||
                 std::abs(back.value - value) <= 1e-12)) {
                back.hi = z;
                return;
            }
        }
        s.segments.push_back({a, z, rule, value});
    };
    push(lo, b.theta_hat, policy::SegmentRule::FollowPeak, 0.0);
    push(b.theta_hat, b.theta_star, policy::SegmentRule::Constant, b.e_star);
    push(b.theta_star, hi, policy::SegmentRule::Constant, cap);
    if (s.segments.empty())  // zero-measure corner: everyone at the cap
        s.segments.push_back({lo, hi, policy::SegmentRule::Constant, cap});
    s.segments.front().lo = lo;
    s.segments.back().hi = hi;
    return s;
}

/// Scalarized objective -alpha * Gamma + (1 - alpha) * Pi of the threshold.
inline double welfare(const CanonicalInstance& inst, double e_star, double alpha,
                      int quad_nodes = 32) {
    if (alpha < 0.0 || alpha > 1.0)
        throw std::domain_error("welfare: alpha must lie in [0, 1]");
    const policy::Outcomes o = policy::expected_outcomes(inst, threshold_scheme(inst, e_star),
                                                         quad_nodes);
    return -alpha * o.gamma + (1.0 - alpha) * o.pi;
}

enum class Side { Left, Right };

/// One-sided derivative of welfare in the threshold.  The bunching interval
/// contributes the integral term; the marginal participating type adds
/// alpha f(theta_star) pi_e(theta_star, e_star) while participation still
/// binds (left side includes the kink point, right side excludes it).
inline double welfare_derivative(const CanonicalInstance& inst, double e_star, double alpha,
                                 Side side, int quad_nodes = 32) {
    if (alpha < 0.0 || alpha > 1.0)
        throw std::domain_error("welfare_derivative: alpha must lie in [0, 1]");
    const double cap = inst.emission_cap;
    if (inst.degenerate) {
        const double th = inst.type_lower;
        const double ehat = model::peak_emission(inst, th);
        const double efloor = model::participation_floor(inst, th);
        if (e_star <= efloor || e_star > cap + 1e-12)
            throw std::domain_error("welfare_derivative: threshold outside the smooth domain");
        if (e_star > ehat) return 0.0;
        if (e_star == ehat && side == Side::Right) return -alpha;
        return -alpha + (1.0 - alpha) * inst.profit_e(th, e_star);
    }
    const double floor_lo = model::participation_floor(inst, inst.type_lower);
    if (e_star <= floor_lo + 1e-12 || e_star > cap + 1e-12)
        throw std::domain_error("welfare_derivative: threshold outside the smooth domain");
    if (side == Side::Right && e_star >= cap - 1e-15)
        throw std::domain_error("welfare_derivative: no right derivative at the cap");

    const ThresholdBoundaries b = boundaries(inst, e_star);
    const double integral = quad::integrate_piecewise(
        [&](double th) {
            return (-alpha + (1.0 - alpha) * inst.profit_e(th, e_star)) * inst.pdf(th);
        },
        b.theta_hat, b.theta_star, inst.density_knots(), quad_nodes);

    const double e_kink = model::participation_floor(inst, inst.type_upper);
    const double ktol = 1e-10 * std::max(1.0, cap);
    const bool binding = (side == Side::Left) ? (e_star <= e_kink + ktol)
                                              : (e_star < e_kink - ktol);
    double kink_term = 0.0;
    if (binding)
        kink_term = alpha * inst.pdf(b.theta_star) * inst.profit_e(b.theta_star, e_star);
    return integral + kink_term;
}

// ---------------------------------------------------------------------------
// first-order condition
// ---------------------------------------------------------------------------

/// Which branch of the optimality condition applies at (e_star, alpha),
/// keyed on the position of e_star relative to the participation kink
/// e_floor(theta_upper).
enum class FocCase { BelowKink, AtKink, KinkAtCap, AboveKink };

inline const char* to_string(FocCase c) {
    switch (c) {
        case FocCase::BelowKink: return "threshold below the participation kink";
        case FocCase::AtKink: return "threshold at the participation kink";
        case FocCase::KinkAtCap: return "participation kink at the cap";
        case FocCase::AboveKink: return "threshold above the participation kink";
    }
    return "?";
}

struct FocResult {
    FocCase foc_case = FocCase::BelowKink;
    double residual = 0.0;       // signed deviation from the case equation
    double integral_term = 0.0;  // -(bunching-interval integral)
    double kink_bound = 0.0;     // alpha f(theta_star) pi_e(theta_star, e_star)
};

inline FocResult foc_residual(const CanonicalInstance& inst, double e_star, double alpha) {
    FocResult r;
    const double cap = inst.emission_cap;
    const double tol = 1e-9 * std::max(1.0, cap);
    if (inst.degenerate) {
        const double th = inst.type_lower;
        const double efloor = model::participation_floor(inst, th);
        r.foc_case = e_star < efloor - tol
                         ? FocCase::BelowKink
                         : (std::abs(e_star - efloor) <= tol
                                ? (std::abs(efloor - cap) <= tol ? FocCase::KinkAtCap
                                                                 : FocCase::AtKink)
                                : FocCase::AboveKink);
        const double dl = (e_star > efloor + tol)
                              ? welfare_derivative(inst, e_star, alpha, Side::Left)
                              : 0.0;
        const double dr = (e_star < cap - tol)
                              ? ((e_star > efloor + tol)
                                     ? welfare_derivative(inst, e_star, alpha, Side::Right)
                                     : 0.0)
                              : 0.0;
        r.residual = dl < 0.0 ? dl : (dr > 0.0 ? dr : 0.0);
        return r;
    }
    const ThresholdBoundaries b = boundaries(inst, e_star);
    const double integral = quad::integrate_piecewise(
        [&](double th) {
            return (-alpha + (1.0 - alpha) * inst.profit_e(th, e_star)) * inst.pdf(th);
        },
        b.theta_hat, b.theta_star, inst.density_knots(), 32);
    r.integral_term = -integral;
    r.kink_bound = alpha * inst.pdf(b.theta_star) * inst.profit_e(b.theta_star, e_star);

    const double e_kink = model::participation_floor(inst, inst.type_upper);
    if (e_star < e_kink - tol) {
        r.foc_case = FocCase::BelowKink;
        r.residual = r.integral_term - r.kink_bound;
    } else if (e_star > e_kink + tol) {
        r.foc_case = FocCase::AboveKink;
        r.residual = r.integral_term;
    } else if (std::abs(e_kink - cap) <= tol) {
        r.foc_case = FocCase::KinkAtCap;
        r.residual = r.integral_term;
    } else {
        r.foc_case = FocCase::AtKink;
        if (r.integral_term < 0.0)
            r.residual = r.integral_term;
        else if (r.integral_term > r.kink_bound)
            r.residual = r.integral_term - r.kink_bound;
        else
            r.residual = 0.0;
    }
    return r;
}

// ---------------------------------------------------------------------------
// scalarized optimum
// ---------------------------------------------------------------------------

struct ScalarizedPoint {
    double alpha = 0.0;
    double e_star = 0.0;
    double w = 0.0;
    double left_derivative = 0.0;
    double right_derivative = 0.0;  // zero by convention when e_star is the cap
    FocCase foc_case = FocCase::BelowKink;
    bool multimodal = false;
    std::string note;
};

namespace detail {

// Left edge of a flat welfare plateau ending at cand: walk left while the
// welfare stays within 1e-12 of the plateau value, then sharpen the edge on
// the derivative.  Guarded by a macroscopic probe so merely-shallow optima
// are left untouched.
template <typename WF, typename DF>
double plateau_left_edge(WF&& W, DF&& Wright, double lo, double cand, double cap,
                         double landmark) {
    const double wc = W(cand);
    const double wscale = std::max(1.0, std::abs(wc));
    const double probe = std::max(1e-6 * std::max(1.0, cap), 1e-3 * (cand - lo));
    if (cand - probe <= lo) return cand;
    if (W(cand - probe) < wc - 1e-12 * wscale) return cand;  // not actually flat
    auto on_plateau = [&](double e) { return W(e) >= wc - 1e-11 * wscale; };
    const double eps = 1e-9 * std::max(1.0, cap);
    if (on_plateau(lo + eps)) return lo + eps;
    double edge = num::bisect_pred(on_plateau, lo + eps, cand, 1e-10);
    // Sharpen on the derivative: it vanishes on the flat region and not to
    // the left of it.  Welfare has quadratic contact at the edge, so the
    // stage-one estimate can sit ~sqrt(tol) left of the true edge; bracket
    // toward whichever side the estimate landed on.
    auto flat = [&](double e) { return std::abs(Wright(e)) <= 1e-10; };
    if (flat(edge)) {
        const double back = std::max(lo + eps, edge - 1e-3 * std::max(1.0, cap));
        if (!flat(back)) edge = num::bisect_pred(flat, back, edge, 1e-11);
    } else if (edge < cand - 1e-12) {
        edge = num::bisect_pred(flat, edge, cand, 1e-11);
        if (!flat(std::min(cand, edge + 1e-11))) return cand;  // refinement failed
    }
    // Flat regions start at a structural point (the lowest type's peak); land
    // exactly on it when the numeric edge agrees to bisection accuracy.
    if (landmark > lo && landmark <= cand && std::abs(edge - landmark) <= 1e-6 &&
        on_plateau(landmark))
        edge = landmark;
    return edge;
}

}  // namespace detail

/// Maximizes welfare over thresholds in (e_floor(theta_lower), cap].  When
/// the weighted score is quasiconcave the optimum is located structurally
/// (kink test plus derivative bisection on the active branch); otherwise a
/// 16-start golden-section sweep is used and multimodality is reported.
/// Flat plateaus resolve to the smallest optimal threshold.
inline ScalarizedPoint optimize_threshold(const CanonicalInstance& inst, double alpha,
                                          int quad_nodes = 32) {
    if (alpha < 0.0 || alpha > 1.0)
        throw std::domain_error("optimize_threshold: alpha must lie in [0, 1]");
    ScalarizedPoint out;
    out.alpha = alpha;
    const double cap = inst.emission_cap;

    if (inst.degenerate) {
        const double th = inst.type_lower;
        const double efloor = model::participation_floor(inst, th);
        const double ehat = model::peak_emission(inst, th);
        double e = ehat;
        if (alpha >= 1.0)
            e = efloor;
        else if (ehat > efloor) {
            // concave single-type objective: -alpha e + (1-alpha) pi(theta, e)
            auto g = [&](double x) { return -alpha + (1.0 - alpha) * inst.profit_e(th, x); };
            if (g(efloor) <= 0.0)
                e = efloor;
            else if (g(ehat) >= 0.0)
                e = ehat;
            else
                e = num::bisect(g, efloor, ehat, 1e-12 * std::max(1.0, cap));
        }
        out.e_star = e;
        out.w = -alpha * e + (1.0 - alpha) * (inst.profit(th, e) + inst.profit_offset);
        out.note = "single-type instance";
        const FocResult f = foc_residual(inst, e, alpha);
        out.foc_case = f.foc_case;
        if (e > efloor + 1e-12 && e <= ehat)
            out.left_derivative = -alpha + (1.0 - alpha) * inst.profit_e(th, e);
        out.right_derivative = (e >= ehat) ? 0.0 : out.left_derivative;
        return out;
    }

    const double lo = model::participation_floor(inst, inst.type_lower);
    const double e_kink = model::participation_floor(inst, inst.type_upper);
    const double e_top = model::peak_emission(inst, inst.type_upper);
    const double eps = 1e-9 * std::max(1.0, cap);
    const double dtol = 1e-11;

    auto W = [&](double e) { return welfare(inst, e, alpha, quad_nodes); };
    auto Wl = [&](double e) { return welfare_derivative(inst, e, alpha, Side::Left, quad_nodes); };
    auto Wr = [&](double e) { return welfare_derivative(inst, e, alpha, Side::Right, quad_nodes); };

    const certify::QuasiconcavityReport qc = certify::quasiconcavity_check(inst, alpha);
    double cand = 0.0;

    // Derivative bisection with a golden-section fallback for the rare case
    // where rounding spoils the sign bracket.
    auto root_or_golden = [&](double a, double b) {
        try {
            return num::bisect(Wr, a, b, 1e-10);
        } catch (const std::invalid_argument&) {
            return num::golden_max(W, a, b, 1e-10);
        }
    };

    if (qc.quasiconcave && e_kink > lo + 1e-12) {
        if (e_kink >= cap - 1e-12) {
            // participation kink at the cap: one smooth branch below it
            if (Wl(cap) >= -dtol)
                cand = cap;
            else {
                const double a = lo + eps;
                cand = (Wr(a) <= dtol) ? num::golden_max(W, a, cap, 1e-10)
                                       : root_or_golden(a, cap - eps);
            }
        } else {
            const double dl_k = Wl(e_kink);
            const double dr_k = Wr(e_kink);
            if (dl_k >= -dtol && dr_k <= dtol) {
                cand = e_kink;  // kink optimum
            } else if (dr_k > dtol) {
                // optimum above the kink; the bunching interval collapses at
                // e_top (derivative exactly zero there), so probe just inside
                const double probe = std::max(e_kink + eps, e_top - 1e-7 * std::max(1.0, cap));
                if (e_top <= e_kink + 1e-12)
                    cand = e_kink;
                else if (Wl(probe) >= -dtol)
                    cand = e_top;
                else
                    cand = root_or_golden(e_kink + eps, e_top - eps);
            } else {
                // welfare already falling into the kink: optimum below it
                const double a = lo + eps;
                cand = (Wr(a) <= dtol) ? num::golden_max(W, a, e_kink, 1e-10)
                                       : root_or_golden(a, e_kink - eps);
            }
        }
    } else {
        // No quasiconcavity certificate: multistart golden-section sweep.
        const int n = 16;
        std::vector<double> xs(n), ws(n);
        for (int i = 0; i < n; ++i) {
            xs[i] = lo + eps + (cap - lo - eps) * double(i) / double(n - 1);
            ws[i] = W(xs[i]);
        }
        struct LocalMax {
            double e, w;
        };
        std::vector<LocalMax> maxima;
        for (int i = 0; i < n; ++i) {
            const bool up = (i == 0) || ws[i] >= ws[i - 1];
            const bool down = (i == n - 1) || ws[i] >= ws[i + 1];
            if (up && down) {
                const double a = xs[std::max(0, i - 1)];
                const double b = xs[std::min(n - 1, i + 1)];
                const double e = num::golden_max(W, a, b, 1e-10);
                maxima.push_back({e, W(e)});
            }
        }
        // The kink is a candidate golden search can miss.
        if (e_kink > lo + eps && e_kink < cap) maxima.push_back({e_kink, W(e_kink)});
        LocalMax best = maxima.front();
        for (const auto& m : maxima)
            if (m.w > best.w + 1e-12 || (std::abs(m.w - best.w) <= 1e-12 && m.e < best.e))
                best = m;
        int distinct = 0;
        double second = -std::numeric_limits<double>::infinity();
        for (const auto& m : maxima)
            if (std::abs(m.e - best.e) > 1e-4) {
                ++distinct;
                second = std::max(second, m.w);
            }
        if (distinct > 0 && best.w - second > 1e-6) {
            out.multimodal = true;
            out.note = "welfare is multimodal (weighted score not quasiconcave)";
        }
        cand = best.e;
    }

    if (cand >= e_top - 1e-12 && e_top < cap - 1e-12 && cand < cap - 1e-12) {
        cand = e_top;
        out.note = "thresholds in [peak of highest type, cap] are outcome-equivalent; "
                   "reporting the smallest";
    }

    // Smallest optimal threshold on flat plateaus.
    const double walked = detail::plateau_left_edge(
        W, Wr, lo, cand, cap, model::peak_emission(inst, inst.type_lower));
    if (walked < cand - 1e-12) {
        cand = walked;
        if (out.note.empty()) out.note = "flat welfare plateau; smallest optimal threshold";
    }

    out.e_star = cand;
    out.w = W(cand);
    out.left_derivative = (cand > lo + eps) ? Wl(cand) : 0.0;
    out.right_derivative = (cand < cap - eps) ? Wr(cand) : 0.0;
    out.foc_case = foc_residual(inst, cand, alpha).foc_case;
    return out;
}

/// Recovers a Pareto weight whose scalarized optimum is the given threshold.
/// Both one-sided derivatives are affine in alpha, so the supporting weights
/// form an interval; interior thresholds have a unique root, the kink
/// returns the midpoint of the bracketed interval.
inline double alpha_for_threshold(const CanonicalInstance& inst, double e_star) {
    const double cap = inst.emission_cap;
    if (!(e_star > 0.0) || e_star > cap + 1e-12)
        throw std::domain_error("alpha_for_threshold: threshold must lie in (0, cap]");

    if (inst.degenerate) {
        const double th = inst.type_lower;
        const double efloor = model::participation_floor(inst, th);
        const double ehat = model::peak_emission(inst, th);
        if (e_star < efloor - 1e-9 || e_star > ehat + 1e-9)
            throw std::invalid_argument(
                "alpha_for_threshold: no supporting weight for this threshold");
        if (e_star >= ehat - 1e-12) return 0.0;
        const double pe = inst.profit_e(th, e_star);  // alpha/(1-alpha) = pi_e
        return pe / (1.0 + pe);
    }

    const double e1 = optimize_threshold(inst, 1.0).e_star;
    if (e_star < e1 - 1e-9)
        throw std::invalid_argument(
            "alpha_for_threshold: threshold below the alpha = 1 optimum has no supporting "
            "weight");
    const double e_top = model::peak_emission(inst, inst.type_upper);
    if (e_star >= e_top - 1e-12) return 0.0;  // full-disclosure class

    const double e_kink = model::participation_floor(inst, inst.type_upper);
    auto d = [&](double a, Side s) { return welfare_derivative(inst, e_star, a, s); };
    auto affine_root = [](double at0, double at1) {
        // value(alpha) = at0 + (at1 - at0) alpha
        if (std::abs(at0 - at1) < 1e-15) return at0 > 0.0 ? 1.0 : 0.0;
        return std::clamp(at0 / (at0 - at1), 0.0, 1.0);
    };

    double alpha;
    if (std::abs(e_star - e_kink) <= 1e-9 && e_kink < cap - 1e-12) {
        // Supporting interval: right derivative <= 0 from alpha_lo up,
        // left derivative >= 0 until alpha_hi.
        const double r0 = d(0.0, Side::Right), r1 = d(1.0, Side::Right);
        const double l0 = d(0.0, Side::Left), l1 = d(1.0, Side::Left);
        const double alpha_lo = (r0 <= 0.0) ? 0.0 : affine_root(r0, r1);
        const double alpha_hi = (l1 >= 0.0) ? 1.0 : affine_root(l0, l1);
        if (alpha_hi < alpha_lo)
            throw std::invalid_argument("alpha_for_threshold: empty supporting interval");
        alpha = 0.5 * (alpha_lo + alpha_hi);
    } else {
        const Side s = (e_star >= cap - 1e-12) ? Side::Left : Side::Right;
        alpha = affine_root(d(0.0, s), d(1.0, s));
    }

    const FocResult f = foc_residual(inst, e_star, alpha);
    if (std::abs(f.residual) > 1e-7)
        throw std::invalid_argument(
            "alpha_for_threshold: recovered weight fails the first-order check (residual " +
            std::to_string(f.residual) + ")");
    return alpha;
}

}  // namespace disclosure::threshold
