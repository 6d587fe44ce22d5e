// ---------------------------------------------------------------------------
// policy.hpp -- disclosure policies, belief-compatible menus, equilibrium
// emission schemes and their expected outcomes
// ---------------------------------------------------------------------------
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "disclosure/model.hpp"
#include "disclosure/quadrature.hpp"
#include "disclosure/rootfind.hpp"

namespace disclosure::policy {

using model::CanonicalInstance;

// ---------------------------------------------------------------------------
// policies
// ---------------------------------------------------------------------------

enum class RegionMode { Transparent, Pooled };

/// One interval of the emission-space partition.  Adjacent regions share
/// endpoints; the partition is read right-continuously.
struct Region {
    double lo = 0.0;
    double hi = 0.0;
    RegionMode mode = RegionMode::Transparent;
};

struct DisclosurePolicy {
    std::vector<Region> regions;

    /// Requires sorted regions covering [0, cap] with matching endpoints.
    void validate(double cap) const {
        if (regions.empty()) throw std::invalid_argument("policy: no regions");
        const double tol = 1e-9 * std::max(1.0, cap);
        if (std::abs(regions.front().lo) > tol)
            throw std::invalid_argument("policy: coverage must start at 0");
        if (std::abs(regions.back().hi - cap) > tol)
            throw std::invalid_argument("policy: coverage must end at the cap");
        for (std::size_t i = 0; i < regions.size(); ++i) {
            if (!(regions[i].hi > regions[i].lo + tol))
                throw std::invalid_argument("policy: region has nonpositive width");
            if (i > 0 && std::abs(regions[i].lo - regions[i - 1].hi) > tol)
                throw std::invalid_argument("policy: regions must share endpoints");
        }
    }

    static DisclosurePolicy transparent(double cap) {
        return DisclosurePolicy{{{0.0, cap, RegionMode::Transparent}}};
    }
    static DisclosurePolicy uninformative(double cap) {
        return DisclosurePolicy{{{0.0, cap, RegionMode::Pooled}}};
    }
    /// Transparent on [0, e_star], pooled above.
    static DisclosurePolicy threshold(double cap, double e_star) {
        if (!(e_star > 0.0) || !(e_star <= cap))
            throw std::invalid_argument("policy: threshold must lie in (0, cap]");
        if (e_star >= cap) return transparent(cap);
        return DisclosurePolicy{{{0.0, e_star, RegionMode::Transparent},
                                 {e_star, cap, RegionMode::Pooled}}};
    }
};

// ---------------------------------------------------------------------------
// menus
// ---------------------------------------------------------------------------

/// Emission levels the market can rationalize: a sorted union of disjoint
/// closed intervals (degenerate intervals are single points).
struct Menu {
    struct Interval {
        double lo = 0.0;
        double hi = 0.0;
        bool point() const { return hi <= lo; }
    };
    std::vector<Interval> cells;
};

/// Transparent regions contribute every point; a pooled region contributes
/// only its supremum.  Touching pieces are merged.
inline Menu belief_compatible_menu(const DisclosurePolicy& d) {
    std::vector<Menu::Interval> raw;
    for (const auto& r : d.regions) {
        if (r.mode == RegionMode::Transparent)
            raw.push_back({r.lo, r.hi});
        else
            raw.push_back({r.hi, r.hi});
    }
    std::sort(raw.begin(), raw.end(),
              [](const Menu::Interval& x, const Menu::Interval& y) { return x.lo < y.lo; });
    Menu m;
    for (const auto& iv : raw) {
        if (!m.cells.empty() && iv.lo <= m.cells.back().hi + 1e-12)
            m.cells.back().hi = std::max(m.cells.back().hi, iv.hi);
        else
            m.cells.push_back(iv);
    }
    return m;
}

/// Profit-maximizing menu emission for one type; ties resolve to the lowest
/// emission (tie tolerance 1e-12 on profit).
inline double best_response(const CanonicalInstance& inst, double theta, const Menu& menu) {
    if (menu.cells.empty()) throw std::invalid_argument("best_response: empty menu");
    const double ehat = model::peak_emission(inst, theta);
    double best_e = 0.0;
    double best_pi = -std::numeric_limits<double>::infinity();
    for (const auto& cell : menu.cells) {
        const double e = std::clamp(ehat, cell.lo, cell.hi);
        const double pi = inst.profit(theta, e);
        if (pi > best_pi + 1e-12 || (std::abs(pi - best_pi) <= 1e-12 && e < best_e)) {
            best_pi = pi;
            best_e = e;
        }
    }
    return best_e;
}

// ---------------------------------------------------------------------------
// equilibrium schemes
// ---------------------------------------------------------------------------

enum class SegmentRule { FollowPeak, Constant };

/// Piecewise description of the realized type -> emission map.
struct Segment {
    double lo = 0.0;
    double hi = 0.0;
    SegmentRule rule = SegmentRule::Constant;
    double value = 0.0;  // constant emission when rule == Constant
};

struct EmissionScheme {
    std::vector<Segment> segments;

    double evaluate(const CanonicalInstance& inst, double theta) const {
        if (segments.empty()) throw std::logic_error("EmissionScheme: empty");
        const Segment* seg = &segments.back();
        for (std::size_t i = 0; i < segments.size(); ++i) {
            const bool last = (i + 1 == segments.size());
            if (theta <= segments[i].hi || last) {
                seg = &segments[i];
                break;
            }
        }
        return seg->rule == SegmentRule::FollowPeak ? model::peak_emission(inst, theta)
                                                    : seg->value;
    }
};

namespace detail {

// What pins a type's best response: a cell index plus whether the choice is
// the cell's left end, the unconstrained peak, or the right end.
struct BrState {
    int cell = -1;
    int pin = 0;  // -1 left end, 0 follows peak, +1 right end
    bool operator==(const BrState& o) const { return cell == o.cell && pin == o.pin; }
    bool operator!=(const BrState& o) const { return !(*this == o); }
};

inline BrState br_state(const CanonicalInstance& inst, double theta, const Menu& menu) {
    const double ehat = model::peak_emission(inst, theta);
    double best_pi = -std::numeric_limits<double>::infinity();
    BrState st;
    double best_e = 0.0;
    for (int i = 0; i < int(menu.cells.size()); ++i) {
        const auto& cell = menu.cells[i];
        const double e = std::clamp(ehat, cell.lo, cell.hi);
        const double pi = inst.profit(theta, e);
        if (pi > best_pi + 1e-12 || (std::abs(pi - best_pi) <= 1e-12 && e < best_e)) {
            best_pi = pi;
            best_e = e;
            st.cell = i;
            st.pin = (e <= cell.lo) ? -1 : (e >= cell.hi ? +1 : 0);
            if (cell.point()) st.pin = +1;
        }
    }
    return st;
}

}  // namespace detail

/// Traces the equilibrium type -> emission map of a policy.  The best
/// response is nondecreasing in the type (single-crossing in canonical
/// coordinates), so the map is a finite sequence of follow-the-peak and
/// constant stretches; stretch boundaries are located by bisection on the
/// underlying indifference condition to 1e-9 in theta.
inline EmissionScheme equilibrium_scheme(const CanonicalInstance& inst,
                                         const DisclosurePolicy& d, int scan_grid = 2001) {
    d.validate(inst.emission_cap);
    const Menu menu = belief_compatible_menu(d);

    EmissionScheme s;
    if (inst.degenerate) {
        const double th = inst.type_lower;
        const double e = best_response(inst, th, menu);
        const bool follows = std::abs(e - model::peak_emission(inst, th)) <= 1e-12;
        s.segments.push_back({th, th, follows ? SegmentRule::FollowPeak : SegmentRule::Constant, e});
        return s;
    }

    const double lo = inst.type_lower, hi = inst.type_upper;
    const double xtol = 1e-9 * std::max(1.0, hi - lo);
    std::vector<double> cuts;       // segment boundaries
    std::vector<detail::BrState> states;

    detail::BrState cur = detail::br_state(inst, lo, menu);
    states.push_back(cur);
    cuts.push_back(lo);
    for (int i = 1; i < scan_grid; ++i) {
        const double th = lo + (hi - lo) * double(i) / double(scan_grid - 1);
        const detail::BrState st = detail::br_state(inst, th, menu);
        if (st != cur) {
            const double prev = lo + (hi - lo) * double(i - 1) / double(scan_grid - 1);
            const double cut = num::bisect_pred(
                [&](double t) { return detail::br_state(inst, t, menu) != cur; }, prev, th, xtol);
            cuts.push_back(cut);
            states.push_back(st);
            cur = st;
        }
    }
    cuts.push_back(hi);

    for (std::size_t k = 0; k < states.size(); ++k) {
        const double a = cuts[k], b = cuts[k + 1];
        if (b <= a && states.size() > 1) continue;
        Segment seg;
        seg.lo = a;
        seg.hi = b;
        if (states[k].pin == 0) {
            seg.rule = SegmentRule::FollowPeak;
        } else {
            seg.rule = SegmentRule::Constant;
            const auto& cell = menu.cells[states[k].cell];
            seg.value = (states[k].pin < 0) ? cell.lo : cell.hi;
        }
        // Merge with the previous stretch when the rule and value coincide.
        if (!s.segments.empty()) {
            Segment& back = s.segments.back();
            const bool same =
                back.rule == seg.rule &&
                (seg.rule == SegmentRule::FollowPeak || std::abs(back.value - seg.value) <= 1e-12);
            if (same) {
                back.hi = seg.hi;
                continue;
            }
        }
        s.segments.push_back(seg);
    }
    if (!s.segments.empty()) {
        s.segments.front().lo = lo;
        s.segments.back().hi = hi;
    }
    return s;
}

// ---------------------------------------------------------------------------
// expected outcomes
// ---------------------------------------------------------------------------

/// Expected emission and expected profit (in original-parameterization
/// units, i.e. including the policy-independent intercept term).
struct Outcomes {
    double gamma = 0.0;
    double pi = 0.0;
};

namespace detail {

// Breakpoints inside a follow-the-peak stretch where the clamped peak changes
// branch (peak hits 0 or the cap) -- keeps each quadrature panel smooth.
inline std::vector<double> peak_clamp_breaks(const CanonicalInstance& inst) {
    std::vector<double> out;
    const auto dpi0 = model::detail::poly_derivative(inst.pi0);
    out.push_back(-model::detail::poly_eval(dpi0, 0.0));                 // peak leaves 0
    out.push_back(-model::detail::poly_eval(dpi0, inst.emission_cap));   // peak hits cap
    return out;
}

}  // namespace detail

inline Outcomes expected_outcomes(const CanonicalInstance& inst, const EmissionScheme& s,
                                  int quad_nodes = 32) {
    if (s.segments.empty()) throw std::invalid_argument("expected_outcomes: empty scheme");
    Outcomes out;
    if (inst.degenerate) {
        const double th = inst.type_lower;
        const double e = s.evaluate(inst, th);
        out.gamma = e;
        out.pi = inst.profit(th, e) + inst.profit_offset;
        return out;
    }
    std::vector<double> breaks = inst.density_knots();
    const auto clamp_breaks = detail::peak_clamp_breaks(inst);
    breaks.insert(breaks.end(), clamp_breaks.begin(), clamp_breaks.end());

    double gamma = 0.0, pi = 0.0;
    for (const auto& seg : s.segments) {
        if (seg.hi <= seg.lo) continue;
        auto e_of = [&](double th) {
            return seg.rule == SegmentRule::FollowPeak ? model::peak_emission(inst, th)
                                                       : seg.value;
        };
        gamma += quad::integrate_piecewise(
            [&](double th) { return e_of(th) * inst.pdf(th); }, seg.lo, seg.hi, breaks,
            quad_nodes);
        pi += quad::integrate_piecewise(
            [&](double th) { return inst.profit(th, e_of(th)) * inst.pdf(th); }, seg.lo, seg.hi,
            breaks, quad_nodes);
    }
    out.gamma = gamma;
    out.pi = pi + inst.profit_offset;
    return out;
}

// ---------------------------------------------------------------------------
// refinement and implementability
// ---------------------------------------------------------------------------

/// d1 is finer than d2 when every cell of d1 nests in a cell of d2.
/// Transparent cells are singletons and always nest; a pooled cell of d1
/// must sit inside a single pooled region of d2.
inline bool is_finer(const DisclosurePolicy& d1, const DisclosurePolicy& d2) {
    const double tol = 1e-12;
    for (const auto& r1 : d1.regions) {
        if (r1.mode == RegionMode::Transparent) continue;
        bool nested = false;
        for (const auto& r2 : d2.regions) {
            if (r2.mode != RegionMode::Pooled) continue;
            if (r1.lo >= r2.lo - tol && r1.hi <= r2.hi + tol) {
                nested = true;
                break;
            }
        }
        if (!nested) return false;
    }
    return true;
}

struct ImplementabilityResult {
    bool ok = true;
    std::string violation;    // "IC" or "IR" when not ok
    double theta = 0.0;       // violating type
    double theta_other = 0.0; // coveted type (IC) or the cap's type (IR)
};

/// Grid check of incentive compatibility and participation for a scheme.
inline ImplementabilityResult check_implementable(const CanonicalInstance& inst,
                                                  const EmissionScheme& s, int grid = 201) {
    ImplementabilityResult res;
    const double tol = 1e-9;
    const double lo = inst.type_lower, hi = inst.type_upper;
    std::vector<double> thetas, emissions, own;
    const int n = inst.degenerate ? 1 : grid;
    for (int i = 0; i < n; ++i) {
        const double th = (n == 1) ? lo : lo + (hi - lo) * double(i) / double(n - 1);
        thetas.push_back(th);
        emissions.push_back(s.evaluate(inst, th));
        own.push_back(inst.profit(th, emissions.back()));
    }
    for (int i = 0; i < n; ++i) {
        if (own[i] < inst.profit(thetas[i], inst.emission_cap) - tol) {
            res.ok = false;
            res.violation = "IR";
            res.theta = thetas[i];
            res.theta_other = thetas[i];
            return res;
        }
        for (int j = 0; j < n; ++j) {
            if (own[i] < inst.profit(thetas[i], emissions[j]) - tol) {
                res.ok = false;
                res.violation = "IC";
                res.theta = thetas[i];
                res.theta_other = thetas[j];
                return res;
            }
        }
    }
    return res;
}

}  // namespace disclosure::policy
