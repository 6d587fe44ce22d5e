// ---------------------------------------------------------------------------
// frontier.hpp -- tracing the emission/profit Pareto frontier with threshold
// policies, reference points, and the full-disclosure-only test
// ---------------------------------------------------------------------------
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "disclosure/model.hpp"
#include "disclosure/policy.hpp"
#include "disclosure/shape_checks.hpp"
#include "disclosure/threshold.hpp"

namespace disclosure::frontier {

using model::CanonicalInstance;

struct FrontierPoint {
    double alpha = 0.0;   // supporting weight (-1 when none applies)
    double e_star = 0.0;  // threshold attaining the point (cap when trivial)
    double gamma = 0.0;
    double pi = 0.0;      // original-parameterization units
    double w = 0.0;
    std::string flags;
};

struct FrontierTrace {
    std::vector<FrontierPoint> points;  // Pareto-filtered, sorted by gamma
    bool heuristic = false;             // density not log-concave: no spanning guarantee
    std::vector<std::string> warnings;
};

/// Outcome of letting every type sit at its unconstrained peak.
inline FrontierPoint full_disclosure_point(const CanonicalInstance& inst) {
    policy::EmissionScheme s;
    s.segments.push_back({inst.type_lower, inst.type_upper, policy::SegmentRule::FollowPeak, 0.0});
    const policy::Outcomes o = policy::expected_outcomes(inst, s);
    FrontierPoint p;
    p.alpha = 0.0;
    p.e_star = inst.emission_cap;
    p.gamma = o.gamma;
    p.pi = o.pi;
    p.w = o.pi;
    p.flags = "full-disclosure";
    return p;
}

/// Outcome of revealing nothing: everyone at the cap.  Gamma is the cap by
/// definition; no weight supports this point (it is never efficient).
inline FrontierPoint no_disclosure_point(const CanonicalInstance& inst) {
    policy::EmissionScheme s;
    s.segments.push_back({inst.type_lower, inst.type_upper, policy::SegmentRule::Constant,
                          inst.emission_cap});
    const policy::Outcomes o = policy::expected_outcomes(inst, s);
    FrontierPoint p;
    p.alpha = -1.0;
    p.e_star = 0.0;
    p.gamma = inst.emission_cap;
    p.pi = o.pi;
    p.w = o.pi;
    p.flags = "no-disclosure";
    return p;
}

/// Removes points weakly dominated (another point has profit at least as
/// high and emission at least as low, one comparison strict; tolerance 1e-9).
inline std::vector<FrontierPoint> pareto_filter(std::vector<FrontierPoint> pts) {
    const double tol = 1e-9;
    std::vector<FrontierPoint> kept;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
            if (i == j) continue;
            const bool weakly = pts[j].pi >= pts[i].pi - tol && pts[j].gamma <= pts[i].gamma + tol;
            const bool strictly =
                pts[j].pi > pts[i].pi + tol || pts[j].gamma < pts[i].gamma - tol;
            if (weakly && strictly) dominated = true;
        }
        if (!dominated) kept.push_back(pts[i]);
    }
    std::sort(kept.begin(), kept.end(),
              [](const FrontierPoint& a, const FrontierPoint& b) { return a.gamma < b.gamma; });
    return kept;
}

/// Sweeps a uniform weight grid, optimizes each scalarization, collapses
/// duplicate outcomes (1e-7) and Pareto-filters the result.
inline FrontierTrace trace_frontier(const CanonicalInstance& inst, int alpha_count = 101,
                                    int quad_nodes = 32) {
    if (alpha_count < 2)
        throw std::invalid_argument("trace_frontier: need at least two weights");
    FrontierTrace tr;
    const certify::LogConcavityReport lc = certify::log_concavity_check(inst);
    tr.heuristic = !inst.degenerate && !lc.log_concave;
    if (tr.heuristic)
        tr.warnings.push_back(
            "density is not log-concave: threshold policies may not span the frontier "
            "(results are a heuristic lower envelope)");

    std::vector<FrontierPoint> pts;
    for (int i = 0; i < alpha_count; ++i) {
        const double alpha = double(i) / double(alpha_count - 1);
        const threshold::ScalarizedPoint sp = threshold::optimize_threshold(inst, alpha,
                                                                            quad_nodes);
        const policy::Outcomes o =
            policy::expected_outcomes(inst, threshold::threshold_scheme(inst, sp.e_star),
                                      quad_nodes);
        FrontierPoint p;
        p.alpha = alpha;
        p.e_star = sp.e_star;
        p.gamma = o.gamma;
        p.pi = o.pi;
        p.w = sp.w;
        if (sp.multimodal) {
            p.flags = "multimodal";
            tr.warnings.push_back("alpha = " + std::to_string(alpha) + ": " + sp.note);
        }
        if (tr.heuristic) p.flags = p.flags.empty() ? "heuristic" : p.flags + ";heuristic";
        // Collapse outcome duplicates from flat stretches of the sweep.
        bool dup = false;
        for (const auto& q : pts)
            if (std::abs(q.gamma - p.gamma) <= 1e-7 && std::abs(q.pi - p.pi) <= 1e-7) {
                dup = true;
                break;
            }
        if (!dup) pts.push_back(p);
    }
    tr.points = pareto_filter(std::move(pts));
    return tr;
}

struct FullDisclosureOnlyResult {
    bool holds = false;
    double theta_marker = 0.0;  // split type above which the cap binds everyone
    std::string detail;
};

/// Tests the sufficient condition for full disclosure being the unique
/// efficient policy: a split type above which every type's participation
/// floor already sits at the cap, with the density nondecreasing below.
/// Grid check (401 points by default).
inline FullDisclosureOnlyResult full_disclosure_only(const CanonicalInstance& inst,
                                                     int grid = 401) {
    FullDisclosureOnlyResult res;
    if (inst.degenerate) {
        const double efloor = model::participation_floor(inst, inst.type_lower);
        res.holds = efloor >= inst.emission_cap - 1e-8;
        res.theta_marker = inst.type_lower;
        res.detail = res.holds ? "single type pinned at the cap" : "single type below the cap";
        return res;
    }
    const double lo = inst.type_lower, hi = inst.type_upper;
    const double cap = inst.emission_cap;
    const double ftol = 1e-8 * std::max(1.0, cap);

    std::vector<double> grid_theta(grid), efloor(grid), f(grid);
    for (int i = 0; i < grid; ++i) {
        grid_theta[i] = lo + (hi - lo) * double(i) / double(grid - 1);
        efloor[i] = model::participation_floor(inst, grid_theta[i]);
        f[i] = inst.pdf(grid_theta[i]);
    }
    // Smallest grid index from which the floor equals the cap all the way up.
    int j = grid;
    for (int i = grid - 1; i >= 0; --i) {
        if (efloor[i] >= cap - ftol)
            j = i;
        else
            break;
    }
    if (j == grid) {
        res.detail = "participation floor stays below the cap at the top type";
        return res;
    }
    // Density must be nondecreasing below the split.
    const double dtol = 1e-10 * std::max(1.0, *std::max_element(f.begin(), f.end()));
    for (int i = 1; i <= j; ++i) {
        if (f[i] < f[i - 1] - dtol) {
            res.detail = "density decreases below the split type";
            return res;
        }
    }
    res.holds = true;
    res.theta_marker = grid_theta[j];
    res.detail = "floor at the cap above the split; density nondecreasing below";
    return res;
}

}  // namespace disclosure::frontier
