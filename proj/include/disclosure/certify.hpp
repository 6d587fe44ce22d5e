// ---------------------------------------------------------------------------
// certify.hpp -- optimality certificates: multiplier construction from the
// first-order condition and independent verification of the Lagrangian
// stationarity, monotonicity, and complementary-slackness conditions
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
#include "disclosure/shape_checks.hpp"
#include "disclosure/threshold.hpp"

namespace disclosure::certify {

using model::CanonicalInstance;

// ---------------------------------------------------------------------------
// certificate payload
// ---------------------------------------------------------------------------

/// Sampled multipliers supporting a candidate optimal threshold.  The
/// certificate is self-contained: it carries the instance it was built for,
/// so verification needs no extra context.
struct Certificate {
    CanonicalInstance instance;
    double alpha = 0.0;
    double e_star = 0.0;
    double theta_hat = 0.0;
    double theta_star = 0.0;
    double A = 0.0;             // weight on the marginal participating type
    std::vector<double> grid;   // type grid (uniform plus the two boundaries)
    std::vector<double> lambda;   // envelope multiplier
    std::vector<double> psi;      // participation multiplier (cumulative)
    std::vector<double> lambda1;  // (1-alpha) F + lambda + psi
    std::vector<double> q_grid;   // grid on [theta_hat, theta_upper]
    std::vector<double> q;        // stationarity functional on q_grid
    double q_at_hat = 0.0;        // includes the pooled-mass atom at theta_hat
    double pooled_mass = 0.0;     // lambda1 jump at theta_hat
    double lambda_at_upper = 0.0;
    int grid_size = 0;
};

struct CheckItem {
    std::string name;
    bool pass = true;
    double max_violation = 0.0;
    double location = 0.0;
};

struct CertificateReport {
    std::vector<CheckItem> items;
    bool pass = true;

    void add(std::string name, bool ok, double violation, double at) {
        pass = pass && ok;
        items.push_back({std::move(name), ok, violation, at});
    }
    const CheckItem* find(const std::string& name) const {
        for (const auto& it : items)
            if (it.name == name) return &it;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> make_grid(double lo, double hi, int n,
                                     std::initializer_list<double> extras) {
    std::vector<double> g;
    g.reserve(std::size_t(n) + extras.size());
    for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * double(i) / double(n - 1));
    for (double x : extras)
        if (x >= lo && x <= hi) g.push_back(x);
    std::sort(g.begin(), g.end());
    const double tol = 1e-14 * std::max(1.0, hi - lo);
    g.erase(std::unique(g.begin(), g.end(),
                        [tol](double a, double b) { return std::abs(a - b) <= tol; }),
            g.end());
    return g;
}

/// Suffix integral of the scheme: E(theta) = integral of e(s) ds over
/// [theta, theta_upper].
class SchemeSuffix {
  public:
    SchemeSuffix(const CanonicalInstance& inst, const policy::EmissionScheme& s)
        : inst_(inst), scheme_(s) {
        const std::size_t n = s.segments.size();
        suffix_.assign(n + 1, 0.0);
        for (std::size_t k = n; k-- > 0;)
            suffix_[k] = suffix_[k + 1] + segment_mass(k, s.segments[k].lo);
    }

    double operator()(double theta) const {
        const auto& segs = scheme_.segments;
        for (std::size_t k = 0; k < segs.size(); ++k) {
            const bool last = (k + 1 == segs.size());
            if (theta <= segs[k].hi || last)
                return segment_mass(k, std::max(theta, segs[k].lo)) + suffix_[k + 1];
        }
        return 0.0;
    }

  private:
    double segment_mass(std::size_t k, double from) const {
        const auto& seg = scheme_.segments[k];
        if (from >= seg.hi) return 0.0;
        if (seg.rule == policy::SegmentRule::Constant) return seg.value * (seg.hi - from);
        return quad::integrate(
            [&](double th) { return model::peak_emission(inst_, th); }, from, seg.hi, 32);
    }

    const CanonicalInstance& inst_;
    const policy::EmissionScheme& scheme_;
    std::vector<double> suffix_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// construction
// ---------------------------------------------------------------------------

/// Builds the multiplier certificate at a candidate (alpha, e_star).
/// Requires the first-order residual to be at most 1e-6; rejects degenerate
/// instances (a single type needs no screening certificate).
inline Certificate build_certificate(const CanonicalInstance& inst, double alpha, double e_star,
                                     int grid = 801) {
    if (inst.degenerate)
        throw std::invalid_argument("build_certificate: degenerate single-type instance");
    if (alpha < 0.0 || alpha > 1.0)
        throw std::domain_error("build_certificate: alpha must lie in [0, 1]");
    const threshold::FocResult foc = threshold::foc_residual(inst, e_star, alpha);
    if (std::abs(foc.residual) > 1e-6)
        throw std::invalid_argument(
            "build_certificate: candidate fails the first-order condition (residual " +
            std::to_string(foc.residual) + ", " + std::string(threshold::to_string(foc.foc_case)) +
            ")");

    Certificate c;
    c.instance = inst;
    c.alpha = alpha;
    c.e_star = e_star;
    c.grid_size = grid;

    const threshold::ThresholdBoundaries b = threshold::boundaries(inst, e_star);
    c.theta_hat = b.theta_hat;
    c.theta_star = b.theta_star;
    const double lo = inst.type_lower, hi = inst.type_upper;

    auto F = [&](double th) { return inst.cdf(th); };
    auto f = [&](double th) { return inst.pdf(th); };
    auto h = [&](double th) { return (1.0 - alpha) * F(th) + alpha * f(th); };

    // Weight on the marginal participating type, read off the stationarity
    // condition at theta_star.
    const double pe_star = inst.profit_e(c.theta_star, e_star);
    const double integral = quad::integrate_piecewise(
        [&](double th) {
            return (-alpha + (1.0 - alpha) * inst.profit_e(th, e_star)) * f(th);
        },
        c.theta_hat, c.theta_star, inst.density_knots(), 32);
    c.A = (std::abs(pe_star) > 1e-12) ? -integral / pe_star : 0.0;

    auto lambda_at = [&](double th) {
        if (th <= lo) return 0.0;
        if (th >= hi) return alpha * f(c.theta_star) - c.A;
        if (th < c.theta_hat) return alpha * f(th);
        if (th < c.theta_star) return h(c.theta_star) - (1.0 - alpha) * F(th);
        return alpha * f(th);
    };
    auto psi_at = [&](double th) {
        if (th >= hi) return (1.0 - alpha) * (F(c.theta_star) - 1.0) + c.A;
        if (th < c.theta_star) return 0.0;
        return h(c.theta_star) - h(th);
    };

    c.grid = detail::make_grid(lo, hi, grid, {c.theta_hat, c.theta_star});
    c.lambda.reserve(c.grid.size());
    c.psi.reserve(c.grid.size());
    c.lambda1.reserve(c.grid.size());
    for (double th : c.grid) {
        const double l = lambda_at(th);
        const double p = psi_at(th);
        c.lambda.push_back(l);
        c.psi.push_back(p);
        c.lambda1.push_back((1.0 - alpha) * F(th) + l + p);
    }
    c.lambda_at_upper = lambda_at(hi);
    c.pooled_mass = h(c.theta_star) - ((c.theta_hat > lo) ? h(c.theta_hat) : 0.0);

    // Stationarity functional Q on [theta_hat, theta_upper]: suffix integral
    // of (-alpha f + lambda) plus the pooled-mass atom at theta_hat.  The
    // cumulative multiplier is constant above theta_hat, so the measure part
    // contributes only at theta_hat itself.
    c.q_grid = detail::make_grid(c.theta_hat, hi, grid, {c.theta_star});
    const policy::EmissionScheme scheme = threshold::threshold_scheme(inst, e_star);
    auto smooth_q = [&](double th) {
        const double upper_cut = std::min(c.theta_star, hi);
        if (th >= upper_cut) return 0.0;  // integrand vanishes above theta_star
        return quad::integrate_piecewise(
            [&](double s) { return h(c.theta_star) - h(s); }, th, upper_cut,
            inst.density_knots(), 32);
    };
    c.q.reserve(c.q_grid.size());
    for (double th : c.q_grid) c.q.push_back(smooth_q(th));
    const double scheme_at_hat = scheme.evaluate(inst, c.theta_hat);
    c.q_at_hat =
        smooth_q(c.theta_hat) + inst.profit_e(c.theta_hat, scheme_at_hat) * c.pooled_mass;
    if (!c.q.empty()) c.q.front() = c.q_at_hat;
    return c;
}

// ---------------------------------------------------------------------------
// verification
// ---------------------------------------------------------------------------

/// Re-derives every optimality condition from the sampled multipliers and
/// the carried instance: monotonicity of the cumulative multipliers,
/// stationarity at both boundary types, maximality of Q at theta_hat,
/// complementary slackness of participation and envelope constraints, and
/// the bounds on the marginal-type weight.
inline CertificateReport verify_certificate(const Certificate& c, double tol_override = -1.0) {
    const CanonicalInstance& inst = c.instance;
    CertificateReport rep;
    const double mono_tol = tol_override >= 0.0 ? tol_override : 1e-8;
    const double stat_tol = tol_override >= 0.0 ? tol_override : 1e-7;
    const double slack_tol = tol_override >= 0.0 ? tol_override : 1e-6;

    const double lo = inst.type_lower, hi = inst.type_upper;
    const double alpha = c.alpha;
    auto F = [&](double th) { return inst.cdf(th); };
    auto f = [&](double th) { return inst.pdf(th); };
    auto h = [&](double th) { return (1.0 - alpha) * F(th) + alpha * f(th); };

    // 1-2: the cumulative multipliers must be nondecreasing.
    auto monotone = [&](const std::vector<double>& v, const char* name) {
        double worst = 0.0, at = lo;
        for (std::size_t i = 1; i < v.size(); ++i) {
            const double drop = v[i - 1] - v[i];
            if (drop > worst) {
                worst = drop;
                at = c.grid[i];
            }
        }
        rep.add(name, worst <= mono_tol, worst, at);
    };
    monotone(c.psi, "participation_multiplier_nondecreasing");
    monotone(c.lambda1, "cumulative_multiplier_nondecreasing");

    // 3: the pooled mass placed at theta_hat must be nonnegative.
    rep.add("pooled_mass_nonnegative", c.pooled_mass >= -mono_tol,
            std::max(0.0, -c.pooled_mass), c.theta_hat);

    // 4: stationarity at theta_star.
    double q_at_star = 0.0;
    for (std::size_t i = 0; i < c.q_grid.size(); ++i)
        if (std::abs(c.q_grid[i] - c.theta_star) <= 1e-12 * std::max(1.0, hi - lo))
            q_at_star = c.q[i];
    rep.add("stationarity_at_theta_star", std::abs(q_at_star) <= stat_tol,
            std::abs(q_at_star), c.theta_star);

    // 5: stationarity at theta_hat ties Q to the top type's envelope term.
    const policy::EmissionScheme scheme = threshold::threshold_scheme(inst, c.e_star);
    const double e_at_hat = scheme.evaluate(inst, c.theta_hat);
    const double e_at_top = scheme.evaluate(inst, hi);
    const double lhs = c.q_at_hat * e_at_hat;
    const double rhs = c.lambda_at_upper * inst.profit_e(hi, e_at_top) * e_at_top;
    rep.add("stationarity_at_theta_hat", std::abs(lhs - rhs) <= stat_tol, std::abs(lhs - rhs),
            c.theta_hat);

    // 6: Q peaks at theta_hat (no profitable pooling elsewhere).
    {
        double worst = 0.0, at = c.theta_hat;
        for (std::size_t i = 0; i < c.q.size(); ++i) {
            const double excess = c.q[i] - c.q_at_hat;
            if (excess > worst) {
                worst = excess;
                at = c.q_grid[i];
            }
        }
        rep.add("q_maximal_at_theta_hat", worst <= stat_tol, worst, at);
    }

    // 7: participation slackness: the participation multiplier only grows
    // where the constraint binds.
    {
        const double jump_at_top =
            ((1.0 - alpha) * (F(c.theta_star) - 1.0) + c.A) -
            (c.theta_star < hi ? h(c.theta_star) - h(hi) : 0.0);
        double total = quad::integrate_piecewise(
            [&](double th) {
                const double gap = inst.profit(th, scheme.evaluate(inst, th)) -
                                   inst.profit(th, inst.emission_cap);
                const double psi_density = -((1.0 - alpha) * f(th) + alpha * inst.density().pdf_prime(th));
                return gap * psi_density;
            },
            std::min(c.theta_star, hi), hi, inst.density_knots(), 32);
        total += (inst.profit(hi, e_at_top) - inst.profit(hi, inst.emission_cap)) * jump_at_top;
        rep.add("participation_slackness", std::abs(total) <= slack_tol, std::abs(total), hi);
    }

    // 8: envelope slackness: the payoff identity integrates to zero against
    // the envelope multiplier (atoms at the support ends and theta_hat plus
    // the smooth parts).
    {
        detail::SchemeSuffix E(inst, scheme);
        const double top_payoff = inst.profit(hi, e_at_top);
        auto resid = [&](double th) {
            return E(th) + inst.profit(th, scheme.evaluate(inst, th)) - top_payoff;
        };
        double total = 0.0;
        // atom at the bottom type
        const double lambda_bottom_plus =
            (c.theta_hat > lo) ? alpha * f(lo) : h(c.theta_star) - (1.0 - alpha) * F(lo);
        total += resid(lo) * lambda_bottom_plus;
        // smooth alpha f' below theta_hat
        total += quad::integrate_piecewise(
            [&](double th) { return resid(th) * alpha * inst.density().pdf_prime(th); }, lo,
            c.theta_hat, inst.density_knots(), 32);
        // atom at theta_hat
        if (c.theta_hat > lo) total += resid(c.theta_hat) * (h(c.theta_star) - h(c.theta_hat));
        // smooth -(1-alpha) f on the bunching interval
        total += quad::integrate_piecewise(
            [&](double th) { return resid(th) * -(1.0 - alpha) * f(th); }, c.theta_hat,
            c.theta_star, inst.density_knots(), 32);
        // smooth alpha f' above theta_star
        total += quad::integrate_piecewise(
            [&](double th) { return resid(th) * alpha * inst.density().pdf_prime(th); },
            std::min(c.theta_star, hi), hi, inst.density_knots(), 32);
        // atom at the top type
        const double lambda_top_minus = alpha * f(hi);
        total += resid(hi) * (c.lambda_at_upper - lambda_top_minus);
        rep.add("envelope_slackness", std::abs(total) <= slack_tol, std::abs(total), lo);
    }

    // 9: the marginal-type weight equals alpha f(theta_star) when the top
    // type still strictly prefers the threshold; otherwise it lies in
    // [0, alpha f(theta_star)].
    {
        const double cap_weight = alpha * f(c.theta_star);
        const double span_tol = 1e-9 * std::max(1.0, hi - lo);
        if (c.theta_star < hi - span_tol) {
            const double dev = std::abs(c.A - cap_weight);
            rep.add("marginal_type_weight", dev <= stat_tol * std::max(1.0, cap_weight), dev,
                    c.theta_star);
        } else {
            const double dev = std::max(std::max(-c.A, c.A - cap_weight), 0.0);
            rep.add("marginal_type_weight", dev <= stat_tol, dev, c.theta_star);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// peak checks
// ---------------------------------------------------------------------------

struct PeakChecksReport {
    bool range_pass = false;       // [theta_hat, theta_star] meets the score peak
    bool boundary_applicable = false;
    bool boundary_pass = true;     // score comparisons when a derivative vanishes
    double range_gap = 0.0;        // peak value shortfall inside the window
    double boundary_gap = 0.0;
    bool pass = false;
};

/// Grid checks relating the optimal window [theta_hat, theta_star] to the
/// peak of the weighted score, plus the boundary score inequalities that
/// hold wherever a one-sided welfare derivative vanishes.
inline PeakChecksReport peak_checks(const CanonicalInstance& inst, double alpha, double e_star,
                                    int grid = 801) {
    PeakChecksReport rep;
    if (inst.degenerate) {
        rep.range_pass = rep.boundary_pass = rep.pass = true;
        return rep;
    }
    const threshold::ThresholdBoundaries b = threshold::boundaries(inst, e_star);
    auto h = [&](double th) { return (1.0 - alpha) * inst.cdf(th) + alpha * inst.pdf(th); };

    const double lo = inst.type_lower, hi = inst.type_upper;
    double global_max = -std::numeric_limits<double>::infinity();
    double window_max = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i) {
        const double th = lo + (hi - lo) * double(i) / double(grid - 1);
        const double v = h(th);
        global_max = std::max(global_max, v);
        if (th >= b.theta_hat - 1e-12 && th <= b.theta_star + 1e-12)
            window_max = std::max(window_max, v);
    }
    window_max = std::max({window_max, h(b.theta_hat), h(b.theta_star)});
    const double scale = std::max(1.0, std::abs(global_max));
    rep.range_gap = std::max(0.0, global_max - window_max);
    rep.range_pass = rep.range_gap <= 1e-8 * scale;

    const double e_kink = model::participation_floor(inst, hi);
    const double ktol = 1e-10 * std::max(1.0, inst.emission_cap);
    auto check_side = [&](threshold::Side side) {
        if (side == threshold::Side::Right && e_star >= inst.emission_cap - 1e-15) return;
        double d;
        try {
            d = threshold::welfare_derivative(inst, e_star, alpha, side);
        } catch (const std::domain_error&) {
            return;
        }
        if (std::abs(d) > 1e-9) return;
        rep.boundary_applicable = true;
        const bool above = (side == threshold::Side::Left) ? (e_star > e_kink + ktol)
                                                           : (e_star >= e_kink - ktol);
        const double required = h(b.theta_hat) + (above ? alpha * inst.pdf(b.theta_star) : 0.0);
        const double gap = required - h(b.theta_star);
        if (gap > rep.boundary_gap) rep.boundary_gap = gap;
        if (gap > 1e-8 * scale) rep.boundary_pass = false;
    };
    check_side(threshold::Side::Left);
    check_side(threshold::Side::Right);
    rep.pass = rep.range_pass && rep.boundary_pass;
    return rep;
}

}  // namespace disclosure::certify
